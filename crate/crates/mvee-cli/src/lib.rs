//! Library surface of the experiment harness, shared by the binary and
//! the acceptance suite.

pub mod commands;
pub mod csvfmt;
pub mod json;
pub mod parallel;
pub mod selftest;
