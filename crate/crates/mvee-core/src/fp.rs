//! Float math routed through `std` or `libm` depending on the build.

#![allow(dead_code)]

macro_rules! route {
    ($($name:ident => $libm:ident),* $(,)?) => {
        $(
            #[cfg(feature = "std")]
            #[inline(always)]
            pub fn $name(x: f64) -> f64 { x.$name() }
            #[cfg(not(feature = "std"))]
            #[inline(always)]
            pub fn $name(x: f64) -> f64 { libm::$libm(x) }
        )*
    };
}

route! {
    sqrt => sqrt,
    ln => log,
    exp => exp,
    abs => fabs,
    cos => cos,
    sin => sin,
    floor => floor,
    round => round,
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn powf(x: f64, y: f64) -> f64 {
    x.powf(y)
}
#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn atan2(y: f64, x: f64) -> f64 {
    y.atan2(x)
}
#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline(always)]
pub fn powi(x: f64, n: i32) -> f64 {
    powf(x, n as f64)
}

#[inline(always)]
pub fn hypot2(x: f64, y: f64) -> f64 {
    sqrt(x * x + y * y)
}
