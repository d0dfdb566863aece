//! CSV output: comma-separated, header row, '.' decimal separator,
//! 12 significant digits.

use std::fmt::Write as _;

pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // 12 significant digits without trailing noise
    let s = format!("{x:.11e}");
    // normalize "1.20000000000e2" style to a plain decimal where short
    let parsed: f64 = s.parse().unwrap_or(x);
    let plain = format!("{parsed}");
    if plain.len() <= s.len() && plain.parse::<f64>() == Ok(parsed) {
        plain
    } else {
        s
    }
}

pub struct CsvWriter {
    out: String,
    columns: usize,
}

impl CsvWriter {
    pub fn new(header: &[&str]) -> Self {
        let mut out = String::new();
        let _ = writeln!(out, "{}", header.join(","));
        CsvWriter { out, columns: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "csv row width");
        let _ = writeln!(self.out, "{}", cells.join(","));
    }

    pub fn finish(self) -> String {
        self.out
    }
}
