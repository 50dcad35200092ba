//! Locale-free number formatting and the flat `key = value` output document.

use std::fmt::Write as _;

/// Significant digits used in CSV output.
pub const CSV_DIGITS: usize = 12;

/// Format like C's `%.{digits}g`: shortest of fixed or exponent notation,
/// trailing zeros removed.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `%.12g`, the CSV cell format.
pub fn fmt_csv(x: f64) -> String {
    fmt_sig(x, CSV_DIGITS)
}

/// Ordered `key = value` lines. Floats use the shortest round-trip form.
#[derive(Debug, Default, Clone)]
pub struct KvDoc {
    lines: Vec<(String, String)>,
}

impl KvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(&mut self, key: impl Into<String>, v: f64) -> &mut Self {
        self.lines.push((key.into(), format!("{v:?}")));
        self
    }

    pub fn opt(&mut self, key: impl Into<String>, v: Option<f64>) -> &mut Self {
        match v {
            Some(v) => self.num(key, v),
            None => self.text(key, ""),
        }
    }

    pub fn text(&mut self, key: impl Into<String>, v: impl std::fmt::Display) -> &mut Self {
        self.lines.push((key.into(), v.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            if v.is_empty() {
                let _ = writeln!(out, "{k} =");
            } else {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }
}
