//! CSV emission: `# schema=1` header comment, `,` separators, `\n` line ends
//! and numbers rounded to 9 significant digits.

use std::fmt::Write;

pub const SCHEMA_LINE: &str = "# schema=1";

/// Formats `x` with 9 significant digits, plain notation for moderate magnitudes.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..=15).contains(&exp) {
        let rounded: f64 = sci.parse().expect("round trip");
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{rounded:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Accumulates rows under a fixed header.
#[derive(Debug, Clone)]
pub struct CsvTable {
    columns: usize,
    text: String,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut text = String::new();
        writeln!(text, "{SCHEMA_LINE}").unwrap();
        writeln!(text, "{}", header.join(",")).unwrap();
        Self {
            columns: header.len(),
            text,
        }
    }

    pub fn push(&mut self, fields: &[String]) {
        assert_eq!(
            fields.len(),
            self.columns,
            "row width must match the header"
        );
        writeln!(self.text, "{}", fields.join(",")).unwrap();
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }
}
