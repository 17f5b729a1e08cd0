//! Plot-ready CSV output with fixed float formatting, and the ramp file
//! shared by `gate` and `gate-optimize`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use holotrap::feshbach::RampSegment;

/// Header of the ramp segment file.
pub const RAMP_HEADER: &str = "duration_s,B_gauss";

/// Formats a float with 12 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // Avoid "-0.00000000000e0" so reruns with a different sign of zero
        // still agree byte for byte.
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

/// Formats a probability, clamping rounding excursions into `[0, 1]`.
pub fn fmt_prob(p: f64) -> String {
    fmt_f64(p.clamp(0.0, 1.0))
}

/// In-memory CSV table: one header row, then rows of preformatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Renders a ramp in the segment-file format.
pub fn render_ramp(ramp: &[RampSegment]) -> String {
    let mut out = String::from(RAMP_HEADER);
    out.push('\n');
    for s in ramp {
        let _ = writeln!(out, "{},{}", fmt_f64(s.duration), fmt_f64(s.field));
    }
    out
}

/// Parses a ramp segment file: an optional header, then one
/// `duration_s,B_gauss` pair per line. Blank lines and `#` comments are
/// skipped.
pub fn parse_ramp(text: &str) -> Result<Vec<RampSegment>, String> {
    let mut ramp = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if ramp.is_empty() && line.replace(' ', "") == RAMP_HEADER {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(format!(
                "line {}: expected `duration_s,B_gauss`, got `{line}`",
                i + 1
            ));
        }
        let parse = |s: &str, what: &str| {
            s.parse::<f64>()
                .map_err(|_| format!("line {}: cannot read {what} from `{s}`", i + 1))
        };
        ramp.push(RampSegment {
            duration: parse(fields[0], "duration_s")?,
            field: parse(fields[1], "B_gauss")?,
        });
    }
    if ramp.is_empty() {
        return Err("ramp file has no segments".into());
    }
    Ok(ramp)
}

pub fn read_ramp(path: &Path) -> Result<Vec<RampSegment>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_ramp(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_f64(1.0), "1.00000000000e0");
        assert_eq!(fmt_f64(-0.0), "0.00000000000e0");
        assert_eq!(fmt_f64(123456.7890123456), "1.23456789012e5");
        assert_eq!(fmt_f64(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(fmt_prob(1.0 + 1e-15), "1.00000000000e0");
        assert_eq!(fmt_prob(-1e-18), "0.00000000000e0");
    }

    #[test]
    fn ramp_round_trip() {
        let ramp = vec![
            RampSegment {
                duration: 7.8125e-6,
                field: 685.8,
            },
            RampSegment {
                duration: 7.8125e-6,
                field: 684.968123457,
            },
        ];
        let parsed = parse_ramp(&render_ramp(&ramp)).unwrap();
        assert_eq!(parsed, ramp);
    }

    #[test]
    fn ramp_without_header_and_with_comments() {
        let r = parse_ramp("# a ramp\n1e-5, 685.5\n\n2e-5,686\n").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].field, 686.0);
        assert!(parse_ramp("1e-5\n").unwrap_err().contains("line 1"));
        assert!(parse_ramp("duration_s,B_gauss\n").is_err());
        assert!(parse_ramp("1e-5,abc\n").unwrap_err().contains("B_gauss"));
    }

    #[test]
    fn table_renders_header_and_rows() {
        let mut t = Table::new(["t[s]", "P[1]"]);
        t.push(vec![fmt_f64(0.0), fmt_prob(0.5)]);
        assert_eq!(t.render(), "t[s],P[1]\n0.00000000000e0,5.00000000000e-1\n");
        assert_eq!(t.len(), 1);
    }
}
