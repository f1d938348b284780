//! Number formatting, CSV tables and minimal SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::LabResult;

/// `printf("%.12g")`: 12 significant digits, trailing zeros stripped.
pub fn fmt_g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.11e}", x);
    let (mant, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (11 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV table with a header, rows of preformatted cells and `\n` line endings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    /// Numeric column `name`; cells that do not parse are skipped.
    pub fn column(&self, name: &str) -> Vec<Option<f64>> {
        match self.header.iter().position(|h| h == name) {
            Some(c) => self
                .rows
                .iter()
                .map(|r| r[c].parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Points `(x, y)` from two columns, dropping rows where either is missing.
    pub fn points(&self, x: &str, y: &str) -> Vec<(f64, f64)> {
        self.column(x)
            .into_iter()
            .zip(self.column(y))
            .filter_map(|(a, b)| Some((a?, b?)))
            .collect()
    }
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// A polyline with markers over labelled axes.
pub fn render_svg(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if points.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let (bx, by) = (MARGIN, H - MARGIN);
    let _ = writeln!(
        s,
        r#"<line x1="{bx}" y1="{by}" x2="{}" y2="{by}" stroke="black"/>"#,
        W - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line x1="{bx}" y1="{by}" x2="{bx}" y2="{MARGIN}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for (v, x, y, anchor) in [
        (x0, sx(x0), by + 15.0, "start"),
        (x1, sx(x1), by + 15.0, "end"),
        (y0, bx - 4.0, sy(y0), "end"),
        (y1, bx - 4.0, sy(y1) + 4.0, "end"),
    ] {
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="10" text-anchor="{anchor}">{}</text>"#,
            fmt_g12(v)
        );
    }
    if !points.is_empty() {
        let path: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        if points.len() <= 500 {
            for &(x, y) in points {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="steelblue"/>"#,
                    sx(x),
                    sy(y)
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Writes `name.csv` and a plot of column `y` against column `x` as `name.svg`.
pub fn write_table(
    dir: &Path,
    name: &str,
    table: &Table,
    x: &str,
    y: &str,
) -> LabResult<Vec<PathBuf>> {
    write_table_with(dir, name, table, (x, y), &table.points(x, y))
}

/// Like [`write_table`] with explicitly chosen plot points.
pub fn write_table_with(
    dir: &Path,
    name: &str,
    table: &Table,
    labels: (&str, &str),
    points: &[(f64, f64)],
) -> LabResult<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{name}.csv"));
    fs::write(&csv, table.to_csv())?;
    let svg = dir.join(format!("{name}.svg"));
    fs::write(&svg, render_svg(name, labels.0, labels.1, points))?;
    Ok(vec![csv, svg])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_matches_printf() {
        assert_eq!(fmt_g12(1.0), "1");
        assert_eq!(fmt_g12(0.1), "0.1");
        assert_eq!(fmt_g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g12(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_g12(123456789012.0), "123456789012");
        assert_eq!(fmt_g12(1234567890123.0), "1.23456789012e+12");
        assert_eq!(fmt_g12(0.0001), "0.0001");
        assert_eq!(fmt_g12(0.00001234), "1.234e-05");
        assert_eq!(fmt_g12(-2.5e-300), "-2.5e-300");
        assert_eq!(fmt_g12(999999999999.5), "1e+12");
    }

    #[test]
    fn table_points_skip_sentinels() {
        let mut t = Table::new(&["k", "v"]);
        t.push(vec!["1".into(), "0.5".into()]);
        t.push(vec!["2".into(), "nan".into()]);
        assert_eq!(t.points("k", "v"), vec![(1.0, 0.5)]);
        assert_eq!(t.to_csv(), "k,v\n1,0.5\n2,nan\n");
    }
}
