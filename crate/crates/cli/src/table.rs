//! Table and CSV emission.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown output format '{other}' (table or csv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(i64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "pass" } else { "FAIL" }.into())
    }
}

/// `v` with `digits` significant digits; scientific outside `[1e-4, 1e15)`.
pub fn format_sig(v: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let mag = v.abs().log10().floor() as i64;
    if !(-4..15).contains(&mag) {
        return format!("{:.*e}", digits - 1, v);
    }
    let decimals = (digits as i64 - 1 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // rounding can carry into a new leading digit (9.99995 -> 10.0000)
    let shown = s.trim_start_matches('-').replace('.', "");
    let sig = shown.trim_start_matches('0').len();
    if sig > digits && decimals > 0 {
        format!("{:.*}", decimals - 1, v)
    } else {
        s
    }
}

fn render(cell: &Cell, precision: usize) -> String {
    match cell {
        Cell::Text(s) => s.clone(),
        Cell::Num(v) => format_sig(*v, precision),
        Cell::Int(v) => v.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.starts_with(' ') || s.ends_with(' ') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders `rows` under `schema`; every output line ends in `\n`.
pub fn emit_table(schema: &[&str], rows: &[Vec<Cell>], format: Format, precision: usize) -> Result<String, String> {
    if let Some(bad) = rows.iter().position(|r| r.len() != schema.len()) {
        return Err(format!(
            "row {bad} has {} cells, schema has {}",
            rows[bad].len(),
            schema.len()
        ));
    }
    let text: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(|c| render(c, precision)).collect())
        .collect();
    let mut out = String::new();
    match format {
        Format::Csv => {
            let header: Vec<String> = schema.iter().map(|h| csv_field(h)).collect();
            out.push_str(&header.join(","));
            out.push('\n');
            for r in &text {
                let line: Vec<String> = r.iter().map(|c| csv_field(c)).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
        Format::Table => {
            let mut widths: Vec<usize> = schema.iter().map(|h| h.chars().count()).collect();
            for r in &text {
                for (w, c) in widths.iter_mut().zip(r) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let line = |cells: Vec<(&str, bool)>| -> String {
                let mut s = String::new();
                for (k, ((c, right), w)) in cells.into_iter().zip(&widths).enumerate() {
                    if k > 0 {
                        s.push_str("  ");
                    }
                    if right {
                        let _ = write!(s, "{c:>w$}");
                    } else {
                        let _ = write!(s, "{c:<w$}");
                    }
                }
                s.trim_end().to_string()
            };
            out.push_str(&line(schema.iter().map(|h| (*h, false)).collect()));
            out.push('\n');
            out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
            out.push('\n');
            for (r, cells) in text.iter().zip(rows) {
                let pairs = r
                    .iter()
                    .zip(cells)
                    .map(|(s, c)| (s.as_str(), !matches!(c, Cell::Text(_))))
                    .collect();
                out.push_str(&line(pairs));
                out.push('\n');
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(1.48160, 4), "1.482");
        assert_eq!(format_sig(1.48160, 5), "1.4816");
        assert_eq!(format_sig(1.0, 6), "1.00000");
        assert_eq!(format_sig(0.000123456, 3), "0.000123");
        assert_eq!(format_sig(9.99995, 5), "10.000");
        assert_eq!(format_sig(-2.5e-7, 2), "-2.5e-7");
        assert_eq!(format_sig(123456.0, 3), "123456");
    }

    #[test]
    fn csv_shapes() {
        let one = emit_table(&["a", "b"], &[vec![Cell::from("x,y"), Cell::from(0.5)]], Format::Csv, 6).unwrap();
        assert_eq!(one, "a,b\n\"x,y\",0.500000\n");
        assert_eq!(emit_table(&["a"], &[], Format::Csv, 6).unwrap(), "a\n");
        let q = emit_table(&["q"], &[vec![Cell::from("say \"hi\"")]], Format::Csv, 6).unwrap();
        assert_eq!(q, "q\n\"say \"\"hi\"\"\"\n");
    }

    #[test]
    fn table_aligns_numbers_right() {
        let t = emit_table(
            &["leg", "z"],
            &[vec![1usize.into(), 1.5.into()], vec![10usize.into(), 0.25.into()]],
            Format::Table,
            3,
        )
        .unwrap();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[2].ends_with("1.50") && lines[3].ends_with("0.250"));
        assert!(emit_table(&["a"], &[vec![]], Format::Table, 3).is_err());
    }
}
