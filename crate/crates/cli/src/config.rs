//! Flat `section.key = value` run configuration.

use std::collections::BTreeMap;
use std::path::Path;

use crate::table::Format;

/// Model and output settings after merging the config file and flags.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub p: Option<Vec<f64>>,
    pub r: Option<f64>,
    pub characteristics: Option<String>,
    /// Extra arguments used when the command line names no subcommand.
    pub command: Option<Vec<String>>,
    pub format: Option<Format>,
    pub path: Option<String>,
    pub precision: Option<usize>,
}

impl RunConfig {
    /// `other` wins wherever it is set.
    pub fn overridden_by(self, other: RunConfig) -> RunConfig {
        RunConfig {
            n: other.n.or(self.n),
            p: other.p.or(self.p),
            r: other.r.or(self.r),
            characteristics: other.characteristics.or(self.characteristics),
            command: other.command.or(self.command),
            format: other.format.or(self.format),
            path: other.path.or(self.path),
            precision: other.precision.or(self.precision),
        }
    }

    /// Leg count and probabilities: uniform when only `n` is given, and an
    /// error when `n` and `p` disagree.
    pub fn legs(&self) -> Result<(usize, Vec<f64>), String> {
        match (&self.n, &self.p) {
            (Some(n), Some(p)) if *n != p.len() => Err(format!("--n {n} conflicts with {} probabilities", p.len())),
            (_, Some(p)) => Ok((p.len(), p.clone())),
            (Some(n), None) if *n >= 1 => Ok((*n, vec![1.0 / *n as f64; *n])),
            (Some(_), None) => Err("need at least one leg".into()),
            (None, None) => Ok((3, vec![1.0 / 3.0; 3])),
        }
    }
}

/// Parses `a` or `a/b`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad number '{s}'"))?;
            if b == 0.0 {
                return Err(format!("zero denominator in '{s}'"));
            }
            a / b
        }
        None => s.parse().map_err(|_| format!("bad number '{s}'"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("bad number '{s}'"))
    }
}

/// Comma-separated numbers, fractions allowed.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_number).collect()
}

/// Leg probabilities; must sum to 1 within `1e-12`.
pub fn parse_probabilities(s: &str) -> Result<Vec<f64>, String> {
    let p = parse_list(s)?;
    if p.is_empty() || p.iter().any(|v| *v <= 0.0) {
        return Err(format!("probabilities must be positive: '{s}'"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(format!("probabilities sum to {total}, not 1"));
    }
    Ok(p)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, String> {
    let mut kv = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("line {}: expected key=value", no + 1));
        };
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let mut cfg = RunConfig::default();
    for (k, v) in kv {
        let bad = |e: String| format!("{k}: {e}");
        match k.as_str() {
            "model.n" => cfg.n = Some(v.parse().map_err(|_| bad(format!("bad leg count '{v}'")))?),
            "model.p" => cfg.p = Some(parse_probabilities(&v).map_err(bad)?),
            "model.r" => cfg.r = Some(parse_number(&v).map_err(bad)?),
            "model.characteristics" => cfg.characteristics = Some(v),
            "command.args" => cfg.command = Some(v.split_whitespace().map(String::from).collect()),
            "output.format" => cfg.format = Some(v.parse().map_err(bad)?),
            "output.path" => cfg.path = Some(v),
            "output.precision" => cfg.precision = Some(v.parse().map_err(|_| bad(format!("bad precision '{v}'")))?),
            _ => return Err(format!("unknown config key '{k}'")),
        }
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_sum_exactly() {
        let p = parse_probabilities("1/3, 1/3, 1/3").unwrap();
        assert_eq!(p.len(), 3);
        assert!(parse_probabilities("0.3,0.3,0.3").is_err());
        assert!(parse_probabilities("1/0,1").is_err());
        assert!(parse_probabilities("a,b").is_err());
    }

    #[test]
    fn file_then_flags() {
        let file = parse_config_str("# model\nmodel.n = 2\nmodel.r = 1/2\noutput.format = csv\n").unwrap();
        assert_eq!(file.r, Some(0.5));
        let flags = RunConfig {
            r: Some(2.0),
            ..Default::default()
        };
        let merged = file.overridden_by(flags);
        assert_eq!(
            (merged.n, merged.r, merged.format),
            (Some(2), Some(2.0), Some(Format::Csv))
        );
        assert_eq!(merged.legs().unwrap().1, vec![0.5, 0.5]);
        assert!(parse_config_str("model.q = 1").is_err());
        assert!(parse_config_str("model.n").is_err());
    }

    #[test]
    fn conflicting_leg_counts() {
        let cfg = RunConfig {
            n: Some(2),
            p: Some(vec![0.5, 0.25, 0.25]),
            ..Default::default()
        };
        assert!(cfg.legs().is_err());
    }
}
