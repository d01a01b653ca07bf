//! CSV rendering: number formatting, the manifest header and row assembly.

use std::path::PathBuf;

/// `%.17g`: 17 significant digits, trailing zeros trimmed, C-style exponent.
/// Non-finite values render as `NA`; negative zero renders as `0`.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return "NA".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&e) {
        trim_fraction(format!("{:.*}", (16 - e) as usize, x))
    } else {
        let sign = if e < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa.to_string()), e.abs())
    }
}

fn trim_fraction(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Correlation in integer percent.
pub fn fmt_pct(x: f64) -> String {
    if !x.is_finite() {
        return "NA".into();
    }
    let v = (100.0 * x).round();
    format!("{}", if v == 0.0 { 0.0 } else { v })
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), fmt_num)
}

/// Makes a free-text label safe for an unquoted CSV cell.
pub fn cell(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

/// Header embedded at the top of every output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    /// Resolved flags in canonical order, as `(name, value)`; an empty value
    /// marks a boolean switch.
    pub params: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub version: String,
    pub output: Option<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            params: Vec::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").into(),
            output: None,
        }
    }

    pub fn param(&mut self, name: &str, value: impl Into<String>) {
        self.params.push((name.into(), value.into()));
    }

    /// Command line that reproduces the output.
    pub fn args(&self) -> Vec<String> {
        let mut out = vec![self.command.clone()];
        for (k, v) in &self.params {
            out.push(format!("--{k}"));
            if !v.is_empty() {
                out.push(v.clone());
            }
        }
        if let Some(path) = &self.output {
            out.push("--output".into());
            out.push(path.display().to_string());
        }
        out
    }

    pub fn header(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# qdcorr {}\n", self.version));
        s.push_str(&format!("# command: {}\n", self.command));
        s.push_str(&format!("# args: {}\n", self.args().join(" ")));
        s.push_str(&format!(
            "# seed: {}\n",
            self.seed.map_or_else(|| "none".to_string(), |x| x.to_string())
        ));
        s.push_str(&format!(
            "# output: {}\n",
            self.output.as_ref().map_or_else(|| "-".to_string(), |p| p.display().to_string())
        ));
        s
    }

    /// Recovers the argument vector from a rendered file.
    pub fn parse_args(text: &str) -> Option<Vec<String>> {
        text.lines()
            .take_while(|l| l.starts_with('#'))
            .find_map(|l| l.strip_prefix("# args: "))
            .map(|a| a.split(' ').map(str::to_string).collect())
    }
}

/// CSV document: manifest header, column names, rows.
pub struct Table {
    manifest: RunManifest,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(manifest: RunManifest, columns: Vec<&'static str>) -> Self {
        Self { manifest, columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.manifest.header();
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn output(&self) -> Option<&PathBuf> {
        self.manifest.output.as_ref()
    }
}

pub fn join_nums<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}
