//! Deterministic report emission.
//!
//! All floating-point numerics are serialized with 17 significant digits
//! (`x.xxxxxxxxxxxxxxxxe±e`), which round-trips every finite f64 exactly, so
//! identical runs produce byte-identical output.

use crate::error::{Error, Result};
use crate::pipeline::ScanResult;

/// Canonical float rendering: 17 significant digits, scientific notation.
/// Valid as a JSON number.
pub fn fmt_f64(x: f64) -> String {
    debug_assert!(x.is_finite(), "reports never contain non-finite numbers");
    format!("{:.16e}", x)
}

/// JSON string escaping for the small fixed schemas emitted here.
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Reproducibility record attached to every CLI output: the exact command,
/// tool version, seed, input digests, and resolved parameter values.
#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    /// `(path, sha256-hex)` per input file.
    pub inputs: Vec<(String, String)>,
    /// Resolved `(name, value)` pairs, in insertion order.
    pub params: Vec<(String, String)>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\"command\":\"");
        out.push_str(&json_escape(&self.command));
        out.push_str("\",\"version\":\"");
        out.push_str(&json_escape(&self.version));
        out.push_str("\",\"seed\":");
        out.push_str(&self.seed.to_string());
        out.push_str(",\"inputs\":[");
        for (i, (path, digest)) in self.inputs.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"path\":\"{}\",\"sha256\":\"{}\"}}",
                json_escape(path),
                json_escape(digest)
            ));
        }
        out.push_str("],\"params\":{");
        for (i, (k, v)) in self.params.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\"{}\":\"{}\"", json_escape(k), json_escape(v)));
        }
        out.push_str("}}");
        out
    }
}

/// Full scan output: `{manifest, results:[{feature, lr_stat, sigma_hat_sq,
/// p_sqlr, p_ftest, clamped}]}`. `p_ftest` is `null` for joint (multi-feature)
/// tests where the single-coefficient baseline is undefined.
pub fn scan_to_json(manifest: &Manifest, scan: &ScanResult) -> String {
    let mut out = String::from("{\"manifest\":");
    out.push_str(&manifest.to_json());
    out.push_str(",\"results\":[");
    for (i, row) in scan.results.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!(
            "{{\"feature\":\"{}\",\"lr_stat\":{},\"sigma_hat_sq\":{},\"p_sqlr\":{},\"p_ftest\":{},\"clamped\":{}}}",
            json_escape(&row.feature),
            fmt_f64(row.lr_stat),
            fmt_f64(row.sigma_hat_sq),
            fmt_f64(row.p_sqlr),
            match row.p_ftest {
                Some(p) => fmt_f64(p),
                None => "null".to_string(),
            },
            row.clamped
        ));
    }
    out.push_str("]}");
    out
}

/// Aligned text table of a scan, one row per feature sorted by SQLR p-value.
pub fn scan_to_text(scan: &ScanResult) -> Result<String> {
    if scan.results.is_empty() {
        return Err(Error::InvalidConfig("scan produced no results".into()));
    }
    let mut rows = vec![vec![
        "Feature".to_string(),
        "SQLR p".to_string(),
        "F-test p".to_string(),
        "LR stat".to_string(),
    ]];
    for row in &scan.results {
        rows.push(vec![
            row.feature.clone(),
            format!("{:.3e}", row.p_sqlr),
            match row.p_ftest {
                Some(p) => format!("{:.3e}", p),
                None => "-".to_string(),
            },
            format!("{:.4}", row.lr_stat),
        ]);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                out.push_str("  ");
            }
            if c == 0 {
                out.push_str(&format!("{:<width$}", cell, width = widths[c]));
            } else {
                out.push_str(&format!("{:>width$}", cell, width = widths[c]));
            }
        }
        out.push('\n');
    }
    Ok(out)
}
