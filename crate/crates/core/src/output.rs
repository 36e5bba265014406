//! CSV/JSON emission and run manifests.
//!
//! Every float in a CSV is written with 17 significant digits in scientific
//! notation, enough to round-trip an f64 exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic::{QGrid, SqueezeSeries};
use crate::error::Result;
use crate::params::DerivedParams;

pub const SQUEEZE_HEADER: &str = "omega_sw_over_omega_r,tau,s_q,s_p";
pub const QFUNC_HEADER: &str = "gamma_re,gamma_im,q";

/// 17 significant digits, e.g. `-4.4126227993146160e-1`.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_row(buf: &mut String, row: &[f64]) {
    for (k, x) in row.iter().enumerate() {
        if k > 0 {
            buf.push(',');
        }
        buf.push_str(&sci(*x));
    }
    buf.push('\n');
}

/// Rows ordered by (ω_sw, τ) in the order given.
pub fn squeeze_csv(series: &[SqueezeSeries]) -> String {
    let mut buf = String::with_capacity(64 * series.iter().map(|s| s.tau.len()).sum::<usize>());
    let _ = writeln!(buf, "{SQUEEZE_HEADER}");
    for s in series {
        for k in 0..s.tau.len() {
            push_row(&mut buf, &[s.omega_sw_over_omega_r, s.tau[k], s.s_q[k], s.s_p[k]]);
        }
    }
    buf
}

/// Row-major over the grid, γ_R slow.
pub fn qfunc_csv(q: &QGrid) -> String {
    let mut buf = String::with_capacity(64 * q.values.len());
    let _ = writeln!(buf, "{QFUNC_HEADER}");
    for (k, v) in q.values.iter().enumerate() {
        let g = q.grid.gamma(k);
        push_row(&mut buf, &[g.re, g.im, *v]);
    }
    buf
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// `<out>.manifest.json` next to the output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Provenance of one output file. Re-running `command` with `args` on the
/// same config reproduces the output byte for byte; only `timestamp` differs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config_path: Option<PathBuf>,
    pub params: Vec<DerivedParams>,
    pub cutoffs: BTreeMap<String, usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub outputs: Vec<PathBuf>,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, config_path: Option<PathBuf>) -> Self {
        RunManifest {
            command: command.to_string(),
            args,
            config_path,
            params: Vec::new(),
            cutoffs: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// Writes `contents` to `path` and the manifest beside it.
pub fn write_with_manifest(path: &Path, contents: &str, manifest: &mut RunManifest) -> Result<PathBuf> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    manifest.outputs = vec![path.to_path_buf()];
    let mpath = manifest_path(path);
    fs::write(&mpath, to_json(manifest)?)?;
    Ok(mpath)
}
