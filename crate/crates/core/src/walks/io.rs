use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DecoupledSample;
use crate::error::Result;
use crate::tails::{Regime, TailModel};

/// Columns `n,S_hat,running_max`, one row per index.
pub fn write_path_csv<W: Write>(out: &mut W, walk: &DecoupledSample) -> Result<()> {
    writeln!(out, "n,S_hat,running_max")?;
    for (i, (s, m)) in walk.values.iter().zip(walk.running_max()).enumerate() {
        writeln!(out, "{},{},{}", i + 1, s, m)?;
    }
    Ok(())
}

/// Sidecar describing an ensemble dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub statistic: String,
    pub model: TailModel,
    pub regime: Regime,
    pub v: f64,
    pub t: f64,
    pub seed: u64,
    pub n: u64,
    pub cap_count: u64,
}

/// Writes one value per line to `path` and the metadata to `path` with a
/// `.json` extension.
pub fn write_ensemble(path: &Path, values: &[f64], meta: &EnsembleMeta) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for x in values {
        writeln!(out, "{x}")?;
    }
    out.flush()?;
    let sidecar = path.with_extension("json");
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    std::fs::write(sidecar, text)?;
    Ok(())
}
