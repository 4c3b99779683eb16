//! The JSON report envelope shared by every subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use mramsim_core::{MacroConfig, Residuals};

/// Reproducibility block: everything needed to judge and replay a run.
#[derive(Debug, Serialize)]
pub struct Provenance<'a> {
    /// Effective seed after flag/environment/config precedence.
    pub seed: u64,
    /// Crate version that produced the report.
    pub version: &'static str,
    /// Goodness-of-fit of the calibration in effect, when one is.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration_residuals: Option<&'a Residuals>,
}

/// Envelope written (pretty-printed JSON) to both stdout and
/// `<out-dir>/<subcommand>_report.json`.
///
/// The embedded `config` is the fully resolved one — seed precedence
/// applied and any calibration folded in — so re-running the same
/// subcommand with exactly this configuration reproduces `payload`
/// bit for bit.
#[derive(Debug, Serialize)]
pub struct RunReport<'a, P: Serialize> {
    pub tool: &'static str,
    pub subcommand: &'static str,
    pub config: &'a MacroConfig,
    pub payload: P,
    pub provenance: Provenance<'a>,
}

/// Builds the envelope around a payload.
pub fn wrap<'a, P: Serialize>(
    subcommand: &'static str,
    cfg: &'a MacroConfig,
    payload: P,
) -> RunReport<'a, P> {
    RunReport {
        tool: "mramsim",
        subcommand,
        config: cfg,
        payload,
        provenance: Provenance {
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION"),
            calibration_residuals: cfg.calibration.as_ref().map(|c| &c.residuals),
        },
    }
}

/// Serializes the report, writes it under `out_dir`, prints it to stdout,
/// and returns the written path.
pub fn emit<P: Serialize>(out_dir: &Path, report: &RunReport<'_, P>) -> Result<PathBuf> {
    let json = serde_json::to_string_pretty(report).context("serializing report")?;
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating directory {}", out_dir.display()))?;
    let stem = report.subcommand.replace('-', "_");
    let path = out_dir.join(format!("{stem}_report.json"));
    fs::write(&path, json.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
    println!("{json}");
    Ok(path)
}
