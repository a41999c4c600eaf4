//! Writing a table and its JSON sidecar.

use crate::commands::{Command, Outcome};
use crate::config::RunConfig;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// The sidecar document: resolved config, versions, timings and summary.
pub fn sidecar(cmd: Command, cfg: &RunConfig, outcome: &Outcome, seconds: f64) -> serde_json::Value {
    json!({
        "command": cmd.name(),
        "config": cfg.to_json(),
        "versions": {
            "bsweak": env!("CARGO_PKG_VERSION"),
            "sample_plan": bsweak_core::specfun::SamplePlan::VERSION,
        },
        "timings": {"total_seconds": seconds},
        "exit_code": outcome.exit as i32,
        "summary": outcome.summary,
    })
}

/// Writes the table to `cfg.output.path` and the sidecar next to it, or the
/// table alone to stdout when no path is set.
pub fn emit(cmd: Command, cfg: &RunConfig, outcome: &Outcome, seconds: f64) -> std::io::Result<()> {
    let body = outcome.table.render(cfg.output.format);
    match &cfg.output.path {
        Some(p) => {
            let mut side = serde_json::to_string_pretty(&sidecar(cmd, cfg, outcome, seconds))?;
            side.push('\n');
            std::fs::write(p, body)?;
            std::fs::write(sidecar_path(p), side)?;
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
        }
    }
    Ok(())
}
