//! Report and artifact emission: JSON reports, CSV trajectories, and
//! the run manifest with a config hash for reproducibility. The
//! manifest is the only artifact carrying a timestamp; everything else
//! is byte-reproducible for a fixed config and seed.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

/// Tolerance ladder echoed into every report.
pub fn ladder() -> serde_json::Value {
    json!({
        "algebraic": courant_core::tolerances::ALGEBRAIC,
        "fd_first": courant_core::tolerances::FD_FIRST,
        "fd_second": courant_core::tolerances::FD_SECOND,
    })
}

pub fn config_hash(description: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(description.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn print_report<T: Serialize>(report: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(report)?);
    Ok(())
}

pub fn write_report<T: Serialize>(out: Option<&Path>, report: &T) -> Result<()> {
    print_report(report)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let path = dir.join("report.json");
        fs::write(&path, serde_json::to_string_pretty(report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn write_manifest(out: Option<&Path>, command_line: &str, seed: u64) -> Result<()> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let manifest = json!({
            "config": command_line,
            "config_hash": config_hash(command_line),
            "seed": seed,
            "tolerances": ladder(),
            "timestamp_unix": SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        });
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)?,
        )?;
    }
    Ok(())
}

/// CSV with a fixed float format so reruns are byte-identical.
pub fn write_csv(out: &Path, file: &str, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    fs::create_dir_all(out)?;
    let path = out.join(file);
    let mut writer =
        csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(header)?;
    for row in rows {
        let rec: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        writer.write_record(&rec)?;
    }
    writer.flush()?;
    Ok(())
}
