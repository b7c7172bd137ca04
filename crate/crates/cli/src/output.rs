//! Report and CSV writing.

use std::path::PathBuf;

use anyhow::Context;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::experiments::Outcome;

pub const SCHEMA_VERSION: u32 = 1;

/// Writes `<name>.report.json` and one `<name>.<table>.csv` per series;
/// returns the report path. No timings, so reruns are byte-identical.
pub fn write(cfg: &ExperimentConfig, outcome: &Outcome) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "name": cfg.name,
        "kind": cfg.experiment.kind(),
        "status": outcome.status,
        "exit_code": outcome.status.code(),
        "diagnostics": outcome.diagnostics,
        "tolerance": cfg.tol,
        "seed": cfg.seed,
        "result": outcome.result,
        "tables": outcome.tables.iter().map(|t| format!("{}.{}.csv", cfg.name, t.name)).collect::<Vec<_>>(),
    });
    let path = cfg.out_dir.join(format!("{}.report.json", cfg.name));
    std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    for table in &outcome.tables {
        let csv_path = cfg.out_dir.join(format!("{}.{}.csv", cfg.name, table.name));
        let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    Ok(path)
}
