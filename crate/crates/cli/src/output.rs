use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fapsim_core::fap::write_blacklist_csv;
use fapsim_core::sim::{write_fig6, write_fig7, write_pathsets, write_summary, Comparison, MetricsReport};
use fapsim_core::ScenarioConfig;
use serde_json::Value;

use crate::CliError;

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Output(format!("cannot write `{}`: {e}", path.display())))
}

fn csv(dir: &Path, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    fill(&mut buf).expect("writing to memory");
    write_file(&dir.join(name), &buf)
}

pub fn write_run(dir: &Path, cfg: &ScenarioConfig, raw: &Value, report: &MetricsReport, ledger: bool) -> Result<(), CliError> {
    let reports = [report];
    csv(dir, "fig6.csv", |b| write_fig6(b, &reports))?;
    csv(dir, "fig7.csv", |b| write_fig7(b, &reports))?;
    csv(dir, "summary.csv", |b| write_summary(b, &reports, None))?;
    write_extras(dir, report, "", ledger)?;
    write_file(&dir.join("run.log"), run_log("run", cfg, raw, &reports, None).as_bytes())
}

pub fn write_compare(dir: &Path, cfg: &ScenarioConfig, raw: &Value, c: &Comparison, ledger: bool) -> Result<(), CliError> {
    let reports = c.reports();
    let pct = c.improvement_pct();
    csv(dir, "fig6.csv", |b| write_fig6(b, &reports))?;
    csv(dir, "fig7.csv", |b| write_fig7(b, &reports))?;
    csv(dir, "summary.csv", |b| write_summary(b, &reports, Some(pct)))?;
    for r in reports {
        write_extras(dir, r, &format!("_{}", r.scheme), ledger)?;
    }
    let log = run_log("compare", cfg, raw, &reports, Some(c));
    write_file(&dir.join("run.log"), log.as_bytes())
}

fn write_extras(dir: &Path, r: &MetricsReport, suffix: &str, ledger: bool) -> Result<(), CliError> {
    csv(dir, &format!("pathsets{suffix}.csv"), |b| write_pathsets(b, r))?;
    csv(dir, &format!("blacklist{suffix}.csv"), |b| write_blacklist_csv(b, &r.blacklist_events))?;
    if ledger {
        csv(dir, &format!("ledger{suffix}.csv"), |b| r.ledger.write_csv(b))?;
    }
    Ok(())
}

fn run_log(command: &str, cfg: &ScenarioConfig, raw: &Value, reports: &[&MetricsReport], c: Option<&Comparison>) -> String {
    let mut log = String::new();
    let first = reports[0];
    let _ = writeln!(log, "fapsim {command}");
    let _ = writeln!(log, "seed: {}", cfg.seed);
    let _ = writeln!(log, "field seed: {}", first.field_seed);
    let _ = writeln!(log, "config hash: {}", first.config_hash);
    let effective = serde_json::to_value(cfg).expect("config serializes");
    let mut defaults = Vec::new();
    defaulted(raw, &effective, "", &mut defaults);
    let _ = writeln!(log, "defaults used:");
    if defaults.is_empty() {
        let _ = writeln!(log, "  (none)");
    }
    for (path, value) in defaults {
        let _ = writeln!(log, "  {path} = {value}");
    }
    let _ = writeln!(log, "effective config:");
    let _ = writeln!(log, "{}", cfg.to_json());
    for r in reports {
        let _ = writeln!(log, "[{}]", r.scheme);
        for note in &r.notes {
            let _ = writeln!(log, "  {note}");
        }
        let s = &r.stats;
        let _ = writeln!(
            log,
            "  packets sent {} delivered {} filtered {} lost {}",
            s.packets_sent, s.delivered, s.filtered, s.lost
        );
        let _ = writeln!(
            log,
            "  route discoveries {} (failed {}), multipath decisions {} by path count {:?}",
            s.discoveries, s.discovery_failures, s.multipath_decisions, s.path_count_histogram
        );
        let _ = writeln!(log, "  sensor energy consumed {} J", r.sensor_consumption().display_joules());
        let _ = writeln!(log, "  depleted nodes {}", r.depleted_count());
        let _ = writeln!(log, "  bs-adjacent mean residual {:.9} J", r.bs_adjacent_mean_residual_j());
        let conserved = r.fig6.iter().all(|x| x.conservation.holds()) && r.final_conservation.holds();
        let _ = writeln!(log, "  ledger conservation {}", if conserved { "holds" } else { "VIOLATED" });
    }
    if let Some(c) = c {
        let _ = writeln!(log, "improvement: {:.6} %", c.improvement_pct());
        let _ = writeln!(log, "depleted difference (fap-only - proposed): {}", c.depleted_difference());
    }
    log
}

/// Leaf paths present in `effective` but absent from `raw`.
fn defaulted(raw: &Value, effective: &Value, prefix: &str, out: &mut Vec<(String, String)>) {
    let Value::Object(map) = effective else { return };
    for (key, value) in map {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match raw.get(key) {
            Some(given) => defaulted(given, value, &path, out),
            None => match value {
                Value::Object(_) => defaulted(&Value::Null, value, &path, out),
                leaf => out.push((path, leaf.to_string())),
            },
        }
    }
}
