use std::io::{self, Write};

use crate::energy::{Energy, EnergyLedger};
use crate::topology::NodeId;

use super::config::Scheme;

/// Energy bookkeeping at one metric sample. `initial == remaining + consumed`
/// whenever the ledger is consistent with the batteries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conservation {
    pub initial: Energy,
    pub remaining: Energy,
    pub consumed: Energy,
}

impl Conservation {
    pub fn holds(&self) -> bool {
        self.initial == self.remaining + self.consumed
    }
}

/// One row of the Fig 6 series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSample {
    /// 1-based.
    pub attack_index: u32,
    pub time_s: f64,
    /// Cumulative consumption of all sensors, base station excluded.
    pub cumulative_energy: Energy,
    pub conservation: Conservation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSetRecord {
    pub time_s: f64,
    pub source: NodeId,
    pub paths: Vec<Vec<NodeId>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    pub packets_sent: u64,
    pub delivered: u64,
    /// Dropped by a blacklist filter.
    pub filtered: u64,
    /// Lost to a depleted node or a failed route discovery.
    pub lost: u64,
    pub discoveries: u64,
    pub discovery_failures: u64,
    pub multipath_decisions: u64,
    /// Decisions by chosen path count, index 0 holding count 1.
    pub path_count_histogram: [u64; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scheme: Scheme,
    pub seed: u64,
    /// Seed of the placement actually used after redraws.
    pub field_seed: u64,
    pub config_hash: String,
    pub fig6: Vec<AttackSample>,
    /// Final residual energy of each node adjacent to the base station at the
    /// start of the run; depleted nodes report zero.
    pub fig7: Vec<(NodeId, Energy)>,
    pub depleted: Vec<(f64, NodeId)>,
    pub compromised: Vec<NodeId>,
    pub blacklist_events: Vec<(f64, NodeId)>,
    pub pathsets: Vec<PathSetRecord>,
    /// Largest number of false packets any single node forwarded, per burst.
    pub burst_max_forward: Vec<u32>,
    pub stats: RunStats,
    pub final_conservation: Conservation,
    pub ledger: EnergyLedger,
    pub notes: Vec<String>,
}

impl MetricsReport {
    pub fn depleted_count(&self) -> usize {
        self.depleted.len()
    }

    pub fn bs_adjacent_mean_residual_j(&self) -> f64 {
        if self.fig7.is_empty() {
            return 0.0;
        }
        let total: Energy = self.fig7.iter().map(|&(_, e)| e).sum();
        total.joules() / self.fig7.len() as f64
    }

    /// Total consumption of the sensors (base station excluded).
    pub fn sensor_consumption(&self) -> Energy {
        self.fig6.last().map_or(Energy::ZERO, |s| s.cumulative_energy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub fap_only: MetricsReport,
    pub proposed: MetricsReport,
}

impl Comparison {
    /// Relative gain of the proposed scheme in mean BS-adjacent residual energy.
    pub fn improvement_pct(&self) -> f64 {
        improvement_pct(
            self.fap_only.bs_adjacent_mean_residual_j(),
            self.proposed.bs_adjacent_mean_residual_j(),
        )
    }

    /// `depleted(fap-only) - depleted(proposed)`.
    pub fn depleted_difference(&self) -> i64 {
        self.fap_only.depleted_count() as i64 - self.proposed.depleted_count() as i64
    }

    pub fn reports(&self) -> [&MetricsReport; 2] {
        [&self.fap_only, &self.proposed]
    }
}

pub fn improvement_pct(baseline: f64, candidate: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        (candidate - baseline) / baseline * 100.0
    }
}

/// `attack_index,scheme,cumulative_energy_j`
pub fn write_fig6<W: Write>(mut out: W, reports: &[&MetricsReport]) -> io::Result<()> {
    writeln!(out, "attack_index,scheme,cumulative_energy_j")?;
    for r in reports {
        for s in &r.fig6 {
            writeln!(out, "{},{},{}", s.attack_index, r.scheme, s.cumulative_energy.display_joules())?;
        }
    }
    Ok(())
}

/// `node_id,scheme,residual_energy_j`
pub fn write_fig7<W: Write>(mut out: W, reports: &[&MetricsReport]) -> io::Result<()> {
    writeln!(out, "node_id,scheme,residual_energy_j")?;
    for r in reports {
        for (id, e) in &r.fig7 {
            writeln!(out, "{},{},{}", id, r.scheme, e.display_joules())?;
        }
    }
    Ok(())
}

/// `scheme,depleted_count,bs_adjacent_mean_residual_j,improvement_pct`.
/// The improvement column is left empty when there is nothing to compare.
pub fn write_summary<W: Write>(mut out: W, reports: &[&MetricsReport], improvement: Option<f64>) -> io::Result<()> {
    writeln!(out, "scheme,depleted_count,bs_adjacent_mean_residual_j,improvement_pct")?;
    for r in reports {
        let pct = match (improvement, r.scheme) {
            (Some(p), Scheme::Proposed) => format!("{p:.6}"),
            (Some(_), Scheme::FapOnly) => format!("{:.6}", 0.0),
            (None, _) => String::new(),
        };
        writeln!(
            out,
            "{},{},{:.9},{}",
            r.scheme,
            r.depleted_count(),
            r.bs_adjacent_mean_residual_j(),
            pct
        )?;
    }
    Ok(())
}

/// `event_time,src,path_index,node_sequence`
pub fn write_pathsets<W: Write>(mut out: W, report: &MetricsReport) -> io::Result<()> {
    writeln!(out, "{}", crate::routing::PATHSET_CSV_HEADER)?;
    for rec in &report.pathsets {
        crate::routing::PathSet::new(rec.paths.clone()).write_csv_rows(&mut out, rec.time_s, rec.source)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn improvement_examples() {
        assert!((improvement_pct(0.5, 0.55) - 10.0).abs() < 1e-9);
        assert_eq!(improvement_pct(0.5, 0.5), 0.0);
        assert_eq!(improvement_pct(0.0, 0.3), 0.0);
    }

    #[test]
    fn conservation_identity() {
        let c = Conservation {
            initial: Energy::from_nanojoules(10),
            remaining: Energy::from_nanojoules(7),
            consumed: Energy::from_nanojoules(3),
        };
        assert!(c.holds());
        assert!(!Conservation { consumed: Energy::from_nanojoules(2), ..c }.holds());
    }
}
