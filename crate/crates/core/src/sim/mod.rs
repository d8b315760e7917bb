//! Discrete-event engine: background traffic, flooding bursts, FAP and the
//! two routing schemes under comparison.

mod config;
mod engine;
mod event;
mod metrics;

pub use config::{AttackConfig, RoutingConfig, ScenarioConfig, Scheme, TrafficConfig};
pub use engine::Simulation;
pub use event::{Event, EventKind, EventQueue, Packet, PacketKind};
pub use metrics::{
    improvement_pct, write_fig6, write_fig7, write_pathsets, write_summary, AttackSample, Comparison, Conservation,
    MetricsReport, PathSetRecord, RunStats,
};

use crate::error::Result;

/// Run `cfg` under its configured scheme.
pub fn run(cfg: &ScenarioConfig) -> Result<MetricsReport> {
    let mut sim = Simulation::new(cfg)?;
    sim.run_to_end()?;
    Ok(sim.finish())
}

/// Run both schemes on the same seed, in parallel. `cfg.scheme` is ignored.
pub fn compare(cfg: &ScenarioConfig) -> Result<Comparison> {
    let with = |scheme| ScenarioConfig { scheme, ..cfg.clone() };
    let (fap, proposed) = (with(Scheme::FapOnly), with(Scheme::Proposed));
    let (fap_only, proposed) = std::thread::scope(|scope| {
        let handle = scope.spawn(|| run(&fap));
        let proposed = run(&proposed);
        (handle.join().expect("simulation thread panicked"), proposed)
    });
    Ok(Comparison {
        fap_only: fap_only?,
        proposed: proposed?,
    })
}
