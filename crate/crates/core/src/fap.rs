//! Flooding attack prevention: base-station detection by source id and
//! creation time, a network-wide blacklist flood, and per-node filtering.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::energy::{EnergyLedger, RadioCosts};
use crate::error::{Error, Result};
use crate::routing::{flood, FloodKind, FloodOutcome};
use crate::topology::{Field, NodeId, SensorNode};

const RATE_RREQ_ROWS_PER_NEIGHBOR: usize = 16;

/// Recent RREQ times per neighbour, oldest first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RateRreqTable {
    rows: BTreeMap<NodeId, VecDeque<f64>>,
}

impl RateRreqTable {
    pub fn record(&mut self, neighbor: NodeId, time: f64) {
        let row = self.rows.entry(neighbor).or_default();
        let t = row.back().map_or(time, |&last| time.max(last));
        row.push_back(t);
        if row.len() > RATE_RREQ_ROWS_PER_NEIGHBOR {
            row.pop_front();
        }
    }

    pub fn times(&self, neighbor: NodeId) -> impl Iterator<Item = f64> + '_ {
        self.rows.get(&neighbor).into_iter().flatten().copied()
    }

    /// Number of (neighbour, time) rows held.
    pub fn len(&self) -> usize {
        self.rows.values().map(VecDeque::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BlacklistTable {
    ids: BTreeSet<NodeId>,
}

impl BlacklistTable {
    pub fn insert(&mut self, id: NodeId) -> bool {
        self.ids.insert(id)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.ids.contains(&id)
    }

    pub fn ids(&self) -> &BTreeSet<NodeId> {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionParams {
    pub window_s: f64,
    /// A source is flagged with strictly more than this many packets in the window.
    pub threshold: u32,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            window_s: 1.0,
            threshold: 5,
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_s.is_finite() && self.window_s > 0.0) {
            return Err(Error::config("detection.window_s", "must be positive"));
        }
        if self.threshold < 1 {
            return Err(Error::config("detection.threshold", "must be at least 1"));
        }
        Ok(())
    }
}

/// (source, creation time) pairs seen at the base station inside the window.
#[derive(Debug, Clone, PartialEq)]
pub struct BsPacketLog {
    window_s: f64,
    entries: VecDeque<(NodeId, f64)>,
}

impl BsPacketLog {
    pub fn new(window_s: f64) -> Self {
        BsPacketLog {
            window_s,
            entries: VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn record_arrival(&mut self, source: NodeId, created_at: f64, now: f64) -> Result<()> {
        if created_at > now {
            return Err(Error::ClockViolation { created_at, now });
        }
        self.entries.push_back((source, created_at));
        let horizon = now - self.window_s;
        self.entries.retain(|&(_, t)| t >= horizon);
        Ok(())
    }
}

/// Sources with more than `threshold` logged packets whose creation times
/// span at most one window.
pub fn detect_flooding(log: &BsPacketLog, params: &DetectionParams) -> Vec<NodeId> {
    let mut per_source: BTreeMap<NodeId, (u32, f64, f64)> = BTreeMap::new();
    for (src, t) in log.entries() {
        let e = per_source.entry(src).or_insert((0, t, t));
        e.0 += 1;
        e.1 = e.1.min(t);
        e.2 = e.2.max(t);
    }
    per_source
        .into_iter()
        .filter(|(_, (count, lo, hi))| *count > params.threshold && hi - lo <= params.window_s)
        .map(|(src, _)| src)
        .collect()
}

/// Flood the blacklist from the base station and return who heard it at what
/// depth. Tables are not updated; see [`install_blacklist`].
pub fn flood_blacklist(
    field: &mut Field,
    ledger: &mut EnergyLedger,
    costs: &RadioCosts,
    ids: &BTreeSet<NodeId>,
    now: f64,
) -> Result<FloodOutcome> {
    let ids = without_bs(field, ids);
    if ids.is_empty() {
        return Ok(FloodOutcome::default());
    }
    let bs = field.base_station();
    flood(field, ledger, costs, FloodKind::Blacklist, bs, None, None, now)
}

pub fn install_blacklist(node: &mut SensorNode, ids: &BTreeSet<NodeId>, bs: NodeId) {
    for &id in ids {
        if id != bs {
            node.blacklist.insert(id);
        }
    }
}

/// Flood `ids` and add them to the base station's and every reached node's
/// blacklist immediately.
pub fn broadcast_blacklist(
    field: &mut Field,
    ids: &BTreeSet<NodeId>,
    ledger: &mut EnergyLedger,
    costs: &RadioCosts,
    now: f64,
) -> Result<FloodOutcome> {
    let outcome = flood_blacklist(field, ledger, costs, ids, now)?;
    if outcome.transmissions == 0 {
        return Ok(outcome);
    }
    let bs = field.base_station();
    install_blacklist(field.node_mut(bs)?, ids, bs);
    for &(id, _) in &outcome.reached {
        if field.is_live(id) {
            install_blacklist(field.node_mut(id)?, ids, bs);
        }
    }
    Ok(outcome)
}

fn without_bs(field: &Field, ids: &BTreeSet<NodeId>) -> BTreeSet<NodeId> {
    ids.iter().copied().filter(|&id| id != field.base_station()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterDecision {
    Forward,
    Drop,
}

pub fn filter_packet(node: &SensorNode, source: NodeId) -> FilterDecision {
    if node.blacklist.contains(source) {
        FilterDecision::Drop
    } else {
        FilterDecision::Forward
    }
}

/// `time_s,flagged_node_id`
pub fn write_blacklist_csv<W: Write>(mut out: W, events: &[(f64, NodeId)]) -> io::Result<()> {
    writeln!(out, "time_s,flagged_node_id")?;
    for (t, id) in events {
        writeln!(out, "{t},{id}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::Energy;
    use crate::topology::test_support::{drain, line};

    const TX: u64 = 471_250;
    const RX: u64 = 355_250;

    fn ids(v: &[u32]) -> BTreeSet<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn arrivals_and_eviction() {
        let mut log = BsPacketLog::new(1.0);
        log.record_arrival(NodeId(3), 0.0, 0.0).unwrap();
        assert_eq!(log.len(), 1);
        log.record_arrival(NodeId(4), 2.0, 2.0).unwrap();
        assert_eq!(log.entries().collect::<Vec<_>>(), vec![(NodeId(4), 2.0)]);
        assert_eq!(
            log.record_arrival(NodeId(4), 5.0, 3.0),
            Err(Error::ClockViolation { created_at: 5.0, now: 3.0 })
        );
    }

    #[test]
    fn threshold_is_strict() {
        let params = DetectionParams::default();
        let mut log = BsPacketLog::new(1.0);
        for i in 0..5 {
            log.record_arrival(NodeId(7), 0.1 * i as f64, 0.5).unwrap();
        }
        assert!(detect_flooding(&log, &params).is_empty());
        log.record_arrival(NodeId(7), 0.55, 0.6).unwrap();
        assert_eq!(detect_flooding(&log, &params), vec![NodeId(7)]);
    }

    #[test]
    fn distinct_sources_not_flagged() {
        let mut log = BsPacketLog::new(1.0);
        for i in 1..=6 {
            log.record_arrival(NodeId(i), 0.1, 0.2).unwrap();
        }
        assert!(detect_flooding(&log, &DetectionParams::default()).is_empty());
    }

    #[test]
    fn broadcast_on_line() {
        let mut f = line(3, 50.0);
        let mut ledger = EnergyLedger::new();
        let out = broadcast_blacklist(&mut f, &ids(&[2]), &mut ledger, &RadioCosts::default(), 1.0).unwrap();
        assert_eq!((out.transmissions, out.receptions), (3, 3));
        assert_eq!(ledger.total().nanojoules(), 3 * TX + 3 * RX);
        for n in f.nodes() {
            assert!(n.blacklist.contains(NodeId(2)));
        }
    }

    #[test]
    fn empty_broadcast_is_free() {
        let mut f = line(3, 50.0);
        let mut ledger = EnergyLedger::new();
        broadcast_blacklist(&mut f, &BTreeSet::new(), &mut ledger, &RadioCosts::default(), 0.0).unwrap();
        assert!(ledger.is_empty());
        // The base station never blacklists itself.
        broadcast_blacklist(&mut f, &ids(&[0]), &mut ledger, &RadioCosts::default(), 0.0).unwrap();
        assert!(ledger.is_empty());
    }

    #[test]
    fn lone_base_station_pays_one_tx() {
        let mut f = line(1, 50.0);
        let mut ledger = EnergyLedger::new();
        let out = broadcast_blacklist(&mut f, &ids(&[9]), &mut ledger, &RadioCosts::default(), 0.0).unwrap();
        assert_eq!((out.transmissions, out.receptions), (1, 0));
        assert_eq!(ledger.total(), Energy::from_nanojoules(TX));
    }

    #[test]
    fn depleted_nodes_not_reached() {
        let mut f = line(4, 50.0);
        drain(&mut f, NodeId(2));
        f.prune_depleted();
        let mut ledger = EnergyLedger::new();
        broadcast_blacklist(&mut f, &ids(&[3]), &mut ledger, &RadioCosts::default(), 0.0).unwrap();
        assert!(f.node(NodeId(1)).unwrap().blacklist.contains(NodeId(3)));
        assert!(!f.node(NodeId(3)).unwrap().blacklist.contains(NodeId(3)));
    }

    #[test]
    fn filtering() {
        let mut f = line(2, 50.0);
        let node = f.node_mut(NodeId(1)).unwrap();
        assert_eq!(filter_packet(node, NodeId(5)), FilterDecision::Forward);
        node.blacklist.insert(NodeId(5));
        assert_eq!(filter_packet(node, NodeId(5)), FilterDecision::Drop);
        assert_eq!(filter_packet(node, NodeId(6)), FilterDecision::Forward);
    }

    #[test]
    fn rate_rreq_rows_bounded_and_ordered() {
        let mut t = RateRreqTable::default();
        for i in 0..40 {
            t.record(NodeId(1), f64::from(i));
        }
        t.record(NodeId(1), 3.0);
        let times: Vec<_> = t.times(NodeId(1)).collect();
        assert_eq!(times.len(), RATE_RREQ_ROWS_PER_NEIGHBOR);
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
    }
}
