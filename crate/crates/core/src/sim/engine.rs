use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{DebitMeta, Energy, EnergyLedger, RadioCosts, RadioOp};
use crate::error::{Error, Result};
use crate::fap::{detect_flooding, flood_blacklist, install_blacklist, BsPacketLog};
use crate::fuzzy::PathCountController;
use crate::routing::{install_routes, k_disjoint_paths, shortest_path_in, unicast, PathSet, Radio};
use crate::topology::{Field, NodeId, Role};

use super::config::{ScenarioConfig, Scheme};
use super::event::{Event, EventKind, EventQueue, Packet, PacketKind};
use super::metrics::{AttackSample, Conservation, MetricsReport, PathSetRecord, RunStats};

const MAX_PLACEMENT_ATTEMPTS: u32 = 1000;
const ATTACKER_STREAM: u64 = 1;
const TRAFFIC_STREAM: u64 = 2;

#[derive(Debug, Clone)]
struct SourceRoute {
    paths: PathSet,
    /// Set once the proposed scheme has run the controller for this route.
    decided: bool,
}

#[derive(Debug, Clone)]
struct Burst {
    outstanding: u32,
    forwarded: Vec<u32>,
}

enum Fate {
    Delivered,
    Filtered,
    Lost,
}

/// One single-threaded run of a scenario under one scheme.
pub struct Simulation {
    cfg: ScenarioConfig,
    scheme: Scheme,
    field: Field,
    field_seed: u64,
    costs: RadioCosts,
    radio: Radio,
    controller: Option<PathCountController>,
    ledger: EnergyLedger,
    queue: EventQueue,
    now: f64,
    next_packet_id: u64,
    routes: Vec<Option<SourceRoute>>,
    participation: Vec<u32>,
    recent_sends: Vec<VecDeque<f64>>,
    bs_log: BsPacketLog,
    flagged: BTreeSet<NodeId>,
    compromised: Vec<NodeId>,
    background_sources: Vec<NodeId>,
    bs_adjacent: Vec<NodeId>,
    initial_total: Energy,
    bursts: Vec<Burst>,
    fig6: Vec<AttackSample>,
    depleted: Vec<(f64, NodeId)>,
    blacklist_events: Vec<(f64, NodeId)>,
    pathsets: Vec<PathSetRecord>,
    stats: RunStats,
    notes: Vec<String>,
}

impl Simulation {
    /// Build the field, pick compromised nodes, install the initial routes and
    /// schedule background traffic and attack bursts.
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let (field, field_seed, notes) =
            Field::generate_connected(&cfg.field, cfg.seed, cfg.min_connected_fraction, MAX_PLACEMENT_ATTEMPTS)?;
        let mut sim = Self::with_field(cfg, field)?;
        sim.field_seed = field_seed;
        sim.notes.splice(0..0, notes);
        sim.choose_compromised()?;
        sim.schedule_traffic();
        sim.schedule_attacks();
        Ok(sim)
    }

    /// A run on a prepared field with no traffic scheduled and no compromised
    /// nodes chosen. Initial shortest-path routes to the base station are
    /// installed for every connected sensor.
    pub fn with_field(cfg: &ScenarioConfig, field: Field) -> Result<Self> {
        cfg.validate()?;
        let costs = cfg.energy.costs()?;
        let mut radio = Radio::new(costs);
        radio.ttl_schedule = cfg.routing.ttl_schedule.clone();
        let max_hops = cfg.routing.max_hops.unwrap_or_else(|| field.bs_eccentricity().max(1));
        let controller = match cfg.scheme {
            Scheme::Proposed => Some(PathCountController::new(max_hops, cfg.field.energy_cap_j, cfg.routing.max_paths)?),
            Scheme::FapOnly => None,
        };
        let n = field.len();
        let initial_total = field.nodes().iter().map(|node| node.battery.initial()).sum();
        let mut sim = Simulation {
            cfg: cfg.clone(),
            scheme: cfg.scheme,
            field_seed: cfg.seed,
            costs,
            radio,
            controller,
            ledger: EnergyLedger::new(),
            queue: EventQueue::default(),
            now: 0.0,
            next_packet_id: 0,
            routes: vec![None; n],
            participation: vec![0; n],
            recent_sends: vec![VecDeque::new(); n],
            bs_log: BsPacketLog::new(cfg.detection.window_s),
            flagged: BTreeSet::new(),
            compromised: Vec::new(),
            background_sources: Vec::new(),
            bs_adjacent: field.bs_adjacent(),
            initial_total,
            bursts: Vec::new(),
            fig6: Vec::new(),
            depleted: Vec::new(),
            blacklist_events: Vec::new(),
            pathsets: Vec::new(),
            stats: RunStats::default(),
            notes: Vec::new(),
            field,
        };
        sim.notes.push(format!("hc scale (max hops): {max_hops}"));
        sim.install_initial_routes()?;
        Ok(sim)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn compromised(&self) -> &[NodeId] {
        &self.compromised
    }

    pub fn pending_events(&self) -> usize {
        self.queue.len()
    }

    /// Mark `id` as compromised.
    pub fn compromise(&mut self, id: NodeId) -> Result<()> {
        if id == self.field.base_station() {
            return Err(Error::config("attack", "the base station cannot be compromised"));
        }
        self.field.node_mut(id)?.role = Role::Compromised;
        if !self.compromised.contains(&id) {
            self.compromised.push(id);
        }
        Ok(())
    }

    /// Schedule a burst of `n_packets` false packets from `attacker`, the
    /// `i`-th at `at + i * spacing`. Returns the scheduled send times.
    pub fn inject_attack(&mut self, attacker: NodeId, n_packets: u32, at: f64) -> Result<Vec<f64>> {
        if self.field.node(attacker)?.role != Role::Compromised {
            return Err(Error::NotCompromised(attacker));
        }
        let burst = self.bursts.len();
        self.bursts.push(Burst {
            outstanding: n_packets,
            forwarded: vec![0; self.field.len()],
        });
        let spacing = self.cfg.attack.packet_spacing_s;
        let mut times = Vec::with_capacity(n_packets as usize);
        for i in 0..n_packets {
            let t = at + f64::from(i) * spacing;
            let packet = self.new_packet(attacker, t, PacketKind::False { burst });
            self.queue.push(t, EventKind::PacketSend { packet });
            times.push(t);
        }
        Ok(times)
    }

    /// Schedule one legitimate event packet from `source` at `at`.
    pub fn send_event_packet(&mut self, source: NodeId, at: f64) -> Result<()> {
        self.field.node(source)?;
        let packet = self.new_packet(source, at, PacketKind::Event);
        self.queue.push(at, EventKind::PacketSend { packet });
        Ok(())
    }

    /// Process events until the queue is empty.
    pub fn run_to_end(&mut self) -> Result<()> {
        while let Some(event) = self.queue.pop() {
            self.step(event)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> MetricsReport {
        self.sweep_depleted();
        let fig7 = self
            .bs_adjacent
            .iter()
            .map(|&id| (id, self.field.nodes()[id.index()].battery.remaining()))
            .collect();
        let final_conservation = self.conservation();
        MetricsReport {
            scheme: self.scheme,
            seed: self.cfg.seed,
            field_seed: self.field_seed,
            config_hash: self.cfg.config_hash(),
            fig6: self.fig6,
            fig7,
            depleted: self.depleted,
            compromised: self.compromised,
            blacklist_events: self.blacklist_events,
            pathsets: self.pathsets,
            burst_max_forward: self.bursts.iter().map(|b| b.forwarded.iter().copied().max().unwrap_or(0)).collect(),
            stats: self.stats,
            final_conservation,
            ledger: self.ledger,
            notes: self.notes,
        }
    }

    fn new_packet(&mut self, source: NodeId, created_at: f64, kind: PacketKind) -> Packet {
        let id = self.next_packet_id;
        self.next_packet_id += 1;
        Packet { id, source, created_at, kind }
    }

    fn install_initial_routes(&mut self) -> Result<()> {
        let bs = self.field.base_station();
        let adj = self.field.live_adjacency();
        let blocked = vec![false; adj.len()];
        let sensors: Vec<NodeId> = self.field.sensor_ids().collect();
        for s in sensors {
            if let Some(path) = shortest_path_in(&adj, s, bs, &blocked) {
                install_routes(&mut self.field, &path, 0.0)?;
                self.routes[s.index()] = Some(SourceRoute {
                    paths: PathSet::new(vec![path]),
                    decided: false,
                });
            }
        }
        Ok(())
    }

    fn choose_compromised(&mut self) -> Result<()> {
        let wanted = self.cfg.attack.compromised_nodes as usize;
        if self.cfg.attack.count == 0 || wanted == 0 {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(ATTACKER_STREAM);
        let dist = self.field.hop_distances(self.field.base_station());
        let min_hops = self.cfg.attack.min_hops_from_bs;
        let mut eligible: Vec<NodeId> = self
            .field
            .sensor_ids()
            .filter(|id| dist[id.index()].is_some_and(|d| d >= min_hops))
            .collect();
        if eligible.len() < wanted {
            self.notes.push(format!(
                "only {} sensors are at least {min_hops} hops from the base station; using the farthest reachable sensors",
                eligible.len()
            ));
            let mut by_depth: Vec<NodeId> = self.field.sensor_ids().filter(|id| dist[id.index()].is_some()).collect();
            by_depth.sort_by_key(|id| (std::cmp::Reverse(dist[id.index()]), *id));
            eligible = by_depth.into_iter().take(wanted).collect();
        }
        let chosen: Vec<NodeId> = eligible.choose_multiple(&mut rng, wanted).copied().collect();
        for id in chosen {
            self.compromise(id)?;
        }
        self.notes.push(format!(
            "compromised nodes: {}",
            self.compromised.iter().map(|id| format!("{id} ({} hops)", dist[id.index()].unwrap_or(0))).collect::<Vec<_>>().join(", ")
        ));
        Ok(())
    }

    fn schedule_traffic(&mut self) {
        let rate = self.cfg.traffic.event_rate_hz;
        if rate <= 0.0 {
            return;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(TRAFFIC_STREAM);
        let sources: Vec<NodeId> = self
            .field
            .sensor_ids()
            .filter(|id| self.routes[id.index()].is_some() && !self.compromised.contains(id))
            .collect();
        if sources.is_empty() {
            return;
        }
        let horizon = self.cfg.horizon_s();
        let mut k = 1u64;
        loop {
            let t = k as f64 / rate;
            if t > horizon {
                break;
            }
            let pick = rng.gen_range(0..sources.len());
            self.queue.push(t, EventKind::BackgroundSend { pick });
            k += 1;
        }
        self.background_sources = sources;
    }

    fn schedule_attacks(&mut self) {
        if self.compromised.is_empty() {
            return;
        }
        for i in 0..self.cfg.attack.count as usize {
            let t = (i + 1) as f64 * self.cfg.attack.interval_s;
            let attacker = self.compromised[i % self.compromised.len()];
            self.queue.push(t, EventKind::AttackBurst { index: i, attacker });
        }
    }

    fn step(&mut self, event: Event) -> Result<()> {
        debug_assert!(event.time >= self.now);
        self.now = event.time;
        match event.kind {
            EventKind::BackgroundSend { pick } => {
                let candidates = &self.background_sources;
                let n = candidates.len();
                if let Some(src) = (0..n).map(|i| candidates[(pick + i) % n]).find(|&id| self.field.is_live(id)) {
                    let packet = self.new_packet(src, self.now, PacketKind::Event);
                    self.send(packet)?;
                }
            }
            EventKind::PacketSend { packet } => self.send(packet)?,
            EventKind::PacketHop { packet, path, hop } => self.hop(packet, path, hop)?,
            EventKind::AttackBurst { index, attacker } => {
                debug_assert_eq!(index, self.bursts.len());
                let n = self.cfg.attack.packets_per_attack;
                self.inject_attack(attacker, n, self.now)?;
                if n == 0 {
                    self.sample(index);
                }
            }
            EventKind::BlacklistFlood { ids } => self.flood_blacklist(ids)?,
            EventKind::BlacklistInstall { node, ids } => {
                if self.field.is_live(node) {
                    let bs = self.field.base_station();
                    install_blacklist(self.field.node_mut(node)?, &ids, bs);
                }
            }
            EventKind::MetricSample { attack_index } => self.sample(attack_index),
        }
        Ok(())
    }

    fn send(&mut self, packet: Packet) -> Result<()> {
        self.stats.packets_sent += 1;
        let s = packet.source;
        if !self.field.is_live(s) {
            return self.resolve(&packet, Fate::Lost);
        }
        self.note_send(s);
        let Some(path) = self.route_for(s)? else {
            return self.resolve(&packet, Fate::Lost);
        };
        if !self.debit(s, RadioOp::Tx)? {
            return self.resolve(&packet, Fate::Lost);
        }
        let t = self.now + self.cfg.routing.hop_delay_s;
        self.queue.push(t, EventKind::PacketHop { packet, path, hop: 1 });
        Ok(())
    }

    fn hop(&mut self, packet: Packet, path: Vec<NodeId>, hop: usize) -> Result<()> {
        let v = path[hop];
        if !self.field.is_live(v) {
            return self.resolve(&packet, Fate::Lost);
        }
        if !self.debit(v, RadioOp::Rx)? {
            return self.resolve(&packet, Fate::Lost);
        }
        if v == self.field.base_station() {
            self.bs_log.record_arrival(packet.source, packet.created_at, self.now)?;
            let fresh: BTreeSet<NodeId> = detect_flooding(&self.bs_log, &self.cfg.detection)
                .into_iter()
                .filter(|id| !self.flagged.contains(id))
                .collect();
            if !fresh.is_empty() {
                self.flagged.extend(fresh.iter().copied());
                self.queue.push(self.now, EventKind::BlacklistFlood { ids: fresh });
            }
            return self.resolve(&packet, Fate::Delivered);
        }
        if self.field.node(v)?.blacklist.contains(packet.source) {
            return self.resolve(&packet, Fate::Filtered);
        }
        let next = path[hop + 1];
        if !self.field.is_live(next) {
            return self.resolve(&packet, Fate::Lost);
        }
        if let PacketKind::False { burst } = packet.kind {
            self.bursts[burst].forwarded[v.index()] += 1;
        }
        if !self.debit(v, RadioOp::Tx)? {
            return self.resolve(&packet, Fate::Lost);
        }
        let t = self.now + self.cfg.routing.hop_delay_s;
        self.queue.push(t, EventKind::PacketHop { packet, path, hop: hop + 1 });
        Ok(())
    }

    fn resolve(&mut self, packet: &Packet, fate: Fate) -> Result<()> {
        match fate {
            Fate::Delivered => self.stats.delivered += 1,
            Fate::Filtered => self.stats.filtered += 1,
            Fate::Lost => self.stats.lost += 1,
        }
        if let PacketKind::False { burst } = packet.kind {
            let b = &mut self.bursts[burst];
            b.outstanding -= 1;
            if b.outstanding == 0 {
                self.queue.push(self.now, EventKind::MetricSample { attack_index: burst });
            }
        }
        Ok(())
    }

    fn flood_blacklist(&mut self, ids: BTreeSet<NodeId>) -> Result<()> {
        let bs = self.field.base_station();
        let outcome = flood_blacklist(&mut self.field, &mut self.ledger, &self.costs, &ids, self.now)?;
        install_blacklist(self.field.node_mut(bs)?, &ids, bs);
        for &id in &ids {
            self.blacklist_events.push((self.now, id));
        }
        let hop_delay = self.cfg.routing.hop_delay_s;
        for (node, depth) in outcome.reached {
            let t = self.now + f64::from(depth) * hop_delay;
            self.queue.push(t, EventKind::BlacklistInstall { node, ids: ids.clone() });
        }
        self.sweep_depleted();
        Ok(())
    }

    fn note_send(&mut self, s: NodeId) {
        let window = self.cfg.detection.window_s;
        let log = &mut self.recent_sends[s.index()];
        log.push_back(self.now);
        while log.front().is_some_and(|&t| t < self.now - window) {
            log.pop_front();
        }
    }

    /// The path for the next packet from `s`, discovering or widening the
    /// route first when needed. `None` when the base station is unreachable.
    fn route_for(&mut self, s: NodeId) -> Result<Option<Vec<NodeId>>> {
        if self.routes[s.index()].is_none() {
            let bs = self.field.base_station();
            self.stats.discoveries += 1;
            let found = self.radio.discover(&mut self.field, &mut self.ledger, s, bs, self.now);
            self.sweep_depleted();
            match found {
                Ok(d) => {
                    if d.path.iter().all(|&id| self.field.is_live(id)) {
                        self.pathsets.push(PathSetRecord {
                            time_s: self.now,
                            source: s,
                            paths: vec![d.path.clone()],
                        });
                        self.routes[s.index()] = Some(SourceRoute {
                            paths: PathSet::new(vec![d.path]),
                            decided: false,
                        });
                    } else {
                        self.stats.discovery_failures += 1;
                        return Ok(None);
                    }
                }
                Err(Error::DiscoveryFailed { .. }) => {
                    self.stats.discovery_failures += 1;
                    return Ok(None);
                }
                Err(e) => return Err(e),
            }
        }
        let loaded = self.recent_sends[s.index()].len() > self.cfg.routing.multipath_trigger as usize;
        let undecided = self.routes[s.index()].as_ref().is_some_and(|r| !r.decided);
        if self.controller.is_some() && loaded && undecided {
            self.decide_paths(s)?;
        }
        let Some(route) = self.routes[s.index()].as_mut() else {
            return Ok(None);
        };
        let idx = route.paths.assign_packets(1)?[0];
        Ok(Some(route.paths.path(idx).to_vec()))
    }

    /// Run the fuzzy controller on the current path of `s` and replace it with
    /// that many node-disjoint paths.
    fn decide_paths(&mut self, s: NodeId) -> Result<()> {
        let bs = self.field.base_station();
        let controller = self.controller.as_ref().expect("proposed scheme has a controller");
        let current = self.routes[s.index()].as_ref().expect("route exists").paths.path(0).to_vec();
        let members: Vec<NodeId> = current.iter().copied().filter(|&id| id != bs).collect();
        let hops = (current.len() - 1) as u32;
        let residual = members
            .iter()
            .map(|id| self.field.nodes()[id.index()].battery.remaining())
            .min()
            .unwrap_or(Energy::ZERO);
        let npp = members.iter().map(|id| self.participation[id.index()]).max().unwrap_or(0);
        let count = controller.determine_path_count(hops, residual.joules(), npp)?;
        let k = count.min(self.cfg.routing.max_paths).max(1);
        self.stats.multipath_decisions += 1;
        let paths = if k > 1 {
            k_disjoint_paths(&self.field, s, bs, k as usize)?.paths().to_vec()
        } else {
            vec![current.clone()]
        };
        self.stats.path_count_histogram[paths.len() - 1] += 1;
        // Each path the source did not already hold needs a setup message.
        for p in paths.iter().filter(|p| **p != current) {
            let reversed: Vec<NodeId> = p.iter().rev().copied().collect();
            unicast(&mut self.field, &mut self.ledger, &self.costs, &reversed, self.now)?;
            install_routes(&mut self.field, p, self.now)?;
        }
        self.pathsets.push(PathSetRecord {
            time_s: self.now,
            source: s,
            paths: paths.clone(),
        });
        let set = PathSet::new(paths);
        for id in members_of(&set, bs) {
            self.participation[id.index()] += 1;
        }
        self.routes[s.index()] = Some(SourceRoute { paths: set, decided: true });
        self.sweep_depleted();
        Ok(())
    }

    /// Charge one packet's tx or rx to `node`. False when the battery could
    /// not cover it.
    fn debit(&mut self, node: NodeId, op: RadioOp) -> Result<bool> {
        let bytes = self.costs.packet_size;
        let amount = match op {
            RadioOp::Tx => self.costs.tx(bytes),
            RadioOp::Rx => self.costs.rx(bytes),
        };
        let meta = DebitMeta {
            time_s: self.now,
            node,
            kind: op,
            bytes,
        };
        let out = self.field.node_mut(node)?.battery.debit(amount, &mut self.ledger, meta);
        if out.depleted_now {
            self.sweep_depleted();
        }
        Ok(out.completed(amount))
    }

    /// Prune newly depleted nodes and drop every path through them.
    fn sweep_depleted(&mut self) {
        let newly = self.field.prune_depleted();
        if newly.is_empty() {
            return;
        }
        let bs = self.field.base_station();
        for &id in &newly {
            self.depleted.push((self.now, id));
        }
        let dead: BTreeSet<NodeId> = newly.into_iter().collect();
        for slot in &mut self.routes {
            let Some(route) = slot else { continue };
            if !route.paths.paths().iter().any(|p| p.iter().any(|id| dead.contains(id))) {
                continue;
            }
            let before = members_of(&route.paths, bs);
            let kept: Vec<Vec<NodeId>> = route
                .paths
                .paths()
                .iter()
                .filter(|p| !p.iter().any(|id| dead.contains(id)))
                .cloned()
                .collect();
            let after_set = PathSet::new(kept);
            if route.decided {
                let after = members_of(&after_set, bs);
                for id in before.difference(&after) {
                    self.participation[id.index()] -= 1;
                }
            }
            if after_set.is_empty() {
                *slot = None;
            } else {
                route.paths = after_set;
            }
        }
    }

    fn conservation(&self) -> Conservation {
        Conservation {
            initial: self.initial_total,
            remaining: self.field.nodes().iter().map(|n| n.battery.remaining()).sum(),
            consumed: self.ledger.total(),
        }
    }

    fn sample(&mut self, attack_index: usize) {
        let bs = self.field.base_station();
        let bs_drawn = self.ledger.total_where(|e| e.node == bs);
        self.fig6.push(AttackSample {
            attack_index: attack_index as u32 + 1,
            time_s: self.now,
            cumulative_energy: self.ledger.total().saturating_sub(bs_drawn),
            conservation: self.conservation(),
        });
    }
}

/// Nodes other than the base station on any path of `set`.
fn members_of(set: &PathSet, bs: NodeId) -> BTreeSet<NodeId> {
    set.paths().iter().flatten().copied().filter(|&id| id != bs).collect()
}
