//! Sensor placement and the unit-disk connectivity graph.

use std::collections::VecDeque;
use std::fmt;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{Battery, Energy};
use crate::error::{Error, Result};
use crate::fap::{BlacklistTable, RateRreqTable};
use crate::routing::RouteEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Sensor,
    BaseStation,
    Compromised,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Sensor => "sensor",
            Role::BaseStation => "base-station",
            Role::Compromised => "compromised",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone)]
pub struct SensorNode {
    pub id: NodeId,
    pub position: Position,
    pub battery: Battery,
    pub role: Role,
    pub blacklist: BlacklistTable,
    pub rate_rreq: RateRreqTable,
    pub routes: Vec<RouteEntry>,
}

impl SensorNode {
    pub fn new(id: NodeId, position: Position, energy: Energy, role: Role) -> Self {
        SensorNode {
            id,
            position,
            battery: Battery::new(energy),
            role,
            blacklist: BlacklistTable::default(),
            rate_rreq: RateRreqTable::default(),
            routes: Vec::new(),
        }
    }

    pub fn is_live(&self) -> bool {
        !self.battery.is_depleted()
    }
}

/// Placement parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub width_m: f64,
    pub height_m: f64,
    pub node_count: u32,
    pub radius_m: f64,
    /// Defaults to the field centre.
    pub bs_position: Option<Position>,
    /// Initial energies are uniform in `[min_energy_fraction, 1] * energy_cap_j`.
    pub min_energy_fraction: f64,
    pub energy_cap_j: f64,
    /// The base station is mains powered; this only has to outlast the run.
    pub bs_energy_j: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            width_m: 1000.0,
            height_m: 1000.0,
            node_count: 500,
            radius_m: 80.0,
            bs_position: None,
            min_energy_fraction: 0.3,
            energy_cap_j: 1.0,
            bs_energy_j: 1.0e6,
        }
    }
}

impl FieldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.node_count == 0 {
            return Err(Error::NoNodes);
        }
        let positive = [
            ("field.width_m", self.width_m),
            ("field.height_m", self.height_m),
            ("field.radius_m", self.radius_m),
            ("field.energy_cap_j", self.energy_cap_j),
            ("field.bs_energy_j", self.bs_energy_j),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(name, format!("must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.min_energy_fraction) {
            return Err(Error::config("field.min_energy_fraction", "must lie in [0, 1]"));
        }
        if let Some(p) = self.bs_position {
            if !(0.0..=self.width_m).contains(&p.x) || !(0.0..=self.height_m).contains(&p.y) {
                return Err(Error::config("field.bs_position", "outside the field"));
            }
        }
        Ok(())
    }
}

/// Nodes plus their static unit-disk neighbourhoods. A node drops out of the
/// live graph once its battery is empty and [`Field::prune_depleted`] runs.
#[derive(Debug, Clone)]
pub struct Field {
    width: f64,
    height: f64,
    radius: f64,
    nodes: Vec<SensorNode>,
    base_station: NodeId,
    adjacency: Vec<Vec<NodeId>>,
    pruned: Vec<bool>,
}

impl Field {
    /// Build a field from explicit nodes. Exactly one node must be the base station.
    pub fn from_nodes(width: f64, height: f64, radius: f64, nodes: Vec<SensorNode>) -> Result<Self> {
        let mut base = None;
        for (i, node) in nodes.iter().enumerate() {
            if node.id.index() != i {
                return Err(Error::config("nodes", format!("node at index {i} has id {}", node.id)));
            }
            if node.role == Role::BaseStation {
                if base.is_some() {
                    return Err(Error::config("nodes", "more than one base station"));
                }
                base = Some(node.id);
            }
        }
        let base_station = base.ok_or(Error::NoBaseStation)?;
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for a in 0..nodes.len() {
            for b in (a + 1)..nodes.len() {
                if nodes[a].position.distance(&nodes[b].position) <= radius {
                    adjacency[a].push(NodeId(b as u32));
                    adjacency[b].push(NodeId(a as u32));
                }
            }
        }
        let pruned = vec![false; nodes.len()];
        Ok(Field {
            width,
            height,
            radius,
            nodes,
            base_station,
            adjacency,
            pruned,
        })
    }

    /// Uniform random placement. The base station gets id 0; sensors are 1..=n.
    pub fn generate(cfg: &FieldConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bs_pos = cfg.bs_position.unwrap_or(Position {
            x: cfg.width_m / 2.0,
            y: cfg.height_m / 2.0,
        });
        let mut nodes = Vec::with_capacity(cfg.node_count as usize + 1);
        nodes.push(SensorNode::new(
            NodeId(0),
            bs_pos,
            Energy::from_joules(cfg.bs_energy_j)?,
            Role::BaseStation,
        ));
        let cap = Energy::from_joules(cfg.energy_cap_j)?.nanojoules();
        let low = (cap as f64 * cfg.min_energy_fraction).round() as u64;
        for i in 1..=cfg.node_count {
            let x = rng.gen_range(0.0..=cfg.width_m);
            let y = rng.gen_range(0.0..=cfg.height_m);
            let nj = rng.gen_range(low.max(1)..=cap);
            nodes.push(SensorNode::new(
                NodeId(i),
                Position { x, y },
                Energy::from_nanojoules(nj),
                Role::Sensor,
            ));
        }
        Self::from_nodes(cfg.width_m, cfg.height_m, cfg.radius_m, nodes)
    }

    /// [`Field::generate`], redrawing with `seed + 1, seed + 2, ...` until the
    /// base station's component holds at least `min_fraction` of the sensors.
    /// Returns the field, the seed that produced it and one note per redraw.
    pub fn generate_connected(
        cfg: &FieldConfig,
        seed: u64,
        min_fraction: f64,
        max_attempts: u32,
    ) -> Result<(Self, u64, Vec<String>)> {
        let mut notes = Vec::new();
        for attempt in 0..max_attempts.max(1) {
            let s = seed.wrapping_add(u64::from(attempt));
            let field = Self::generate(cfg, s)?;
            let fraction = field.bs_component_fraction();
            if fraction >= min_fraction {
                return Ok((field, s, notes));
            }
            notes.push(format!(
                "redraw: seed {s} left {:.1}% of sensors connected to the base station (< {:.1}%), retrying with seed {}",
                fraction * 100.0,
                min_fraction * 100.0,
                s.wrapping_add(1)
            ));
        }
        Err(Error::DisconnectedBaseStation)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn base_station(&self) -> NodeId {
        self.base_station
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[SensorNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&SensorNode> {
        self.nodes.get(id.index()).ok_or(Error::UnknownNode(id))
    }

    pub fn node_mut(&mut self, id: NodeId) -> Result<&mut SensorNode> {
        self.nodes.get_mut(id.index()).ok_or(Error::UnknownNode(id))
    }

    /// Sensor ids (everything but the base station).
    pub fn sensor_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|n| n.id).filter(move |&id| id != self.base_station)
    }

    /// Whether `id` is still part of the connectivity graph.
    pub fn is_live(&self, id: NodeId) -> bool {
        !self.pruned[id.index()] && self.nodes[id.index()].is_live()
    }

    /// Live neighbours of `id` in ascending id order.
    pub fn neighbors(&self, id: NodeId) -> Result<Vec<NodeId>> {
        let adj = self.adjacency.get(id.index()).ok_or(Error::UnknownNode(id))?;
        Ok(adj.iter().copied().filter(|&n| self.is_live(n)).collect())
    }

    /// Live neighbours without the bounds check, for hot loops.
    pub(crate) fn live_neighbors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[id.index()].iter().copied().filter(move |&n| self.is_live(n))
    }

    /// Adjacency lists of the live graph; dead nodes have empty lists.
    pub fn live_adjacency(&self) -> Vec<Vec<NodeId>> {
        (0..self.nodes.len())
            .map(|i| {
                let id = NodeId(i as u32);
                if self.is_live(id) {
                    self.live_neighbors(id).collect()
                } else {
                    Vec::new()
                }
            })
            .collect()
    }

    pub fn bs_adjacent(&self) -> Vec<NodeId> {
        self.live_neighbors(self.base_station).collect()
    }

    /// Drop depleted nodes from the graph and clear route entries that point
    /// at them. Returns the ids pruned by this call.
    pub fn prune_depleted(&mut self) -> Vec<NodeId> {
        let newly: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| n.battery.is_depleted() && !self.pruned[n.id.index()])
            .map(|n| n.id)
            .collect();
        for id in &newly {
            self.pruned[id.index()] = true;
        }
        if !newly.is_empty() {
            let pruned = &self.pruned;
            for node in &mut self.nodes {
                if pruned[node.id.index()] {
                    node.routes.clear();
                } else {
                    node.routes.retain(|r| !pruned[r.next_hop.index()] && !pruned[r.destination.index()]);
                }
            }
        }
        newly
    }

    /// BFS hop counts from `from` over the live graph.
    pub fn hop_distances(&self, from: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.nodes.len()];
        if !self.is_live(from) {
            return dist;
        }
        dist[from.index()] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.index()].unwrap_or(0);
            for v in self.live_neighbors(u) {
                if dist[v.index()].is_none() {
                    dist[v.index()] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Largest hop distance from the base station to a reachable node.
    pub fn bs_eccentricity(&self) -> u32 {
        self.hop_distances(self.base_station).into_iter().flatten().max().unwrap_or(0)
    }

    /// Fraction of sensors in the base station's connected component.
    pub fn bs_component_fraction(&self) -> f64 {
        let sensors = self.nodes.len() - 1;
        if sensors == 0 {
            return 1.0;
        }
        let reached = self.hop_distances(self.base_station).iter().flatten().count() - 1;
        reached as f64 / sensors as f64
    }

    /// `node_id,x,y,role,initial_energy_j`
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "node_id,x,y,role,initial_energy_j")?;
        for n in &self.nodes {
            writeln!(
                out,
                "{},{},{},{},{}",
                n.id,
                n.position.x,
                n.position.y,
                n.role.as_str(),
                n.battery.initial().display_joules()
            )?;
        }
        Ok(())
    }
}

/// Place `n` sensors with default field settings.
pub fn place_nodes(n: u32, radius: f64, seed: u64) -> Result<Field> {
    let cfg = FieldConfig {
        node_count: n,
        radius_m: radius,
        ..FieldConfig::default()
    };
    Field::generate(&cfg, seed)
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Nodes at the given coordinates; the first is the base station. All
    /// sensors start with 1 J.
    pub fn field_at(points: &[(f64, f64)], radius: f64) -> Field {
        let nodes = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| {
                let role = if i == 0 { Role::BaseStation } else { Role::Sensor };
                SensorNode::new(NodeId(i as u32), Position { x, y }, Energy::from_joules(1.0).unwrap(), role)
            })
            .collect();
        Field::from_nodes(1000.0, 1000.0, radius, nodes).unwrap()
    }

    /// Nodes on a horizontal line, `spacing` apart, radius just over one spacing.
    pub fn line(n: usize, spacing: f64) -> Field {
        let points: Vec<_> = (0..n).map(|i| (i as f64 * spacing, 0.0)).collect();
        field_at(&points, spacing * 1.01)
    }

    pub fn drain(field: &mut Field, id: NodeId) {
        let mut ledger = crate::energy::EnergyLedger::new();
        let node = field.node_mut(id).unwrap();
        let all = node.battery.remaining();
        node.battery.debit(
            all,
            &mut ledger,
            crate::energy::DebitMeta {
                time_s: 0.0,
                node: id,
                kind: crate::energy::RadioOp::Rx,
                bytes: 0,
            },
        );
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn full_scale_placement_in_bounds() {
        let f = place_nodes(500, 80.0, 1).unwrap();
        assert_eq!(f.len(), 501);
        assert_eq!(f.nodes().iter().filter(|n| n.role == Role::BaseStation).count(), 1);
        for n in f.nodes() {
            assert!((0.0..=1000.0).contains(&n.position.x));
            assert!((0.0..=1000.0).contains(&n.position.y));
            if n.role == Role::Sensor {
                let e = n.battery.initial().joules();
                assert!((0.3..=1.0).contains(&e), "{e}");
            }
        }
    }

    #[test]
    fn same_seed_same_field() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        place_nodes(500, 80.0, 9).unwrap().write_csv(&mut a).unwrap();
        place_nodes(500, 80.0, 9).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
        let mut c = Vec::new();
        place_nodes(500, 80.0, 10).unwrap().write_csv(&mut c).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_nodes_rejected() {
        assert_eq!(place_nodes(0, 80.0, 1).unwrap_err(), Error::NoNodes);
    }

    #[test]
    fn radius_boundary_is_inclusive() {
        let f = field_at(&[(0.0, 0.0), (79.0, 0.0), (159.0, 0.0), (240.0, 0.0)], 80.0);
        assert_eq!(f.neighbors(NodeId(0)).unwrap(), vec![NodeId(1)]);
        // 79 -> 159 is exactly 80 m; 159 -> 240 is 81 m.
        assert_eq!(f.neighbors(NodeId(2)).unwrap(), vec![NodeId(1)]);
        assert!(f.neighbors(NodeId(3)).unwrap().is_empty());
        assert_eq!(f.neighbors(NodeId(9)), Err(Error::UnknownNode(NodeId(9))));
    }

    #[test]
    fn adjacency_symmetric_irreflexive() {
        let f = place_nodes(200, 120.0, 3).unwrap();
        for n in f.nodes() {
            let nb = f.neighbors(n.id).unwrap();
            assert!(!nb.contains(&n.id));
            assert!(nb.windows(2).all(|w| w[0] < w[1]));
            for m in nb {
                assert!(f.neighbors(m).unwrap().contains(&n.id));
            }
        }
    }

    #[test]
    fn bs_adjacency() {
        let f = field_at(&[(500.0, 500.0), (520.0, 500.0), (500.0, 540.0), (450.0, 470.0), (900.0, 900.0)], 80.0);
        assert_eq!(f.bs_adjacent(), vec![NodeId(1), NodeId(2), NodeId(3)]);
        let isolated = field_at(&[(0.0, 0.0), (500.0, 500.0)], 80.0);
        assert!(isolated.bs_adjacent().is_empty());
    }

    #[test]
    fn pruning_depleted_nodes() {
        let mut f = line(3, 50.0);
        assert!(f.prune_depleted().is_empty());
        assert_eq!(f.neighbors(NodeId(0)).unwrap(), vec![NodeId(1)]);
        drain(&mut f, NodeId(1));
        assert_eq!(f.prune_depleted(), vec![NodeId(1)]);
        assert!(f.neighbors(NodeId(0)).unwrap().is_empty());
        assert!(f.neighbors(NodeId(2)).unwrap().is_empty());
        assert!(f.bs_adjacent().is_empty());
        // Depleted nodes stay in the node list with zero energy.
        assert_eq!(f.node(NodeId(1)).unwrap().battery.remaining(), Energy::ZERO);
    }

    #[test]
    fn pruning_clears_routes_through_depleted() {
        let mut f = line(3, 50.0);
        f.node_mut(NodeId(2)).unwrap().routes.push(RouteEntry {
            destination: NodeId(0),
            next_hop: NodeId(1),
            hop_count: 2,
            established_at: 0.0,
        });
        drain(&mut f, NodeId(1));
        f.prune_depleted();
        assert!(f.node(NodeId(2)).unwrap().routes.is_empty());
    }

    #[test]
    fn redraw_reports_notes() {
        let cfg = FieldConfig {
            node_count: 40,
            radius_m: 30.0,
            ..FieldConfig::default()
        };
        // A sparse field never reaches 90 % connectivity.
        assert_eq!(
            Field::generate_connected(&cfg, 1, 0.9, 3).unwrap_err(),
            Error::DisconnectedBaseStation
        );
        let (f, seed, notes) = Field::generate_connected(&FieldConfig::default(), 1, 0.9, 50).unwrap();
        assert!(f.bs_component_fraction() >= 0.9);
        assert_eq!(notes.len() as u64, seed - 1);
    }
}
