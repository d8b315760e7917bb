use std::collections::VecDeque;

use crate::energy::{DebitMeta, Energy, EnergyLedger, RadioCosts, RadioOp};
use crate::error::{Error, Result};
use crate::topology::{Field, NodeId};

use super::{RouteEntry, RouteRequest};

/// TTLs for successive rings; the search ends with an unbounded flood.
pub const DEFAULT_TTL_SCHEDULE: [u32; 4] = [1, 3, 5, 7];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FloodKind {
    /// Route request. Nodes that blacklist the origin receive but do not
    /// forward, and every reception is logged in the rate-RREQ table.
    Rreq(RouteRequest),
    /// Base-station blacklist announcement.
    Blacklist,
}

/// Energy and reach of one flood.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FloodOutcome {
    /// Every node that received the flood at least once, with its hop depth,
    /// in first-reception order.
    pub reached: Vec<(NodeId, u32)>,
    pub transmissions: u32,
    pub receptions: u32,
    pub energy: Energy,
}

struct Traced {
    outcome: FloodOutcome,
    parent: Vec<Option<NodeId>>,
}

/// Broadcast from `origin`. Each node forwards at most once (duplicates are
/// suppressed), only while its depth is below `ttl`; every live neighbour of a
/// transmitter other than the origin pays one reception. `stop_at` receives
/// but never forwards.
#[allow(clippy::too_many_arguments)]
pub fn flood(
    field: &mut Field,
    ledger: &mut EnergyLedger,
    costs: &RadioCosts,
    kind: FloodKind,
    origin: NodeId,
    ttl: Option<u32>,
    stop_at: Option<NodeId>,
    now: f64,
) -> Result<FloodOutcome> {
    traced_flood(field, ledger, costs, kind, origin, ttl, stop_at, now).map(|t| t.outcome)
}

#[allow(clippy::too_many_arguments)]
fn traced_flood(
    field: &mut Field,
    ledger: &mut EnergyLedger,
    costs: &RadioCosts,
    kind: FloodKind,
    origin: NodeId,
    ttl: Option<u32>,
    stop_at: Option<NodeId>,
    now: f64,
) -> Result<Traced> {
    field.node(origin)?;
    let bytes = costs.packet_size;
    let mut outcome = FloodOutcome::default();
    let mut parent = vec![None; field.len()];
    let mut seen = vec![false; field.len()];
    seen[origin.index()] = true;
    if !field.is_live(origin) {
        return Ok(Traced { outcome, parent });
    }
    let mut queue = VecDeque::from([(origin, 0u32)]);
    while let Some((u, depth)) = queue.pop_front() {
        if !field.is_live(u) {
            continue;
        }
        let tx = field.node_mut(u)?.battery.debit(
            costs.tx(bytes),
            ledger,
            DebitMeta { time_s: now, node: u, kind: RadioOp::Tx, bytes },
        );
        outcome.transmissions += 1;
        outcome.energy += tx.drawn;
        if !tx.completed(costs.tx(bytes)) {
            continue;
        }
        let hearers: Vec<NodeId> = field.live_neighbors(u).filter(|&v| v != origin).collect();
        for v in hearers {
            let node = field.node_mut(v)?;
            let rx = node.battery.debit(
                costs.rx(bytes),
                ledger,
                DebitMeta { time_s: now, node: v, kind: RadioOp::Rx, bytes },
            );
            outcome.receptions += 1;
            outcome.energy += rx.drawn;
            if let FloodKind::Rreq(req) = kind {
                node.rate_rreq.record(u, req.created_at);
            }
            if seen[v.index()] || !rx.completed(costs.rx(bytes)) {
                continue;
            }
            seen[v.index()] = true;
            parent[v.index()] = Some(u);
            outcome.reached.push((v, depth + 1));
            let suppressed = match kind {
                FloodKind::Rreq(req) => node.blacklist.contains(req.origin),
                FloodKind::Blacklist => false,
            };
            let within_ttl = ttl.is_none_or(|t| depth + 1 < t);
            if !suppressed && within_ttl && Some(v) != stop_at {
                queue.push_back((v, depth + 1));
            }
        }
    }
    Ok(Traced { outcome, parent })
}

/// Result of a successful expanding ring search.
#[derive(Debug, Clone, PartialEq)]
pub struct Discovery {
    /// Reverse path recorded by the successful ring, source first.
    pub path: Vec<NodeId>,
    pub rings: Vec<RingReport>,
    /// All energy charged: every ring plus the route reply.
    pub energy: Energy,
}

impl Discovery {
    pub fn hops(&self) -> u32 {
        (self.path.len() - 1) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingReport {
    pub request: RouteRequest,
    pub transmissions: u32,
    pub receptions: u32,
    pub found: bool,
}

/// Radio-layer settings shared by floods and discovery.
#[derive(Debug, Clone, PartialEq)]
pub struct Radio {
    pub costs: RadioCosts,
    pub ttl_schedule: Vec<u32>,
    next_broadcast_id: u32,
}

impl Default for Radio {
    fn default() -> Self {
        Radio::new(RadioCosts::default())
    }
}

impl Radio {
    pub fn new(costs: RadioCosts) -> Self {
        Radio {
            costs,
            ttl_schedule: DEFAULT_TTL_SCHEDULE.to_vec(),
            next_broadcast_id: 0,
        }
    }

    /// Expanding ring search from `src` to `dst`, then a route reply unicast
    /// back along the reverse path. Ring energy is charged even on failure.
    pub fn discover(
        &mut self,
        field: &mut Field,
        ledger: &mut EnergyLedger,
        src: NodeId,
        dst: NodeId,
        now: f64,
    ) -> Result<Discovery> {
        field.node(src)?;
        field.node(dst)?;
        if !field.is_live(src) || !field.is_live(dst) {
            return Err(Error::DiscoveryFailed { src, dst });
        }
        let mut rings = Vec::new();
        let mut energy = Energy::ZERO;
        let schedule: Vec<Option<u32>> = self.ttl_schedule.iter().map(|&t| Some(t)).chain([None]).collect();
        for ttl in schedule {
            let request = RouteRequest {
                origin: src,
                destination: dst,
                ttl: ttl.unwrap_or(u32::MAX),
                broadcast_id: self.next_broadcast_id,
                created_at: now,
            };
            self.next_broadcast_id = self.next_broadcast_id.wrapping_add(1);
            let traced = traced_flood(field, ledger, &self.costs, FloodKind::Rreq(request), src, ttl, Some(dst), now)?;
            let found = traced.parent[dst.index()].is_some();
            energy += traced.outcome.energy;
            rings.push(RingReport {
                request,
                transmissions: traced.outcome.transmissions,
                receptions: traced.outcome.receptions,
                found,
            });
            if found {
                let mut path = vec![dst];
                let mut cur = dst;
                while let Some(p) = traced.parent[cur.index()] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                energy += self.route_reply(field, ledger, &path, now)?;
                if !path.iter().all(|&n| field.is_live(n)) {
                    return Err(Error::DiscoveryFailed { src, dst });
                }
                install_routes(field, &path, now)?;
                return Ok(Discovery { path, rings, energy });
            }
        }
        Err(Error::DiscoveryFailed { src, dst })
    }

    /// Unicast one packet from the last node of `path` back to the first.
    fn route_reply(&self, field: &mut Field, ledger: &mut EnergyLedger, path: &[NodeId], now: f64) -> Result<Energy> {
        let mut reversed: Vec<NodeId> = path.to_vec();
        reversed.reverse();
        unicast(field, ledger, &self.costs, &reversed, now)
    }
}

/// Carry one packet hop by hop along `path`, charging tx at each sender and
/// rx at each receiver. Stops early if a node runs dry.
pub(crate) fn unicast(
    field: &mut Field,
    ledger: &mut EnergyLedger,
    costs: &RadioCosts,
    path: &[NodeId],
    now: f64,
) -> Result<Energy> {
    let bytes = costs.packet_size;
    let mut energy = Energy::ZERO;
    for pair in path.windows(2) {
        let (from, to) = (pair[0], pair[1]);
        if !field.is_live(from) || !field.is_live(to) {
            break;
        }
        let tx = field.node_mut(from)?.battery.debit(
            costs.tx(bytes),
            ledger,
            DebitMeta { time_s: now, node: from, kind: RadioOp::Tx, bytes },
        );
        energy += tx.drawn;
        if !tx.completed(costs.tx(bytes)) {
            break;
        }
        let rx = field.node_mut(to)?.battery.debit(
            costs.rx(bytes),
            ledger,
            DebitMeta { time_s: now, node: to, kind: RadioOp::Rx, bytes },
        );
        energy += rx.drawn;
        if !rx.completed(costs.rx(bytes)) {
            break;
        }
    }
    Ok(energy)
}

pub(crate) fn install_routes(field: &mut Field, path: &[NodeId], now: f64) -> Result<()> {
    let dst = *path.last().expect("path has a destination");
    let hops = path.len() - 1;
    for (i, pair) in path.windows(2).enumerate() {
        let node = field.node_mut(pair[0])?;
        node.routes.retain(|r| r.destination != dst);
        node.routes.push(RouteEntry {
            destination: dst,
            next_hop: pair[1],
            hop_count: (hops - i) as u32,
            established_at: now,
        });
    }
    Ok(())
}

/// Expanding ring search with the default radio settings.
pub fn ers_discover(
    field: &mut Field,
    src: NodeId,
    dst: NodeId,
    ledger: &mut EnergyLedger,
    now: f64,
) -> Result<Discovery> {
    Radio::default().discover(field, ledger, src, dst, now)
}
