use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::topology::{Field, NodeId};

use super::PathSet;

/// Lexicographically smallest shortest path from `src` to `dst` that avoids
/// every `blocked` node. With `allow_direct == false` the edge `src`-`dst`
/// is ignored.
pub fn shortest_path_in(
    adj: &[Vec<NodeId>],
    src: NodeId,
    dst: NodeId,
    blocked: &[bool],
) -> Option<Vec<NodeId>> {
    shortest_path_with(adj, src, dst, blocked, true)
}

fn shortest_path_with(
    adj: &[Vec<NodeId>],
    src: NodeId,
    dst: NodeId,
    blocked: &[bool],
    allow_direct: bool,
) -> Option<Vec<NodeId>> {
    if src == dst {
        return None;
    }
    let usable = |from: NodeId, to: NodeId| {
        let endpoint = to == src || to == dst;
        let direct = (from == src && to == dst) || (from == dst && to == src);
        (endpoint || !blocked[to.index()]) && (allow_direct || !direct)
    };
    // Distances to dst, then a greedy walk from src over smallest ids.
    let mut dist: Vec<Option<u32>> = vec![None; adj.len()];
    dist[dst.index()] = Some(0);
    let mut queue = VecDeque::from([dst]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u.index()].unwrap_or(0);
        for &v in &adj[u.index()] {
            if dist[v.index()].is_none() && usable(u, v) {
                dist[v.index()] = Some(d + 1);
                if v != src {
                    queue.push_back(v);
                }
            }
        }
    }
    let mut remaining = dist[src.index()]?;
    let mut path = vec![src];
    let mut cur = src;
    while cur != dst {
        let next = adj[cur.index()]
            .iter()
            .copied()
            .filter(|&v| usable(cur, v) && dist[v.index()] == Some(remaining - 1))
            .min()?;
        path.push(next);
        cur = next;
        remaining -= 1;
    }
    Some(path)
}

/// Up to `k` node-disjoint paths from `src` to `dst`.
///
/// Paths are extracted one at a time, shortest first with ties broken by the
/// smaller node-id sequence, removing each path's relays before the next
/// pick. A candidate is only taken if the remaining graph still holds enough
/// disjoint paths to reach `min(k, max)`, where `max` comes from a unit
/// capacity flow. When plain greedy extraction already reaches that count the
/// result is identical to it; otherwise (a short path cutting off two longer
/// ones) the earliest feasible candidate is taken instead.
pub fn k_disjoint_paths_in(adj: &[Vec<NodeId>], src: NodeId, dst: NodeId, k: usize) -> Result<PathSet> {
    if k == 0 {
        return Err(Error::config("k", "must be at least 1"));
    }
    if src.index() >= adj.len() {
        return Err(Error::UnknownNode(src));
    }
    if dst.index() >= adj.len() {
        return Err(Error::UnknownNode(dst));
    }
    let mut blocked = vec![false; adj.len()];
    let mut direct = true;
    let target = max_disjoint(adj, src, dst, &blocked, direct, k);
    if target == 0 {
        return Err(Error::NoPath { src, dst });
    }
    let mut paths: Vec<Vec<NodeId>> = Vec::with_capacity(target);
    while paths.len() < target {
        let still_needed = target - paths.len() - 1;
        let pick = first_path_where(adj, src, dst, &blocked, direct, CANDIDATE_LIMIT, |p| {
            if still_needed == 0 {
                return true;
            }
            let mut after = blocked.clone();
            for relay in &p[1..p.len() - 1] {
                after[relay.index()] = true;
            }
            max_disjoint(adj, src, dst, &after, direct && p.len() > 2, still_needed) >= still_needed
        });
        match pick {
            Some(path) => {
                if path.len() == 2 {
                    direct = false;
                }
                for relay in &path[1..path.len() - 1] {
                    blocked[relay.index()] = true;
                }
                paths.push(path);
            }
            None => {
                // Candidate budget exhausted: finish with any optimal family.
                let rest = restricted(adj, src, dst, &blocked, direct);
                let mut tail = min_cost_disjoint(&rest, src, dst, target - paths.len());
                tail.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
                paths.extend(tail);
            }
        }
    }
    Ok(PathSet::new(paths))
}

/// Simple paths tried per pick before falling back to min-cost flow.
const CANDIDATE_LIMIT: usize = 4096;

/// Adjacency with blocked relays removed and, unless `direct`, the src-dst edge.
fn restricted(adj: &[Vec<NodeId>], src: NodeId, dst: NodeId, blocked: &[bool], direct: bool) -> Vec<Vec<NodeId>> {
    let keep = |v: NodeId| v == src || v == dst || !blocked[v.index()];
    adj.iter()
        .enumerate()
        .map(|(u, list)| {
            let u = NodeId(u as u32);
            if !keep(u) {
                return Vec::new();
            }
            list.iter()
                .copied()
                .filter(|&v| keep(v))
                .filter(|&v| direct || !((u == src && v == dst) || (u == dst && v == src)))
                .collect()
        })
        .collect()
}

/// Number of node-disjoint paths left, capped at `limit`.
fn max_disjoint(adj: &[Vec<NodeId>], src: NodeId, dst: NodeId, blocked: &[bool], direct: bool, limit: usize) -> usize {
    if limit == 0 {
        return 0;
    }
    min_cost_disjoint(&restricted(adj, src, dst, blocked, direct), src, dst, limit).len()
}

/// The first simple path in (length, node-id sequence) order that satisfies
/// `accept`, trying at most `budget` candidates.
fn first_path_where(
    adj: &[Vec<NodeId>],
    src: NodeId,
    dst: NodeId,
    blocked: &[bool],
    direct: bool,
    budget: usize,
    mut accept: impl FnMut(&[NodeId]) -> bool,
) -> Option<Vec<NodeId>> {
    let adj = restricted(adj, src, dst, blocked, direct);
    let sorted: Vec<Vec<NodeId>> = adj
        .iter()
        .map(|l| {
            let mut l = l.clone();
            l.sort_unstable();
            l
        })
        .collect();
    // Hop distance to dst, never routing through src.
    let mut dist: Vec<Option<usize>> = vec![None; adj.len()];
    dist[dst.index()] = Some(0);
    let mut queue = VecDeque::from([dst]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u.index()].unwrap_or(0);
        for &v in &sorted[u.index()] {
            if dist[v.index()].is_none() {
                dist[v.index()] = Some(d + 1);
                if v != src {
                    queue.push_back(v);
                }
            }
        }
    }
    let shortest = dist[src.index()]?;
    let mut tried = 0usize;
    let mut on_path = vec![false; adj.len()];
    on_path[src.index()] = true;
    for len in shortest..adj.len() {
        let mut path = vec![src];
        let mut search = Search {
            adj: &sorted,
            dist: &dist,
            dst,
            len,
            tried: &mut tried,
            budget,
        };
        match search.walk(&mut path, &mut on_path, &mut accept) {
            Walk::Found => return Some(path),
            Walk::OutOfBudget => return None,
            Walk::Exhausted => {}
        }
    }
    None
}

enum Walk {
    Found,
    Exhausted,
    OutOfBudget,
}

struct Search<'a> {
    adj: &'a [Vec<NodeId>],
    dist: &'a [Option<usize>],
    dst: NodeId,
    len: usize,
    tried: &'a mut usize,
    budget: usize,
}

impl Search<'_> {
    fn walk(&mut self, path: &mut Vec<NodeId>, on_path: &mut [bool], accept: &mut impl FnMut(&[NodeId]) -> bool) -> Walk {
        let u = *path.last().expect("path starts at src");
        let used = path.len() - 1;
        if u == self.dst {
            if used != self.len {
                return Walk::Exhausted;
            }
            *self.tried += 1;
            if accept(path) {
                return Walk::Found;
            }
            return if *self.tried >= self.budget { Walk::OutOfBudget } else { Walk::Exhausted };
        }
        let left = self.len - used;
        for &v in &self.adj[u.index()] {
            if on_path[v.index()] || (v == self.dst) != (left == 1) {
                continue;
            }
            if !self.dist[v.index()].is_some_and(|d| d < left) {
                continue;
            }
            path.push(v);
            on_path[v.index()] = true;
            let r = self.walk(path, on_path, accept);
            if matches!(r, Walk::Found) {
                return r;
            }
            path.pop();
            on_path[v.index()] = false;
            if matches!(r, Walk::OutOfBudget) {
                return r;
            }
        }
        Walk::Exhausted
    }
}

/// [`k_disjoint_paths_in`] over the live graph of `field`.
pub fn k_disjoint_paths(field: &Field, src: NodeId, dst: NodeId, k: usize) -> Result<PathSet> {
    field.node(src)?;
    field.node(dst)?;
    k_disjoint_paths_in(&field.live_adjacency(), src, dst, k)
}

struct Edge {
    to: usize,
    cap: i32,
    cost: i32,
    rev: usize,
}

struct FlowGraph {
    edges: Vec<Vec<Edge>>,
}

impl FlowGraph {
    fn add(&mut self, from: usize, to: usize, cap: i32, cost: i32) {
        let rev_from = self.edges[to].len();
        let rev_to = self.edges[from].len();
        self.edges[from].push(Edge { to, cap, cost, rev: rev_from });
        self.edges[to].push(Edge { to: from, cap: 0, cost: -cost, rev: rev_to });
    }
}

/// Successive shortest augmenting paths on the node-split graph; each unit of
/// flow is one path, and each relay's split edge has capacity 1.
fn min_cost_disjoint(adj: &[Vec<NodeId>], src: NodeId, dst: NodeId, k: usize) -> Vec<Vec<NodeId>> {
    let n = adj.len();
    let node_in = |v: usize| 2 * v;
    let node_out = |v: usize| 2 * v + 1;
    let mut g = FlowGraph {
        edges: (0..2 * n).map(|_| Vec::new()).collect(),
    };
    for v in 0..n {
        let cap = if v == src.index() || v == dst.index() { k as i32 } else { 1 };
        g.add(node_in(v), node_out(v), cap, 0);
    }
    let mut links = Vec::new();
    for (u, list) in adj.iter().enumerate() {
        for v in list {
            if v.index() != src.index() && u != dst.index() {
                links.push((u, *v, g.edges[node_out(u)].len()));
                g.add(node_out(u), node_in(v.index()), 1, 1);
            }
        }
    }
    let source = node_out(src.index());
    let sink = node_in(dst.index());
    let mut units = 0;
    while units < k {
        // Bellman-Ford (queue based); residual costs can be negative.
        let mut dist = vec![i32::MAX; 2 * n];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; 2 * n];
        let mut in_queue = vec![false; 2 * n];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            in_queue[u] = false;
            for (i, e) in g.edges[u].iter().enumerate() {
                if e.cap > 0 && dist[u] + e.cost < dist[e.to] {
                    dist[e.to] = dist[u] + e.cost;
                    prev[e.to] = Some((u, i));
                    if !in_queue[e.to] {
                        in_queue[e.to] = true;
                        queue.push_back(e.to);
                    }
                }
            }
        }
        if dist[sink] == i32::MAX {
            break;
        }
        let mut v = sink;
        while let Some((u, i)) = prev[v] {
            g.edges[u][i].cap -= 1;
            let rev = g.edges[u][i].rev;
            g.edges[v][rev].cap += 1;
            v = u;
        }
        units += 1;
    }

    // Saturated links form `units` edge-disjoint walks from src to dst.
    let mut next: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (u, v, i) in links {
        if g.edges[node_out(u)][i].cap == 0 {
            next[u].push(v);
        }
    }
    for list in &mut next {
        list.sort_unstable_by(|a, b| b.cmp(a));
    }
    let mut paths = Vec::with_capacity(units);
    for _ in 0..units {
        let mut path = vec![src];
        let mut u = src;
        while u != dst {
            let Some(v) = next[u.index()].pop() else { break };
            path.push(v);
            u = v;
        }
        paths.push(path);
    }
    paths
}
