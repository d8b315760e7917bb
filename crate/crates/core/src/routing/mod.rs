//! Route discovery and multi-path construction.

mod disjoint;
mod ers;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::NodeId;

pub use disjoint::{k_disjoint_paths, k_disjoint_paths_in, shortest_path_in};
pub use ers::{ers_discover, flood, Discovery, FloodKind, FloodOutcome, Radio, RingReport, DEFAULT_TTL_SCHEDULE};
pub(crate) use ers::{install_routes, unicast};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteRequest {
    pub origin: NodeId,
    pub destination: NodeId,
    pub ttl: u32,
    pub broadcast_id: u32,
    pub created_at: f64,
}

/// One row of a node's path table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteEntry {
    pub destination: NodeId,
    pub next_hop: NodeId,
    pub hop_count: u32,
    pub established_at: f64,
}

/// Node-disjoint paths from one source to the base station, used round-robin.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathSet {
    paths: Vec<Vec<NodeId>>,
    cursor: usize,
}

impl PathSet {
    pub fn new(paths: Vec<Vec<NodeId>>) -> Self {
        PathSet { paths, cursor: 0 }
    }

    pub fn paths(&self) -> &[Vec<NodeId>] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn path(&self, index: usize) -> &[NodeId] {
        &self.paths[index]
    }

    /// Whether any path passes through `id` (endpoints included).
    pub fn touches(&self, id: NodeId) -> bool {
        self.paths.iter().any(|p| p.contains(&id))
    }

    /// Intermediate nodes of every path.
    pub fn relays(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.paths
            .iter()
            .flat_map(|p| p.iter().skip(1).take(p.len().saturating_sub(2)).copied())
    }

    /// True when no intermediate node is shared between two paths.
    pub fn is_disjoint(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.relays().all(|id| seen.insert(id))
    }

    /// Hand out the next `n` packets round-robin; packet `i` goes to path
    /// `(cursor + i) mod len`.
    pub fn assign_packets(&mut self, n: usize) -> Result<Vec<usize>> {
        if self.paths.is_empty() {
            return Err(Error::EmptyPathSet);
        }
        let k = self.paths.len();
        let out = (0..n).map(|i| (self.cursor + i) % k).collect();
        self.cursor = (self.cursor + n) % k;
        Ok(out)
    }

    /// `event_time,src,path_index,node_sequence` rows (no header), node
    /// sequence joined with `-`.
    pub fn write_csv_rows<W: Write>(&self, mut out: W, event_time: f64, src: NodeId) -> io::Result<()> {
        for (i, p) in self.paths.iter().enumerate() {
            let seq: Vec<String> = p.iter().map(ToString::to_string).collect();
            writeln!(out, "{event_time},{src},{i},{}", seq.join("-"))?;
        }
        Ok(())
    }
}

pub const PATHSET_CSV_HEADER: &str = "event_time,src,path_index,node_sequence";

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(k: usize) -> PathSet {
        PathSet::new((0..k).map(|i| vec![NodeId(99), NodeId(i as u32), NodeId(0)]).collect())
    }

    #[test]
    fn round_robin_examples() {
        let mut two = set(2);
        assert_eq!(two.assign_packets(4).unwrap(), vec![0, 1, 0, 1]);
        let mut three = set(3);
        assert_eq!(three.assign_packets(2).unwrap(), vec![0, 1]);
        assert_eq!(three.cursor(), 2);
        assert_eq!(three.assign_packets(2).unwrap(), vec![2, 0]);
        assert_eq!(PathSet::default().assign_packets(1), Err(Error::EmptyPathSet));
    }

    #[test]
    fn disjointness_check() {
        assert!(set(3).is_disjoint());
        let shared = PathSet::new(vec![
            vec![NodeId(5), NodeId(1), NodeId(0)],
            vec![NodeId(5), NodeId(1), NodeId(2), NodeId(0)],
        ]);
        assert!(!shared.is_disjoint());
    }

    #[test]
    fn csv_rows() {
        let mut buf = Vec::new();
        set(2).write_csv_rows(&mut buf, 1.5, NodeId(99)).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1.5,99,0,99-0-0\n1.5,99,1,99-1-0\n");
    }

    proptest! {
        #[test]
        fn loads_differ_by_at_most_one(k in 1usize..6, start in 0usize..6, n in 0usize..200) {
            let mut ps = set(k);
            ps.assign_packets(start).unwrap();
            let mut counts = vec![0usize; k];
            for i in ps.assign_packets(n).unwrap() {
                counts[i] += 1;
            }
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            prop_assert!(hi - lo <= 1);
        }
    }
}
