use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    Event,
    /// False packet of attack burst `burst` (0-based).
    False { burst: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: u64,
    pub source: NodeId,
    pub created_at: f64,
    pub kind: PacketKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    /// A legitimate event packet from the `pick`-th background source, or the
    /// next live one after it.
    BackgroundSend { pick: usize },
    /// A packet leaves its source.
    PacketSend { packet: Packet },
    /// A packet arrives at `path[hop]`.
    PacketHop { packet: Packet, path: Vec<NodeId>, hop: usize },
    AttackBurst { index: usize, attacker: NodeId },
    /// The base station floods newly flagged ids.
    BlacklistFlood { ids: BTreeSet<NodeId> },
    /// The blacklist flood reaches `node`.
    BlacklistInstall { node: NodeId, ids: BTreeSet<NodeId> },
    MetricSample { attack_index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub sequence: u64,
    pub kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.sequence.cmp(&other.sequence))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-queue on (time, sequence). Sequence numbers are handed out on push,
/// so events scheduled for the same instant pop in insertion order.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<std::cmp::Reverse<Event>>,
    next_sequence: u64,
}

impl EventQueue {
    pub fn push(&mut self, time: f64, kind: EventKind) -> u64 {
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.heap.push(std::cmp::Reverse(Event { time, sequence, kind }));
        sequence
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|r| r.0)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|r| r.0.time)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(q: &mut EventQueue, t: f64) {
        q.push(t, EventKind::MetricSample { attack_index: 0 });
    }

    #[test]
    fn ties_pop_in_insertion_order() {
        let mut q = EventQueue::default();
        sample(&mut q, 1.0);
        sample(&mut q, 0.5);
        sample(&mut q, 1.0);
        let order: Vec<(f64, u64)> = std::iter::from_fn(|| q.pop()).map(|e| (e.time, e.sequence)).collect();
        assert_eq!(order, vec![(0.5, 1), (1.0, 0), (1.0, 2)]);
    }

    proptest! {
        #[test]
        fn pops_are_sorted(times in proptest::collection::vec(0u32..50, 1..60), late in proptest::collection::vec(0u32..50, 0..20)) {
            let mut q = EventQueue::default();
            for &t in &times {
                sample(&mut q, f64::from(t));
            }
            let mut popped = Vec::new();
            let mut late = late.into_iter();
            while let Some(e) = q.pop() {
                // Inserting at or after the current time never reorders the past.
                if let Some(dt) = late.next() {
                    sample(&mut q, e.time + f64::from(dt));
                }
                popped.push((e.time, e.sequence));
            }
            prop_assert!(popped.windows(2).all(|w| w[0].0 <= w[1].0));
        }
    }
}
