//! Cluster-head data filtering.

use crate::model::{NodeState, Packet, PacketKind};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub forwarded: Vec<Packet>,
    /// Data packets suppressed because their reading had not moved enough.
    pub dropped: u64,
}

/// Forwards a data packet iff its reading differs from the last reading
/// forwarded for the same originating node by more than `threshold`.
/// Forwarding updates that node's `last_forwarded_reading`. Heartbeats are
/// consumed here and never forwarded.
pub fn ch_filter(nodes: &mut [NodeState], incoming: Vec<Packet>, threshold: f64) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for packet in incoming {
        if packet.kind != PacketKind::Data {
            continue;
        }
        let (Some(origin), Some(reading)) = (packet.origin(), packet.reading()) else {
            continue;
        };
        let last = &mut nodes[origin.index()].last_forwarded_reading;
        if (reading - *last).abs() > threshold {
            *last = reading;
            out.forwarded.push(packet);
        } else {
            out.dropped += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Address, NodeId, Position};

    fn setup(last: f64) -> Vec<NodeState> {
        let mut n = vec![NodeState::new(NodeId(0), Position::default(), 1.0), NodeState::new(NodeId(1), Position::default(), 1.0)];
        n[1].last_forwarded_reading = last;
        n
    }

    fn data(reading: f64) -> Packet {
        Packet::data(NodeId(1), Address::Node(NodeId(0)), 4096, reading, 0.0)
    }

    #[test]
    fn unchanged_reading_is_dropped() {
        let mut nodes = setup(10.0);
        let out = ch_filter(&mut nodes, vec![data(10.0)], 0.5);
        assert!(out.forwarded.is_empty());
        assert_eq!(out.dropped, 1);
        assert_eq!(nodes[1].last_forwarded_reading, 10.0);
    }

    #[test]
    fn changed_reading_is_forwarded() {
        let mut nodes = setup(10.0);
        let out = ch_filter(&mut nodes, vec![data(11.0)], 0.5);
        assert_eq!(out.forwarded.len(), 1);
        assert_eq!(nodes[1].last_forwarded_reading, 11.0);
    }

    #[test]
    fn first_reading_always_passes() {
        let mut nodes = setup(crate::model::NO_FORWARDED_READING);
        let out = ch_filter(&mut nodes, vec![data(-3.0)], 1e9);
        assert_eq!(out.forwarded.len(), 1);
    }

    #[test]
    fn two_round_trace() {
        // Round 1: 10.0 (first, forwarded), 10.3 (|0.3| <= 0.5, dropped).
        // Round 2: 10.6 (|0.6| vs last forwarded 10.0, forwarded), 10.9 (|0.3|, dropped).
        let mut nodes = setup(crate::model::NO_FORWARDED_READING);
        let r1 = ch_filter(&mut nodes, vec![data(10.0), data(10.3)], 0.5);
        assert_eq!((r1.forwarded.len(), r1.dropped), (1, 1));
        let r2 = ch_filter(&mut nodes, vec![data(10.6), data(10.9)], 0.5);
        assert_eq!((r2.forwarded.len(), r2.dropped), (1, 1));
        assert_eq!(r2.forwarded[0].reading(), Some(10.6));
        assert_eq!(nodes[1].last_forwarded_reading, 10.6);
    }

    #[test]
    fn heartbeats_vanish() {
        let mut nodes = setup(0.0);
        let hb = Packet::heartbeat(NodeId(1), NodeId(0), 64, 0.0);
        assert_eq!(ch_filter(&mut nodes, vec![hb], 0.5), FilterOutcome::default());
    }
}
