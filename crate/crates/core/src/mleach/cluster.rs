//! Cluster formation and intra-cluster TDMA schedules.

use std::collections::BTreeMap;

use crate::engine::SimTime;
use crate::mobility::distance;
use crate::model::{NodeId, Role};
use crate::network::{Endpoint, Network};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Clusters {
    /// Cluster head -> members sorted by id.
    pub members: BTreeMap<NodeId, Vec<NodeId>>,
    pub orphans: Vec<NodeId>,
}

impl Clusters {
    pub fn cluster_of(&self, cm: NodeId) -> Option<NodeId> {
        self.members.iter().find(|(_, ms)| ms.binary_search(&cm).is_ok()).map(|(ch, _)| *ch)
    }
}

/// Each cluster head broadcasts a hello at `rc`; every alive non-head that
/// heard at least one joins the nearest head (ties to the smaller id).
/// Alive nodes that heard none become orphans.
pub fn form_clusters(net: &mut Network, chs: &[NodeId], rc: f64, hello_bits: u64) -> Clusters {
    let mut heard_from: Vec<Vec<NodeId>> = vec![Vec::new(); net.nodes.len()];
    let mut live_chs = Vec::new();
    for &ch in chs {
        if !net.node(ch).is_alive() {
            continue;
        }
        let listeners = net.alive_within(Endpoint::Node(ch), rc);
        if let Some(heard) = net.broadcast(Endpoint::Node(ch), hello_bits, rc, listeners) {
            for id in heard {
                heard_from[id.index()].push(ch);
            }
            if net.node(ch).is_alive() {
                live_chs.push(ch);
            }
        }
    }

    let mut clusters = Clusters::default();
    for &ch in &live_chs {
        clusters.members.insert(ch, Vec::new());
    }
    #[allow(clippy::needless_range_loop)] // the body re-borrows `net.nodes` mutably
    for i in 0..net.nodes.len() {
        let node = &net.nodes[i];
        if !node.is_alive() || node.role == Role::ClusterHead {
            continue;
        }
        let pos = node.position;
        let nearest = heard_from[i]
            .iter()
            .filter(|ch| clusters.members.contains_key(ch))
            .map(|&ch| (distance(pos, net.node(ch).position), ch))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let id = node.id;
        match nearest {
            Some((_, ch)) => {
                net.nodes[i].set_role(Role::ClusterMember, Some(ch));
                clusters.members.get_mut(&ch).expect("live head").push(id);
            }
            None => {
                net.nodes[i].set_role(Role::OrphanDirect, None);
                clusters.orphans.push(id);
            }
        }
    }
    clusters
}

#[derive(Debug, Clone, PartialEq)]
pub struct TdmaSchedule {
    pub ch: NodeId,
    /// `(member, slot)` in slot order.
    pub slots: Vec<(NodeId, usize)>,
    pub slot_us: u64,
}

impl TdmaSchedule {
    pub fn slot_start(&self, round_start: SimTime, slot: usize) -> SimTime {
        SimTime(round_start.0 + self.slot_us * slot as u64)
    }

    /// True when no two members share a slot.
    pub fn is_collision_free(&self) -> bool {
        let mut seen: Vec<usize> = self.slots.iter().map(|s| s.1).collect();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

/// Members sorted by id take slots `0..m`.
pub fn assign_slots(members: &[NodeId]) -> Vec<(NodeId, usize)> {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.into_iter().enumerate().map(|(slot, id)| (id, slot)).collect()
}

/// Builds the cluster's schedule and broadcasts it at `rc` to the members.
/// The data sub-phase of `data_phase_us` is split evenly between slots.
pub fn build_tdma(
    net: &mut Network,
    ch: NodeId,
    members: &[NodeId],
    schedule_bits_per_cm: u64,
    rc: f64,
    data_phase_us: u64,
) -> TdmaSchedule {
    let slots = assign_slots(members);
    let m = slots.len() as u64;
    if m == 0 {
        return TdmaSchedule { ch, slots, slot_us: data_phase_us };
    }
    let receivers: Vec<NodeId> = slots.iter().map(|s| s.0).collect();
    net.broadcast(Endpoint::Node(ch), schedule_bits_per_cm * m, rc, receivers);
    TdmaSchedule { ch, slots, slot_us: data_phase_us / m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::RadioModel;
    use crate::model::Position;

    fn network(pos: &[(f64, f64)]) -> Network {
        let pos: Vec<Position> = pos.iter().map(|&(x, y)| Position::new(x, y)).collect();
        Network::new(&pos, 100.0, RadioModel::default(), Position::new(0.0, 0.0))
    }

    fn make_heads(net: &mut Network, chs: &[u32]) -> Vec<NodeId> {
        chs.iter()
            .map(|&c| {
                net.nodes[c as usize].role = Role::ClusterHead;
                NodeId(c)
            })
            .collect()
    }

    #[test]
    fn equidistant_member_joins_smaller_id() {
        let mut pos = vec![(0.0, 0.0); 10];
        pos[4] = (0.0, 0.0);
        pos[9] = (200.0, 0.0);
        pos[0] = (100.0, 0.0);
        for (i, p) in pos.iter_mut().enumerate().skip(1).filter(|(i, _)| *i != 4 && *i != 9) {
            *p = (5000.0 + i as f64, 5000.0);
        }
        let mut net = network(&pos);
        let chs = make_heads(&mut net, &[4, 9]);
        let c = form_clusters(&mut net, &chs, 500.0, 64);
        assert_eq!(c.cluster_of(NodeId(0)), Some(NodeId(4)));
        assert_eq!(net.nodes[0].cluster_of, Some(NodeId(4)));
    }

    #[test]
    fn node_beyond_rc_is_orphan() {
        let mut net = network(&[(0.0, 0.0), (501.0, 0.0), (0.0, 501.0)]);
        let chs = make_heads(&mut net, &[0]);
        let c = form_clusters(&mut net, &chs, 500.0, 64);
        assert_eq!(c.orphans, vec![NodeId(1), NodeId(2)]);
        assert_eq!(net.nodes[1].role, Role::OrphanDirect);
        assert!(c.members[&NodeId(0)].is_empty());
    }

    #[test]
    fn hello_charges_sender_and_listeners() {
        let mut net = network(&[(0.0, 0.0), (100.0, 0.0), (900.0, 0.0)]);
        let chs = make_heads(&mut net, &[0]);
        form_clusters(&mut net, &chs, 500.0, 64);
        let r = RadioModel::default();
        assert!((net.ledger.consumed_j(0) - r.tx_joules(64, 500.0)).abs() < 1e-18);
        assert!((net.ledger.consumed_j(1) - r.rx_energy(64)).abs() < 1e-18);
        assert_eq!(net.ledger.consumed_j(2), 0.0);
    }

    #[test]
    fn slots_follow_sorted_ids() {
        assert_eq!(assign_slots(&[NodeId(7), NodeId(3), NodeId(9)]), vec![(NodeId(3), 0), (NodeId(7), 1), (NodeId(9), 2)]);
    }

    #[test]
    fn empty_cluster_has_no_broadcast() {
        let mut net = network(&[(0.0, 0.0)]);
        let s = build_tdma(&mut net, NodeId(0), &[], 16, 500.0, 2_000_000);
        assert!(s.slots.is_empty());
        assert_eq!(net.ledger.total_consumed_j(), 0.0);
    }

    #[test]
    fn schedule_divides_phase() {
        let mut net = network(&[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0), (30.0, 0.0), (40.0, 0.0), (50.0, 0.0)]);
        let members: Vec<NodeId> = (1..6).map(NodeId).collect();
        let s = build_tdma(&mut net, NodeId(0), &members, 16, 500.0, 2_000_000);
        assert_eq!(s.slots.len(), 5);
        assert!(s.is_collision_free());
        assert_eq!(s.slot_us, 400_000);
        assert_eq!(s.slot_start(SimTime::from_secs(4), 2), SimTime(4_800_000));
        let r = RadioModel::default();
        assert!((net.ledger.consumed_j(0) - r.tx_joules(80, 500.0)).abs() < 1e-18);
    }
}
