//! Round-based clustering protocol: election, clusters, TDMA, filtering and
//! multi-hop routing between cluster heads.

pub mod cluster;
pub mod election;
pub mod filter;
pub mod routing;

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use crate::engine::SimTime;
use crate::metrics::RoundSample;
use crate::model::{Address, NodeId, Packet, Role};
use crate::network::{Endpoint, TxOutcome};
use crate::sim::World;

pub use cluster::{assign_slots, build_tdma, form_clusters, Clusters, TdmaSchedule};
pub use election::{ch_threshold, elect_cluster_heads, ElectionError};
pub use filter::{ch_filter, FilterOutcome};
pub use routing::{build_ch_graph, shortest_route, ChGraph, GraphError, Route, Vertex};

/// Everything decided during one round's setup phase.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundContext {
    pub round: u64,
    pub started_at: SimTime,
    pub cluster_heads: Vec<NodeId>,
    pub clusters: Clusters,
    /// Schedule of every cluster with at least one member.
    pub tdma: BTreeMap<NodeId, TdmaSchedule>,
    pub ch_graph: ChGraph,
    /// Route of each head in the graph, computed once per round.
    pub routes: BTreeMap<NodeId, Route>,
}

#[derive(Debug, Clone)]
pub struct MleachState {
    rng: ChaCha8Rng,
    next_round: u64,
    pub ctx: Option<RoundContext>,
}

impl MleachState {
    /// `rng` is the election stream.
    pub fn new(rng: ChaCha8Rng) -> Self {
        Self { rng, next_round: 0, ctx: None }
    }

    pub fn rounds_started(&self) -> u64 {
        self.next_round
    }

    /// Setup phase. Returns the member slots to fire, in time order.
    pub fn start_round(&mut self, w: &mut World) -> Vec<(NodeId, SimTime)> {
        let r = self.next_round;
        self.next_round += 1;
        let t0 = w.net.now;
        let alive = w.net.alive_count();
        if alive == 0 {
            self.ctx = None;
            w.metrics.rounds.push(RoundSample { round: r, t_s: t0.as_secs_f64(), alive, cluster_heads: 0 });
            return Vec::new();
        }

        let cfg = &w.cfg;
        let chs = elect_cluster_heads(&mut w.net.nodes, r, cfg.p_ch_fraction, cfg.ch_exclusion_rounds, &mut self.rng)
            .expect("fraction validated");
        let clusters = form_clusters(&mut w.net, &chs, cfg.cluster_radius_rc_m, cfg.hello_bits);

        let mut tdma = BTreeMap::new();
        let mut slots = Vec::new();
        for (&ch, members) in &clusters.members {
            if members.is_empty() || !w.net.node(ch).is_alive() {
                continue;
            }
            let s = build_tdma(&mut w.net, ch, members, cfg.schedule_bits_per_cm, cfg.cluster_radius_rc_m, cfg.round_us());
            w.audit.check_tdma(s.is_collision_free());
            slots.extend(s.slots.iter().map(|&(cm, slot)| (cm, s.slot_start(t0, slot))));
            tdma.insert(ch, s);
        }
        slots.sort_by_key(|&(cm, at)| (at, cm));

        let ch_graph = build_ch_graph(&mut w.net, &chs, cfg.radio_range_rr_m, cfg.hello_bits);
        let routes = chs.iter().map(|&ch| (ch, shortest_route(&ch_graph, ch))).collect();
        let heads = chs.iter().filter(|&&c| w.net.node(c).is_alive()).count();
        w.metrics.rounds.push(RoundSample { round: r, t_s: t0.as_secs_f64(), alive, cluster_heads: heads });

        self.ctx = Some(RoundContext { round: r, started_at: t0, cluster_heads: chs, clusters, tdma, ch_graph, routes });
        w.settle_deaths();
        self.flush_immediate(w);
        slots
    }

    /// Heads and orphans transmit as soon as they have readings; members wait for their slot.
    pub fn on_readings(&mut self, w: &mut World) {
        self.flush_immediate(w);
    }

    fn flush_immediate(&mut self, w: &mut World) {
        let Some(ctx) = &self.ctx else { return };
        for i in 0..w.net.nodes.len() {
            if w.pending[i].is_empty() {
                continue;
            }
            let id = NodeId::from(i);
            match w.net.nodes[i].role {
                Role::ClusterHead => {
                    let packets = take_data(w, id, Address::BaseStation);
                    ch_forward(w, ctx, id, packets);
                }
                Role::OrphanDirect => {
                    for p in take_data(w, id, Address::BaseStation) {
                        send_direct(w, id, p);
                    }
                }
                Role::ClusterMember | Role::Dead => {}
            }
        }
    }

    /// A member's TDMA slot: data if it has any, a heartbeat otherwise.
    pub fn on_slot(&mut self, w: &mut World, cm: NodeId) {
        let Some(ctx) = &self.ctx else { return };
        let node = w.net.node(cm);
        let Some(ch) = node.cluster_of.filter(|_| node.role == Role::ClusterMember) else {
            return;
        };
        let received = cm_slot_action(w, cm, ch);
        if !received.is_empty() {
            ch_forward(w, ctx, ch, received);
        }
        w.settle_deaths();
    }
}

/// Turns a node's pending readings into data packets.
fn take_data(w: &mut World, id: NodeId, dst: Address) -> Vec<Packet> {
    let now = w.now_s();
    let bits = w.cfg.packet_size_bits;
    let readings = std::mem::take(&mut w.pending[id.index()]);
    w.metrics.data_packets_generated += readings.len() as u64;
    readings.into_iter().map(|r| Packet::data(id, dst, bits, r, now)).collect()
}

/// Sends the member's pending data (or a heartbeat) to its head and returns
/// the data packets the head actually received.
pub fn cm_slot_action(w: &mut World, cm: NodeId, ch: NodeId) -> Vec<Packet> {
    if !w.net.node(cm).is_alive() {
        return Vec::new();
    }
    let (from, to) = (Endpoint::Node(cm), Endpoint::Node(ch));
    if w.pending[cm.index()].is_empty() {
        let hb = Packet::heartbeat(cm, ch, w.cfg.heartbeat_bits, w.now_s());
        w.net.transmit(from, to, hb.size_bits);
        return Vec::new();
    }
    let mut received = Vec::new();
    for p in take_data(w, cm, Address::Node(ch)) {
        match w.net.transmit(from, to, p.size_bits) {
            TxOutcome::Delivered => received.push(p),
            _ => w.metrics.dropped_dead += 1,
        }
    }
    received
}

/// Filters at the head and routes the survivors to the base station.
fn ch_forward(w: &mut World, ctx: &RoundContext, ch: NodeId, packets: Vec<Packet>) {
    let threshold = w.cfg.filter_threshold;
    let out = ch_filter(&mut w.net.nodes, packets, threshold);
    w.metrics.dropped_filtered += out.dropped;
    for p in out.forwarded {
        let origin = p.origin().expect("data packet");
        w.audit.observe_forward(origin, p.reading().expect("data packet"), threshold);
        let route = ctx.routes.get(&ch).unwrap_or(&Route::Unreachable);
        deliver_via(w, route, p);
    }
}

/// Relays one packet along `route`; every hop pays transmission at the hop
/// distance and the receiver pays reception.
pub fn deliver_via(w: &mut World, route: &Route, packet: Packet) {
    let Some(hops) = route.hops() else {
        w.metrics.dropped_unreachable += 1;
        return;
    };
    for pair in hops.windows(2) {
        if w.net.transmit(pair[0].into(), pair[1].into(), packet.size_bits) != TxOutcome::Delivered {
            w.metrics.dropped_dead += 1;
            return;
        }
    }
    w.metrics.record_bs_rx(w.net.now, &packet);
}

/// Orphans talk straight to the base station when it is within radio range.
pub fn send_direct(w: &mut World, id: NodeId, packet: Packet) {
    if w.net.distance(Endpoint::Node(id), Endpoint::Bs) > w.cfg.radio_range_rr_m {
        w.metrics.dropped_unreachable += 1;
        return;
    }
    match w.net.transmit(Endpoint::Node(id), Endpoint::Bs, packet.size_bits) {
        TxOutcome::Delivered => w.metrics.record_bs_rx(w.net.now, &packet),
        _ => w.metrics.dropped_dead += 1,
    }
}

/// Setup plus every member slot of one round, back to back at the current
/// instant. Slot timing only matters to the event-driven run.
pub fn execute_round(state: &mut MleachState, w: &mut World) {
    for (cm, _) in state.start_round(w) {
        state.on_slot(w, cm);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate_config, BsPosition, SimConfig};
    use crate::energy::RadioModel;
    use crate::model::Position;
    use crate::network::Network;
    use rand::SeedableRng;

    fn world(positions: &[(f64, f64)], bs: (f64, f64)) -> World {
        let cfg = validate_config(SimConfig {
            field_width_m: 3000.0,
            field_height_m: 3000.0,
            node_count: positions.len(),
            bs_position: BsPosition::Fixed(Position::new(bs.0, bs.1)),
            ..SimConfig::default()
        })
        .unwrap();
        let pos: Vec<Position> = positions.iter().map(|&(x, y)| Position::new(x, y)).collect();
        let net = Network::new(&pos, cfg.initial_energy_j, RadioModel::from_config(&cfg), cfg.bs());
        World::new(cfg, net)
    }

    #[test]
    fn dead_network_round_is_noop() {
        let mut w = world(&[(0.0, 0.0), (10.0, 0.0)], (100.0, 0.0));
        for n in &mut w.net.nodes {
            n.role = Role::Dead;
            n.energy_j = 0.0;
        }
        let mut s = MleachState::new(ChaCha8Rng::seed_from_u64(0));
        execute_round(&mut s, &mut w);
        assert_eq!(w.metrics.packets_at_bs, 0);
        assert_eq!(w.net.ledger.total_consumed_j(), 0.0);
        assert_eq!(w.metrics.rounds[0].cluster_heads, 0);
    }

    #[test]
    fn single_cluster_delivers_one_packet() {
        // Round 19 of the epoch elects every eligible node, so pin node 1
        // out of G and let node 0 be the only head.
        let mut w = world(&[(1000.0, 1000.0), (1100.0, 1000.0)], (1500.0, 1000.0));
        w.net.nodes[1].exclusion_remaining = 5;
        let mut s = MleachState::new(ChaCha8Rng::seed_from_u64(0));
        s.next_round = 19;
        w.pending[1].push(42.0);
        execute_round(&mut s, &mut w);
        let ctx = s.ctx.as_ref().unwrap();
        assert_eq!(ctx.cluster_heads, vec![NodeId(0)]);
        assert_eq!(ctx.clusters.members[&NodeId(0)], vec![NodeId(1)]);
        assert_eq!(w.metrics.packets_at_bs, 1);
        assert_eq!(w.metrics.data_packets_generated, 1);
        assert_eq!(w.audit.filter_checks, 1);
    }

    #[test]
    fn member_without_data_sends_heartbeat() {
        let mut w = world(&[(1000.0, 1000.0), (1100.0, 1000.0)], (1500.0, 1000.0));
        w.net.nodes[1].exclusion_remaining = 5;
        let mut s = MleachState::new(ChaCha8Rng::seed_from_u64(0));
        s.next_round = 19;
        let before = w.net.ledger.clone();
        s.start_round(&mut w);
        let setup_cm = w.net.ledger.consumed_j(1) - before.consumed_j(1);
        s.on_slot(&mut w, NodeId(1));
        let r = w.net.radio;
        let hb = r.tx_joules(w.cfg.heartbeat_bits, 100.0);
        assert!((w.net.ledger.consumed_j(1) - setup_cm - hb).abs() < 1e-15);
        assert_eq!(w.metrics.data_packets_generated, 0);
    }

    #[test]
    fn orphan_beyond_range_is_unreachable() {
        let mut w = world(&[(0.0, 0.0), (2900.0, 2900.0)], (0.0, 100.0));
        let mut s = MleachState::new(ChaCha8Rng::seed_from_u64(0));
        s.next_round = 19;
        w.net.nodes[1].exclusion_remaining = 5;
        s.start_round(&mut w);
        assert_eq!(w.net.nodes[1].role, Role::OrphanDirect);
        w.pending[1].push(1.0);
        s.on_readings(&mut w);
        assert_eq!(w.metrics.dropped_unreachable, 1);
        assert_eq!(w.metrics.data_packets_generated, 1);
    }

    #[test]
    fn relay_head_pays_rx_and_tx() {
        // Heads 0 and 1 in a line toward the base station; 0 relays through 1.
        let mut w = world(&[(0.0, 0.0), (1000.0, 0.0)], (2000.0, 0.0));
        let mut s = MleachState::new(ChaCha8Rng::seed_from_u64(0));
        s.next_round = 19;
        s.start_round(&mut w);
        let before = w.net.ledger.clone();
        w.pending[0].push(5.0);
        s.on_readings(&mut w);
        let r = w.net.radio;
        let k = w.cfg.packet_size_bits;
        assert!((w.net.ledger.consumed_j(0) - before.consumed_j(0) - r.tx_joules(k, 1000.0)).abs() < 1e-12);
        let relay = r.rx_energy(k) + r.tx_joules(k, 1000.0);
        assert!((w.net.ledger.consumed_j(1) - before.consumed_j(1) - relay).abs() < 1e-12);
        assert_eq!(w.metrics.packets_at_bs, 1);
    }
}
