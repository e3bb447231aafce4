//! Proactive distance-vector baseline with periodic full-table dumps.

use crate::model::{Address, NodeId, Packet};
use crate::network::{Endpoint, TxOutcome};
use crate::sim::World;

pub const INFINITE_METRIC: u32 = u32::MAX;

/// One row of a routing table. `seq` is even while the route is valid and
/// odd once a break has been detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DsdvEntry {
    pub dest: Endpoint,
    pub next_hop: Endpoint,
    pub metric: u32,
    pub seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Row {
    next_hop: Endpoint,
    metric: u32,
    seq: u64,
}

/// Table of one node (or the base station). Destinations are indexed by node
/// id, with the base station at index `node_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTable {
    rows: Vec<Option<Row>>,
}

fn dest_index(dest: Endpoint, node_count: usize) -> usize {
    match dest {
        Endpoint::Node(id) => id.index(),
        Endpoint::Bs => node_count,
    }
}

fn dest_of(idx: usize, node_count: usize) -> Endpoint {
    if idx == node_count {
        Endpoint::Bs
    } else {
        Endpoint::Node(NodeId::from(idx))
    }
}

impl RoutingTable {
    /// A table that knows only its owner, at metric 0 and sequence 0.
    pub fn new(owner: Endpoint, node_count: usize) -> Self {
        let mut rows = vec![None; node_count + 1];
        rows[dest_index(owner, node_count)] = Some(Row { next_hop: owner, metric: 0, seq: 0 });
        Self { rows }
    }

    fn node_count(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, dest: Endpoint) -> Option<DsdvEntry> {
        let r = self.rows[dest_index(dest, self.node_count())]?;
        Some(DsdvEntry { dest, next_hop: r.next_hop, metric: r.metric, seq: r.seq })
    }

    pub fn set(&mut self, e: DsdvEntry) {
        let n = self.node_count();
        self.rows[dest_index(e.dest, n)] = Some(Row { next_hop: e.next_hop, metric: e.metric, seq: e.seq });
    }

    /// Number of destinations with a row, which is what a full dump carries.
    pub fn len(&self) -> usize {
        self.rows.iter().filter(|r| r.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> impl Iterator<Item = DsdvEntry> + '_ {
        let n = self.node_count();
        self.rows.iter().enumerate().filter_map(move |(i, r)| {
            r.map(|r| DsdvEntry { dest: dest_of(i, n), next_hop: r.next_hop, metric: r.metric, seq: r.seq })
        })
    }
}

/// Merges a neighbor's advertisement into `table`.
///
/// An advertised `(dest, m, s)` is adopted through `from` with metric `m + 1`
/// iff `s` is newer than the local sequence, or equal with a strictly
/// shorter metric. The owner's own row is never replaced.
pub fn apply_update(table: &mut RoutingTable, owner: Endpoint, from: Endpoint, entries: &[DsdvEntry]) -> usize {
    let n = table.node_count();
    let own = dest_index(owner, n);
    let mut adopted = 0;
    for e in entries {
        let idx = dest_index(e.dest, n);
        if idx == own {
            continue;
        }
        let metric = e.metric.saturating_add(1);
        let take = match table.rows[idx] {
            None => true,
            Some(local) => e.seq > local.seq || (e.seq == local.seq && metric < local.metric),
        };
        if take {
            table.rows[idx] = Some(Row { next_hop: from, metric, seq: e.seq });
            adopted += 1;
        }
    }
    adopted
}

/// Tables of every node plus the base station.
#[derive(Debug, Clone)]
pub struct DsdvState {
    /// Index `i < n` is node `i`; index `n` is the base station.
    pub tables: Vec<RoutingTable>,
    pub dumps: u64,
}

impl DsdvState {
    pub fn new(node_count: usize) -> Self {
        let tables = (0..=node_count).map(|i| RoutingTable::new(dest_of(i, node_count), node_count)).collect();
        Self { tables, dumps: 0 }
    }

    fn node_count(&self) -> usize {
        self.tables.len() - 1
    }

    pub fn table(&self, at: Endpoint) -> &RoutingTable {
        &self.tables[dest_index(at, self.node_count())]
    }

    /// One update interval: the base station dumps first, then every alive
    /// node in id order. Afterwards the routes to the base station are
    /// checked for loops.
    pub fn periodic_update(&mut self, w: &mut World) {
        let n = self.node_count();
        self.periodic_dump(w, Endpoint::Bs);
        for i in 0..n {
            if w.net.nodes[i].is_alive() {
                self.periodic_dump(w, Endpoint::Node(NodeId::from(i)));
            }
        }
        w.settle_deaths();
        let loops = self.count_loops(w);
        w.audit.check_dsdv_loops(loops);
    }

    /// Bumps the sender's own sequence by 2 and broadcasts its full table at
    /// radio range; every alive node in range pays reception and merges it.
    pub fn periodic_dump(&mut self, w: &mut World, sender: Endpoint) {
        if let Endpoint::Node(id) = sender {
            if !w.net.node(id).is_alive() {
                return;
            }
        }
        let n = self.node_count();
        let si = dest_index(sender, n);
        let own = self.tables[si].rows[si].as_mut().expect("owner row");
        own.seq += 2;

        let advert: Vec<DsdvEntry> = self.tables[si].entries().collect();
        let bits = advert.len() as u64 * w.cfg.dsdv_entry_bits;
        let rr = w.cfg.radio_range_rr_m;
        let listeners = w.net.alive_within(sender, rr);
        let Some(heard) = w.net.broadcast(sender, bits, rr, listeners) else {
            return;
        };
        self.dumps += 1;
        for id in heard {
            let me = Endpoint::Node(id);
            apply_update(&mut self.tables[id.index()], me, sender, &advert);
        }
    }

    /// Readings become packets immediately and travel hop by hop.
    pub fn on_readings(&mut self, w: &mut World) {
        let now = w.now_s();
        let bits = w.cfg.packet_size_bits;
        for i in 0..w.pending.len() {
            if w.pending[i].is_empty() || !w.net.nodes[i].is_alive() {
                continue;
            }
            let readings = std::mem::take(&mut w.pending[i]);
            w.metrics.data_packets_generated += readings.len() as u64;
            let id = NodeId::from(i);
            for r in readings {
                let p = Packet::data(id, Address::BaseStation, bits, r, now);
                if self.forward_to_bs(w, id) {
                    w.metrics.record_bs_rx(w.net.now, &p);
                }
            }
        }
        w.settle_deaths();
    }

    /// Follows next hops for the base station from `origin`. Returns true on
    /// delivery. A missing route, an infinite metric or a hop to a dead or
    /// out-of-range neighbor counts as unreachable; the last two also mark
    /// the local route broken. Energy exhaustion mid-route counts as dead.
    pub fn forward_to_bs(&mut self, w: &mut World, origin: NodeId) -> bool {
        let n = self.node_count();
        let bits = w.cfg.packet_size_bits;
        let rr = w.cfg.radio_range_rr_m;
        let mut at = Endpoint::Node(origin);
        for _ in 0..=n {
            let Endpoint::Node(cur) = at else {
                return true;
            };
            let Some(row) = self.tables[cur.index()].rows[n] else {
                w.metrics.dropped_unreachable += 1;
                return false;
            };
            if row.metric == INFINITE_METRIC {
                w.metrics.dropped_unreachable += 1;
                return false;
            }
            let next = row.next_hop;
            let next_alive = match next {
                Endpoint::Node(id) => w.net.node(id).is_alive(),
                Endpoint::Bs => true,
            };
            if !next_alive || w.net.distance(at, next) > rr {
                let broken = self.tables[cur.index()].rows[n].as_mut().expect("checked above");
                if broken.seq.is_multiple_of(2) {
                    broken.seq += 1;
                }
                broken.metric = INFINITE_METRIC;
                w.metrics.dropped_unreachable += 1;
                return false;
            }
            if w.net.transmit(at, next, bits) != TxOutcome::Delivered {
                w.metrics.dropped_dead += 1;
                return false;
            }
            at = next;
        }
        if at == Endpoint::Bs {
            return true;
        }
        // Only reachable through a loop; the audit reports those separately.
        w.metrics.dropped_unreachable += 1;
        false
    }

    /// Alive nodes whose next-hop chain toward the base station neither
    /// reaches it nor ends at a missing or infinite route within `n` steps.
    pub fn count_loops(&self, w: &World) -> u64 {
        let n = self.node_count();
        let mut loops = 0;
        for i in 0..n {
            if !w.net.nodes[i].is_alive() {
                continue;
            }
            let mut cur = i;
            let mut terminated = false;
            for _ in 0..=n {
                match self.tables[cur].rows[n] {
                    None => {
                        terminated = true;
                        break;
                    }
                    Some(r) if r.metric == INFINITE_METRIC => {
                        terminated = true;
                        break;
                    }
                    Some(r) => match r.next_hop {
                        Endpoint::Bs => {
                            terminated = true;
                            break;
                        }
                        Endpoint::Node(id) => cur = id.index(),
                    },
                }
            }
            if !terminated {
                loops += 1;
            }
        }
        loops
    }
}
