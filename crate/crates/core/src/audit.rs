//! Runtime invariant checks collected during a simulation.

use crate::metrics::MetricsLog;
use crate::model::{NodeId, NO_FORWARDED_READING};
use crate::network::Network;

/// Violation counters. A clean run leaves every counter at zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Audit {
    pub tdma_schedules_checked: u64,
    pub tdma_collisions: u64,
    pub filter_checks: u64,
    pub filter_violations: u64,
    pub dsdv_loop_checks: u64,
    pub dsdv_loops: u64,
    pub energy_violations: u64,
    pub clock_regressions: u64,
    pub queue_not_empty_at_end: bool,
    /// |running ledger total - sum of per-node accounts| at the end of the run.
    pub ledger_drift_j: f64,
    last_forwarded: Vec<f64>,
}

impl Audit {
    pub fn new(node_count: usize) -> Self {
        Self { last_forwarded: vec![NO_FORWARDED_READING; node_count], ..Default::default() }
    }

    pub fn check_tdma(&mut self, collision_free: bool) {
        self.tdma_schedules_checked += 1;
        if !collision_free {
            self.tdma_collisions += 1;
        }
    }

    /// Independent bookkeeping of the cluster-head filter: a forwarded reading
    /// must differ from the previous forwarded reading of the same origin.
    pub fn observe_forward(&mut self, origin: NodeId, reading: f64, threshold: f64) {
        self.filter_checks += 1;
        let last = &mut self.last_forwarded[origin.index()];
        if (reading - *last).abs() <= threshold {
            self.filter_violations += 1;
        }
        *last = reading;
    }

    pub fn check_dsdv_loops(&mut self, loops: u64) {
        self.dsdv_loop_checks += 1;
        self.dsdv_loops += loops;
    }

    pub fn check_energies(&mut self, net: &Network) {
        let bad = net.nodes.iter().filter(|n| n.energy_j.is_nan() || n.energy_j < 0.0 || (n.energy_j == 0.0) == n.is_alive());
        self.energy_violations += bad.count() as u64;
    }

    pub fn finish(&mut self, net: &Network, queue_len: usize) {
        self.check_energies(net);
        self.ledger_drift_j = (net.ledger.total_consumed_j() - net.ledger.sum_of_nodes_j()).abs();
        self.queue_not_empty_at_end = queue_len != 0;
    }

    pub fn violations(&self) -> u64 {
        self.tdma_collisions
            + self.filter_violations
            + self.dsdv_loops
            + self.energy_violations
            + self.clock_regressions
            + self.queue_not_empty_at_end as u64
    }
}

/// `delivered + filtered + unreachable + dead == generated`, over data packets.
pub fn packets_conserved(log: &MetricsLog) -> bool {
    log.packets_at_bs + log.dropped_filtered + log.dropped_unreachable + log.dropped_dead == log.data_packets_generated
}
