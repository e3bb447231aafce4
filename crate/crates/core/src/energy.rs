//! First-order radio energy model and per-node energy accounting.

use thiserror::Error;

use crate::config::SimConfig;
use crate::mobility::distance;
use crate::model::{NodeState, Position, Role};

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("distance must be non-negative and finite, got {0}")]
    BadDistance(f64),
}

/// `E_tx(k, d) = E_elec*k + eps_amp*k*d^2`, `E_rx(k) = E_elec*k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioModel {
    pub e_elec_j_per_bit: f64,
    pub eps_amp_j_per_bit_m2: f64,
}

impl Default for RadioModel {
    fn default() -> Self {
        Self { e_elec_j_per_bit: 50e-9, eps_amp_j_per_bit_m2: 120e-12 }
    }
}

impl RadioModel {
    pub fn from_config(cfg: &SimConfig) -> Self {
        Self { e_elec_j_per_bit: cfg.e_elec_j_per_bit, eps_amp_j_per_bit_m2: cfg.eps_amp_j_per_bit_m2 }
    }

    pub fn tx_energy(&self, k: u64, d: f64) -> Result<f64, EnergyError> {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(EnergyError::BadDistance(d));
        }
        Ok(self.tx_joules(k, d))
    }

    pub fn rx_energy(&self, k: u64) -> f64 {
        self.e_elec_j_per_bit * k as f64
    }

    pub(crate) fn tx_joules(&self, k: u64, d: f64) -> f64 {
        debug_assert!(d >= 0.0);
        let k = k as f64;
        self.e_elec_j_per_bit * k + self.eps_amp_j_per_bit_m2 * k * d * d
    }
}

/// Inclusive range check, `distance(a, b) <= r`.
pub fn in_range(a: Position, b: Position, r: f64) -> bool {
    distance(a, b) <= r
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Result of charging a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Charge {
    /// The node paid in full and the action goes ahead.
    Paid,
    /// The node could not afford the action; it is now dead and the action fails.
    Depleted,
    /// The node was already dead.
    AlreadyDead,
}

impl Charge {
    pub fn ok(self) -> bool {
        self == Charge::Paid
    }
}

/// Subtracts `j` joules from a node's residual energy.
///
/// Returns the joules actually removed together with the outcome. When the
/// residual is short, it clamps to zero and the node dies. A node left with
/// exactly zero completes the action and then dies.
pub fn consume(node: &mut NodeState, j: f64) -> (f64, Charge) {
    debug_assert!(j >= 0.0);
    if !node.is_alive() {
        return (0.0, Charge::AlreadyDead);
    }
    if node.energy_j >= j {
        node.energy_j -= j;
        if node.energy_j == 0.0 {
            node.role = Role::Dead;
            node.cluster_of = None;
        }
        (j, Charge::Paid)
    } else {
        let taken = node.energy_j;
        node.energy_j = 0.0;
        node.role = Role::Dead;
        node.cluster_of = None;
        (taken, Charge::Depleted)
    }
}

/// Per-node and total consumed energy.
#[derive(Debug, Clone)]
pub struct EnergyLedger {
    initial_j: f64,
    consumed: Vec<CompensatedSum>,
    total: CompensatedSum,
    charges: u64,
}

impl EnergyLedger {
    pub fn new(node_count: usize, initial_j: f64) -> Self {
        Self { initial_j, consumed: vec![CompensatedSum::default(); node_count], total: CompensatedSum::default(), charges: 0 }
    }

    /// Charges `node` and records what was actually consumed.
    pub fn charge(&mut self, node: &mut NodeState, j: f64) -> Charge {
        let (taken, outcome) = consume(node, j);
        if outcome != Charge::AlreadyDead {
            self.consumed[node.id.index()].add(taken);
            self.total.add(taken);
            self.charges += 1;
        }
        outcome
    }

    pub fn consumed_j(&self, idx: usize) -> f64 {
        self.consumed[idx].value()
    }

    pub fn total_consumed_j(&self) -> f64 {
        self.total.value()
    }

    /// Total recomputed from the per-node accounts.
    pub fn sum_of_nodes_j(&self) -> f64 {
        self.consumed.iter().map(|c| c.value()).collect::<CompensatedSum>().value()
    }

    pub fn max_consumed_j(&self) -> f64 {
        self.consumed.iter().map(|c| c.value()).fold(0.0, f64::max)
    }

    pub fn charge_count(&self) -> u64 {
        self.charges
    }

    pub fn initial_j(&self) -> f64 {
        self.initial_j
    }

    pub fn node_count(&self) -> usize {
        self.consumed.len()
    }
}
