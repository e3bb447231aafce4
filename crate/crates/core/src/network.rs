//! Node population plus the single path through which every transmission is charged.

use crate::energy::{Charge, EnergyLedger, RadioModel};
use crate::engine::SimTime;
use crate::mobility::distance;
use crate::model::{NodeId, NodeState, Position};

/// Far end of a unicast hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Endpoint {
    Node(NodeId),
    /// The base station; infrastructure with unlimited energy.
    Bs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxOutcome {
    Delivered,
    /// Sender was dead or ran out of energy while transmitting.
    SenderDead,
    /// Receiver was dead or ran out of energy while receiving.
    ReceiverDead,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub nodes: Vec<NodeState>,
    pub ledger: EnergyLedger,
    pub radio: RadioModel,
    pub bs: Position,
    pub now: SimTime,
    deaths: Vec<(SimTime, NodeId)>,
}

impl Network {
    pub fn new(positions: &[Position], initial_energy_j: f64, radio: RadioModel, bs: Position) -> Self {
        let nodes = positions
            .iter()
            .enumerate()
            .map(|(i, p)| NodeState::new(NodeId::from(i), *p, initial_energy_j))
            .collect();
        Self {
            nodes,
            ledger: EnergyLedger::new(positions.len(), initial_energy_j),
            radio,
            bs,
            now: SimTime::ZERO,
            deaths: Vec::new(),
        }
    }

    pub fn node(&self, id: NodeId) -> &NodeState {
        &self.nodes[id.index()]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut NodeState {
        &mut self.nodes[id.index()]
    }

    pub fn position(&self, e: Endpoint) -> Position {
        match e {
            Endpoint::Node(id) => self.node(id).position,
            Endpoint::Bs => self.bs,
        }
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_alive()).count()
    }

    pub fn distance(&self, a: Endpoint, b: Endpoint) -> f64 {
        distance(self.position(a), self.position(b))
    }

    /// Deaths recorded since the last call.
    pub fn take_deaths(&mut self) -> Vec<(SimTime, NodeId)> {
        std::mem::take(&mut self.deaths)
    }

    pub fn charge(&mut self, id: NodeId, joules: f64) -> Charge {
        let was_alive = self.nodes[id.index()].is_alive();
        let outcome = self.ledger.charge(&mut self.nodes[id.index()], joules);
        if was_alive && !self.nodes[id.index()].is_alive() {
            self.deaths.push((self.now, id));
        }
        outcome
    }

    fn charge_endpoint(&mut self, e: Endpoint, joules: f64) -> Charge {
        match e {
            Endpoint::Node(id) => self.charge(id, joules),
            Endpoint::Bs => Charge::Paid,
        }
    }

    /// Point-to-point transmission of `bits` at the current hop distance.
    pub fn transmit(&mut self, from: Endpoint, to: Endpoint, bits: u64) -> TxOutcome {
        let d = self.distance(from, to);
        let tx = self.radio.tx_joules(bits, d);
        if !self.charge_endpoint(from, tx).ok() {
            return TxOutcome::SenderDead;
        }
        let rx = self.radio.rx_energy(bits);
        if !self.charge_endpoint(to, rx).ok() {
            return TxOutcome::ReceiverDead;
        }
        TxOutcome::Delivered
    }

    /// Broadcast charged once to the sender at `range`; every listed alive
    /// receiver within `range` pays reception. Returns the receivers that
    /// heard it, or `None` if the sender could not transmit.
    pub fn broadcast(
        &mut self,
        from: Endpoint,
        bits: u64,
        range: f64,
        receivers: impl IntoIterator<Item = NodeId>,
    ) -> Option<Vec<NodeId>> {
        let tx = self.radio.tx_joules(bits, range);
        if !self.charge_endpoint(from, tx).ok() {
            return None;
        }
        let origin = self.position(from);
        let rx = self.radio.rx_energy(bits);
        let mut heard = Vec::new();
        for id in receivers {
            if Endpoint::Node(id) == from {
                continue;
            }
            let n = self.node(id);
            if n.is_alive() && distance(origin, n.position) <= range && self.charge(id, rx).ok() {
                heard.push(id);
            }
        }
        Some(heard)
    }

    /// Alive nodes within `range` of `from`, in id order.
    pub fn alive_within(&self, from: Endpoint, range: f64) -> Vec<NodeId> {
        let origin = self.position(from);
        self.nodes
            .iter()
            .filter(|n| n.is_alive() && Endpoint::Node(n.id) != from && distance(origin, n.position) <= range)
            .map(|n| n.id)
            .collect()
    }
}
