//! Shared domain types: positions, node state and packets.

use std::fmt;

/// A point on the flat sensor field, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        crate::mobility::distance(*self, *other)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

/// Index of a sensor node. Nodes are numbered `0..node_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    ClusterHead,
    ClusterMember,
    /// Alive but not attached to any cluster head this round.
    OrphanDirect,
    Dead,
}

/// Sentinel for "nothing forwarded yet" so the first reading always passes the filter.
pub const NO_FORWARDED_READING: f64 = f64::NEG_INFINITY;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: NodeId,
    pub position: Position,
    /// Residual energy in joules.
    pub energy_j: f64,
    pub role: Role,
    /// Cluster head this node is attached to; set iff `role == ClusterMember`.
    pub cluster_of: Option<NodeId>,
    /// Rounds left before the node may stand for election again. Zero means eligible.
    pub exclusion_remaining: u32,
    pub reading: f64,
    pub last_forwarded_reading: f64,
}

impl NodeState {
    pub fn new(id: NodeId, position: Position, energy_j: f64) -> Self {
        Self {
            id,
            position,
            energy_j,
            role: Role::OrphanDirect,
            cluster_of: None,
            exclusion_remaining: 0,
            reading: 0.0,
            last_forwarded_reading: NO_FORWARDED_READING,
        }
    }

    pub fn is_alive(&self) -> bool {
        self.role != Role::Dead
    }

    /// Member of the election-eligible set.
    pub fn in_g(&self) -> bool {
        self.is_alive() && self.exclusion_remaining == 0
    }

    pub fn set_role(&mut self, role: Role, cluster_of: Option<NodeId>) {
        debug_assert_eq!(role == Role::ClusterMember, cluster_of.is_some());
        if self.is_alive() {
            self.role = role;
            self.cluster_of = cluster_of;
        }
    }
}

/// Where a packet is headed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Address {
    Node(NodeId),
    BaseStation,
    Broadcast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    Data,
    Hello,
    Schedule,
    Heartbeat,
    RouteUpdate,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    None,
    Data { origin: NodeId, reading: f64 },
    RouteUpdate { entries: usize },
    Schedule { slots: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub kind: PacketKind,
    pub src: NodeId,
    pub dst: Address,
    pub size_bits: u64,
    pub payload: Payload,
    pub created_at_s: f64,
}

impl Packet {
    pub fn data(src: NodeId, dst: Address, size_bits: u64, reading: f64, at: f64) -> Self {
        debug_assert!(reading.is_finite());
        Self {
            kind: PacketKind::Data,
            src,
            dst,
            size_bits,
            payload: Payload::Data { origin: src, reading },
            created_at_s: at,
        }
    }

    pub fn heartbeat(src: NodeId, ch: NodeId, size_bits: u64, at: f64) -> Self {
        Self {
            kind: PacketKind::Heartbeat,
            src,
            dst: Address::Node(ch),
            size_bits,
            payload: Payload::None,
            created_at_s: at,
        }
    }

    pub fn reading(&self) -> Option<f64> {
        match self.payload {
            Payload::Data { reading, .. } => Some(reading),
            _ => None,
        }
    }

    pub fn origin(&self) -> Option<NodeId> {
        match self.payload {
            Payload::Data { origin, .. } => Some(origin),
            _ => None,
        }
    }
}
