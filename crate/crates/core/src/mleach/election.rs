//! Cluster-head election with per-node exclusion windows.

use rand::Rng;
use thiserror::Error;

use crate::config::epoch_length;
use crate::model::{NodeId, NodeState, Role};

#[derive(Debug, Error, PartialEq)]
pub enum ElectionError {
    #[error("election fraction must lie in (0,1), got {0}")]
    BadFraction(f64),
}

/// Election threshold `T(n)` for round `r`.
///
/// `p / (1 - p * (r mod ceil(1/p)))` for eligible nodes, `0` otherwise. The
/// result is capped at 1 so the last round of an epoch elects every remaining
/// eligible node even when the denominator rounds slightly below `p`.
pub fn ch_threshold(p: f64, r: u64, in_g: bool) -> Result<f64, ElectionError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(ElectionError::BadFraction(p));
    }
    if !in_g {
        return Ok(0.0);
    }
    let phase = (r % epoch_length(p) as u64) as f64;
    Ok((p / (1.0 - p * phase)).min(1.0))
}

/// Runs one election over all nodes.
///
/// Every alive node with `exclusion_remaining == 0` draws `u ~ U[0,1)` from
/// `rng` in id order and is elected iff `u < T(n)`. Winners become cluster
/// heads and are excluded for `exclusion_rounds`; everybody else's exclusion
/// counts down by one. If nobody wins, the eligible node with the smallest id
/// is promoted.
pub fn elect_cluster_heads<R: Rng + ?Sized>(
    nodes: &mut [NodeState],
    r: u64,
    p: f64,
    exclusion_rounds: u32,
    rng: &mut R,
) -> Result<Vec<NodeId>, ElectionError> {
    let threshold = ch_threshold(p, r, true)?;
    let mut elected = Vec::new();
    let mut first_eligible = None;
    for n in nodes.iter().filter(|n| n.in_g()) {
        first_eligible.get_or_insert(n.id);
        if rng.random::<f64>() < threshold {
            elected.push(n.id);
        }
    }
    if elected.is_empty() {
        elected.extend(first_eligible);
    }

    let mut winners = elected.iter().peekable();
    for n in nodes.iter_mut().filter(|n| n.is_alive()) {
        if winners.peek() == Some(&&n.id) {
            winners.next();
            n.role = Role::ClusterHead;
            n.cluster_of = None;
            n.exclusion_remaining = exclusion_rounds;
        } else {
            n.role = Role::OrphanDirect;
            n.cluster_of = None;
            n.exclusion_remaining = n.exclusion_remaining.saturating_sub(1);
        }
    }
    Ok(elected)
}
