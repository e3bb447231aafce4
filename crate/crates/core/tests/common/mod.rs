#![allow(dead_code)]

use mleach_sim::mleach::{ChGraph, Vertex};
use mleach_sim::model::{NodeId, Position};

/// Cheapest simple path from `src` to the base station by exhaustive DFS.
pub fn brute_force_cost(g: &ChGraph, src: NodeId) -> Option<f64> {
    fn dfs(g: &ChGraph, at: usize, target: usize, seen: &mut Vec<bool>, cost: f64, best: &mut Option<f64>) {
        if at == target {
            if best.is_none_or(|b| cost < b) {
                *best = Some(cost);
            }
            return;
        }
        for &(next, w) in g.neighbors(at) {
            if !seen[next] {
                seen[next] = true;
                dfs(g, next, target, seen, cost + w, best);
                seen[next] = false;
            }
        }
    }
    let s = g.index_of(Vertex::Ch(src))?;
    let mut seen = vec![false; g.vertices().len()];
    seen[s] = true;
    let mut best = None;
    dfs(g, s, g.bs_index(), &mut seen, 0.0, &mut best);
    best
}

/// Sum of edge weights along `hops`, or `None` if some hop is not an edge.
pub fn path_weight(g: &ChGraph, hops: &[Vertex]) -> Option<f64> {
    let idx: Option<Vec<usize>> = hops.iter().map(|&v| g.index_of(v)).collect();
    let idx = idx?;
    idx.windows(2).map(|w| g.weight(w[0], w[1])).sum()
}

pub const UNIT_M: f64 = 625.0;

/// The worked routing example: heads S1..S4 around a base station at the
/// origin, distances in units of 625 m, radio range 1500 m. S4 reaches the
/// base station via S2 (1.5 + 1.0) or via S1 (2.2 + 2.3).
pub fn worked_example() -> (ChGraph, [NodeId; 4]) {
    let s = [NodeId(1), NodeId(2), NodeId(3), NodeId(4)];
    let u = UNIT_M;
    let pos = [
        (s[0], Position::new(1.34 * u, 1.8693 * u)),
        (s[1], Position::new(u, 0.0)),
        (s[2], Position::new(-u, 0.5 * u)),
        (s[3], Position::new(2.5 * u, 0.0)),
    ];
    (ChGraph::from_positions(&pos, Position::new(0.0, 0.0), 1500.0), s)
}
