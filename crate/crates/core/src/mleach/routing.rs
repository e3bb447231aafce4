//! Higher-layer routing: the cluster-head graph and shortest routes to the base station.

use std::cmp::Ordering;

use thiserror::Error;

use crate::mobility::distance;
use crate::model::{NodeId, Position};
use crate::network::{Endpoint, Network};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("edge references a vertex not in the graph")]
    UnknownVertex,
    #[error("self-loops are not allowed")]
    SelfLoop,
    #[error("edge weight {0} is negative or beyond radio range")]
    OutOfRange(f64),
    #[error("duplicate edge")]
    DuplicateEdge,
}

/// A vertex of the cluster-head graph. Heads sort before the base station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Ch(NodeId),
    Bs,
}

impl From<Vertex> for Endpoint {
    fn from(v: Vertex) -> Self {
        match v {
            Vertex::Ch(id) => Endpoint::Node(id),
            Vertex::Bs => Endpoint::Bs,
        }
    }
}

/// Undirected graph over cluster heads plus the base station. Edges join
/// vertices within radio range, weighted by distance in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChGraph {
    vertices: Vec<Vertex>,
    adjacency: Vec<Vec<(usize, f64)>>,
    range: f64,
}

impl ChGraph {
    /// Builds the graph from head positions; the base station is the last vertex.
    pub fn from_positions(chs: &[(NodeId, Position)], bs: Position, range: f64) -> Self {
        let mut vertices: Vec<Vertex> = chs.iter().map(|c| Vertex::Ch(c.0)).collect();
        let mut positions: Vec<Position> = chs.iter().map(|c| c.1).collect();
        vertices.push(Vertex::Bs);
        positions.push(bs);
        // Positions only decide the edge set; routes use live positions.
        let n = vertices.len();
        let mut adjacency = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = distance(positions[i], positions[j]);
                if d <= range {
                    adjacency[i].push((j, d));
                    adjacency[j].push((i, d));
                }
            }
        }
        Self { vertices, adjacency, range }
    }

    /// Builds a graph from explicit weighted edges, for topologies given by
    /// link costs rather than coordinates. Edges heavier than `range`,
    /// self-loops and duplicates are rejected.
    pub fn from_edges(chs: &[NodeId], edges: &[(Vertex, Vertex, f64)], range: f64) -> Result<Self, GraphError> {
        let mut vertices: Vec<Vertex> = chs.iter().map(|&c| Vertex::Ch(c)).collect();
        vertices.push(Vertex::Bs);
        let mut g = Self { adjacency: vec![Vec::new(); vertices.len()], vertices, range };
        for &(a, b, w) in edges {
            let (Some(i), Some(j)) = (g.index_of(a), g.index_of(b)) else {
                return Err(GraphError::UnknownVertex);
            };
            if i == j {
                return Err(GraphError::SelfLoop);
            }
            if !(w >= 0.0 && w <= range) {
                return Err(GraphError::OutOfRange(w));
            }
            if g.weight(i, j).is_some() {
                return Err(GraphError::DuplicateEdge);
            }
            g.adjacency[i].push((j, w));
            g.adjacency[j].push((i, w));
        }
        Ok(g)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }

    /// Neighbors of vertex `idx` with edge weights.
    pub fn neighbors(&self, idx: usize) -> &[(usize, f64)] {
        &self.adjacency[idx]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.adjacency[a].iter().find(|e| e.0 == b).map(|e| e.1)
    }

    pub fn bs_index(&self) -> usize {
        self.vertices.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Route {
    /// Vertex sequence from the source head to the base station, inclusive.
    Path { hops: Vec<Vertex>, cost: f64 },
    Unreachable,
}

impl Route {
    pub fn cost(&self) -> Option<f64> {
        match self {
            Route::Path { cost, .. } => Some(*cost),
            Route::Unreachable => None,
        }
    }

    pub fn hops(&self) -> Option<&[Vertex]> {
        match self {
            Route::Path { hops, .. } => Some(hops),
            Route::Unreachable => None,
        }
    }
}

#[derive(Clone)]
struct Label {
    cost: f64,
    path: Vec<usize>,
}

impl Label {
    /// Cost, then hop count, then the vertex sequence itself.
    fn cmp(&self, other: &Label, g: &ChGraph) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.path.len().cmp(&other.path.len()))
            .then_with(|| {
                let a = self.path.iter().map(|&i| g.vertices[i]);
                let b = other.path.iter().map(|&i| g.vertices[i]);
                a.cmp(b)
            })
    }
}

/// Minimum-distance path from `src` to the base station.
///
/// Ties on cost go to fewer hops, then to the lexicographically smallest
/// vertex sequence. The order is preserved by extending both paths with the
/// same edge, so plain label-setting Dijkstra finds the unique best path.
pub fn shortest_route(g: &ChGraph, src: NodeId) -> Route {
    let Some(s) = g.index_of(Vertex::Ch(src)) else {
        return Route::Unreachable;
    };
    let n = g.vertices.len();
    let target = g.bs_index();
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut settled = vec![false; n];
    best[s] = Some(Label { cost: 0.0, path: vec![s] });

    loop {
        let mut pick: Option<usize> = None;
        for v in 0..n {
            if settled[v] {
                continue;
            }
            if let Some(l) = &best[v] {
                let better = match pick {
                    None => true,
                    Some(p) => l.cmp(best[p].as_ref().expect("picked"), g) == Ordering::Less,
                };
                if better {
                    pick = Some(v);
                }
            }
        }
        let Some(u) = pick else { break };
        settled[u] = true;
        if u == target {
            break;
        }
        let base = best[u].clone().expect("settled has label");
        for &(v, w) in g.neighbors(u) {
            if settled[v] {
                continue;
            }
            let mut path = base.path.clone();
            path.push(v);
            let cand = Label { cost: base.cost + w, path };
            let replace = match &best[v] {
                None => true,
                Some(cur) => cand.cmp(cur, g) == Ordering::Less,
            };
            if replace {
                best[v] = Some(cand);
            }
        }
    }

    match best[target].take() {
        Some(l) if settled[target] => {
            Route::Path { hops: l.path.into_iter().map(|i| g.vertices[i]).collect(), cost: l.cost }
        }
        _ => Route::Unreachable,
    }
}

/// Each alive head broadcasts a hello at `rr` to the other heads, then the
/// graph is built over the heads still alive.
pub fn build_ch_graph(net: &mut Network, chs: &[NodeId], rr: f64, hello_bits: u64) -> ChGraph {
    for &ch in chs {
        if !net.node(ch).is_alive() {
            continue;
        }
        let peers: Vec<NodeId> = chs.iter().copied().filter(|&c| c != ch).collect();
        net.broadcast(Endpoint::Node(ch), hello_bits, rr, peers);
    }
    let alive: Vec<(NodeId, Position)> =
        chs.iter().filter(|&&c| net.node(c).is_alive()).map(|&c| (c, net.node(c).position)).collect();
    ChGraph::from_positions(&alive, net.bs, rr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Position {
        Position::new(x, y)
    }

    #[test]
    fn adjacent_to_bs_is_single_hop() {
        let g = ChGraph::from_positions(&[(NodeId(1), p(100.0, 0.0))], p(0.0, 0.0), 1500.0);
        assert_eq!(g.edge_count(), 1);
        let r = shortest_route(&g, NodeId(1));
        assert_eq!(r.hops().unwrap(), &[Vertex::Ch(NodeId(1)), Vertex::Bs]);
        assert_eq!(r.cost(), Some(100.0));
    }

    #[test]
    fn out_of_range_heads_have_no_edge() {
        let g = ChGraph::from_positions(&[(NodeId(1), p(0.0, 0.0)), (NodeId(2), p(1501.0, 0.0))], p(0.0, 5000.0), 1500.0);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(shortest_route(&g, NodeId(1)), Route::Unreachable);
    }

    #[test]
    fn relay_beats_long_direct_edge() {
        let (a, b) = (NodeId(0), NodeId(1));
        let edges = [(Vertex::Ch(a), Vertex::Ch(b), 1.0), (Vertex::Ch(b), Vertex::Bs, 1.0), (Vertex::Ch(a), Vertex::Bs, 3.0)];
        let g = ChGraph::from_edges(&[a, b], &edges, 3.0).unwrap();
        let r = shortest_route(&g, a);
        assert_eq!(r.hops().unwrap(), &[Vertex::Ch(a), Vertex::Ch(b), Vertex::Bs]);
        assert_eq!(r.cost(), Some(2.0));
    }

    #[test]
    fn bad_edges_rejected() {
        let a = NodeId(0);
        assert_eq!(ChGraph::from_edges(&[a], &[(Vertex::Ch(a), Vertex::Ch(a), 1.0)], 2.0), Err(GraphError::SelfLoop));
        assert_eq!(ChGraph::from_edges(&[a], &[(Vertex::Ch(a), Vertex::Bs, 2.5)], 2.0), Err(GraphError::OutOfRange(2.5)));
        assert_eq!(ChGraph::from_edges(&[a], &[(Vertex::Ch(NodeId(9)), Vertex::Bs, 1.0)], 2.0), Err(GraphError::UnknownVertex));
    }

    #[test]
    fn equal_cost_prefers_fewer_hops_then_smaller_ids() {
        // Square: src 5 at (0,0); relays 3 at (1,0) and 2 at (0,1); BS at (1,1).
        let g = ChGraph::from_positions(
            &[(NodeId(5), p(0.0, 0.0)), (NodeId(3), p(1.0, 0.0)), (NodeId(2), p(0.0, 1.0))],
            p(1.0, 1.0),
            1.2,
        );
        let r = shortest_route(&g, NodeId(5));
        assert_eq!(r.hops().unwrap(), &[Vertex::Ch(NodeId(5)), Vertex::Ch(NodeId(2)), Vertex::Bs]);
    }

    #[test]
    fn unknown_source_is_unreachable() {
        let g = ChGraph::from_positions(&[], p(0.0, 0.0), 10.0);
        assert_eq!(shortest_route(&g, NodeId(4)), Route::Unreachable);
    }
}
