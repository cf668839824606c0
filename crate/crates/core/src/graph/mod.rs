//! Probabilistic directed graphs in compressed sparse row form.
//!
//! Node ids are dense `0..n`. Every edge has an id (its position in the
//! out-adjacency arrays); realizations key their coins on that id, so a base
//! graph and its seed-unified version agree on every base edge.

mod io;
mod unified;

pub use io::{load_edge_list, parse_edge_list, read_cache, write_cache, write_edge_list};
pub use unified::{unify_seeds, BlockerSet, Blocked, SeedSet, UnifiedGraph};

use crate::error::{Error, Result};

pub type NodeId = u32;

/// A directed graph with a propagation probability on each edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    out_probs: Vec<f64>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    in_edges: Vec<usize>,
    labels: Vec<u64>,
}

/// One directed edge as seen from either endpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeRef {
    pub id: usize,
    pub node: NodeId,
    pub prob: f64,
}

impl Graph {
    /// Builds a graph over nodes `0..n` labelled by their own ids.
    ///
    /// Rejects probabilities outside `[0, 1]`, self-loops, duplicate pairs and
    /// out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        Graph::with_labels((0..n as u64).collect(), edges)
    }

    pub fn with_labels<I>(labels: Vec<u64>, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let n = labels.len();
        let mut edges: Vec<(NodeId, NodeId, f64)> = edges.into_iter().collect();
        for &(u, v, p) in &edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(Error::NodeOutOfRange { node: x, n });
                }
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on node {u}")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidGraph(format!(
                    "probability {p} on edge {u}->{v} is outside [0, 1]"
                )));
            }
        }
        // stable: keeps the caller's order of out-edges per source
        edges.sort_by_key(|&(u, _, _)| u);
        let mut pairs: Vec<(NodeId, NodeId)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge {}->{}",
                w[0].0, w[0].1
            )));
        }

        let mut out_offsets = vec![0usize; n + 1];
        for &(u, _, _) in &edges {
            out_offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
        }
        let out_targets: Vec<NodeId> = edges.iter().map(|e| e.1).collect();
        let out_probs: Vec<f64> = edges.iter().map(|e| e.2).collect();

        let mut in_offsets = vec![0usize; n + 1];
        for &v in &out_targets {
            in_offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            in_offsets[i + 1] += in_offsets[i];
        }
        let mut fill = in_offsets.clone();
        let mut in_sources = vec![0; edges.len()];
        let mut in_edges = vec![0; edges.len()];
        for (id, &(u, v, _)) in edges.iter().enumerate() {
            let slot = &mut fill[v as usize];
            in_sources[*slot] = u;
            in_edges[*slot] = id;
            *slot += 1;
        }

        Ok(Graph {
            out_offsets,
            out_targets,
            out_probs,
            in_offsets,
            in_sources,
            in_edges,
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn m(&self) -> usize {
        self.out_targets.len()
    }

    pub fn label(&self, v: NodeId) -> u64 {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_offsets[v as usize + 1] - self.out_offsets[v as usize]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_offsets[v as usize + 1] - self.in_offsets[v as usize]
    }

    pub fn out_edges(&self, v: NodeId) -> impl Iterator<Item = EdgeRef> + '_ {
        let range = self.out_offsets[v as usize]..self.out_offsets[v as usize + 1];
        range.map(move |id| EdgeRef {
            id,
            node: self.out_targets[id],
            prob: self.out_probs[id],
        })
    }

    pub fn in_edges(&self, v: NodeId) -> impl Iterator<Item = EdgeRef> + '_ {
        let range = self.in_offsets[v as usize]..self.in_offsets[v as usize + 1];
        range.map(move |slot| {
            let id = self.in_edges[slot];
            EdgeRef {
                id,
                node: self.in_sources[slot],
                prob: self.out_probs[id],
            }
        })
    }

    /// Raw out-adjacency slices `(first edge id, targets, probabilities)`.
    #[inline]
    pub(crate) fn out_slices(&self, v: NodeId) -> (usize, &[NodeId], &[f64]) {
        let lo = self.out_offsets[v as usize];
        let hi = self.out_offsets[v as usize + 1];
        (lo, &self.out_targets[lo..hi], &self.out_probs[lo..hi])
    }

    /// All edges as `(u, v, p)` in edge-id order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        (0..self.n() as NodeId).flat_map(move |u| self.out_edges(u).map(move |e| (u, e.node, e.prob)))
    }

    pub fn prob(&self, edge: usize) -> f64 {
        self.out_probs[edge]
    }

    /// Same topology with every probability replaced by `f(u, v, p)`.
    pub fn map_probabilities(&self, mut f: impl FnMut(NodeId, NodeId, f64) -> f64) -> Result<Graph> {
        let edges: Vec<_> = self.edges().map(|(u, v, p)| (u, v, f(u, v, p))).collect();
        Graph::with_labels(self.labels.clone(), edges)
    }
}

/// Weighted-cascade probabilities: `p(u, v) = 1 / indeg(v)`.
pub fn assign_wc_probabilities(g: &Graph) -> Graph {
    g.map_probabilities(|_, v, _| 1.0 / g.in_degree(v) as f64)
        .expect("1/indeg is always a valid probability")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_views_agree() {
        let g = Graph::from_edges(4, [(0, 1, 0.5), (0, 2, 0.25), (1, 2, 1.0), (3, 0, 0.1)]).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.m(), 4);
        let mut from_out: Vec<_> = g.edges().collect();
        let mut from_in: Vec<_> = (0..4)
            .flat_map(|v| g.in_edges(v).map(move |e| (e.node, v, e.prob)))
            .collect();
        from_out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        from_in.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(from_out, from_in);
        assert_eq!(g.in_degree(2), 2);
        assert_eq!(g.out_degree(0), 2);
        for v in 0..4 {
            for e in g.in_edges(v) {
                assert_eq!(g.out_targets[e.id], v);
            }
        }
    }

    #[test]
    fn rejects_invalid_edges() {
        assert!(Graph::from_edges(2, [(0, 0, 0.5)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1, 1.5)]).is_err());
        assert!(Graph::from_edges(2, [(0, 2, 0.5)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1, 0.5), (0, 1, 0.2)]).is_err());
    }

    #[test]
    fn weighted_cascade() {
        let g = Graph::from_edges(3, [(0, 2, 0.0), (1, 2, 0.0)]).unwrap();
        let wc = assign_wc_probabilities(&g);
        assert!(wc.edges().all(|(_, _, p)| p == 0.5));

        let g = Graph::from_edges(2, [(0, 1, 0.3)]).unwrap();
        assert_eq!(assign_wc_probabilities(&g).prob(0), 1.0);

        let g = Graph::from_edges(4, [(1, 0, 0.0), (2, 0, 0.0), (3, 0, 0.0)]).unwrap();
        let wc = assign_wc_probabilities(&g);
        assert!(wc.edges().all(|(_, _, p)| (p - 1.0 / 3.0).abs() < 1e-15));
    }
}
