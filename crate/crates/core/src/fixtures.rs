//! Small hand-built graphs used by the tests, the guide and `imin oracle-check`.
//!
//! Every fixture is small enough for exact enumeration, except the graphs
//! from [`synthetic`].

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{assign_wc_probabilities, unify_seeds, Graph, NodeId, SeedSet, UnifiedGraph};

/// A named graph plus its seed set.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub graph: Graph,
    pub seeds: Vec<NodeId>,
}

impl Fixture {
    fn new(name: &str, n: usize, edges: &[(NodeId, NodeId, f64)], seeds: &[NodeId]) -> Fixture {
        Fixture {
            name: name.to_string(),
            graph: Graph::from_edges(n, edges.iter().copied()).expect("fixture graph is valid"),
            seeds: seeds.to_vec(),
        }
    }

    pub fn unified(&self) -> UnifiedGraph {
        let seeds = SeedSet::new(self.seeds.iter().copied(), self.graph.n()).expect("fixture seeds");
        unify_seeds(&self.graph, &seeds).expect("fixture seeds are in range")
    }
}

/// Seed 0 feeding the path 0 -> 1 -> 2 with certainty.
pub fn chain() -> Fixture {
    Fixture::new("chain", 3, &[(0, 1, 1.0), (1, 2, 1.0)], &[0])
}

/// `0 -> {1, 2} -> 3`, every edge with probability `p`, seed 0.
pub fn diamond(p: f64) -> Fixture {
    Fixture::new(
        &format!("diamond-{p}"),
        4,
        &[(0, 1, p), (0, 2, p), (1, 3, p), (2, 3, p)],
        &[0],
    )
}

/// The submodularity-ratio gadget on `n >= 5` nodes: `0 -> {1, 2} -> 3 ->
/// {4, .., n-1}`, all edges certain, seed 0. Blocking 1 or 2 alone saves
/// one node; blocking both saves `n - 1`.
pub fn gadget(n: usize) -> Fixture {
    assert!(n >= 5);
    let mut edges = vec![(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)];
    edges.extend((4..n as NodeId).map(|v| (3, v, 1.0)));
    Fixture::new(&format!("gadget-{n}"), n, &edges, &[0])
}

/// Seven-node network with seed 0 used to illustrate dominator-tree
/// estimation. Node 3 funnels both branches into {5, 6}; node 4 hangs off 1.
///
/// Probabilities are chosen so that greedy selection by expected decrease
/// picks 3 and then 1 for `k = 2`, leaving 2 unprotected, while blocking
/// both out-neighbors {1, 2} of the seed protects everyone.
pub fn dominator_example() -> Fixture {
    Fixture::new(
        "dominator-example",
        7,
        &[
            (0, 1, 1.0),
            (0, 2, 0.8),
            (1, 3, 0.8),
            (2, 3, 1.0),
            (3, 5, 1.0),
            (3, 6, 1.0),
            (5, 6, 0.9),
            (1, 4, 0.6),
        ],
        &[0],
    )
}

/// The live edges of one realization of [`dominator_example`]: everything
/// except `1 -> 4`, so node 4 is unreached and node 6 has four paths.
pub fn dominator_example_realization() -> Vec<(NodeId, NodeId)> {
    vec![(0, 1), (0, 2), (1, 3), (2, 3), (3, 5), (3, 6), (5, 6)]
}

/// Fourteen-node deterministic network with seeds {1, 5, 10}.
///
/// The edge list is a reconstruction chosen so that the blocker set
/// [`BOUNDS_EXAMPLE_BLOCKERS`] has decrease 7, lower bound 6 and upper
/// bound 8: node 8 needs both 3 and 7 blocked (combination effect) and
/// node 6 is reachable from 3 but also fed directly by seed 5.
pub fn bounds_example() -> Fixture {
    Fixture::new(
        "bounds-example",
        14,
        &[
            (1, 3, 1.0),
            (1, 2, 1.0),
            (3, 4, 1.0),
            (3, 6, 1.0),
            (3, 8, 1.0),
            (5, 6, 1.0),
            (5, 7, 1.0),
            (7, 8, 1.0),
            (7, 9, 1.0),
            (10, 12, 1.0),
            (10, 11, 1.0),
            (11, 0, 1.0),
            (12, 13, 1.0),
        ],
        &[1, 5, 10],
    )
}

pub const BOUNDS_EXAMPLE_BLOCKERS: [NodeId; 3] = [3, 7, 12];

/// A random graph on `n` nodes with `m` distinct edges, probabilities drawn
/// from `probs`, and `seeds` seeds among the first nodes of a random order.
pub fn random_tiny<R: Rng>(rng: &mut R, n: usize, m: usize, seeds: usize, probs: &[f64]) -> Fixture {
    assert!(n >= 2 && seeds >= 1 && seeds < n);
    let m = m.min(n * (n - 1));
    let mut pairs: Vec<(NodeId, NodeId)> = (0..n as NodeId)
        .flat_map(|u| (0..n as NodeId).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    // partial Fisher-Yates
    for i in 0..m {
        let j = rng.gen_range(i..pairs.len());
        pairs.swap(i, j);
    }
    let edges: Vec<_> = pairs[..m]
        .iter()
        .map(|&(u, v)| (u, v, probs[rng.gen_range(0..probs.len())]))
        .collect();
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    for i in 0..seeds {
        let j = rng.gen_range(i..n);
        order.swap(i, j);
    }
    Fixture::new("random", n, &edges, &order[..seeds])
}

/// The bundled corpus checked by `imin oracle-check`.
pub fn corpus() -> Vec<Fixture> {
    vec![
        chain(),
        diamond(1.0),
        diamond(0.5),
        gadget(8),
        dominator_example(),
        bounds_example(),
    ]
}

/// Looks up a corpus fixture by name. `diamond` means `diamond-1` and
/// `gadget` means `gadget-8`.
pub fn by_name(name: &str) -> Option<Fixture> {
    match name {
        "diamond" => return Some(diamond(1.0)),
        "gadget" => return Some(gadget(8)),
        _ => {}
    }
    corpus().into_iter().find(|f| f.name == name)
}

/// A random directed graph with skewed degrees and weighted-cascade
/// probabilities: `m` distinct edges whose endpoints are drawn with weight
/// `(i + 1)^-0.6`, node ids shuffled.
pub fn synthetic(n: usize, m: usize, seed: u64) -> Graph {
    assert!(n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0).powf(-0.6)).collect();
    let pick = WeightedIndex::new(&weights).expect("positive weights");
    let mut perm: Vec<NodeId> = (0..n as NodeId).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let m = m.min(n * (n - 1) / 2);
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let (u, v) = (perm[pick.sample(&mut rng)], perm[pick.sample(&mut rng)]);
        if u != v && seen.insert((u, v)) {
            edges.push((u, v, 1.0));
        }
    }
    assign_wc_probabilities(&Graph::from_edges(n, edges).expect("valid edges"))
}
