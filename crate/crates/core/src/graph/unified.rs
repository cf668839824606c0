use serde::{Deserialize, Serialize};

use super::{Graph, NodeId};
use crate::error::{Error, Result};

/// Misinformation seeds, kept sorted and unique.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet(Vec<NodeId>);

impl SeedSet {
    pub fn new(seeds: impl IntoIterator<Item = NodeId>, n: usize) -> Result<SeedSet> {
        let mut seeds: Vec<NodeId> = seeds.into_iter().collect();
        if let Some(&bad) = seeds.iter().find(|&&s| s as usize >= n) {
            return Err(Error::NodeOutOfRange { node: bad, n });
        }
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.is_empty() {
            return Err(Error::NoSeeds);
        }
        Ok(SeedSet(seeds))
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.binary_search(&v).is_ok()
    }
}

/// Blocker nodes in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockerSet(Vec<NodeId>);

impl BlockerSet {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Result<BlockerSet> {
        let mut b = BlockerSet::default();
        for v in nodes {
            b.push(v)?;
        }
        Ok(b)
    }

    pub fn empty() -> BlockerSet {
        BlockerSet::default()
    }

    pub fn push(&mut self, v: NodeId) -> Result<()> {
        if self.contains(v) {
            return Err(Error::DuplicateBlocker(v));
        }
        self.0.push(v);
        Ok(())
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.contains(&v)
    }

    pub fn remove(&mut self, v: NodeId) -> bool {
        match self.0.iter().position(|&x| x == v) {
            Some(i) => {
                self.0.remove(i);
                true
            }
            None => false,
        }
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Node ids in ascending order.
    pub fn sorted(&self) -> Vec<NodeId> {
        let mut v = self.0.clone();
        v.sort_unstable();
        v
    }
}

impl<'a> IntoIterator for &'a BlockerSet {
    type Item = &'a NodeId;
    type IntoIter = std::slice::Iter<'a, NodeId>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// A graph extended with a virtual source `s = n` that reaches every seed
/// with probability one.
///
/// Base node and edge ids are unchanged; the source's edges are appended
/// after the base edges.
#[derive(Clone, Debug)]
pub struct UnifiedGraph {
    graph: Graph,
    base_n: usize,
    seeds: SeedSet,
    is_seed: Vec<bool>,
    seed_neighbors: Vec<NodeId>,
}

/// Adds the unified source. Seeds are validated against `g`.
pub fn unify_seeds(g: &Graph, seeds: &SeedSet) -> Result<UnifiedGraph> {
    let n = g.n();
    if let Some(&bad) = seeds.as_slice().iter().find(|&&s| s as usize >= n) {
        return Err(Error::NodeOutOfRange { node: bad, n });
    }
    let source = n as NodeId;
    let mut labels = g.labels().to_vec();
    labels.push(u64::MAX);
    let edges = g
        .edges()
        .chain(seeds.as_slice().iter().map(|&v| (source, v, 1.0)));
    let graph = Graph::with_labels(labels, edges)?;

    let mut is_seed = vec![false; n + 1];
    for &v in seeds.as_slice() {
        is_seed[v as usize] = true;
    }
    let mut seed_neighbors: Vec<NodeId> = seeds
        .as_slice()
        .iter()
        .flat_map(|&u| g.out_edges(u))
        .filter(|e| e.prob > 0.0 && !is_seed[e.node as usize])
        .map(|e| e.node)
        .collect();
    seed_neighbors.sort_unstable();
    seed_neighbors.dedup();

    Ok(UnifiedGraph {
        graph,
        base_n: n,
        seeds: seeds.clone(),
        is_seed,
        seed_neighbors,
    })
}

impl UnifiedGraph {
    /// The extended graph (base nodes plus the source).
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Number of nodes in the base graph; also the id of the source.
    pub fn base_n(&self) -> usize {
        self.base_n
    }

    pub fn source(&self) -> NodeId {
        self.base_n as NodeId
    }

    pub fn seeds(&self) -> &SeedSet {
        &self.seeds
    }

    /// True for seeds and for the source itself.
    #[inline]
    pub fn is_seed_or_source(&self, v: NodeId) -> bool {
        v as usize == self.base_n || self.is_seed[v as usize]
    }

    pub fn is_seed(&self, v: NodeId) -> bool {
        (v as usize) < self.base_n && self.is_seed[v as usize]
    }

    /// Non-seed base nodes: the blocker candidates `V \ S`.
    pub fn candidates(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.base_n as NodeId).filter(move |&v| !self.is_seed[v as usize])
    }

    /// Out-neighbors of the seed set reachable over positive-probability
    /// edges, excluding seeds (`ON`).
    pub fn seed_neighbors(&self) -> &[NodeId] {
        &self.seed_neighbors
    }

    /// Out-degree in the base graph.
    pub fn out_degree(&self, v: NodeId) -> usize {
        self.graph.out_degree(v)
    }

    pub fn unblocked(&self) -> Blocked<'_> {
        Blocked {
            graph: self,
            mask: vec![false; self.base_n + 1],
            blockers: BlockerSet::empty(),
        }
    }

    /// Blocks every node of `b`: edges into a blocked node never carry
    /// influence. Seeds, the source and unknown ids are rejected.
    pub fn block(&self, b: &BlockerSet) -> Result<Blocked<'_>> {
        let mut mask = vec![false; self.base_n + 1];
        for &v in b {
            if v as usize >= self.base_n {
                return Err(Error::NodeOutOfRange { node: v, n: self.base_n });
            }
            if self.is_seed[v as usize] {
                return Err(Error::BlockSeed(v));
            }
            mask[v as usize] = true;
        }
        Ok(Blocked {
            graph: self,
            mask,
            blockers: b.clone(),
        })
    }
}

/// A unified graph viewed with some nodes blocked.
#[derive(Clone, Debug)]
pub struct Blocked<'a> {
    graph: &'a UnifiedGraph,
    mask: Vec<bool>,
    blockers: BlockerSet,
}

impl<'a> Blocked<'a> {
    pub fn graph(&self) -> &'a UnifiedGraph {
        self.graph
    }

    pub fn blockers(&self) -> &BlockerSet {
        &self.blockers
    }

    #[inline]
    pub fn is_blocked(&self, v: NodeId) -> bool {
        self.mask[v as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn source_edges_reach_each_seed_with_certainty() {
        let g = Graph::from_edges(11, (0..10).map(|v| (v, v + 1, 0.5))).unwrap();
        let seeds = SeedSet::new([1, 5, 10], 11).unwrap();
        let u = unify_seeds(&g, &seeds).unwrap();
        let s = u.source();
        assert_eq!(s, 11);
        let out: Vec<_> = u.graph().out_edges(s).map(|e| (e.node, e.prob)).collect();
        assert_eq!(out, vec![(1, 1.0), (5, 1.0), (10, 1.0)]);
        assert_eq!(u.graph().in_degree(s), 0);
        // base edges keep their ids
        for (id, (a, b, p)) in g.edges().enumerate() {
            assert_eq!(u.graph().edges().nth(id), Some((a, b, p)));
        }
    }

    #[test]
    fn single_seed_and_all_seeds() {
        let g = chain();
        let u = unify_seeds(&g, &SeedSet::new([0], 3).unwrap()).unwrap();
        assert_eq!(u.graph().out_degree(u.source()), 1);
        assert_eq!(u.seed_neighbors(), &[1]);

        let u = unify_seeds(&g, &SeedSet::new([0, 1, 2], 3).unwrap()).unwrap();
        assert_eq!(u.graph().out_degree(u.source()), 3);
        assert_eq!(u.candidates().count(), 0);
        assert!(u.seed_neighbors().is_empty());
    }

    #[test]
    fn seed_validation() {
        assert!(matches!(SeedSet::new([3], 3), Err(Error::NodeOutOfRange { .. })));
        assert!(matches!(SeedSet::new([], 3), Err(Error::NoSeeds)));
    }

    #[test]
    fn blocking_rejects_seeds_and_source() {
        let g = chain();
        let u = unify_seeds(&g, &SeedSet::new([0], 3).unwrap()).unwrap();
        assert!(matches!(
            u.block(&BlockerSet::new([0]).unwrap()),
            Err(Error::BlockSeed(0))
        ));
        assert!(u.block(&BlockerSet::new([3]).unwrap()).is_err());
        assert!(BlockerSet::new([1, 1]).is_err());
        let b = u.block(&BlockerSet::new([1]).unwrap()).unwrap();
        assert!(b.is_blocked(1) && !b.is_blocked(2));
        assert!(!u.unblocked().is_blocked(1));
    }

    #[test]
    fn zero_probability_edges_do_not_count_as_seed_neighbors() {
        let g = Graph::from_edges(3, [(0, 1, 0.0), (0, 2, 0.4)]).unwrap();
        let u = unify_seeds(&g, &SeedSet::new([0], 3).unwrap()).unwrap();
        assert_eq!(u.seed_neighbors(), &[2]);
    }
}
