//! Exact expectations by enumerating every live-edge outcome.
//!
//! Only edges with `0 < p < 1` are enumerated; certain edges are always live
//! and impossible ones are dropped. Node sets are `u128` bitmasks, so graphs
//! are limited to 128 nodes (source included) and 22 uncertain edges.
//!
//! The traversal code here is deliberately independent of the sampling
//! machinery it is used to check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BlockerSet, Graph, NodeId, SeedSet, UnifiedGraph};

/// Most uncertain edges enumerated (`2^22` outcomes).
pub const MAX_UNCERTAIN_EDGES: usize = 22;
/// Largest `C(candidates, k)` searched by [`Oracle::optimal_blockers`].
pub const MAX_SUBSETS: f64 = 1e5;

const BLOCK: u64 = 1 << 10;

/// Which set function to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    /// Expected decrease `D(B)`.
    Decrease,
    /// Lower bound `D^L(B)`: nodes each saved by a single blocker.
    Lower,
    /// Upper bound `D^U(B)`: nodes reachable from `B` in the seed-reachable
    /// subgraph.
    Upper,
}

/// Exact values of one blocker set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Exact {
    /// Expected non-seed spread with `B` blocked.
    pub residual: f64,
    pub decrease: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Exact {
    pub fn get(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Decrease => self.decrease,
            Objective::Lower => self.lower,
            Objective::Upper => self.upper,
        }
    }
}

/// An enumerable instance.
#[derive(Clone, Debug)]
pub struct Oracle {
    nodes: usize,
    sources: u128,
    counted: u128,
    candidates: Vec<NodeId>,
    certain: Vec<u128>,
    uncertain: Vec<(NodeId, NodeId, f64)>,
}

fn bit(v: NodeId) -> u128 {
    1u128 << v
}

fn mask_of(nodes: &[NodeId]) -> u128 {
    nodes.iter().fold(0, |m, &v| m | bit(v))
}

impl Oracle {
    /// Oracle over the unified graph, spreading from its virtual source.
    pub fn new(g: &UnifiedGraph) -> Result<Oracle> {
        let source = g.source();
        let counted = g.candidates().fold(0, |m, v| m | bit(v));
        Oracle::build(g.graph(), bit(source), counted, g.candidates().collect())
    }

    /// Oracle over the base graph, spreading from the seeds directly.
    pub fn multi_seed(g: &Graph, seeds: &SeedSet) -> Result<Oracle> {
        let candidates: Vec<NodeId> = (0..g.n() as NodeId).filter(|&v| !seeds.contains(v)).collect();
        Oracle::build(g, mask_of(seeds.as_slice()), mask_of(&candidates), candidates)
    }

    fn build(g: &Graph, sources: u128, counted: u128, candidates: Vec<NodeId>) -> Result<Oracle> {
        if g.n() > 128 {
            return Err(Error::OracleLimit(format!("{} nodes exceed the 128-node limit", g.n())));
        }
        let mut certain = vec![0u128; g.n()];
        let mut uncertain = Vec::new();
        for (u, v, p) in g.edges() {
            if p >= 1.0 {
                certain[u as usize] |= bit(v);
            } else if p > 0.0 {
                uncertain.push((u, v, p));
            }
        }
        if uncertain.len() > MAX_UNCERTAIN_EDGES {
            return Err(Error::OracleLimit(format!(
                "{} uncertain edges exceed the limit of {MAX_UNCERTAIN_EDGES}",
                uncertain.len()
            )));
        }
        Ok(Oracle {
            nodes: g.n(),
            sources,
            counted,
            candidates,
            certain,
            uncertain,
        })
    }

    /// Blocker candidates (non-seed base nodes).
    pub fn candidates(&self) -> &[NodeId] {
        &self.candidates
    }

    pub fn outcomes(&self) -> u64 {
        1 << self.uncertain.len()
    }

    fn adjacency(&self, outcome: u64, adj: &mut [u128]) -> f64 {
        adj.copy_from_slice(&self.certain);
        let mut weight = 1.0;
        for (i, &(u, v, p)) in self.uncertain.iter().enumerate() {
            if outcome >> i & 1 == 1 {
                adj[u as usize] |= bit(v);
                weight *= p;
            } else {
                weight *= 1.0 - p;
            }
        }
        weight
    }

    fn reach(adj: &[u128], start: u128, blocked: u128) -> u128 {
        let mut reached = start & !blocked;
        let mut frontier = reached;
        while frontier != 0 {
            let u = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = adj[u] & !reached & !blocked;
            reached |= fresh;
            frontier |= fresh;
        }
        reached
    }

    /// Exact values for many blocker sets with one pass over the outcomes.
    pub fn evaluate(&self, sets: &[Vec<NodeId>]) -> Result<Vec<Exact>> {
        for set in sets {
            for &v in set {
                if self.counted & bit(v) == 0 || v as usize >= self.nodes {
                    return Err(Error::InvalidParameter(format!("node {v} cannot be blocked")));
                }
            }
        }
        let masks: Vec<u128> = sets.iter().map(|s| mask_of(s)).collect();
        let outcomes = self.outcomes();
        let blocks = outcomes.div_ceil(BLOCK);
        let partials: Vec<Vec<[f64; 4]>> = (0..blocks)
            .into_par_iter()
            .map(|blk| {
                let mut acc = vec![[0.0f64; 4]; sets.len()];
                let mut adj = vec![0u128; self.nodes];
                let mut saved = vec![0u128; self.nodes];
                for outcome in blk * BLOCK..((blk + 1) * BLOCK).min(outcomes) {
                    let w = self.adjacency(outcome, &mut adj);
                    let r0 = Oracle::reach(&adj, self.sources, 0);
                    let phi_s = r0 & self.counted;
                    let base = phi_s.count_ones() as f64;
                    // nodes saved by each single blocker
                    let mut m = phi_s;
                    while m != 0 {
                        let v = m.trailing_zeros() as usize;
                        m &= m - 1;
                        saved[v] = phi_s & !Oracle::reach(&adj, self.sources, 1u128 << v);
                    }
                    for (a, &b) in acc.iter_mut().zip(&masks) {
                        let residual = (Oracle::reach(&adj, self.sources, b) & self.counted).count_ones() as f64;
                        let mut lower = 0u128;
                        let mut hit = b & phi_s;
                        while hit != 0 {
                            let v = hit.trailing_zeros() as usize;
                            hit &= hit - 1;
                            lower |= saved[v];
                        }
                        let upper = Oracle::reach(&adj, b & phi_s, !phi_s).count_ones() as f64;
                        a[0] += w * residual;
                        a[1] += w * (base - residual);
                        a[2] += w * lower.count_ones() as f64;
                        a[3] += w * upper;
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![[0.0f64; 4]; sets.len()];
        for part in partials {
            for (t, p) in total.iter_mut().zip(part) {
                for i in 0..4 {
                    t[i] += p[i];
                }
            }
        }
        Ok(total
            .into_iter()
            .map(|[residual, decrease, lower, upper]| Exact {
                residual,
                decrease,
                lower,
                upper,
            })
            .collect())
    }

    pub fn exact(&self, b: &[NodeId]) -> Result<Exact> {
        Ok(self.evaluate(&[b.to_vec()])?[0])
    }

    /// Every subset of the candidates with at most `k` nodes, in
    /// lexicographic order.
    pub fn subsets(&self, k: usize) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new()];
        let mut cur = Vec::new();
        fn rec(c: &[NodeId], start: usize, k: usize, cur: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
            for i in start..c.len() {
                cur.push(c[i]);
                out.push(cur.clone());
                if cur.len() < k {
                    rec(c, i + 1, k, cur, out);
                }
                cur.pop();
            }
        }
        if k > 0 {
            rec(&self.candidates, 0, k, &mut cur, &mut out);
        }
        out
    }

    /// Exhaustive optimum over sets of at most `k` candidates. Ties go to
    /// the lexicographically smallest set.
    pub fn optimal_blockers(&self, k: usize, objective: Objective) -> Result<(BlockerSet, f64)> {
        let c = self.candidates.len();
        let count = crate::optimize::ln_choose(c, k.min(c)).exp();
        if count > MAX_SUBSETS {
            return Err(Error::OracleLimit(format!("C({c}, {k}) subsets exceed {MAX_SUBSETS}")));
        }
        let sets = self.subsets(k);
        let values = self.evaluate(&sets)?;
        let mut best = 0;
        for i in 1..sets.len() {
            if values[i].get(objective) > values[best].get(objective) + 1e-9 {
                best = i;
            }
        }
        Ok((
            BlockerSet::new(sets[best].iter().copied()).expect("distinct candidates"),
            values[best].get(objective),
        ))
    }

    /// Greedy selection by exact marginal gain, ties to the lowest id.
    pub fn greedy(&self, k: usize, objective: Objective) -> Result<BlockerSet> {
        let mut chosen: Vec<NodeId> = Vec::new();
        while chosen.len() < k.min(self.candidates.len()) {
            let options: Vec<NodeId> = self.candidates.iter().copied().filter(|v| !chosen.contains(v)).collect();
            let sets: Vec<Vec<NodeId>> = options
                .iter()
                .map(|&v| {
                    let mut s = chosen.clone();
                    s.push(v);
                    s
                })
                .collect();
            let values = self.evaluate(&sets)?;
            let mut best = 0;
            for i in 1..options.len() {
                if values[i].get(objective) > values[best].get(objective) + 1e-9 {
                    best = i;
                }
            }
            chosen.push(options[best]);
        }
        Ok(BlockerSet::new(chosen).expect("distinct"))
    }
}

/// Expected non-seed spread with `b` blocked.
pub fn exact_spread(g: &UnifiedGraph, b: &BlockerSet) -> Result<f64> {
    Ok(Oracle::new(g)?.exact(b.as_slice())?.residual)
}

pub fn exact_decrease(g: &UnifiedGraph, b: &BlockerSet) -> Result<f64> {
    Ok(Oracle::new(g)?.exact(b.as_slice())?.decrease)
}

pub fn exact_lower_bound(g: &UnifiedGraph, b: &BlockerSet) -> Result<f64> {
    Ok(Oracle::new(g)?.exact(b.as_slice())?.lower)
}

pub fn exact_upper_bound(g: &UnifiedGraph, b: &BlockerSet) -> Result<f64> {
    Ok(Oracle::new(g)?.exact(b.as_slice())?.upper)
}

pub fn exact_optimal_blockers(g: &UnifiedGraph, k: usize, objective: Objective) -> Result<(BlockerSet, f64)> {
    Oracle::new(g)?.optimal_blockers(k, objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::unify_seeds;

    fn set(v: &[NodeId]) -> BlockerSet {
        BlockerSet::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn spreads() {
        let g = Graph::from_edges(2, [(0, 1, 0.5)]).unwrap();
        let u = unify_seeds(&g, &SeedSet::new([0], 2).unwrap()).unwrap();
        assert_eq!(exact_spread(&u, &set(&[])).unwrap(), 0.5);
        assert_eq!(exact_spread(&fixtures::chain().unified(), &set(&[])).unwrap(), 2.0);
        let d = exact_spread(&fixtures::diamond(0.5).unified(), &set(&[])).unwrap();
        assert!((d - 1.4375).abs() < 1e-12, "{d}");
    }

    #[test]
    fn bounds_example_values() {
        let g = fixtures::bounds_example().unified();
        let e = Oracle::new(&g).unwrap().exact(&fixtures::BOUNDS_EXAMPLE_BLOCKERS).unwrap();
        assert_eq!((e.decrease, e.lower, e.upper), (7.0, 6.0, 8.0));
        let on = set(g.seed_neighbors());
        let all = exact_spread(&g, &set(&[])).unwrap();
        assert_eq!(exact_decrease(&g, &on).unwrap(), all);
        assert_eq!(exact_decrease(&g, &set(&[])).unwrap(), 0.0);
    }

    #[test]
    fn diamond_bounds() {
        let g = fixtures::diamond(1.0).unified();
        assert_eq!(exact_lower_bound(&g, &set(&[1, 2])).unwrap(), 2.0);
        assert_eq!(exact_decrease(&g, &set(&[1, 2])).unwrap(), 3.0);
        assert_eq!(exact_upper_bound(&g, &set(&[1])).unwrap(), 2.0);
        assert_eq!(exact_decrease(&g, &set(&[1])).unwrap(), 1.0);
        let chain = fixtures::chain().unified();
        assert_eq!(exact_upper_bound(&chain, &set(&[1])).unwrap(), 2.0);
        assert_eq!(exact_decrease(&chain, &set(&[1])).unwrap(), 2.0);
    }

    #[test]
    fn single_blocker_lower_equals_decrease() {
        let g = fixtures::dominator_example().unified();
        let o = Oracle::new(&g).unwrap();
        for v in o.candidates().to_vec() {
            let e = o.exact(&[v]).unwrap();
            assert!((e.lower - e.decrease).abs() < 1e-12);
        }
    }

    #[test]
    fn optimal_sets() {
        let d = fixtures::diamond(1.0).unified();
        let (b, v) = exact_optimal_blockers(&d, 2, Objective::Decrease).unwrap();
        assert_eq!((b.sorted(), v), (vec![1, 2], 3.0));
        let (b, v) = exact_optimal_blockers(&fixtures::gadget(8).unified(), 1, Objective::Decrease).unwrap();
        assert_eq!((b.sorted(), v), (vec![3], 5.0));
        let (b, v) = exact_optimal_blockers(&d, 0, Objective::Decrease).unwrap();
        assert!(b.is_empty() && v == 0.0);
    }

    #[test]
    fn gadget_is_not_submodular() {
        let g = fixtures::gadget(8).unified();
        let o = Oracle::new(&g).unwrap();
        let single = o.exact(&[1]).unwrap().decrease + o.exact(&[2]).unwrap().decrease;
        let joint = o.exact(&[1, 2]).unwrap().decrease;
        assert_eq!(single, 2.0);
        assert_eq!(joint, 7.0);
    }

    #[test]
    fn unification_preserves_values() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        for _ in 0..20 {
            let fx = fixtures::random_tiny(&mut rng, 8, 14, 2, &[0.3, 0.5, 1.0]);
            let seeds = SeedSet::new(fx.seeds.iter().copied(), 8).unwrap();
            let unified = Oracle::new(&fx.unified()).unwrap();
            let base = Oracle::multi_seed(&fx.graph, &seeds).unwrap();
            let sets = unified.subsets(2);
            let a = unified.evaluate(&sets).unwrap();
            let b = base.evaluate(&sets).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x.residual - y.residual).abs() < 1e-12);
                assert!((x.decrease - y.decrease).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn refuses_large_instances() {
        let edges: Vec<_> = (0..30).map(|v| (v, v + 1, 0.5)).collect();
        let g = Graph::from_edges(31, edges).unwrap();
        let u = unify_seeds(&g, &SeedSet::new([0], 31).unwrap()).unwrap();
        assert!(matches!(Oracle::new(&u), Err(Error::OracleLimit(_))));
        assert!(Oracle::new(&fixtures::chain().unified()).unwrap().exact(&[0]).is_err());
    }
}
