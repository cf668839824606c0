//! Greedy maximum coverage and the two sample-doubling bound maximizers.
//!
//! [`lsbm`] maximizes the lower bound `D^L` over CP sequences; [`gsbm`]
//! maximizes the upper bound `D^U` over LRR sets. Both double their sample
//! collections until a martingale certificate shows the greedy set is within
//! `1 - 1/e - epsilon` of the optimum, or a worst-case sample budget is hit.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::diffusion::stopping_rule_spread;
use crate::error::{Error, Result};
use crate::graph::{BlockerSet, NodeId, UnifiedGraph};
use crate::rng::SeedStream;
use crate::sampling::{compute_population, coverage_cp, coverage_lrr, Coverage, CpCollection, LrrCollection};

const ONE_MINUS_INV_E: f64 = 1.0 - 1.0 / std::f64::consts::E;

/// Budget and accuracy knobs shared by the algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoParams {
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl AlgoParams {
    /// `epsilon = 0.2`, `beta = gamma = 0.1`, `delta = 1/n`.
    pub fn with_defaults(k: usize, n: usize) -> AlgoParams {
        AlgoParams {
            k,
            epsilon: 0.2,
            delta: 1.0 / n.max(2) as f64,
            beta: 0.1,
            gamma: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        for (name, x) in [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {x}")));
            }
        }
        Ok(())
    }

    /// Whether `2 beta / (1 + beta) <= epsilon`, the regime with a bounded
    /// expected sample count. Outside it the algorithms still run.
    pub fn beta_within_budget(&self) -> bool {
        2.0 * self.beta / (1.0 + self.beta) <= self.epsilon
    }
}

/// `ln C(a, b)` through log-gamma; zero when `b > a`.
pub fn ln_choose(a: usize, b: usize) -> f64 {
    if b > a {
        return 0.0;
    }
    ln_gamma(a as f64 + 1.0) - ln_gamma(b as f64 + 1.0) - ln_gamma((a - b) as f64 + 1.0)
}

/// Sample counts of the doubling loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSchedule {
    /// Initial collection size before rounding up.
    pub theta_0_exact: f64,
    pub theta_0: usize,
    pub theta_max: f64,
    pub i_max: u32,
    pub a1: f64,
    pub a2: f64,
}

impl SampleSchedule {
    fn finish(theta_max: f64, theta_0_exact: f64, delta: f64) -> SampleSchedule {
        let i_max = ((theta_max / theta_0_exact).log2().ceil().max(1.0)) as u32;
        let a = (3.0 * i_max as f64 / delta).ln();
        SampleSchedule {
            theta_0_exact,
            theta_0: theta_0_exact.ceil().max(1.0) as usize,
            theta_max,
            i_max,
            a1: a,
            a2: a,
        }
    }

    /// Schedule of the lower-bound maximizer. `candidates` is `n - |S|`.
    pub fn lower(candidates: usize, k: usize, epsilon: f64, delta: f64, beta: f64, spread: f64, opt_lower: f64) -> SampleSchedule {
        let l = (12.0 / delta).ln();
        let root = ONE_MINUS_INV_E * l.sqrt() + (ONE_MINUS_INV_E * (ln_choose(candidates, k) + l)).sqrt();
        let theta_max = 2.0 * spread * root * root / ((1.0 - beta) * epsilon * epsilon * opt_lower);
        let theta_0 = theta_max * (1.0 - beta) * epsilon * epsilon * opt_lower / spread;
        SampleSchedule::finish(theta_max, theta_0, delta)
    }

    /// Schedule of the upper-bound maximizer over a population of size
    /// `population` and `seeds` seeds.
    pub fn upper(population: usize, seeds: usize, k: usize, epsilon: f64, delta: f64, opt_lower: f64) -> SampleSchedule {
        let l = (6.0 / delta).ln();
        let binom = ln_choose(population.saturating_sub(seeds), k);
        let root = ONE_MINUS_INV_E * l.sqrt() + (ONE_MINUS_INV_E * (binom + l)).sqrt();
        let pop = population as f64;
        let theta_max = 2.0 * pop * root * root / (epsilon * epsilon * opt_lower);
        let theta_0 = theta_max * epsilon * epsilon * opt_lower / pop;
        SampleSchedule::finish(theta_max, theta_0, delta)
    }
}

/// The initial lower-bound collection size in closed form: it depends only
/// on the candidate count, `k` and `delta`.
pub fn lower_theta_0_closed_form(candidates: usize, k: usize, delta: f64) -> f64 {
    let l = (12.0 / delta).ln();
    let root = ONE_MINUS_INV_E * l.sqrt() + (ONE_MINUS_INV_E * (ln_choose(candidates, k) + l)).sqrt();
    2.0 * root * root
}

/// One round's stopping check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopCheck {
    pub sigma_lower: f64,
    pub sigma_upper: f64,
    pub ratio: f64,
    pub stopped: bool,
}

/// What a bound maximizer reports alongside its blocker set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Returned the seed out-neighbors without sampling.
    pub early_exit: bool,
    pub rounds: u32,
    /// Final size of the collection the greedy ran on.
    pub samples: usize,
    pub schedule: Option<SampleSchedule>,
    pub last_check: Option<StopCheck>,
    pub opt_lower: Option<f64>,
    /// Spread estimate used for normalization (lower-bound maximizer only).
    pub spread_estimate: Option<f64>,
    /// `|V'_s|` (upper-bound maximizer only).
    pub population: Option<usize>,
    /// Bound estimate of the returned set from the second collection.
    pub bound_estimate: Option<f64>,
}

/// A blocker set plus its certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub blockers: BlockerSet,
    pub certificate: Certificate,
}

/// Greedy selection with the per-prefix data needed by [`cov_upper_opt`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyTrace {
    pub blockers: BlockerSet,
    pub coverage: u64,
    /// `Cov(B_i)` for `i = 0..=|B|`.
    pub prefix_coverage: Vec<u64>,
    /// Sum of the `k` largest marginal gains with respect to `B_i`.
    pub top_gain_sum: Vec<u64>,
}

fn top_sum(gains: &[u64], active: &[NodeId], k: usize, buf: &mut Vec<u64>) -> u64 {
    buf.clear();
    if k == 0 {
        return 0;
    }
    buf.extend(active.iter().map(|&v| gains[v as usize]).filter(|&g| g > 0));
    if buf.len() > k {
        buf.select_nth_unstable_by(k - 1, |a, b| b.cmp(a));
        buf.truncate(k);
    }
    buf.iter().sum()
}

/// Greedy maximum coverage over `candidates`: `k` rounds of largest
/// marginal gain, ties to the lowest id. Lazy evaluation over exactly
/// maintained gains; selects zero-gain nodes once nothing is left to cover.
pub fn max_coverage<C: Coverage>(c: &C, candidates: &[NodeId], k: usize) -> GreedyTrace {
    let mut gains = c.initial_gains();
    let mut covered = vec![false; c.units()];
    let active: Vec<NodeId> = candidates
        .iter()
        .copied()
        .filter(|&v| (v as usize) < gains.len() && gains[v as usize] > 0)
        .collect();
    let mut heap: BinaryHeap<(u64, Reverse<NodeId>)> = candidates
        .iter()
        .map(|&v| (gains.get(v as usize).copied().unwrap_or(0), Reverse(v)))
        .collect();

    let mut buf = Vec::new();
    let mut blockers = BlockerSet::empty();
    let mut coverage = 0;
    let mut prefix_coverage = vec![0];
    let mut top_gain_sum = vec![top_sum(&gains, &active, k, &mut buf)];
    while blockers.len() < k {
        let Some((stored, Reverse(v))) = heap.pop() else {
            break;
        };
        let current = gains.get(v as usize).copied().unwrap_or(0);
        if current != stored {
            heap.push((current, Reverse(v)));
            continue;
        }
        if (v as usize) < gains.len() {
            coverage += c.cover(v, &mut covered, &mut gains);
        }
        blockers.push(v).expect("each candidate is popped once");
        prefix_coverage.push(coverage);
        top_gain_sum.push(top_sum(&gains, &active, k, &mut buf));
    }
    GreedyTrace {
        blockers,
        coverage,
        prefix_coverage,
        top_gain_sum,
    }
}

/// `min_i Cov(B_i) + (sum of the k largest gains w.r.t. B_i)`: an upper
/// bound on the coverage of any `k` nodes.
pub fn cov_upper_opt(trace: &GreedyTrace) -> u64 {
    trace
        .prefix_coverage
        .iter()
        .zip(&trace.top_gain_sum)
        .map(|(a, b)| a + b)
        .min()
        .unwrap_or(0)
}

/// `1 - prod(1 - p)` over the edges from seeds into `v`.
pub fn direct_activation_prob(g: &UnifiedGraph, v: NodeId) -> Result<f64> {
    if g.seed_neighbors().binary_search(&v).is_err() {
        return Err(Error::NotOutNeighbor(v));
    }
    let miss: f64 = g
        .graph()
        .in_edges(v)
        .filter(|e| g.is_seed(e.node))
        .map(|e| 1.0 - e.prob)
        .product();
    Ok(1.0 - miss)
}

/// Sum of the `k` largest one-hop activation probabilities over the seed
/// out-neighbors (all of them if there are fewer than `k`).
pub fn opt_lower_bound(g: &UnifiedGraph, k: usize) -> f64 {
    let mut probs: Vec<f64> = g
        .seed_neighbors()
        .iter()
        .map(|&v| direct_activation_prob(g, v).expect("v is a seed out-neighbor"))
        .collect();
    probs.sort_by(|a, b| b.total_cmp(a));
    probs.iter().take(k).sum()
}

fn early_exit(g: &UnifiedGraph) -> BoundResult {
    BoundResult {
        blockers: BlockerSet::new(g.seed_neighbors().iter().copied()).expect("sorted and unique"),
        certificate: Certificate {
            early_exit: true,
            ..Certificate::default()
        },
    }
}

fn lower_sigma(cov2: f64, beta: f64, spread: f64, a1: f64, theta2: f64) -> f64 {
    let branch = |x: f64| ((x + 2.0 * a1 / 9.0).sqrt() - (a1 / 2.0).sqrt()).powi(2) - a1 / 18.0;
    let lo = cov2 * (1.0 - beta) / spread;
    let hi = cov2 * (1.0 + beta) / spread;
    let threshold = 5.0 * a1 / 18.0;
    if lo >= threshold {
        branch(lo) / theta2
    } else if hi <= threshold {
        branch(hi) / theta2
    } else {
        0.0
    }
}

/// Lower-bound maximizer over CP sequences.
pub fn lsbm(g: &UnifiedGraph, params: &AlgoParams, stream: &mut SeedStream) -> Result<BoundResult> {
    params.validate()?;
    let k = params.k;
    if g.seed_neighbors().len() <= k {
        return Ok(early_exit(g));
    }
    let est = stopping_rule_spread(&g.unblocked(), params.beta, params.delta / 6.0, &mut stream.fork())?;
    if est.zero_spread {
        return Ok(BoundResult {
            blockers: BlockerSet::empty(),
            certificate: Certificate {
                spread_estimate: Some(0.0),
                ..Certificate::default()
            },
        });
    }
    let spread = est.value;
    let opt_lower = opt_lower_bound(g, k);
    if opt_lower <= 0.0 {
        return Err(Error::InvalidParameter("seed out-neighbors have zero activation probability".into()));
    }
    let candidates: Vec<NodeId> = g.candidates().collect();
    let sched = SampleSchedule::lower(
        candidates.len(),
        k,
        params.epsilon,
        params.delta,
        params.beta,
        spread,
        opt_lower,
    );

    let mut c1 = CpCollection::generate(g, sched.theta_0, &mut stream.fork());
    let mut c2 = CpCollection::generate(g, sched.theta_0, &mut stream.fork());
    let target = ONE_MINUS_INV_E - params.epsilon;
    let mut round = 1;
    loop {
        let trace = max_coverage(&c1, &candidates, k);
        let cov2 = coverage_cp(&c2, &trace.blockers) as f64;
        let sigma_lower = lower_sigma(cov2, params.beta, spread, sched.a1, c2.len() as f64);
        let cov_u = cov_upper_opt(&trace) as f64;
        let a2 = sched.a2;
        let sigma_upper =
            ((cov_u * (1.0 + params.beta) / spread + a2 / 2.0).sqrt() + (a2 / 2.0).sqrt()).powi(2) / c1.len() as f64;
        let ratio = sigma_lower / sigma_upper;
        let stopped = ratio >= target || round >= sched.i_max;
        if stopped {
            return Ok(BoundResult {
                certificate: Certificate {
                    early_exit: false,
                    rounds: round,
                    samples: c1.len(),
                    schedule: Some(sched),
                    last_check: Some(StopCheck {
                        sigma_lower,
                        sigma_upper,
                        ratio,
                        stopped: ratio >= target,
                    }),
                    opt_lower: Some(opt_lower),
                    spread_estimate: Some(spread),
                    population: None,
                    bound_estimate: Some(cov2 / c2.len() as f64),
                },
                blockers: trace.blockers,
            });
        }
        let (n1, n2) = (c1.len(), c2.len());
        c1.extend(g, n1, &mut stream.fork());
        c2.extend(g, n2, &mut stream.fork());
        round += 1;
    }
}

/// Upper-bound maximizer over LRR sets.
pub fn gsbm(g: &UnifiedGraph, params: &AlgoParams, stream: &mut SeedStream) -> Result<BoundResult> {
    params.validate()?;
    let k = params.k;
    let population = compute_population(g);
    if population.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if g.seed_neighbors().len() <= k {
        let mut out = early_exit(g);
        out.certificate.population = Some(population.len());
        return Ok(out);
    }
    let opt_lower = opt_lower_bound(g, k);
    if opt_lower <= 0.0 {
        return Err(Error::InvalidParameter("seed out-neighbors have zero activation probability".into()));
    }
    let candidates: Vec<NodeId> = g.candidates().collect();
    let pop = population.len() as f64;
    let sched = SampleSchedule::upper(
        population.len(),
        g.seeds().len(),
        k,
        params.epsilon,
        params.delta,
        opt_lower,
    );

    let mut l1 = LrrCollection::generate(g, &population, sched.theta_0, &mut stream.fork())?;
    let mut l2 = LrrCollection::generate(g, &population, sched.theta_0, &mut stream.fork())?;
    let target = ONE_MINUS_INV_E - params.epsilon;
    let mut round = 1;
    loop {
        let trace = max_coverage(&l1, &candidates, k);
        let cov2 = coverage_lrr(&l2, &trace.blockers) as f64;
        let (a1, a2) = (sched.a1, sched.a2);
        let sigma_lower = (((cov2 + 2.0 * a1 / 9.0).sqrt() - (a1 / 2.0).sqrt()).powi(2) - a1 / 18.0) * pop
            / l2.len() as f64;
        let cov_u = cov_upper_opt(&trace) as f64;
        let sigma_upper = ((cov_u + a2 / 2.0).sqrt() + (a2 / 2.0).sqrt()).powi(2) * pop / l1.len() as f64;
        let ratio = sigma_lower / sigma_upper;
        if ratio >= target || round >= sched.i_max {
            return Ok(BoundResult {
                certificate: Certificate {
                    early_exit: false,
                    rounds: round,
                    samples: l1.len(),
                    schedule: Some(sched),
                    last_check: Some(StopCheck {
                        sigma_lower,
                        sigma_upper,
                        ratio,
                        stopped: ratio >= target,
                    }),
                    opt_lower: Some(opt_lower),
                    spread_estimate: None,
                    population: Some(population.len()),
                    bound_estimate: Some(pop * cov2 / l2.len() as f64),
                },
                blockers: trace.blockers,
            });
        }
        let (n1, n2) = (l1.len(), l2.len());
        l1.extend(g, &population, n1, &mut stream.fork())?;
        l2.extend(g, &population, n2, &mut stream.fork())?;
        round += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::{unify_seeds, Graph, SeedSet};
    use crate::sampling::{marginal_coverage, CpSequence};
    use proptest::prelude::*;

    fn lrr(g: &UnifiedGraph, sets: &[&[NodeId]]) -> LrrCollection {
        LrrCollection::from_sets(g, 10, sets.iter().copied())
    }

    fn naive_greedy<C: Coverage>(c: &C, candidates: &[NodeId], k: usize) -> Vec<NodeId> {
        let mut b = BlockerSet::empty();
        while b.len() < k.min(candidates.len()) {
            let best = candidates
                .iter()
                .copied()
                .filter(|v| !b.contains(*v))
                .max_by_key(|&v| (marginal_coverage(c, &b, v), Reverse(v)))
                .unwrap();
            b.push(best).unwrap();
        }
        b.as_slice().to_vec()
    }

    fn universe(n: usize) -> UnifiedGraph {
        let g = Graph::from_edges(n, [(0, 1, 1.0)]).unwrap();
        unify_seeds(&g, &SeedSet::new([0], n).unwrap()).unwrap()
    }

    #[test]
    fn greedy_examples() {
        let g = universe(4);
        let cands = [1, 2, 3];
        // LRR form of the CP entries {a}, {a, b}, {c}
        let c = lrr(&g, &[&[1], &[1, 2], &[3]]);
        let t = max_coverage(&c, &cands, 1);
        assert_eq!(t.blockers.as_slice(), &[1]);
        assert_eq!(t.coverage, 2);

        let t = max_coverage(&c, &cands, 5);
        assert_eq!(t.coverage, 3);
        assert_eq!(t.blockers.len(), 3);

        let empty = lrr(&g, &[&[], &[]]);
        let t = max_coverage(&empty, &cands, 2);
        assert_eq!(t.blockers.as_slice(), &[1, 2]);
        assert_eq!(t.coverage, 0);
    }

    #[test]
    fn greedy_over_cp_entries() {
        let g = fixtures::chain().unified();
        let mut live = vec![(0, 1), (1, 2)];
        live.push((g.source(), 0));
        let phi = crate::diffusion::Realization::from_live_edges(4, g.source(), &live);
        let seq = CpSequence::from_realization(&g, &phi);
        let c = CpCollection::from_sequences(&g, [&seq]);
        let t = max_coverage(&c, &[1, 2], 1);
        assert_eq!(t.blockers.as_slice(), &[1]);
        assert_eq!(t.coverage, 2);
        assert_eq!(cov_upper_opt(&t), 2);
    }

    #[test]
    fn upper_opt_single_cover() {
        let g = universe(4);
        let c = lrr(&g, &[&[1, 2], &[1], &[1, 3]]);
        let t = max_coverage(&c, &[1, 2, 3], 1);
        assert_eq!(cov_upper_opt(&t), 3);
        assert!(cov_upper_opt(&t) <= t.top_gain_sum[0]);
    }

    fn arb_sets() -> impl Strategy<Value = Vec<Vec<NodeId>>> {
        prop::collection::vec(prop::collection::btree_set(1u32..10, 0..5), 0..25)
            .prop_map(|v| v.into_iter().map(|s| s.into_iter().collect()).collect())
    }

    proptest! {
        #[test]
        fn lazy_greedy_equals_naive(sets in arb_sets(), k in 1usize..6) {
            let g = universe(10);
            let refs: Vec<&[NodeId]> = sets.iter().map(|s| s.as_slice()).collect();
            let c = lrr(&g, &refs);
            let cands: Vec<NodeId> = (1..10).collect();
            let t = max_coverage(&c, &cands, k);
            let naive = naive_greedy(&c, &cands, k);
            prop_assert_eq!(t.blockers.as_slice(), naive.as_slice());
        }

        #[test]
        fn upper_opt_bounds_every_k_subset(sets in arb_sets(), k in 1usize..4) {
            let g = universe(10);
            let refs: Vec<&[NodeId]> = sets.iter().map(|s| s.as_slice()).collect();
            let c = lrr(&g, &refs);
            let cands: Vec<NodeId> = (1..10).collect();
            let t = max_coverage(&c, &cands, k);
            let bound = cov_upper_opt(&t);
            let mut best = 0;
            for mask in 0u32..(1 << 9) {
                if mask.count_ones() as usize != k {
                    continue;
                }
                let b = BlockerSet::new((0..9).filter(|i| mask >> i & 1 == 1).map(|i| i + 1)).unwrap();
                best = best.max(coverage_lrr(&c, &b));
            }
            prop_assert!(bound >= best);
            prop_assert!(t.coverage as f64 >= ONE_MINUS_INV_E * best as f64);
        }
    }

    #[test]
    fn activation_probabilities() {
        let g = Graph::from_edges(4, [(0, 2, 0.4), (0, 3, 0.5), (1, 3, 0.5), (1, 2, 0.0)]).unwrap();
        let u = unify_seeds(&g, &SeedSet::new([0, 1], 4).unwrap()).unwrap();
        assert!((direct_activation_prob(&u, 2).unwrap() - 0.4).abs() < 1e-12);
        assert!((direct_activation_prob(&u, 3).unwrap() - 0.75).abs() < 1e-12);
        assert!(matches!(direct_activation_prob(&u, 0), Err(Error::NotOutNeighbor(0))));

        let c = fixtures::chain().unified();
        assert_eq!(direct_activation_prob(&c, 1).unwrap(), 1.0);
    }

    #[test]
    fn opt_lower_examples() {
        let g = Graph::from_edges(4, [(0, 1, 1.0), (0, 2, 0.5), (0, 3, 0.2)]).unwrap();
        let u = unify_seeds(&g, &SeedSet::new([0], 4).unwrap()).unwrap();
        assert!((opt_lower_bound(&u, 2) - 1.5).abs() < 1e-12);
        assert_eq!(opt_lower_bound(&u, 1), 1.0);
        assert!((opt_lower_bound(&u, 5) - 1.7).abs() < 1e-12);
        assert_eq!(opt_lower_bound(&fixtures::diamond(1.0).unified(), 2), 2.0);
    }

    #[test]
    fn schedule_closed_form() {
        for (cands, k, delta, beta, eps, spread, opt) in [
            (100, 5, 0.01, 0.1, 0.2, 37.5, 2.5),
            (10_000, 50, 1e-4, 0.05, 0.1, 900.0, 12.0),
        ] {
            let s = SampleSchedule::lower(cands, k, eps, delta, beta, spread, opt);
            let closed = lower_theta_0_closed_form(cands, k, delta);
            assert!((s.theta_0_exact - closed).abs() <= 1e-9 * closed);
            assert!(s.theta_max >= s.theta_0_exact && s.i_max >= 1);
        }
        // ln C(a, b) against exact values
        assert!((ln_choose(10, 3) - 120f64.ln()).abs() < 1e-9);
        assert_eq!(ln_choose(3, 5), 0.0);
        assert!(ln_choose(1_000_000, 1000).is_finite());
    }

    #[test]
    fn lsbm_early_exit() {
        let g = fixtures::diamond(0.5).unified();
        let p = AlgoParams { k: 5, ..AlgoParams::with_defaults(5, 4) };
        let r = lsbm(&g, &p, &mut SeedStream::new(0)).unwrap();
        assert!(r.certificate.early_exit);
        assert_eq!(r.blockers.as_slice(), &[1, 2]);
    }

    /// Seed 0 reaches leaves `1..=leaves` with probability 0.5; leaf `v`
    /// certainly activates `v` private followers.
    fn star(leaves: u32) -> UnifiedGraph {
        let mut edges = Vec::new();
        let mut next = leaves + 1;
        for v in 1..=leaves {
            edges.push((0, v, 0.5));
            for _ in 0..v {
                edges.push((v, next, 1.0));
                next += 1;
            }
        }
        let g = Graph::from_edges(next as usize, edges).unwrap();
        unify_seeds(&g, &SeedSet::new([0], g.n()).unwrap()).unwrap()
    }

    #[test]
    fn lsbm_doubling_schedule() {
        let g = star(5);
        let p = AlgoParams { k: 2, epsilon: 0.2, delta: 0.1, beta: 0.1, gamma: 0.1 };
        let r = lsbm(&g, &p, &mut SeedStream::new(1)).unwrap();
        let c = &r.certificate;
        let s = c.schedule.unwrap();
        assert_eq!(c.samples, s.theta_0 << (c.rounds - 1));
        assert!(c.samples as f64 <= 2.0 * s.theta_max + s.theta_0 as f64);
        assert_eq!(r.blockers.len(), 2);
        assert_eq!(r.blockers.sorted(), vec![4, 5]);
        let again = lsbm(&g, &p, &mut SeedStream::new(1)).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn gsbm_small_cases() {
        let chain = fixtures::chain().unified();
        let p = AlgoParams::with_defaults(1, 3);
        assert_eq!(gsbm(&chain, &p, &mut SeedStream::new(0)).unwrap().blockers.as_slice(), &[1]);

        let diamond = fixtures::diamond(1.0).unified();
        let r = gsbm(&diamond, &AlgoParams::with_defaults(1, 4), &mut SeedStream::new(0)).unwrap();
        assert!(r.blockers.as_slice() == [1] || r.blockers.as_slice() == [2]);

        let nothing = fixtures::diamond(0.0).unified();
        assert!(matches!(
            gsbm(&nothing, &AlgoParams::with_defaults(1, 4), &mut SeedStream::new(0)),
            Err(Error::EmptyPopulation)
        ));
    }

    #[test]
    fn gsbm_doubling_and_determinism() {
        let g = star(5);
        let p = AlgoParams { k: 2, epsilon: 0.2, delta: 0.1, beta: 0.1, gamma: 0.1 };
        let r = gsbm(&g, &p, &mut SeedStream::new(4)).unwrap();
        let c = &r.certificate;
        let s = c.schedule.unwrap();
        assert_eq!(c.samples, s.theta_0 << (c.rounds - 1));
        assert_eq!(c.population, Some(20));
        assert_eq!(r.blockers.sorted(), vec![4, 5]);
        assert_eq!(gsbm(&g, &p, &mut SeedStream::new(4)).unwrap(), r);
    }

    #[test]
    fn parameter_validation() {
        let g = fixtures::chain().unified();
        let mut p = AlgoParams::with_defaults(1, 3);
        p.epsilon = 1.5;
        assert!(lsbm(&g, &p, &mut SeedStream::new(0)).is_err());
        p = AlgoParams::with_defaults(0, 3);
        assert!(gsbm(&g, &p, &mut SeedStream::new(0)).is_err());
        assert!(!AlgoParams { beta: 0.5, ..AlgoParams::with_defaults(1, 3) }.beta_within_budget());
    }
}
