//! Greedy baselines: plain Monte-Carlo greedy, greedy over dominator-tree
//! estimates with fresh realizations each round (AG), and the two-stage
//! greedy-then-replace variant (GR).

use crate::diffusion::{reach_count_without, Realization, Scratch};
use crate::domtree::build_dominator_tree;
use crate::error::{Error, Result};
use crate::graph::{Blocked, BlockerSet, NodeId, UnifiedGraph};
use crate::rng::{EdgeCoins, SeedStream};

/// Most replacement passes GR makes before giving up.
pub const GR_MAX_PASSES: usize = 10;

fn add(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Index of the largest score among `pool`, ties to the lowest id.
fn best_of(scores: &[u64], pool: impl Iterator<Item = NodeId>) -> Option<NodeId> {
    pool.fold(None, |best: Option<NodeId>, v| match best {
        Some(b) if scores[b as usize] > scores[v as usize] => Some(b),
        Some(b) if scores[b as usize] == scores[v as usize] && b < v => Some(b),
        _ => Some(v),
    })
}

/// Summed Monte-Carlo decreases `spread(B) - spread(B + v)` over `trials`
/// shared realizations of the blocked graph.
fn mc_marginals(view: &Blocked<'_>, trials: usize, stream: &mut SeedStream) -> Vec<u64> {
    let ug = view.graph();
    let len = ug.graph().n();
    stream.par_fold(
        trials,
        || vec![0u64; len],
        |rng, count, acc| {
            let mut scratch = Scratch::new(len);
            let mut reached = Vec::new();
            for _ in 0..count {
                let coins = EdgeCoins::draw(rng);
                let base = reach_count_without(view, None, coins, &mut scratch);
                reached.clear();
                reached.extend(scratch.queue.iter().copied().filter(|&v| !ug.is_seed_or_source(v)));
                for &v in &reached {
                    let without = reach_count_without(view, Some(v), coins, &mut scratch);
                    acc[v as usize] += (base - without) as u64;
                }
            }
        },
        add,
    )
}

/// Summed dominator-subtree sizes over `count` fresh realizations.
fn dt_marginals(view: &Blocked<'_>, count: usize, stream: &mut SeedStream) -> Vec<u64> {
    let ug = view.graph();
    let len = ug.graph().n();
    stream.par_fold(
        count,
        || vec![0u64; len],
        |rng, n, acc| {
            let mut scratch = Scratch::new(len);
            for _ in 0..n {
                let phi = Realization::from_coins(view, EdgeCoins::draw(rng), &mut scratch);
                let dt = build_dominator_tree(&phi);
                for (pos, &v) in dt.nodes().iter().enumerate().skip(1) {
                    if !ug.is_seed_or_source(v) {
                        acc[v as usize] += dt.size_at(pos) as u64;
                    }
                }
            }
        },
        add,
    )
}

fn check_count(name: &str, count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
    }
    Ok(())
}

fn greedy_rounds<F>(g: &UnifiedGraph, k: usize, mut b: BlockerSet, mut score: F) -> Result<BlockerSet>
where
    F: FnMut(&Blocked<'_>) -> Vec<u64>,
{
    let candidates: Vec<NodeId> = g.candidates().collect();
    while b.len() < k.min(candidates.len()) {
        let view = g.block(&b)?;
        let scores = score(&view);
        let v = best_of(&scores, candidates.iter().copied().filter(|&v| !b.contains(v)))
            .expect("a candidate is left");
        b.push(v)?;
    }
    Ok(b)
}

/// Greedy by Monte-Carlo marginal decrease, `trials` coupled samples per
/// round.
pub fn mc_greedy(g: &UnifiedGraph, k: usize, trials: usize, stream: &mut SeedStream) -> Result<BlockerSet> {
    check_count("trials", trials)?;
    greedy_rounds(g, k, BlockerSet::empty(), |view| mc_marginals(view, trials, &mut stream.fork()))
}

/// Greedy by average dominator-subtree size, with `realizations` fresh
/// realizations every round.
pub fn ag(g: &UnifiedGraph, k: usize, realizations: usize, stream: &mut SeedStream) -> Result<BlockerSet> {
    check_count("realizations", realizations)?;
    greedy_rounds(g, k, BlockerSet::empty(), |view| dt_marginals(view, realizations, &mut stream.fork()))
}

/// Two stages: greedy over the seed out-neighbors until `min(|ON|, k)`
/// blockers are chosen, then revisit blockers in reverse order and swap each
/// for the best node of `V \ S` while that strictly improves the estimate.
/// Stops at the first blocker that is already the best choice.
pub fn gr(g: &UnifiedGraph, k: usize, realizations: usize, stream: &mut SeedStream) -> Result<BlockerSet> {
    check_count("realizations", realizations)?;
    let on = g.seed_neighbors();
    let mut b = BlockerSet::empty();
    while b.len() < k.min(on.len()) {
        let scores = dt_marginals(&g.block(&b)?, realizations, &mut stream.fork());
        let v = best_of(&scores, on.iter().copied().filter(|&v| !b.contains(v))).expect("ON not exhausted");
        b.push(v)?;
    }

    let candidates: Vec<NodeId> = g.candidates().collect();
    for _ in 0..GR_MAX_PASSES {
        let mut changed = false;
        for i in (0..b.len()).rev() {
            let u = b.as_slice()[i];
            let rest = BlockerSet::new(b.as_slice().iter().copied().filter(|&x| x != u))?;
            let scores = dt_marginals(&g.block(&rest)?, realizations, &mut stream.fork());
            let best = best_of(&scores, candidates.iter().copied().filter(|&v| !rest.contains(v)))
                .expect("u is available");
            if best == u || scores[u as usize] >= scores[best as usize] {
                return Ok(b);
            }
            let mut next: Vec<NodeId> = b.as_slice().to_vec();
            next[i] = best;
            b = BlockerSet::new(next)?;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    Ok(b)
}
