//! Independent-cascade diffusion: live-edge realizations, forward
//! simulation, Monte-Carlo averages and the adaptive stopping-rule estimator.
//!
//! All spreads count activated non-seed base nodes. The unified source and
//! the seeds themselves are never counted.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Blocked, NodeId};
use crate::rng::{EdgeCoins, SeedStream};

const NONE: u32 = u32::MAX;

/// Reusable per-thread buffers for traversals over a graph with `len` nodes.
#[derive(Debug)]
pub(crate) struct Scratch {
    stamp: Vec<u32>,
    epoch: u32,
    pub(crate) queue: Vec<NodeId>,
    pub(crate) local: Vec<u32>,
}

impl Scratch {
    pub(crate) fn new(len: usize) -> Scratch {
        Scratch {
            stamp: vec![0; len],
            epoch: 0,
            queue: Vec::new(),
            local: vec![NONE; len],
        }
    }

    pub(crate) fn next_epoch(&mut self) {
        if self.epoch == u32::MAX {
            self.stamp.fill(0);
            self.epoch = 0;
        }
        self.epoch += 1;
    }

    /// Marks `v`; returns false if it was already marked this epoch.
    #[inline]
    pub(crate) fn visit(&mut self, v: NodeId) -> bool {
        let s = &mut self.stamp[v as usize];
        if *s == self.epoch {
            false
        } else {
            *s = self.epoch;
            true
        }
    }

    #[inline]
    pub(crate) fn visited(&self, v: NodeId) -> bool {
        self.stamp[v as usize] == self.epoch
    }
}

/// The part of one live-edge sample reachable from its source.
///
/// Nodes carry local ids in discovery order (the source is local 0); live
/// edges are stored in both directions over local ids. Edges leaving
/// unreached nodes are never sampled: no quantity computed from a
/// realization depends on them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    universe: usize,
    nodes: Vec<NodeId>,
    succ_offsets: Vec<u32>,
    succ: Vec<u32>,
    pred_offsets: Vec<u32>,
    pred: Vec<u32>,
}

impl Realization {
    /// Samples a realization from the blocked graph.
    pub fn sample<R: Rng + ?Sized>(g: &Blocked<'_>, rng: &mut R) -> Realization {
        let mut scratch = Scratch::new(g.graph().graph().n());
        Realization::from_coins(g, EdgeCoins::draw(rng), &mut scratch)
    }

    /// The realization determined by `coins`: edge `e` is live iff its coin
    /// says so and its head is not blocked.
    pub(crate) fn from_coins(g: &Blocked<'_>, coins: EdgeCoins, scratch: &mut Scratch) -> Realization {
        let graph = g.graph().graph();
        let source = g.graph().source();
        let mut nodes = vec![source];
        scratch.local[source as usize] = 0;
        let mut edges: Vec<(u32, u32)> = Vec::new();
        let mut head = 0;
        while head < nodes.len() {
            let u = nodes[head];
            let (first, targets, probs) = graph.out_slices(u);
            for (i, (&v, &p)) in targets.iter().zip(probs).enumerate() {
                if g.is_blocked(v) || !coins.is_live(first + i, p) {
                    continue;
                }
                let lv = &mut scratch.local[v as usize];
                if *lv == NONE {
                    *lv = nodes.len() as u32;
                    nodes.push(v);
                }
                edges.push((head as u32, scratch.local[v as usize]));
            }
            head += 1;
        }
        for &v in &nodes {
            scratch.local[v as usize] = NONE;
        }
        Realization::from_local_edges(graph.n(), nodes, &edges)
    }

    /// Builds the reachable part of an explicit live-edge list over nodes
    /// `0..n`, rooted at `source`.
    pub fn from_live_edges(n: usize, source: NodeId, live: &[(NodeId, NodeId)]) -> Realization {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in live {
            adj[u as usize].push(v);
        }
        let mut local = vec![NONE; n];
        let mut nodes = vec![source];
        local[source as usize] = 0;
        let mut edges = Vec::new();
        let mut head = 0;
        while head < nodes.len() {
            let u = nodes[head];
            for &v in &adj[u as usize] {
                if local[v as usize] == NONE {
                    local[v as usize] = nodes.len() as u32;
                    nodes.push(v);
                }
                edges.push((head as u32, local[v as usize]));
            }
            head += 1;
        }
        Realization::from_local_edges(n, nodes, &edges)
    }

    fn from_local_edges(universe: usize, nodes: Vec<NodeId>, edges: &[(u32, u32)]) -> Realization {
        let r = nodes.len();
        let csr = |key: fn(&(u32, u32)) -> (u32, u32)| {
            let mut offsets = vec![0u32; r + 1];
            for e in edges {
                offsets[key(e).0 as usize + 1] += 1;
            }
            for i in 0..r {
                offsets[i + 1] += offsets[i];
            }
            let mut fill = offsets.clone();
            let mut adj = vec![0u32; edges.len()];
            for e in edges {
                let (a, b) = key(e);
                adj[fill[a as usize] as usize] = b;
                fill[a as usize] += 1;
            }
            (offsets, adj)
        };
        let (succ_offsets, succ) = csr(|&(a, b)| (a, b));
        let (pred_offsets, pred) = csr(|&(a, b)| (b, a));
        Realization {
            universe,
            nodes,
            succ_offsets,
            succ,
            pred_offsets,
            pred,
        }
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    /// Number of nodes of the graph this realization was drawn from.
    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Local id of `v`, if reached.
    pub fn local_id(&self, v: NodeId) -> Option<u32> {
        self.nodes.iter().position(|&x| x == v).map(|i| i as u32)
    }

    /// `R(s)`: every node reachable from the source, the source first.
    pub fn reach(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Number of reachable nodes including the source.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.nodes.contains(&v)
    }

    /// Global id of local node `i`.
    #[inline]
    pub fn node(&self, i: u32) -> NodeId {
        self.nodes[i as usize]
    }

    #[inline]
    pub fn successors(&self, i: u32) -> &[u32] {
        &self.succ[self.succ_offsets[i as usize] as usize..self.succ_offsets[i as usize + 1] as usize]
    }

    #[inline]
    pub fn predecessors(&self, i: u32) -> &[u32] {
        &self.pred[self.pred_offsets[i as usize] as usize..self.pred_offsets[i as usize + 1] as usize]
    }

    /// Live edges between reachable nodes, as global ids.
    pub fn live_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.nodes.len() as u32)
            .flat_map(move |i| self.successors(i).iter().map(move |&j| (self.node(i), self.node(j))))
    }
}

/// Spec-level alias for [`Realization::sample`].
pub fn sample_realization<R: Rng + ?Sized>(g: &Blocked<'_>, rng: &mut R) -> Realization {
    Realization::sample(g, rng)
}

/// Non-seed nodes reached under `coins`, counted without materializing the
/// realization. Two calls with the same coins and nested blocker sets are
/// coupled: the larger blocker set never reaches more.
pub(crate) fn reach_count(g: &Blocked<'_>, coins: EdgeCoins, scratch: &mut Scratch) -> usize {
    reach_count_without(g, None, coins, scratch)
}

/// [`reach_count`] with `extra` blocked as well. Afterwards
/// `scratch.queue` holds every reached node, source and seeds included.
pub(crate) fn reach_count_without(
    g: &Blocked<'_>,
    extra: Option<NodeId>,
    coins: EdgeCoins,
    scratch: &mut Scratch,
) -> usize {
    let ug = g.graph();
    let graph = ug.graph();
    scratch.next_epoch();
    scratch.queue.clear();
    let source = ug.source();
    scratch.visit(source);
    scratch.queue.push(source);
    let mut count = 0;
    let mut head = 0;
    while head < scratch.queue.len() {
        let u = scratch.queue[head];
        head += 1;
        let (first, targets, probs) = graph.out_slices(u);
        for (i, (&v, &p)) in targets.iter().zip(probs).enumerate() {
            if g.is_blocked(v) || Some(v) == extra || scratch.visited(v) || !coins.is_live(first + i, p) {
                continue;
            }
            scratch.visit(v);
            scratch.queue.push(v);
            if !ug.is_seed_or_source(v) {
                count += 1;
            }
        }
    }
    count
}

/// One forward independent-cascade run. Returns the number of activated
/// non-seed nodes.
pub fn simulate_ic<R: Rng + ?Sized>(g: &Blocked<'_>, rng: &mut R) -> usize {
    let mut scratch = Scratch::new(g.graph().graph().n());
    simulate_with(g, rng, &mut scratch)
}

fn simulate_with<R: Rng + ?Sized>(g: &Blocked<'_>, rng: &mut R, scratch: &mut Scratch) -> usize {
    let ug = g.graph();
    let graph = ug.graph();
    scratch.next_epoch();
    scratch.queue.clear();
    // timestamp 0: the seeds (the source's certain edges)
    for &v in ug.seeds().as_slice() {
        scratch.visit(v);
        scratch.queue.push(v);
    }
    let mut count = 0;
    let mut head = 0;
    while head < scratch.queue.len() {
        let u = scratch.queue[head];
        head += 1;
        let (_, targets, probs) = graph.out_slices(u);
        for (&v, &p) in targets.iter().zip(probs) {
            if g.is_blocked(v) || scratch.visited(v) {
                continue;
            }
            if rng.gen::<f64>() < p {
                scratch.visit(v);
                scratch.queue.push(v);
                count += 1;
            }
        }
    }
    count
}

/// Spreads of `trials` independent forward simulations, in sample order.
fn simulate_batch(g: &Blocked<'_>, trials: usize, stream: &mut SeedStream) -> Vec<u32> {
    let len = g.graph().graph().n();
    stream
        .par_chunks(trials, |rng, count| {
            let mut scratch = Scratch::new(len);
            (0..count)
                .map(|_| simulate_with(g, rng, &mut scratch) as u32)
                .collect::<Vec<_>>()
        })
        .concat()
}

/// Mean spread over `trials` forward simulations.
pub fn monte_carlo_spread(g: &Blocked<'_>, trials: usize, stream: &mut SeedStream) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let total: u64 = simulate_batch(g, trials, stream).iter().map(|&x| x as u64).sum();
    Ok(total as f64 / trials as f64)
}

/// Mean of `spread(base) - spread(blocked)` over `trials` shared
/// realizations. Common coins make every per-sample difference
/// non-negative when `blocked` extends `base`.
pub fn coupled_decrease(
    base: &Blocked<'_>,
    blocked: &Blocked<'_>,
    trials: usize,
    stream: &mut SeedStream,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let len = base.graph().graph().n();
    let total: i64 = stream
        .par_chunks(trials, |rng, count| {
            let mut scratch = Scratch::new(len);
            (0..count)
                .map(|_| {
                    let coins = EdgeCoins::draw(rng);
                    reach_count(base, coins, &mut scratch) as i64
                        - reach_count(blocked, coins, &mut scratch) as i64
                })
                .sum::<i64>()
        })
        .into_iter()
        .sum();
    Ok(total as f64 / trials as f64)
}

/// A `(gamma, delta)`-estimate of an expected spread.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadEstimate {
    pub value: f64,
    pub gamma: f64,
    pub delta: f64,
    pub samples_used: usize,
    /// Set when nothing is reachable, so the spread is exactly zero and no
    /// sampling took place.
    pub zero_spread: bool,
}

/// Nodes reachable from the source over positive-probability edges, minus
/// seeds, source and blocked nodes.
pub fn reachable_population(g: &Blocked<'_>) -> Vec<NodeId> {
    let ug = g.graph();
    let graph = ug.graph();
    let mut seen = vec![false; graph.n()];
    let mut queue = vec![ug.source()];
    seen[ug.source() as usize] = true;
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        for e in graph.out_edges(u) {
            if e.prob > 0.0 && !seen[e.node as usize] && !g.is_blocked(e.node) {
                seen[e.node as usize] = true;
                queue.push(e.node);
            }
        }
    }
    let mut pop: Vec<NodeId> = queue.into_iter().filter(|&v| !ug.is_seed_or_source(v)).collect();
    pop.sort_unstable();
    pop
}

/// Stopping-rule threshold `1 + 4(e-2) ln(2/delta) (1+gamma) / gamma^2`.
pub fn stopping_threshold(gamma: f64, delta: f64) -> f64 {
    1.0 + 4.0 * (std::f64::consts::E - 2.0) * (2.0 / delta).ln() * (1.0 + gamma) / (gamma * gamma)
}

/// Adaptive `(gamma, delta)`-estimate of the expected non-seed spread.
///
/// Samples spreads `X_i / N` in `[0, 1]`, where `N` is the size of the
/// positive-probability reachable population, until their running sum
/// reaches the threshold `Y`; with `T` samples drawn the estimate is
/// `Y * N / T`. If the population is empty the spread is exactly zero and
/// the estimate is returned immediately with `zero_spread` set.
pub fn stopping_rule_spread(
    g: &Blocked<'_>,
    gamma: f64,
    delta: f64,
    stream: &mut SeedStream,
) -> Result<SpreadEstimate> {
    if !(gamma > 0.0 && gamma < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "stopping rule needs 0 < gamma, delta < 1 (got {gamma}, {delta})"
        )));
    }
    let scale = reachable_population(g).len();
    if scale == 0 {
        return Ok(SpreadEstimate {
            value: 0.0,
            gamma,
            delta,
            samples_used: 0,
            zero_spread: true,
        });
    }
    let threshold = stopping_threshold(gamma, delta);
    // running sum of X_i reaches Y exactly when the integer spread sum reaches Y * N
    let target = threshold * scale as f64;
    let mut sum = 0u64;
    let mut taken = 0usize;
    let mut batch = threshold.ceil() as usize;
    loop {
        for x in simulate_batch(g, batch, stream) {
            sum += x as u64;
            taken += 1;
            if sum as f64 >= target {
                return Ok(SpreadEstimate {
                    value: threshold * scale as f64 / taken as f64,
                    gamma,
                    delta,
                    samples_used: taken,
                    zero_spread: false,
                });
            }
        }
        batch = batch.saturating_mul(2);
    }
}
