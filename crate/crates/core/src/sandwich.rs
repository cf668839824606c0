//! The sandwich combiner: solve the lower and upper bound problems with
//! guarantees, add a cheap heuristic candidate, and keep whichever of the
//! three leaves the smallest estimated residual spread.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diffusion::{stopping_rule_spread, SpreadEstimate};
use crate::error::Result;
use crate::graph::{BlockerSet, NodeId, UnifiedGraph};
use crate::optimize::{direct_activation_prob, gsbm, lsbm, AlgoParams, Certificate};
use crate::rng::SeedStream;

/// Seed out-neighbors ranked by one-hop activation probability times
/// out-degree; all of them when `k` covers the whole set.
pub fn lhga(g: &UnifiedGraph, k: usize) -> BlockerSet {
    let on = g.seed_neighbors();
    if k >= on.len() {
        return BlockerSet::new(on.iter().copied()).expect("unique");
    }
    let mut scored: Vec<(f64, NodeId)> = on
        .iter()
        .map(|&v| {
            let p = direct_activation_prob(g, v).expect("v is a seed out-neighbor");
            (p * g.out_degree(v) as f64, v)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    BlockerSet::new(scored.into_iter().take(k).map(|(_, v)| v)).expect("unique")
}

/// Where a candidate came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Lower,
    Upper,
    Heuristic,
}

/// A candidate blocker set with its estimated residual spread.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub source: Source,
    pub blockers: BlockerSet,
    pub residual: SpreadEstimate,
}

/// Wall-clock milliseconds per phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub lower_ms: f64,
    pub upper_ms: f64,
    pub heuristic_ms: f64,
    pub estimate_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichResult {
    pub b_lower: BlockerSet,
    pub b_upper: Option<BlockerSet>,
    pub b_heuristic: BlockerSet,
    pub candidates: Vec<Candidate>,
    pub chosen: BlockerSet,
    pub chosen_from: Source,
    /// Estimated spread with nothing blocked.
    pub spread: SpreadEstimate,
    /// `spread - residual(chosen)`, clamped at zero.
    pub decrease_estimate: f64,
    pub empirical_ratio: Option<f64>,
    pub lower_certificate: Certificate,
    pub upper_certificate: Option<Certificate>,
    pub times: PhaseTimes,
}

impl SandwichResult {
    /// Total sample count of the bound maximizers.
    pub fn samples(&self) -> usize {
        self.lower_certificate.samples + self.upper_certificate.as_ref().map_or(0, |c| c.samples)
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// All three candidates with a certified ratio.
pub fn sand_imin(g: &UnifiedGraph, params: &AlgoParams, stream: &mut SeedStream) -> Result<SandwichResult> {
    run(g, params, stream, true)
}

/// Skips the upper-bound candidate; no ratio is reported.
pub fn sand_imin_minus(g: &UnifiedGraph, params: &AlgoParams, stream: &mut SeedStream) -> Result<SandwichResult> {
    run(g, params, stream, false)
}

fn run(g: &UnifiedGraph, params: &AlgoParams, stream: &mut SeedStream, with_upper: bool) -> Result<SandwichResult> {
    params.validate()?;
    let mut times = PhaseTimes::default();

    let t = Instant::now();
    let lower = lsbm(g, params, &mut stream.fork())?;
    times.lower_ms = ms(t);

    let mut upper_stream = stream.fork();
    let t = Instant::now();
    let upper = if with_upper {
        Some(gsbm(g, params, &mut upper_stream)?)
    } else {
        None
    };
    times.upper_ms = ms(t);

    let t = Instant::now();
    let heuristic = lhga(g, params.k);
    times.heuristic_ms = ms(t);

    let t = Instant::now();
    let (gamma, delta) = (params.gamma, params.delta);
    let spread = stopping_rule_spread(&g.unblocked(), gamma, delta, &mut stream.fork())?;
    let mut candidates = Vec::new();
    let mut push = |source, blockers: BlockerSet, stream: &mut SeedStream| -> Result<()> {
        let residual = stopping_rule_spread(&g.block(&blockers)?, gamma, delta, stream)?;
        candidates.push(Candidate {
            source,
            blockers,
            residual,
        });
        Ok(())
    };
    push(Source::Lower, lower.blockers.clone(), &mut stream.fork())?;
    if let Some(u) = &upper {
        push(Source::Upper, u.blockers.clone(), &mut stream.fork())?;
    } else {
        // keep the stream layout identical to the full run
        stream.fork();
    }
    push(Source::Heuristic, heuristic.clone(), &mut stream.fork())?;
    times.estimate_ms = ms(t);

    let best = candidates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.residual.value.total_cmp(&b.1.residual.value).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least two candidates");
    let chosen = candidates[best].clone();

    let mut result = SandwichResult {
        b_lower: lower.blockers,
        b_upper: upper.as_ref().map(|u| u.blockers.clone()),
        b_heuristic: heuristic,
        chosen: chosen.blockers,
        chosen_from: chosen.source,
        decrease_estimate: (spread.value - chosen.residual.value).max(0.0),
        spread,
        candidates,
        empirical_ratio: None,
        lower_certificate: lower.certificate,
        upper_certificate: upper.map(|u| u.certificate),
        times,
    };
    result.empirical_ratio = empirical_ratio(&result, params);
    Ok(result)
}

/// `((1-gamma)/(1+gamma))^2 (1 - 1/e - epsilon) D(B_U) / D^U(B_U)`, clamped
/// to `[0, 1]`.
///
/// `D(B_U)` comes from the spread estimates. `D^U(B_U)` is the upper-bound
/// maximizer's estimate on its final held-out collection; when it returned
/// the seed out-neighbors without sampling, `D^U` of that set is the whole
/// expected spread and the spread estimate is used instead.
pub fn empirical_ratio(result: &SandwichResult, params: &AlgoParams) -> Option<f64> {
    let cert = result.upper_certificate.as_ref()?;
    let upper = result.candidates.iter().find(|c| c.source == Source::Upper)?;
    let decrease = (result.spread.value - upper.residual.value).max(0.0);
    let bound = if cert.early_exit {
        result.spread.value
    } else {
        cert.bound_estimate.unwrap_or(0.0)
    };
    Some(ratio_formula(params.gamma, params.epsilon, decrease, bound))
}

/// The ratio formula on raw estimates. Zero when the bound estimate is zero.
pub fn ratio_formula(gamma: f64, epsilon: f64, decrease: f64, upper: f64) -> f64 {
    if upper <= 0.0 {
        return 0.0;
    }
    let shrink = ((1.0 - gamma) / (1.0 + gamma)).powi(2);
    let alpha = 1.0 - 1.0 / std::f64::consts::E - epsilon;
    (shrink * alpha * decrease / upper).clamp(0.0, 1.0)
}
