//! Iterated halving: a relative `(ε, δ)`-approximation built by repeatedly
//! subsampling a coarser one, with a sample size independent of `n`.
//!
//! Level `j` targets error `δ/3^j` with failure budget `γ/2^j`. The innermost
//! level is the whole ground set, reached once `δ/3^j <= 1/sqrt(n)`. Each
//! outer level draws a uniform subset of the previous level's set of size
//! given by the basic bound at `(ε, δ_j/3, γ_j/2)` for the trace on that set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::range_space::RangeSpace;
use crate::sampling::{
    self, basic_sample_size_ln, chaining_sample_size, uniform_subsample, ApproxParams, Constants,
    ReplacementMode, Sample, SampleFile,
};
use crate::seed::derive_seed;
use crate::set_system::growth_bound;
use crate::subset::Subset;

/// How `|F|_{A'}|` enters the sample size.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TraceBound {
    /// The exact number of distinct traces.
    #[default]
    Exact,
    /// The growth bound `(e|A'|/d)^d`.
    SauerShelah { d: u32 },
}

/// One level of the construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalvingLevel {
    pub delta_level: f64,
    pub gamma_level: f64,
    pub set_size_before: usize,
    pub sample_size_requested: u64,
    pub set_size_after: usize,
    /// `None` on the base level, which takes the whole ground set.
    pub seed_used: Option<u64>,
    /// `|F|_{A'}|` as used for the requested size (exact or bounded).
    pub trace_count: f64,
}

/// Record of a run, base level first in execution order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalvingTrace {
    pub eps: f64,
    pub delta: f64,
    pub gamma: f64,
    pub n: usize,
    pub levels: Vec<HalvingLevel>,
    pub final_sample: SampleFile,
}

impl HalvingTrace {
    /// Number of subsampling levels above the base.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Smallest `j` with `δ/3^j <= 1/sqrt(n)`, i.e. `⌈log₃(δ·sqrt(n))⌉` when positive.
pub fn halving_depth(n: usize, delta: f64) -> usize {
    let mut d = delta;
    let mut j = 0;
    while d * d * n as f64 > 1.0 {
        d /= 3.0;
        j += 1;
    }
    j
}

/// All level sets, base first, with the trace.
fn run<R: RangeSpace + ?Sized>(
    f: &R,
    params: &ApproxParams,
    seed: u64,
    bound: TraceBound,
) -> Result<(Vec<Subset>, HalvingTrace)> {
    let n = f.ground_size();
    if n == 0 {
        return Err(Error::EmptyGroundSet);
    }
    let depth = halving_depth(n, params.delta);
    let level_delta = |j: usize| params.delta / 3f64.powi(j as i32);
    let level_gamma = |j: usize| params.gamma / 2f64.powi(j as i32);

    let mut sets = vec![Subset::full(n)];
    let mut levels = vec![HalvingLevel {
        delta_level: level_delta(depth),
        gamma_level: level_gamma(depth),
        set_size_before: n,
        sample_size_requested: n as u64,
        set_size_after: n,
        seed_used: None,
        trace_count: f.family_size() as f64,
    }];
    for j in (0..depth).rev() {
        let cur = sets.last().expect("base level");
        let traces = match bound {
            TraceBound::Exact => f.trace_count(cur) as f64,
            TraceBound::SauerShelah { d } => growth_bound(cur.len(), d as usize),
        };
        let inner = ApproxParams {
            eps: params.eps,
            delta: level_delta(j) / 3.0,
            gamma: level_gamma(j) / 2.0,
        };
        let requested = basic_sample_size_ln(&inner, traces.max(1.0).ln());
        let t = (requested.min(cur.len() as u64)) as usize;
        let level_seed = derive_seed(seed, j as u64, 0);
        let next = uniform_subsample(cur, t, level_seed)?.members().clone();
        levels.push(HalvingLevel {
            delta_level: level_delta(j),
            gamma_level: level_gamma(j),
            set_size_before: cur.len(),
            sample_size_requested: requested,
            set_size_after: next.len(),
            seed_used: Some(level_seed),
            trace_count: traces,
        });
        sets.push(next);
    }
    let last = sets.last().expect("base level").clone();
    let sample = Sample::from_subset(last).with_seed(Some(seed));
    let trace = HalvingTrace {
        eps: params.eps,
        delta: params.delta,
        gamma: params.gamma,
        n,
        levels,
        final_sample: sample.to_file(),
    };
    Ok((sets, trace))
}

/// The unverified randomized construction.
pub fn iterated_halving<R: RangeSpace + ?Sized>(
    f: &R,
    params: &ApproxParams,
    seed: u64,
) -> Result<(Sample, HalvingTrace)> {
    iterated_halving_with(f, params, seed, TraceBound::Exact)
}

pub fn iterated_halving_with<R: RangeSpace + ?Sized>(
    f: &R,
    params: &ApproxParams,
    seed: u64,
    bound: TraceBound,
) -> Result<(Sample, HalvingTrace)> {
    let (mut sets, trace) = run(f, params, seed, bound)?;
    let last = sets.pop().expect("base level");
    Ok((Sample::from_subset(last).with_seed(Some(seed)), trace))
}

/// Seed of attempt `k`; attempt 0 reuses `seed`.
fn attempt_seed(seed: u64, k: usize) -> u64 {
    if k == 0 {
        seed
    } else {
        derive_seed(seed, u64::MAX, k as u64)
    }
}

/// Iterated halving retried until the exact verifier accepts the output.
pub fn certified_halving<R: RangeSpace + ?Sized>(
    f: &R,
    params: &ApproxParams,
    seed: u64,
    max_retries: usize,
) -> Result<(Sample, HalvingTrace)> {
    if max_retries == 0 {
        return Err(Error::InvalidArgument("max_retries must be at least 1".into()));
    }
    let mut best = f64::INFINITY;
    for k in 0..max_retries {
        let (sample, trace) = iterated_halving(f, params, attempt_seed(seed, k))?;
        if sampling::is_relative_approx(f, &sample, params)? {
            return Ok((sample, trace));
        }
        best = best.min(sampling::relative_error(f, &sample, params.eps)?.worst_ratio);
    }
    Err(Error::RetriesExhausted {
        attempts: max_retries,
        best_ratio: best,
    })
}

/// `δ₁ + δ₂ + δ₁δ₂`.
pub fn combined_delta(d1: f64, d2: f64) -> f64 {
    d1 + d2 + d1 * d2
}

/// Relative error bound check that also admits `delta = 0` (zero error).
fn holds<R: RangeSpace + ?Sized>(f: &R, a: &Sample, eps: f64, delta: f64) -> Result<bool> {
    if delta == 0.0 {
        Ok(sampling::relative_error(f, a, eps)?.worst_ratio == 0.0)
    } else {
        sampling::relative_within(f, a, eps, delta)
    }
}

/// `A2` in the index space of `F|_{A1}`.
fn restricted_sample(a1: &Subset, a2: &Sample) -> Result<Sample> {
    let map = crate::set_system::Reindex::new(a1);
    a2.map_indices(a1.len(), |i| map.forward(i))
}

/// Composition of relative approximations: `A1` rel `(ε, δ₁)` for `F` and
/// `A2` rel `(ε, δ₂)` for `F|_{A1}` make `A2` rel `(ε, δ₁ + δ₂ + δ₁δ₂)` for `F`.
///
/// Both premises are verified; a failed premise is an error. `A1` must be a
/// set sample and `A2 ⊆ A1`.
pub fn composition_check<R: RangeSpace>(
    f: &R,
    a1: &Sample,
    a2: &Sample,
    eps: f64,
    d1: f64,
    d2: f64,
) -> Result<bool> {
    if a1.mode() != ReplacementMode::Without {
        return Err(Error::InvalidArgument("the outer sample must be a set".into()));
    }
    if !a2.members().is_subset(a1.members()) {
        return Err(Error::NotContained);
    }
    for (name, d) in [("d1", d1), ("d2", d2)] {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} = {d} must be nonnegative")));
        }
    }
    if !holds(f, a1, eps, d1)? {
        return Err(Error::Precondition(format!("outer sample is not a relative ({eps}, {d1})-approximation")));
    }
    let (restricted, _) = f.restrict(a1.members())?;
    let inner = restricted_sample(a1.members(), a2)?;
    if !holds(&restricted, &inner, eps, d2)? {
        return Err(Error::Precondition(format!(
            "inner sample is not a relative ({eps}, {d2})-approximation of the trace"
        )));
    }
    holds(f, a2, eps, combined_delta(d1, d2))
}

/// Result of [`combined_construction`].
#[derive(Clone, Debug, PartialEq)]
pub struct Combined {
    pub sample: Sample,
    /// Output of the halving stage.
    pub outer: Sample,
    /// The guaranteed error, `2δ/3 + δ²/9 <= δ`.
    pub delta_bound: f64,
    pub attempts: usize,
}

/// The two-stage construction for the main sample-size bound: certified
/// halving to a relative `(ε, δ/3)`-approximation `A1`, then a verified
/// uniform subset of `A1` sized by the chaining bound that is a relative
/// `(ε, δ/3)`-approximation of `F|_{A1}`. Each stage gets failure budget `γ/2`.
pub fn combined_construction<R: RangeSpace>(
    f: &R,
    params: &ApproxParams,
    d: u32,
    constants: &Constants,
    seed: u64,
    max_retries: usize,
) -> Result<Combined> {
    let third = ApproxParams {
        eps: params.eps,
        delta: params.delta / 3.0,
        gamma: params.gamma / 2.0,
    };
    let (outer, _) = certified_halving(f, &third, derive_seed(seed, 0, 0), max_retries)?;
    let (restricted, _) = f.restrict(outer.members())?;
    let t = chaining_sample_size(&third, d, restricted.family_size(), constants).min(outer.t()) as usize;
    let mut best = f64::INFINITY;
    for k in 0..max_retries {
        let inner = uniform_subsample(outer.members(), t, derive_seed(seed, 1, k as u64))?;
        let mapped = restricted_sample(outer.members(), &inner)?;
        let report = sampling::relative_error(&restricted, &mapped, params.eps)?;
        if report.passes(third.delta) {
            debug_assert!(composition_check(f, &outer, &inner, params.eps, third.delta, third.delta)?);
            return Ok(Combined {
                sample: inner,
                outer,
                delta_bound: combined_delta(third.delta, third.delta),
                attempts: k + 1,
            });
        }
        best = best.min(report.worst_ratio);
    }
    Err(Error::RetriesExhausted {
        attempts: max_retries,
        best_ratio: best,
    })
}
