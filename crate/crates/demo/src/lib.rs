//! Browser demo. Each export takes plain numbers and returns a JSON string,
//! so the page needs no generated bindings beyond the functions themselves.
//! The `*_json` wrappers are thin; the logic lives in native-testable
//! functions returning serde values.

use relapprox::generators::{self, PointSet2D};
use relapprox::harness::chernoff_tail_frequency;
use relapprox::sampling::{chernoff_bound, relative_error, uniform_sample};
use relapprox::{chaining, ReplacementMode, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest point set the half-plane explorer accepts; the family has `O(m²)` sets.
pub const MAX_POINTS: usize = 400;
/// Largest ground set for the chain view; intervals have `n(n+1)/2 + 1` sets.
pub const MAX_CHAIN_N: usize = 300;

#[derive(Debug, Serialize)]
pub struct HalfplaneView {
    pub points: Vec<(f64, f64)>,
    pub sample: Vec<usize>,
    pub family_size: usize,
    pub worst_ratio: f64,
    /// Points of a set attaining `worst_ratio`.
    pub worst_set: Vec<usize>,
    pub worst_true: u64,
    pub worst_hits: u64,
    pub passes: bool,
}

/// Draws `t` of `m` random points and measures the worst half-plane.
pub fn halfplane_view(m: usize, seed: u64, t: usize, eps: f64, delta: f64) -> Result<HalfplaneView> {
    if m == 0 || m > MAX_POINTS {
        return Err(relapprox::Error::InvalidArgument(format!("m must be in 1..={MAX_POINTS}")));
    }
    let pts = PointSet2D::random(m, seed);
    let f = generators::halfplanes(&pts)?;
    let a = uniform_sample(m, t, seed ^ 0x5eed, ReplacementMode::Without)?;
    let report = relative_error(&f, &a, eps)?;
    let worst = &f.family()[report.worst_set_index as usize];
    Ok(HalfplaneView {
        points: pts.points,
        sample: a.members().to_vec(),
        family_size: f.len(),
        worst_ratio: report.worst_ratio,
        worst_set: worst.to_vec(),
        worst_true: worst.len() as u64,
        worst_hits: a.hits(worst),
        passes: report.passes(delta),
    })
}

#[derive(Debug, Serialize)]
pub struct ChernoffPoint {
    pub t: usize,
    pub bound: f64,
    pub observed: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

/// Chernoff bound against the observed tail for `t` on an even grid up to `t_max`.
/// `eta` is relative to the mean: the event is `||A∩S| - st/n| > eta·st/n`.
pub fn chernoff_curve(n: usize, s: usize, eta: f64, t_max: usize, steps: usize, trials: usize, seed: u64)
    -> Result<Vec<ChernoffPoint>> {
    let steps = steps.max(1);
    let mut out = Vec::with_capacity(steps);
    for k in 1..=steps {
        let t = (t_max * k / steps).max(1);
        let dev = eta * s as f64 * t as f64 / n as f64;
        let est = chernoff_tail_frequency(n, s, t, dev, trials, seed, ReplacementMode::With)?;
        out.push(ChernoffPoint {
            t,
            bound: chernoff_bound(n as u64, s as u64, t as u64, dev)?.min(1.0),
            observed: est.failure_rate,
            wilson_lo: est.wilson_lo,
            wilson_hi: est.wilson_hi,
        });
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct ChainLevel {
    pub alpha: f64,
    /// Members as inclusive `[start, end]`; the empty interval is omitted.
    pub members: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize)]
pub struct ChainView {
    pub n: usize,
    pub k: usize,
    pub levels: Vec<ChainLevel>,
    pub level_eps: Vec<f64>,
}

/// Nested packings of the intervals on `n` points.
pub fn interval_chain(n: usize, eps: f64, delta: f64) -> Result<ChainView> {
    if n == 0 || n > MAX_CHAIN_N {
        return Err(relapprox::Error::InvalidArgument(format!("n must be in 1..={MAX_CHAIN_N}")));
    }
    let f = generators::intervals(n)?;
    let chain = chaining::build_chain(&f, eps, delta)?;
    let levels = chain
        .packings
        .iter()
        .map(|p| ChainLevel {
            alpha: p.alpha,
            members: p
                .member_indices
                .iter()
                .filter_map(|&i| {
                    let s = &f.family()[i];
                    let mut it = s.iter();
                    let lo = it.next()?;
                    Some((lo, it.last().unwrap_or(lo)))
                })
                .collect(),
        })
        .collect();
    Ok(ChainView {
        n,
        k: chain.k,
        levels,
        level_eps: chain.level_eps.clone(),
    })
}

fn to_json<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

#[wasm_bindgen]
pub fn halfplane_json(m: usize, seed: u32, t: usize, eps: f64, delta: f64) -> String {
    to_json(halfplane_view(m, seed as u64, t, eps, delta))
}

#[wasm_bindgen]
pub fn chernoff_json(n: usize, s: usize, eta: f64, t_max: usize, steps: usize, trials: usize, seed: u32) -> String {
    to_json(chernoff_curve(n, s, eta, t_max, steps, trials, seed as u64))
}

#[wasm_bindgen]
pub fn chain_json(n: usize, eps: f64, delta: f64) -> String {
    to_json(interval_chain(n, eps, delta))
}
