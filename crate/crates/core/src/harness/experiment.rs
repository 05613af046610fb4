use std::io::Write;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::source::{Space, SystemSource};
use super::{run_trials, wilson_interval, with_threads};
use crate::chaining::{build_chain, ChainDecomposition};
use crate::error::{Error, Result};
use crate::range_space::RangeSpace;
use crate::sampling::{self, uniform_sample, ApproxParams, Constants, Formula, ReplacementMode};
use crate::seed::derive_seed;

/// What a trial checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialTest {
    /// The sample is a relative `(ε, δ)`-approximation of the family.
    #[default]
    Relative,
    /// The sample meets all three chain conditions at `(ε, δ)`.
    Claim7,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub system: SystemSource,
    pub eps: Vec<f64>,
    pub delta: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Explicit sample sizes; alternative to `formula`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<Formula>,
    /// VC dimension for the formulas; derived from the system when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Constants>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub mode: ReplacementMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub test: TrialTest,
}

impl ExperimentSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let spec: ExperimentSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.eps.is_empty() || self.delta.is_empty() || self.gamma.is_empty() {
            return bad("eps, delta and gamma grids must be nonempty");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        match (self.t.is_empty(), self.formula.is_some()) {
            (true, false) => return bad("give either t values or a formula"),
            (false, true) => return bad("give t values or a formula, not both"),
            _ => {}
        }
        if self.t.contains(&0) {
            return bad("t values must be positive");
        }
        for &e in &self.eps {
            for &d in &self.delta {
                for &g in &self.gamma {
                    ApproxParams::new(e, d, g)?;
                }
            }
        }
        Ok(())
    }
}

/// One trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub cell: usize,
    pub trial: usize,
    pub seed: u64,
    pub t: u64,
    pub passed: bool,
    /// Worst relative error (for chain trials, the worst over the conditions).
    pub worst_ratio: f64,
}

/// Aggregate of one parameter cell; field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub eps: f64,
    pub delta: f64,
    pub gamma: f64,
    pub t: u64,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub seed: u64,
}

impl CellSummary {
    fn from_rows(params: &ApproxParams, t: u64, seed: u64, rows: &[TrialRow]) -> Self {
        let failures = rows.iter().filter(|r| !r.passed).count();
        let (wilson_lo, wilson_hi) = wilson_interval(failures, rows.len());
        Self {
            eps: params.eps,
            delta: params.delta,
            gamma: params.gamma,
            t,
            trials: rows.len(),
            failures,
            failure_rate: failures as f64 / rows.len() as f64,
            wilson_lo,
            wilson_hi,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub cells: Vec<CellSummary>,
    pub rows: Vec<TrialRow>,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for c in &self.cells {
            out.serialize(c)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Recomputes every cell's aggregate from the raw rows.
    pub fn aggregates_consistent(&self) -> bool {
        self.cells.iter().enumerate().all(|(k, c)| {
            let rows: Vec<TrialRow> = self.rows.iter().filter(|r| r.cell == k).cloned().collect();
            let params = ApproxParams {
                eps: c.eps,
                delta: c.delta,
                gamma: c.gamma,
            };
            rows.iter().all(|r| r.t == c.t) && CellSummary::from_rows(&params, c.t, c.seed, &rows) == *c
        })
    }
}

/// Failure frequency of one configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureEstimate {
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl FailureEstimate {
    fn from_flags(failed: impl Iterator<Item = bool>) -> Self {
        let (mut trials, mut failures) = (0, 0);
        for f in failed {
            trials += 1;
            failures += f as usize;
        }
        let (wilson_lo, wilson_hi) = wilson_interval(failures, trials);
        Self {
            trials,
            failures,
            failure_rate: failures as f64 / trials.max(1) as f64,
            wilson_lo,
            wilson_hi,
        }
    }

    /// Half-width of the Wilson interval.
    pub fn wilson_width(&self) -> f64 {
        (self.wilson_hi - self.wilson_lo) / 2.0
    }
}

fn check_t(n: usize, t: u64, mode: ReplacementMode) -> Result<()> {
    if mode == ReplacementMode::Without && t > n as u64 {
        return Err(Error::SampleTooLarge { t: t as usize, n });
    }
    if t == 0 {
        return Err(Error::EmptySample);
    }
    Ok(())
}

fn relative_rows<R: RangeSpace + Sync + ?Sized>(
    f: &R,
    params: &ApproxParams,
    t: u64,
    trials: usize,
    master_seed: u64,
    cell: usize,
    mode: ReplacementMode,
) -> Result<Vec<TrialRow>> {
    check_t(f.ground_size(), t, mode)?;
    run_trials(trials, |trial| {
        let seed = derive_seed(master_seed, cell as u64, trial as u64);
        let a = uniform_sample(f.ground_size(), t as usize, seed, mode)?;
        let report = sampling::relative_error(f, &a, params.eps)?;
        Ok(TrialRow {
            cell,
            trial,
            seed,
            t,
            passed: report.passes(params.delta),
            worst_ratio: report.worst_ratio,
        })
    })
}

fn claim7_rows(
    chain: &ChainDecomposition<'_>,
    t: u64,
    trials: usize,
    master_seed: u64,
    cell: usize,
    mode: ReplacementMode,
) -> Result<Vec<TrialRow>> {
    let n = chain.family().n();
    check_t(n, t, mode)?;
    run_trials(trials, |trial| {
        let seed = derive_seed(master_seed, cell as u64, trial as u64);
        let a = uniform_sample(n, t as usize, seed, mode)?;
        let report = chain.claim7_check(&a)?;
        let worst = std::iter::once(&report.top)
            .chain(&report.levels)
            .chain(std::iter::once(&report.p0))
            .map(|l| l.worst_ratio)
            .fold(0.0, f64::max);
        Ok(TrialRow {
            cell,
            trial,
            seed,
            t,
            passed: report.passes(),
            worst_ratio: worst,
        })
    })
}

/// Frequency with which a uniform `t`-sample fails to be a relative
/// `(ε, δ)`-approximation. Trial `j` uses seed `derive_seed(master_seed, 0, j)`.
pub fn monte_carlo_failure<R: RangeSpace + Sync + ?Sized>(
    f: &R,
    params: &ApproxParams,
    t: u64,
    trials: usize,
    master_seed: u64,
    mode: ReplacementMode,
) -> Result<FailureEstimate> {
    let rows = relative_rows(f, params, t, trials, master_seed, 0, mode)?;
    Ok(FailureEstimate::from_flags(rows.iter().map(|r| !r.passed)))
}

/// Frequency with which a uniform `t`-sample fails any chain condition.
pub fn claim7_failure(
    chain: &ChainDecomposition<'_>,
    t: u64,
    trials: usize,
    master_seed: u64,
    mode: ReplacementMode,
) -> Result<FailureEstimate> {
    let rows = claim7_rows(chain, t, trials, master_seed, 0, mode)?;
    Ok(FailureEstimate::from_flags(rows.iter().map(|r| !r.passed)))
}

/// Smallest `t` whose failure frequency has Wilson upper end `<= γ`, by
/// binary search over `[1, hi]` with seeds shared across `t`. `hi` defaults
/// to `n` without replacement and to the basic bound with replacement.
pub fn minimal_sample_size_search<R: RangeSpace + Sync + ?Sized>(
    f: &R,
    params: &ApproxParams,
    trials: usize,
    master_seed: u64,
    mode: ReplacementMode,
    hi: Option<u64>,
) -> Result<(u64, FailureEstimate)> {
    let n = f.ground_size() as u64;
    let mut hi = hi.unwrap_or(match mode {
        ReplacementMode::Without => n,
        ReplacementMode::With => sampling::basic_sample_size(params, f.family_size()),
    });
    if mode == ReplacementMode::Without {
        hi = hi.min(n);
    }
    let accept = |t: u64| -> Result<(bool, FailureEstimate)> {
        let est = monte_carlo_failure(f, params, t, trials, master_seed, mode)?;
        Ok((est.wilson_hi <= params.gamma, est))
    };
    let (ok, mut best) = accept(hi)?;
    if !ok {
        return Err(Error::InvalidArgument(format!(
            "no t up to {hi} reaches failure {} with {trials} trials (upper Wilson end {})",
            params.gamma, best.wilson_hi
        )));
    }
    let (mut lo, mut hi_t) = (1u64, hi);
    while lo < hi_t {
        let mid = lo + (hi_t - lo) / 2;
        let (ok, est) = accept(mid)?;
        if ok {
            hi_t = mid;
            best = est;
        } else {
            lo = mid + 1;
        }
    }
    Ok((hi_t, best))
}

/// Runs every cell of the spec. Cells are ordered by `ε`, then `δ`, then
/// `γ`, then `t`; cell `k`, trial `j` uses seed `derive_seed(master_seed, k, j)`.
pub fn run_experiment(spec: &ExperimentSpec, base: &Path, threads: Option<usize>) -> Result<SweepTable> {
    spec.validate()?;
    let space = spec.system.load(base)?;
    let threads = threads.or(spec.threads);
    with_threads(threads, || run_cells(spec, &space))?
}

fn run_cells(spec: &ExperimentSpec, space: &Space) -> Result<SweepTable> {
    let constants = spec.constants.unwrap_or_default();
    let d = match spec.formula {
        Some(_) => Some(match spec.d.or_else(|| spec.system.claimed_dimension()) {
            Some(d) => d,
            None => space.dimension()?,
        }),
        None => None,
    };
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    for &eps in &spec.eps {
        for &delta in &spec.delta {
            let chain = match spec.test {
                TrialTest::Relative => None,
                TrialTest::Claim7 => {
                    let f = space.explicit().ok_or_else(|| {
                        Error::InvalidArgument("chain trials need an explicit system".into())
                    })?;
                    Some(build_chain(f, eps, delta)?)
                }
            };
            for &gamma in &spec.gamma {
                let params = ApproxParams::new(eps, delta, gamma)?;
                let ts = match (spec.formula, d) {
                    (Some(formula), Some(d)) => vec![formula.sample_size(&params, d, space.family_size(), &constants)],
                    _ => spec.t.clone(),
                };
                for t in ts {
                    let cell = cells.len();
                    let cell_rows = match &chain {
                        None => relative_rows(space, &params, t, spec.trials, spec.master_seed, cell, spec.mode)?,
                        Some(chain) => claim7_rows(chain, t, spec.trials, spec.master_seed, cell, spec.mode)?,
                    };
                    cells.push(CellSummary::from_rows(&params, t, spec.master_seed, &cell_rows));
                    rows.extend(cell_rows);
                }
            }
        }
    }
    Ok(SweepTable { cells, rows })
}

/// Frequency of `||A ∩ S| - |S|t/n| > η` over uniform `t`-samples, with `S`
/// any fixed `s`-subset.
pub fn chernoff_tail_frequency(
    n: usize,
    s: usize,
    t: usize,
    eta: f64,
    trials: usize,
    master_seed: u64,
    mode: ReplacementMode,
) -> Result<FailureEstimate> {
    if s > n || t == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("need 0 < n, s <= n, t > 0 (n={n}, s={s}, t={t})")));
    }
    check_t(n, t as u64, mode)?;
    let expected = s as f64 * t as f64 / n as f64;
    let flags = run_trials(trials, |trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, 0, trial as u64));
        // by symmetry S = {0, …, s-1}
        let hits = match mode {
            ReplacementMode::Without => index::sample(&mut rng, n, t).iter().filter(|&i| i < s).count(),
            ReplacementMode::With => (0..t).filter(|_| rng.random_range(0..n) < s).count(),
        };
        Ok((hits as f64 - expected).abs() > eta)
    })?;
    Ok(FailureEstimate::from_flags(flags.into_iter()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Family, GeneratorSpec};
    use crate::IntervalSpace;

    fn spec() -> ExperimentSpec {
        ExperimentSpec {
            system: SystemSource::Generator(GeneratorSpec::new(Family::Intervals, 60)),
            eps: vec![0.2, 0.3],
            delta: vec![0.5],
            gamma: vec![0.1],
            t: vec![10, 40],
            formula: None,
            d: None,
            constants: None,
            trials: 30,
            master_seed: 17,
            mode: ReplacementMode::Without,
            threads: None,
            test: TrialTest::Relative,
        }
    }

    #[test]
    fn full_sample_never_fails() {
        let f = IntervalSpace::new(50).unwrap();
        let p = ApproxParams::new(0.1, 0.1, 0.1).unwrap();
        let est = monte_carlo_failure(&f, &p, 50, 40, 3, ReplacementMode::Without).unwrap();
        assert_eq!(est.failures, 0);
        assert_eq!(est.failure_rate, 0.0);
    }

    #[test]
    fn oversampling_is_rejected() {
        let f = IntervalSpace::new(50).unwrap();
        let p = ApproxParams::new(0.1, 0.1, 0.1).unwrap();
        assert!(monte_carlo_failure(&f, &p, 51, 4, 3, ReplacementMode::Without).is_err());
        assert!(monte_carlo_failure(&f, &p, 51, 4, 3, ReplacementMode::With).is_ok());
    }

    #[test]
    fn sweep_is_reproducible_and_consistent() {
        let s = spec();
        let a = run_experiment(&s, Path::new("."), Some(1)).unwrap();
        let b = run_experiment(&s, Path::new("."), Some(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells.len(), 4);
        assert_eq!(a.rows.len(), 120);
        assert!(a.aggregates_consistent());
        let mut csv = Vec::new();
        a.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("eps,delta,gamma,t,trials,failures,failure_rate,wilson_lo,wilson_hi,seed\n"));
    }

    #[test]
    fn tampered_rows_are_detected() {
        let mut a = run_experiment(&spec(), Path::new("."), None).unwrap();
        a.rows[0].passed = !a.rows[0].passed;
        assert!(!a.aggregates_consistent());
    }

    #[test]
    fn formula_cells_use_computed_sizes() {
        let mut s = spec();
        s.t.clear();
        s.formula = Some(Formula::Basic);
        s.mode = ReplacementMode::With;
        s.trials = 5;
        let table = run_experiment(&s, Path::new("."), None).unwrap();
        let p = ApproxParams::new(0.2, 0.5, 0.1).unwrap();
        assert_eq!(table.cells[0].t, sampling::basic_sample_size(&p, 60 * 61 / 2 + 1));
    }

    #[test]
    fn spec_validation() {
        let mut s = spec();
        s.formula = Some(Formula::Main);
        assert!(s.validate().is_err());
        let mut s = spec();
        s.trials = 0;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.eps.clear();
        assert!(s.validate().is_err());
        let mut s = spec();
        s.gamma = vec![1.0];
        assert!(s.validate().is_err());
    }

    #[test]
    fn failure_rate_falls_with_t() {
        // shared seeds across t; allow overlap of the intervals
        let f = IntervalSpace::new(400).unwrap();
        let p = ApproxParams::new(0.1, 0.5, 0.2).unwrap();
        let mut prev: Option<FailureEstimate> = None;
        for t in [20, 60, 150, 300] {
            let est = monte_carlo_failure(&f, &p, t, 100, 9, ReplacementMode::Without).unwrap();
            if let Some(prev) = prev {
                assert!(est.wilson_lo <= prev.wilson_hi);
            }
            prev = Some(est);
        }
        assert_eq!(prev.unwrap().failures, 0);
    }

    #[test]
    fn minimal_search_brackets() {
        let f = IntervalSpace::new(120).unwrap();
        let p = ApproxParams::new(0.2, 0.5, 0.2).unwrap();
        let (t, est) = minimal_sample_size_search(&f, &p, 60, 5, ReplacementMode::Without, None).unwrap();
        assert!((1..=120).contains(&t));
        assert!(est.wilson_hi <= 0.2);
        let again = minimal_sample_size_search(&f, &p, 60, 5, ReplacementMode::Without, None).unwrap();
        assert_eq!(again.0, t);
        assert!(t <= sampling::basic_sample_size(&p, RangeSpace::family_size(&f)));
    }

    #[test]
    fn chernoff_frequency_sanity() {
        // a huge threshold never triggers; a negative one always does
        let est = chernoff_tail_frequency(1000, 100, 50, 1e6, 50, 1, ReplacementMode::Without).unwrap();
        assert_eq!(est.failures, 0);
        let est = chernoff_tail_frequency(1000, 100, 50, -1.0, 50, 1, ReplacementMode::With).unwrap();
        assert_eq!(est.failures, 50);
    }
}
