//! Uniform sampling, exact verifiers for relative `(ε, δ)`-approximations,
//! `ε`-approximations and `ε`-nets, the Chernoff tail expression, and the
//! sample-size formulas.

use std::ops::ControlFlow;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bound;
use crate::error::{Error, Result};
use crate::range_space::{RangeSpace, SetCount};
use crate::subset::Subset;

/// `(ε, δ, γ)`, each strictly inside `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxParams {
    pub eps: f64,
    pub delta: f64,
    pub gamma: f64,
}

fn open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterRange { name, value })
    }
}

impl ApproxParams {
    pub fn new(eps: f64, delta: f64, gamma: f64) -> Result<Self> {
        open_unit("eps", eps)?;
        open_unit("delta", delta)?;
        open_unit("gamma", gamma)?;
        Ok(Self { eps, delta, gamma })
    }
}

/// The absolute constants of the sample-size bounds and the packing bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for Constants {
    /// Uncalibrated placeholders; `c3 = 4·sqrt(c1)` follows the packing argument.
    fn default() -> Self {
        Self {
            c: 8.0,
            c1: 8.0,
            c2: 8.0,
            c3: 4.0 * 8f64.sqrt(),
        }
    }
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c", self.c), ("c1", self.c1), ("c2", self.c2), ("c3", self.c3)] {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("constant {name} = {v} must be >= 1")));
            }
        }
        Ok(())
    }
}

/// Where a set of constants came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// The constants config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsFile {
    pub constants: Constants,
    pub provenance: Provenance,
}

impl Default for ConstantsFile {
    fn default() -> Self {
        Self {
            constants: Constants::default(),
            provenance: Provenance {
                status: "uncalibrated".into(),
                suite_hash: None,
                master_seed: None,
                notes: Vec::new(),
            },
        }
    }
}

impl ConstantsFile {
    pub fn is_calibrated(&self) -> bool {
        self.provenance.status == "calibrated"
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        let file: ConstantsFile = serde_json::from_reader(std::io::BufReader::new(f))?;
        file.constants.validate()?;
        Ok(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplacementMode {
    #[default]
    Without,
    With,
}

/// A sample `A` of the ground set. Without replacement it is a set and
/// `t = |A|`; with replacement it is a multiset of `t` draws.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    members: Subset,
    t: u64,
    seed: Option<u64>,
    mode: ReplacementMode,
    // aligned with `members` in ascending index order; with-replacement only
    multiplicities: Option<Vec<u64>>,
}

impl Sample {
    /// An externally supplied set sample.
    pub fn from_subset(members: Subset) -> Self {
        Self {
            t: members.len() as u64,
            members,
            seed: None,
            mode: ReplacementMode::Without,
            multiplicities: None,
        }
    }

    /// A with-replacement sample from `(index, multiplicity)` pairs.
    pub fn from_multiset(n: usize, draws: impl IntoIterator<Item = (usize, u64)>) -> Result<Self> {
        let mut pairs: Vec<(usize, u64)> = draws.into_iter().filter(|&(_, m)| m > 0).collect();
        pairs.sort_unstable();
        let mut merged: Vec<(usize, u64)> = Vec::with_capacity(pairs.len());
        for (i, m) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += m,
                _ => merged.push((i, m)),
            }
        }
        let members = Subset::from_indices(n, merged.iter().map(|p| p.0))?;
        Ok(Self {
            t: merged.iter().map(|p| p.1).sum(),
            members,
            seed: None,
            mode: ReplacementMode::With,
            multiplicities: Some(merged.into_iter().map(|p| p.1).collect()),
        })
    }

    pub fn full(n: usize) -> Self {
        Self::from_subset(Subset::full(n))
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    /// Distinct sampled elements.
    pub fn members(&self) -> &Subset {
        &self.members
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn n(&self) -> usize {
        self.members.universe()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn mode(&self) -> ReplacementMode {
        self.mode
    }

    /// Whether this is the whole ground set taken once.
    pub fn is_full(&self) -> bool {
        self.mode == ReplacementMode::Without && self.members.len() == self.members.universe()
    }

    /// `(element, multiplicity)` in ascending element order.
    pub fn weighted(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        let mults = self.multiplicities.as_deref();
        self.members
            .iter()
            .enumerate()
            .map(move |(k, i)| (i, mults.map_or(1, |m| m[k])))
    }

    /// `|A ∩ S|`, with multiplicity.
    pub fn hits(&self, s: &Subset) -> u64 {
        match &self.multiplicities {
            None => self.members.intersection_count(s) as u64,
            Some(m) => self
                .members
                .iter()
                .zip(m)
                .filter(|(i, _)| s.contains(*i))
                .map(|(_, &w)| w)
                .sum(),
        }
    }

    /// Maps this sample through `f`, which must be injective on members.
    pub fn map_indices(&self, n: usize, f: impl Fn(usize) -> Option<usize>) -> Result<Sample> {
        let pairs: Vec<(usize, u64)> = self
            .weighted()
            .map(|(i, w)| f(i).map(|j| (j, w)).ok_or(Error::NotContained))
            .collect::<Result<_>>()?;
        let mut out = match self.mode {
            ReplacementMode::Without => {
                Sample::from_subset(Subset::from_indices(n, pairs.iter().map(|p| p.0))?)
            }
            ReplacementMode::With => Sample::from_multiset(n, pairs)?,
        };
        out.seed = self.seed;
        Ok(out)
    }

    pub fn to_file(&self) -> SampleFile {
        SampleFile {
            n: self.n(),
            t: self.t,
            mode: self.mode,
            seed: self.seed,
            members: self.members.to_vec(),
            multiplicities: self.multiplicities.clone(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(f), &self.to_file())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Sample> {
        let f = std::fs::File::open(path)?;
        let file: SampleFile = serde_json::from_reader(std::io::BufReader::new(f))?;
        file.into_sample()
    }
}

/// JSON form of a [`Sample`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFile {
    pub n: usize,
    pub t: u64,
    #[serde(default)]
    pub mode: ReplacementMode,
    #[serde(default)]
    pub seed: Option<u64>,
    pub members: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicities: Option<Vec<u64>>,
}

impl SampleFile {
    pub fn into_sample(self) -> Result<Sample> {
        let sample = match (self.mode, self.multiplicities) {
            (ReplacementMode::Without, None) => {
                Sample::from_subset(Subset::from_indices(self.n, self.members)?)
            }
            (ReplacementMode::With, Some(m)) if m.len() == self.members.len() => {
                Sample::from_multiset(self.n, self.members.into_iter().zip(m))?
            }
            (ReplacementMode::With, None) => {
                Sample::from_multiset(self.n, self.members.into_iter().map(|i| (i, 1)))?
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "multiplicities must match members and only appear with replacement".into(),
                ))
            }
        };
        if sample.t != self.t {
            return Err(Error::InvalidArgument(format!(
                "sample declares t = {} but holds {}",
                self.t, sample.t
            )));
        }
        Ok(sample.with_seed(self.seed))
    }
}

/// A uniform sample of `0..n`: a uniform `t`-subset without replacement, or
/// `t` i.i.d. uniform draws with replacement. Deterministic in its inputs.
pub fn uniform_sample(n: usize, t: usize, seed: u64, mode: ReplacementMode) -> Result<Sample> {
    if n == 0 {
        return Err(Error::EmptyGroundSet);
    }
    if t == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = match mode {
        ReplacementMode::Without => {
            if t > n {
                return Err(Error::SampleTooLarge { t, n });
            }
            let picked = index::sample(&mut rng, n, t);
            Sample::from_subset(Subset::from_indices(n, picked.iter())?)
        }
        ReplacementMode::With => {
            let draws: Vec<(usize, u64)> = (0..t).map(|_| (rng.random_range(0..n), 1)).collect();
            Sample::from_multiset(n, draws)?
        }
    };
    Ok(sample.with_seed(Some(seed)))
}

/// A uniform `t`-subset of `pool`, in the pool's ground-set indices.
pub fn uniform_subsample(pool: &Subset, t: usize, seed: u64) -> Result<Sample> {
    if t > pool.len() {
        return Err(Error::SampleTooLarge { t, n: pool.len() });
    }
    if t == 0 {
        return Err(Error::EmptySample);
    }
    if t == pool.len() {
        return Ok(Sample::from_subset(pool.clone()).with_seed(Some(seed)));
    }
    let members = pool.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = index::sample(&mut rng, members.len(), t);
    let s = Subset::from_indices(pool.universe(), picked.iter().map(|k| members[k]))?;
    Ok(Sample::from_subset(s).with_seed(Some(seed)))
}

/// Outcome of checking a sample against every set of a family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproximationReport {
    /// `max_S ||S|/n - |A∩S|/t| / max{|S|/n, ε}`.
    pub worst_ratio: f64,
    /// Lowest family index attaining `worst_ratio`.
    pub worst_set_index: u64,
    pub t: u64,
    pub eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_set_errors: Option<Vec<f64>>,
    #[serde(skip)]
    worst: SetCount,
    #[serde(skip)]
    n: u64,
}

impl ApproximationReport {
    /// Whether `worst_ratio <= delta`, decided exactly on the worst set.
    pub fn passes(&self, delta: f64) -> bool {
        let dev = bound::scaled_deviation(self.worst.size, self.worst.hits, self.n, self.t);
        bound::relative_within(dev, self.t as u128, self.worst.size as u128, self.n as u128, self.eps, delta)
    }

    /// `|S|` and `|A ∩ S|` of the worst set.
    pub fn worst_counts(&self) -> (u64, u64) {
        (self.worst.size, self.worst.hits)
    }
}

fn check_sample<R: RangeSpace + ?Sized>(f: &R, a: &Sample) -> Result<()> {
    if a.n() != f.ground_size() {
        return Err(Error::GroundSetMismatch {
            left: f.ground_size(),
            right: a.n(),
        });
    }
    if a.t() == 0 {
        return Err(Error::EmptySample);
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("eps = {eps} must be positive")))
    }
}

#[inline]
fn ratio(c: &SetCount, n: u64, t: u64, eps: f64) -> f64 {
    let dev = bound::scaled_deviation(c.size, c.hits, n, t) as f64;
    dev / (t as f64 * (c.size as f64).max(eps * n as f64))
}

/// Worst relative error of `a` over the family.
pub fn relative_error<R: RangeSpace + ?Sized>(f: &R, a: &Sample, eps: f64) -> Result<ApproximationReport> {
    relative_error_impl(f, a, eps, false)
}

/// As [`relative_error`], also recording the ratio of every visited set
/// (every member, for explicit families).
pub fn relative_error_detailed<R: RangeSpace + ?Sized>(
    f: &R,
    a: &Sample,
    eps: f64,
) -> Result<ApproximationReport> {
    relative_error_impl(f, a, eps, true)
}

fn relative_error_impl<R: RangeSpace + ?Sized>(
    f: &R,
    a: &Sample,
    eps: f64,
    detailed: bool,
) -> Result<ApproximationReport> {
    check_sample(f, a)?;
    check_eps(eps)?;
    let n = f.ground_size() as u64;
    let t = a.t();
    let mut best = SetCount {
        index: 0,
        size: 0,
        hits: 0,
    };
    let mut best_ratio = -1.0f64;
    let mut all = detailed.then(Vec::new);
    f.visit_extremal(a, &mut |c| {
        let r = ratio(&c, n, t, eps);
        if let Some(v) = all.as_mut() {
            v.push(r);
        }
        if r > best_ratio || (r == best_ratio && c.index < best.index) {
            best_ratio = r;
            best = c;
        }
        ControlFlow::Continue(())
    });
    Ok(ApproximationReport {
        worst_ratio: best_ratio.max(0.0),
        worst_set_index: best.index,
        t,
        eps,
        per_set_errors: all,
        worst: best,
        n,
    })
}

/// Whether every set satisfies `||S|/n - |A∩S|/t| <= δ·max{|S|/n, ε}`, decided
/// exactly. Accepts any `δ > 0`, including combined errors above one.
pub fn relative_within<R: RangeSpace + ?Sized>(f: &R, a: &Sample, eps: f64, delta: f64) -> Result<bool> {
    check_sample(f, a)?;
    check_eps(eps)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    let n = f.ground_size() as u64;
    let t = a.t();
    let mut ok = true;
    f.visit_extremal(a, &mut |c| {
        let dev = bound::scaled_deviation(c.size, c.hits, n, t);
        if bound::relative_within(dev, t as u128, c.size as u128, n as u128, eps, delta) {
            ControlFlow::Continue(())
        } else {
            ok = false;
            ControlFlow::Break(())
        }
    });
    Ok(ok)
}

/// Relative `(ε, δ)`-approximation test.
pub fn is_relative_approx<R: RangeSpace + ?Sized>(f: &R, a: &Sample, params: &ApproxParams) -> Result<bool> {
    relative_within(f, a, params.eps, params.delta)
}

/// `ε`-approximation: every set's density is reproduced within `ε` additively.
pub fn is_eps_approximation<R: RangeSpace + ?Sized>(f: &R, a: &Sample, eps: f64) -> Result<bool> {
    check_sample(f, a)?;
    check_eps(eps)?;
    let n = f.ground_size() as u64;
    let t = a.t();
    let mut ok = true;
    f.visit_extremal(a, &mut |c| {
        let dev = bound::scaled_deviation(c.size, c.hits, n, t);
        if bound::additive_within(dev, t as u128, n as u128, eps) {
            ControlFlow::Continue(())
        } else {
            ok = false;
            ControlFlow::Break(())
        }
    });
    Ok(ok)
}

/// `ε`-net: every set with `|S| >= εn` is hit.
pub fn is_eps_net<R: RangeSpace + ?Sized>(f: &R, a: &Sample, eps: f64) -> Result<bool> {
    check_sample(f, a)?;
    check_eps(eps)?;
    let n = f.ground_size() as u128;
    let mut ok = true;
    f.visit_extremal(a, &mut |c| {
        if c.hits == 0 && bound::at_least_fraction(c.size as u128, n, eps) {
            ok = false;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    Ok(ok)
}

/// `2·exp(-η²n / (2|S|t + ηn))`, unclamped.
pub fn chernoff_bound(n: u64, s: u64, t: u64, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("eta = {eta} must be positive")));
    }
    if n == 0 || t == 0 || s > n {
        return Err(Error::InvalidArgument(format!("need n, t >= 1 and s <= n (n={n}, s={s}, t={t})")));
    }
    let n = n as f64;
    let exponent = eta * eta * n / (2.0 * s as f64 * t as f64 + eta * n);
    Ok(2.0 * (-exponent).exp())
}

/// Clamps a probability bound into `[0, 1]`.
pub fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

fn ceil_count(x: f64) -> u64 {
    // saturating float-to-int cast
    x.ceil() as u64
}

/// `⌈3/(εδ²) · ln(2|F|/γ)⌉`.
pub fn basic_sample_size(params: &ApproxParams, family_size: u64) -> u64 {
    basic_sample_size_ln(params, (family_size.max(1) as f64).ln())
}

/// [`basic_sample_size`] given `ln |F|` directly, for bounded rather than counted families.
pub fn basic_sample_size_ln(params: &ApproxParams, ln_family: f64) -> u64 {
    let ApproxParams { eps, delta, gamma } = *params;
    ceil_count(3.0 / (eps * delta * delta) * ((2.0 / gamma).ln() + ln_family))
}

/// `⌈c/(εδ²) · (d ln(1/ε) + ln(1/γ))⌉`.
pub fn main_sample_size(params: &ApproxParams, d: u32, constants: &Constants) -> u64 {
    let ApproxParams { eps, delta, gamma } = *params;
    ceil_count(constants.c / (eps * delta * delta) * (d as f64 * (1.0 / eps).ln() + (1.0 / gamma).ln()))
}

/// `⌈c₁/(εδ²) · (d ln(1/(εδ)) + ln(1/γ))⌉`.
pub fn halving_sample_size(params: &ApproxParams, d: u32, constants: &Constants) -> u64 {
    let ApproxParams { eps, delta, gamma } = *params;
    ceil_count(
        constants.c1 / (eps * delta * delta)
            * (d as f64 * (1.0 / (eps * delta)).ln() + (1.0 / gamma).ln()),
    )
}

/// `⌈c₂ · max{(1/(εδ)) ln(|F|/γ), (1/(εδ²)) ln(1/(ε^d γ))}⌉`.
pub fn chaining_sample_size(params: &ApproxParams, d: u32, family_size: u64, constants: &Constants) -> u64 {
    let ApproxParams { eps, delta, gamma } = *params;
    let first = ((family_size.max(1) as f64).ln() - gamma.ln()) / (eps * delta);
    let second = (-(d as f64) * eps.ln() - gamma.ln()) / (eps * delta * delta);
    ceil_count(constants.c2 * first.max(second))
}

/// Which sample-size formula to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    Basic,
    Main,
    Halving,
    Chaining,
}

impl Formula {
    pub fn sample_size(self, params: &ApproxParams, d: u32, family_size: u64, constants: &Constants) -> u64 {
        match self {
            Formula::Basic => basic_sample_size(params, family_size),
            Formula::Main => main_sample_size(params, d, constants),
            Formula::Halving => halving_sample_size(params, d, constants),
            Formula::Chaining => chaining_sample_size(params, d, family_size, constants),
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Formula::Basic),
            "main" => Ok(Formula::Main),
            "halving" => Ok(Formula::Halving),
            "chaining" => Ok(Formula::Chaining),
            other => Err(Error::InvalidArgument(format!("unknown formula {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::SetSystem;
    use rand::Rng;
    use proptest::prelude::*;

    fn sub(n: usize, v: &[usize]) -> Subset {
        Subset::from_indices(n, v.iter().copied()).unwrap()
    }

    #[test]
    fn params_are_strict() {
        assert!(ApproxParams::new(0.1, 0.5, 0.2).is_ok());
        assert!(ApproxParams::new(0.0, 0.5, 0.2).is_err());
        assert!(ApproxParams::new(0.1, 1.0, 0.2).is_err());
        assert!(ApproxParams::new(0.1, 0.5, f64::NAN).is_err());
    }

    #[test]
    fn full_sample_of_five() {
        let a = uniform_sample(5, 5, 11, ReplacementMode::Without).unwrap();
        assert!(a.is_full());
        assert_eq!(a.members().to_vec(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn sampling_is_deterministic() {
        for mode in [ReplacementMode::Without, ReplacementMode::With] {
            let a = uniform_sample(1000, 40, 99, mode).unwrap();
            let b = uniform_sample(1000, 40, 99, mode).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.t(), 40);
            let c = uniform_sample(1000, 40, 100, mode).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn oversampling_without_replacement_fails() {
        assert!(matches!(
            uniform_sample(4, 5, 0, ReplacementMode::Without),
            Err(Error::SampleTooLarge { t: 5, n: 4 })
        ));
        let a = uniform_sample(4, 50, 0, ReplacementMode::With).unwrap();
        assert_eq!(a.t(), 50);
        assert_eq!(a.weighted().map(|p| p.1).sum::<u64>(), 50);
    }

    #[test]
    fn singleton_draws_are_uniform() {
        // n = 10^6, t = 1: 10^5 draws. Each element's count is Binomial(10^5, 10^-6),
        // so no element should come close to 5 sigma above the mean of 0.1.
        let n = 1_000_000;
        let trials = 100_000u64;
        let mut counts = std::collections::HashMap::new();
        let mut bucket = [0u64; 10];
        for seed in 0..trials {
            let a = uniform_sample(n, 1, seed, ReplacementMode::Without).unwrap();
            let i = a.members().iter().next().unwrap();
            *counts.entry(i).or_insert(0u64) += 1;
            bucket[i * 10 / n] += 1;
        }
        let p = 1e-6;
        let mean = trials as f64 * p;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        // an element drawn more than mean + 5 sd + 1 times is suspicious
        assert!(counts.values().all(|&c| (c as f64) <= mean + 5.0 * sd + 3.0));
        // coarse buckets: each holds 10^4 expected, sd ≈ 95
        for b in bucket {
            assert!((b as f64 - 10_000.0).abs() < 5.0 * 95.0, "bucket {b}");
        }
    }

    #[test]
    fn full_sample_has_zero_error() {
        let f = generators::random_system(9, 30, 0.4, 5).unwrap();
        let a = Sample::full(9);
        let r = relative_error(&f, &a, 0.3).unwrap();
        assert_eq!(r.worst_ratio, 0.0);
        let p = ApproxParams::new(0.3, 0.01, 0.1).unwrap();
        assert!(is_relative_approx(&f, &a, &p).unwrap());
        assert!(is_eps_approximation(&f, &a, 0.01).unwrap());
        assert!(is_eps_net(&f, &a, 0.01).unwrap());
    }

    #[test]
    fn hand_evaluated_ratio() {
        let f = SetSystem::new(2, [vec![0]]).unwrap();
        let a = Sample::from_subset(sub(2, &[1]));
        let r = relative_error(&f, &a, 0.5).unwrap();
        assert_eq!(r.worst_ratio, 1.0);
        assert_eq!(r.worst_set_index, 0);
        let p = ApproxParams::new(0.5, 0.9, 0.1).unwrap();
        assert!(!is_relative_approx(&f, &a, &p).unwrap());
        assert!(!r.passes(0.9));
        assert!(r.passes(1.0));
    }

    #[test]
    fn empty_set_family_has_zero_error() {
        let f = SetSystem::new(4, [Vec::<usize>::new()]).unwrap();
        let a = Sample::from_subset(sub(4, &[2]));
        assert_eq!(relative_error(&f, &a, 0.1).unwrap().worst_ratio, 0.0);
    }

    #[test]
    fn net_failure_by_construction() {
        let f = SetSystem::new(10, [vec![0, 1, 2, 3, 4]]).unwrap();
        let a = Sample::from_subset(sub(10, &[7]));
        assert!(!is_eps_net(&f, &a, 0.3).unwrap());
        assert!(is_eps_net(&f, &a, 0.6).unwrap());
    }

    #[test]
    fn empty_sample_is_an_error() {
        let f = SetSystem::new(3, [vec![0]]).unwrap();
        let a = Sample::from_subset(Subset::empty(3));
        assert!(matches!(relative_error(&f, &a, 0.1), Err(Error::EmptySample)));
    }

    #[test]
    fn worst_set_ties_break_low() {
        // all three sets have ratio 1 against A = {2}
        let a = Sample::from_subset(sub(4, &[2]));
        let f = SetSystem::new(4, [vec![1], vec![2, 3], vec![0]]).unwrap();
        let r = relative_error(&f, &a, 0.25).unwrap();
        assert_eq!((r.worst_ratio, r.worst_set_index), (1.0, 0));
        // {2} is strictly worst: 1/4 against 1 gives ratio 3
        let f = SetSystem::new(4, [vec![0], vec![2], vec![1]]).unwrap();
        let r = relative_error(&f, &a, 0.25).unwrap();
        assert_eq!((r.worst_ratio, r.worst_set_index), (3.0, 1));
    }

    #[test]
    fn chernoff_examples() {
        let v = chernoff_bound(100, 10, 50, 5.0).unwrap();
        assert!((v - 2.0 * (-5.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!((v - 0.37775).abs() < 1e-4);
        let mut prev = f64::INFINITY;
        for eta in [0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0] {
            let b = chernoff_bound(100, 10, 50, eta).unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert!(prev < 1e-20);
        assert!(chernoff_bound(100, 10, 50, 0.0).is_err());
        assert!(chernoff_bound(100, 10, 50, -1.0).is_err());
    }

    #[test]
    fn chernoff_specialisations_are_dominated() {
        // With eta = δ t max{s/n, ε} the exponent is at least εδ²t/3, and with
        // s <= εnδ and eta = δ t ε it is at least δεt/3.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let n = rng.random_range(10..5000u64);
            let s = rng.random_range(0..=n);
            let t = rng.random_range(1..2000u64);
            let eps: f64 = rng.random_range(0.01..0.99);
            let delta: f64 = rng.random_range(0.01..0.99);
            let m = (s as f64 / n as f64).max(eps);
            let b = chernoff_bound(n, s, t, delta * t as f64 * m).unwrap();
            assert!(b <= 2.0 * (-eps * delta * delta * t as f64 / 3.0).exp() * (1.0 + 1e-12));
            let small = ((eps * n as f64 * delta).floor() as u64).min(n);
            let b = chernoff_bound(n, small, t, delta * t as f64 * eps).unwrap();
            assert!(b <= 2.0 * (-delta * eps * t as f64 / 3.0).exp() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn sample_size_examples() {
        let p = ApproxParams::new(0.1, 0.5, 0.1).unwrap();
        assert_eq!(basic_sample_size(&p, 1000), 1189);
        let p = ApproxParams::new(0.5, 0.5, 0.5).unwrap();
        assert_eq!(basic_sample_size(&p, 1), 34);
        let one = Constants { c: 1.0, c1: 1.0, c2: 1.0, c3: 1.0 };
        assert_eq!(halving_sample_size(&p, 1, &one), 17);
        let p = ApproxParams::new(0.1, 0.5, 0.5).unwrap();
        assert_eq!(chaining_sample_size(&p, 2, 10, &one), 212);
        // first branch dominates for a large family
        let first = 20.0 * (1e9f64 / 0.5).ln();
        assert_eq!(chaining_sample_size(&p, 2, 1_000_000_000, &one), first.ceil() as u64);
    }

    #[test]
    fn sample_sizes_are_monotone() {
        let c = Constants::default();
        let mut prev = 0;
        for fam in [1u64, 2, 10, 1000, 1 << 40] {
            let p = ApproxParams::new(0.1, 0.3, 0.05).unwrap();
            let b = basic_sample_size(&p, fam);
            assert!(b >= prev);
            prev = b;
        }
        for d in 1..6u32 {
            for (g_lo, g_hi) in [(0.01, 0.1), (0.1, 0.5), (0.5, 0.9)] {
                let lo = ApproxParams::new(0.2, 0.4, g_lo).unwrap();
                let hi = ApproxParams::new(0.2, 0.4, g_hi).unwrap();
                for form in [Formula::Main, Formula::Halving, Formula::Chaining] {
                    assert!(form.sample_size(&lo, d, 500, &c) >= form.sample_size(&hi, d, 500, &c));
                    assert!(form.sample_size(&lo, d + 1, 500, &c) >= form.sample_size(&lo, d, 500, &c));
                }
            }
        }
    }

    #[test]
    fn sample_file_round_trip() {
        let a = uniform_sample(30, 50, 4, ReplacementMode::With).unwrap();
        let text = serde_json::to_string(&a.to_file()).unwrap();
        let back: SampleFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_sample().unwrap(), a);
    }

    // Independent oracle: the definition evaluated per set in floating point
    // with rationals for the comparison.
    fn definition_holds(f: &SetSystem, a: &Sample, eps: f64, delta: f64) -> bool {
        use num::BigRational;
        let n = f.n() as i64;
        let t = a.t() as i64;
        let eps = BigRational::from_float(eps).unwrap();
        let delta = BigRational::from_float(delta).unwrap();
        f.family().iter().all(|s| {
            let size = BigRational::new((s.len() as i64).into(), n.into());
            let hits = a.members().iter().filter(|&i| s.contains(i)).count() as i64;
            let frac = BigRational::new(hits.into(), t.into());
            let lhs = if size > frac { &size - &frac } else { &frac - &size };
            let m = if size > eps { size.clone() } else { eps.clone() };
            lhs <= &delta * m
        })
    }

    // The second displayed form: |A∩S| = |S|t/n ± δt·max{|S|/n, ε}.
    fn count_form_holds(f: &SetSystem, a: &Sample, eps: f64, delta: f64) -> bool {
        let n = f.n() as f64;
        let t = a.t() as f64;
        f.family().iter().all(|s| {
            let expect = s.len() as f64 * t / n;
            let slack = delta * t * (s.len() as f64 / n).max(eps);
            (a.hits(s) as f64 - expect).abs() <= slack * (1.0 + 1e-12)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn verifier_matches_definition(n in 3usize..=12, m in 1usize..50, seed: u64, mask: u16,
                                       eps in 0.05f64..0.9, delta in 0.05f64..0.95) {
            let f = generators::random_system(n, m, 0.5, seed).unwrap();
            let a = Sample::from_subset(Subset::from_indices(n, (0..n).filter(|i| mask >> i & 1 == 1)).unwrap());
            prop_assume!(a.t() > 0);
            let exact = relative_within(&f, &a, eps, delta).unwrap();
            prop_assert_eq!(exact, definition_holds(&f, &a, eps, delta));
            let report = relative_error(&f, &a, eps).unwrap();
            prop_assert_eq!(report.passes(delta), exact);
            // the count form agrees away from exact ties
            if (report.worst_ratio - delta).abs() > 1e-9 {
                prop_assert_eq!(count_form_holds(&f, &a, eps, delta), exact);
            }
        }

        #[test]
        fn relative_approx_implies_net(n in 3usize..=12, m in 1usize..40, seed: u64, mask: u16,
                                      eps in 0.05f64..0.9, delta in 0.05f64..0.95) {
            let f = generators::random_system(n, m, 0.4, seed).unwrap();
            let a = Sample::from_subset(Subset::from_indices(n, (0..n).filter(|i| mask >> i & 1 == 1)).unwrap());
            prop_assume!(a.t() > 0);
            if relative_within(&f, &a, eps, delta).unwrap() {
                prop_assert!(is_eps_net(&f, &a, eps).unwrap());
            }
        }

        #[test]
        fn verifier_is_monotone_in_eps_and_delta(seed: u64, mask: u16, eps in 0.05f64..0.5, delta in 0.05f64..0.5) {
            let f = generators::random_system(11, 30, 0.5, seed).unwrap();
            let a = Sample::from_subset(Subset::from_indices(11, (0..11).filter(|i| mask >> i & 1 == 1)).unwrap());
            prop_assume!(a.t() > 0);
            if relative_within(&f, &a, eps, delta).unwrap() {
                prop_assert!(relative_within(&f, &a, eps * 1.5, delta).unwrap());
                prop_assert!(relative_within(&f, &a, eps, delta * 1.5).unwrap());
            }
        }

        #[test]
        fn interval_space_agrees_with_explicit(n in 1usize..60, t in 1usize..80, seed: u64, with: bool, eps in 0.01f64..0.9) {
            let mode = if with { ReplacementMode::With } else { ReplacementMode::Without };
            prop_assume!(with || t <= n);
            let a = uniform_sample(n, t, seed, mode).unwrap();
            let iv = crate::IntervalSpace::new(n).unwrap();
            let ex = generators::intervals(n).unwrap();
            let r1 = relative_error(&iv, &a, eps).unwrap();
            let r2 = relative_error(&ex, &a, eps).unwrap();
            prop_assert_eq!(r1.worst_ratio, r2.worst_ratio);
            prop_assert_eq!(r1.worst_set_index, r2.worst_set_index);
            prop_assert_eq!(is_eps_net(&iv, &a, eps).unwrap(), is_eps_net(&ex, &a, eps).unwrap());
            prop_assert_eq!(is_eps_approximation(&iv, &a, eps).unwrap(), is_eps_approximation(&ex, &a, eps).unwrap());
        }
    }
}
