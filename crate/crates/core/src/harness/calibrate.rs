use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::run_trials;
use super::source::{Space, SystemSource};
use crate::chaining::{build_chain, chain_depth, ChainDecomposition};
use crate::error::{Error, Result};
use crate::packing::{greedy_maximal_packing, packing_size_bound};
use crate::range_space::RangeSpace;
use crate::sampling::{
    self, chaining_sample_size, halving_sample_size, main_sample_size, uniform_sample, ApproxParams, Constants,
    ConstantsFile, Provenance, ReplacementMode,
};
use crate::seed::derive_seed;

/// Candidate values for every constant, searched in increasing order.
pub const CALIBRATION_GRID: [f64; 9] = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCase {
    pub system: SystemSource,
    pub eps: f64,
    pub delta: f64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    /// Without replacement, sizes above `n` are capped at `n`.
    #[serde(default = "with_replacement")]
    pub mode: ReplacementMode,
}

fn with_replacement() -> ReplacementMode {
    ReplacementMode::With
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSuite {
    pub master_seed: u64,
    pub trials: usize,
    pub cases: Vec<CalibrationCase>,
}

impl CalibrationSuite {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// SHA-256 of the suite's canonical JSON form.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(self)?)))
    }
}

struct Prepared<'a> {
    case: &'a CalibrationCase,
    space: &'a Space,
    params: ApproxParams,
    d: u32,
    chain: Option<ChainDecomposition<'a>>,
}

impl Prepared<'_> {
    fn size(&self, t: u64) -> u64 {
        match self.case.mode {
            ReplacementMode::Without => t.min(self.space.ground_size() as u64),
            ReplacementMode::With => t,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Which {
    C,
    C1,
    C2,
}

impl Which {
    fn name(self) -> &'static str {
        match self {
            Which::C => "c",
            Which::C1 => "c1",
            Which::C2 => "c2",
        }
    }

    fn size(self, p: &Prepared<'_>, value: f64) -> u64 {
        let k = Constants {
            c: value,
            c1: value,
            c2: value,
            c3: value,
        };
        let t = match self {
            Which::C => main_sample_size(&p.params, p.d, &k),
            Which::C1 => halving_sample_size(&p.params, p.d, &k),
            Which::C2 => chaining_sample_size(&p.params, p.d, p.space.family_size(), &k),
        };
        p.size(t)
    }
}

/// Failure frequency of one case at one candidate value. Chain cases fail
/// when either the approximation or any chain condition fails.
fn failure_rate(which: Which, p: &Prepared<'_>, value: f64, trials: usize, master_seed: u64, case: usize) -> Result<f64> {
    let t = which.size(p, value);
    let n = p.space.ground_size();
    let chain = if which == Which::C2 { p.chain.as_ref() } else { None };
    let failed = run_trials(trials, |trial| {
        let seed = derive_seed(master_seed, case as u64, trial as u64);
        let a = uniform_sample(n, t as usize, seed, p.case.mode)?;
        let mut fail = !sampling::relative_error(p.space, &a, p.params.eps)?.passes(p.params.delta);
        if let (false, Some(chain)) = (fail, chain) {
            fail = !chain.claim7_check(&a)?.passes();
        }
        Ok(fail)
    })?;
    Ok(failed.iter().filter(|&&f| f).count() as f64 / trials as f64)
}

fn smallest_passing(
    which: Which,
    cases: &[Prepared<'_>],
    trials: usize,
    master_seed: u64,
    notes: &mut Vec<String>,
) -> Result<f64> {
    let mut last = Vec::new();
    for value in CALIBRATION_GRID {
        let mut rates = Vec::with_capacity(cases.len());
        for (k, p) in cases.iter().enumerate() {
            rates.push(failure_rate(which, p, value, trials, master_seed, k)?);
        }
        let failing: Vec<usize> = (0..cases.len()).filter(|&k| rates[k] > cases[k].params.gamma).collect();
        if failing.is_empty() {
            let worst = rates.iter().cloned().fold(0.0, f64::max);
            notes.push(format!(
                "{} = {value}: worst failure rate {worst} over {} cases",
                which.name(),
                cases.len()
            ));
            return Ok(value);
        }
        last = failing.into_iter().map(|k| (k, rates[k])).collect();
    }
    let detail: Vec<String> = last
        .iter()
        .map(|(k, r)| format!("case {k}: failure rate {r} > gamma {}", cases[*k].params.gamma))
        .collect();
    Err(Error::Calibration(format!(
        "no grid value for {} suffices; at {}: {}",
        which.name(),
        CALIBRATION_GRID[CALIBRATION_GRID.len() - 1],
        detail.join("; ")
    )))
}

/// Smallest `c₃` in the grid bounding every observed greedy packing at the
/// chain scales `εn/2^i`, `i <= ⌈log₂(1/δ)⌉`.
fn calibrate_c3(cases: &[Prepared<'_>], notes: &mut Vec<String>) -> Result<f64> {
    let mut observed = Vec::new();
    for p in cases {
        let Some(f) = p.space.explicit() else { continue };
        for i in 0..=chain_depth(p.params.delta) {
            let alpha = p.params.eps * f.n() as f64 / 2f64.powi(i as i32);
            observed.push((f.n(), alpha, p.d, greedy_maximal_packing(f, alpha)?.len()));
        }
    }
    for value in CALIBRATION_GRID {
        if observed
            .iter()
            .all(|&(n, alpha, d, size)| size as f64 <= packing_size_bound(n, alpha, d, value))
        {
            notes.push(format!("c3 = {value}: {} packings observed", observed.len()));
            return Ok(value);
        }
    }
    Err(Error::Calibration("no grid value for c3 bounds the observed packings".into()))
}

/// Finds the smallest grid value of each constant that keeps the empirical
/// failure rate at or below `γ` on every case of the suite.
pub fn calibrate_constants(suite: &CalibrationSuite, base: &Path) -> Result<ConstantsFile> {
    if suite.cases.is_empty() || suite.trials == 0 {
        return Err(Error::InvalidArgument("the suite needs cases and at least one trial".into()));
    }
    let spaces: Vec<Space> = suite.cases.iter().map(|c| c.system.load(base)).collect::<Result<_>>()?;
    let mut prepared = Vec::with_capacity(spaces.len());
    for (case, space) in suite.cases.iter().zip(&spaces) {
        let params = ApproxParams::new(case.eps, case.delta, case.gamma)?;
        let d = match case.d.or_else(|| case.system.claimed_dimension()) {
            Some(d) => d,
            None => space.dimension()?,
        };
        let chain = match space.explicit() {
            Some(f) => Some(build_chain(f, case.eps, case.delta)?),
            None => None,
        };
        prepared.push(Prepared {
            case,
            space,
            params,
            d,
            chain,
        });
    }

    let mut notes = Vec::new();
    let c = smallest_passing(Which::C, &prepared, suite.trials, suite.master_seed, &mut notes)?;
    let c1 = smallest_passing(Which::C1, &prepared, suite.trials, suite.master_seed, &mut notes)?;
    let c2 = smallest_passing(Which::C2, &prepared, suite.trials, suite.master_seed, &mut notes)?;
    let c3 = calibrate_c3(&prepared, &mut notes)?;
    Ok(ConstantsFile {
        constants: Constants { c, c1, c2, c3 },
        provenance: Provenance {
            status: "calibrated".into(),
            suite_hash: Some(suite.hash()?),
            master_seed: Some(suite.master_seed),
            notes,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Family, GeneratorSpec};

    fn easy_suite() -> CalibrationSuite {
        CalibrationSuite {
            master_seed: 4,
            trials: 40,
            cases: vec![CalibrationCase {
                system: SystemSource::Generator(GeneratorSpec::new(Family::Intervals, 40)),
                eps: 0.5,
                delta: 0.5,
                gamma: 0.2,
                d: None,
                mode: ReplacementMode::With,
            }],
        }
    }

    #[test]
    fn easy_suite_gets_small_constants() {
        let out = calibrate_constants(&easy_suite(), Path::new(".")).unwrap();
        assert!(out.is_calibrated());
        let k = out.constants;
        for v in [k.c, k.c1, k.c2, k.c3] {
            assert!(CALIBRATION_GRID.contains(&v));
            assert!(v <= 4.0, "{k:?}");
        }
        assert_eq!(out.provenance.suite_hash.as_deref().map(str::len), Some(64));
        assert_eq!(out.provenance.notes.len(), 4);
    }

    #[test]
    fn calibration_is_reproducible() {
        let a = calibrate_constants(&easy_suite(), Path::new(".")).unwrap();
        let b = calibrate_constants(&easy_suite(), Path::new(".")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hash_tracks_content() {
        let a = easy_suite();
        let mut b = easy_suite();
        b.trials += 1;
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
        assert_eq!(a.hash().unwrap(), easy_suite().hash().unwrap());
    }

    #[test]
    fn empty_suite_is_an_error() {
        let mut s = easy_suite();
        s.cases.clear();
        assert!(calibrate_constants(&s, Path::new(".")).is_err());
    }
}
