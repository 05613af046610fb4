//! Monte Carlo experiments: seeded, order-independent trial execution,
//! Wilson intervals, failure-rate sweeps and constant calibration.

mod calibrate;
mod experiment;
mod source;

pub use calibrate::{calibrate_constants, CalibrationCase, CalibrationSuite, CALIBRATION_GRID};
pub use experiment::{
    chernoff_tail_frequency, claim7_failure, minimal_sample_size_search, monte_carlo_failure, run_experiment,
    CellSummary, ExperimentSpec, FailureEstimate, SweepTable, TrialRow, TrialTest,
};
pub use source::{Family, GeneratorSpec, Space, SystemSource};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959963984540054;

/// Wilson score interval for `failures` out of `trials` at 95%.
pub fn wilson_interval(failures: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if failures == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if failures == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Half the width of the Wilson interval.
pub fn wilson_half_width(failures: usize, trials: usize) -> f64 {
    let (lo, hi) = wilson_interval(failures, trials);
    (hi - lo) / 2.0
}

/// Runs `f(trial)` for every trial, in parallel when enabled. Results come
/// back in trial order regardless of scheduling.
pub(crate) fn run_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(f).collect()
    }
}

/// Runs `op` on a pool of `threads` workers, or the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, op: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    if let Some(k) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        return Ok(pool.install(op));
    }
    #[cfg(not(feature = "parallel"))]
    if threads == Some(0) {
        return Err(Error::InvalidArgument("threads must be positive".into()));
    }
    Ok(op())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 0 of 200: upper end z²/(n + z²)
        let (lo, hi) = wilson_interval(0, 200);
        assert_eq!(lo, 0.0);
        let z2 = WILSON_Z * WILSON_Z;
        assert!((hi - z2 / (200.0 + z2)).abs() < 1e-15);
        // 10 of 100
        let (lo, hi) = wilson_interval(10, 100);
        assert!((lo - 0.05522914).abs() < 1e-7, "{lo}");
        assert!((hi - 0.17436566).abs() < 1e-7, "{hi}");
    }

    #[test]
    fn wilson_shrinks_with_trials() {
        assert!(wilson_half_width(20, 200) < wilson_half_width(10, 100));
        assert!(wilson_half_width(200, 2000) < wilson_half_width(20, 200));
        assert!(wilson_half_width(0, 2000) < wilson_half_width(0, 200));
    }

    #[test]
    fn trials_come_back_in_order() {
        let out = with_threads(Some(3), || run_trials(100, |i| Ok(i * 2))).unwrap().unwrap();
        assert_eq!(out, (0..100).map(|i| i * 2).collect::<Vec<_>>());
    }
}
