//! The interface the samplers and verifiers need from a set family, with an
//! explicit implementation ([`SetSystem`]) and an implicit one for intervals
//! ([`IntervalSpace`]), which stays usable when `n(n+1)/2` sets cannot be stored.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::generators::interval_index;
use crate::sampling::Sample;
use crate::set_system::{Reindex, SetSystem};
use crate::subset::Subset;

/// Size data of one set against one sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SetCount {
    /// Family index of the set.
    pub index: u64,
    /// `|S|`.
    pub size: u64,
    /// `|A ∩ S|`, counted with multiplicity.
    pub hits: u64,
}

pub trait RangeSpace {
    /// `n = |X|`.
    fn ground_size(&self) -> usize;

    /// `|F|`.
    fn family_size(&self) -> u64;

    /// `|F|_Y|`.
    fn trace_count(&self, y: &Subset) -> u64;

    /// The trace on `Y`, re-indexed onto `0..|Y|`.
    fn restrict(&self, y: &Subset) -> Result<(Self, Reindex)>
    where
        Self: Sized;

    /// Visits a collection of sets that dominates the family for every
    /// deviation-based test: for each `S` in the family some visited set has
    /// the same hit count and size at least `|S|`, and some visited set has
    /// the same hit count and size at most `|S|`. Explicit families visit
    /// every member in index order.
    fn visit_extremal(&self, sample: &Sample, visit: &mut dyn FnMut(SetCount) -> ControlFlow<()>);
}

impl RangeSpace for SetSystem {
    fn ground_size(&self) -> usize {
        self.n()
    }

    fn family_size(&self) -> u64 {
        self.len() as u64
    }

    fn trace_count(&self, y: &Subset) -> u64 {
        SetSystem::trace_count(self, y) as u64
    }

    fn restrict(&self, y: &Subset) -> Result<(Self, Reindex)> {
        SetSystem::restrict(self, y)
    }

    fn visit_extremal(&self, sample: &Sample, visit: &mut dyn FnMut(SetCount) -> ControlFlow<()>) {
        for (k, s) in self.family().iter().enumerate() {
            let flow = visit(SetCount {
                index: k as u64,
                size: s.len() as u64,
                hits: sample.hits(s),
            });
            if flow.is_break() {
                return;
            }
        }
    }
}

/// Ground sets up to this size are verified by scanning every interval.
pub const INTERVAL_FULL_SCAN: usize = 4096;

/// All intervals on `n` points plus `∅`, indexed as [`crate::generators::intervals`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntervalSpace {
    n: usize,
}

impl IntervalSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGroundSet);
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn to_set_system(&self) -> Result<SetSystem> {
        crate::generators::intervals(self.n)
    }

    fn count(m: u64) -> u64 {
        m * (m + 1) / 2 + 1
    }
}

impl RangeSpace for IntervalSpace {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn family_size(&self) -> u64 {
        Self::count(self.n as u64)
    }

    fn trace_count(&self, y: &Subset) -> u64 {
        Self::count(y.len() as u64)
    }

    fn restrict(&self, y: &Subset) -> Result<(Self, Reindex)> {
        if y.universe() != self.n {
            return Err(Error::GroundSetMismatch {
                left: self.n,
                right: y.universe(),
            });
        }
        Ok((IntervalSpace::new(y.len())?, Reindex::new(y)))
    }

    fn visit_extremal(&self, sample: &Sample, visit: &mut dyn FnMut(SetCount) -> ControlFlow<()>) {
        let n = self.n;
        let empty = SetCount {
            index: 0,
            size: 0,
            hits: 0,
        };
        if visit(empty).is_break() {
            return;
        }
        let mut emit = |i: usize, j: usize, hits: u64| {
            visit(SetCount {
                index: interval_index(n, i, j) as u64,
                size: (j - i + 1) as u64,
                hits,
            })
        };

        if n <= INTERVAL_FULL_SCAN {
            let mut weight = vec![0u64; n];
            for (i, w) in sample.weighted() {
                weight[i] = w;
            }
            for i in 0..n {
                let mut hits = 0;
                for j in i..n {
                    hits += weight[j];
                    if emit(i, j, hits).is_break() {
                        return;
                    }
                }
            }
            return;
        }

        // A = X: every deviation is zero, and ∅ already represents that.
        if sample.is_full() {
            return;
        }

        let support: Vec<(usize, u64)> = sample.weighted().collect();
        let u = support.len();
        let mut prefix = vec![0u64; u + 1];
        for (k, &(_, w)) in support.iter().enumerate() {
            prefix[k + 1] = prefix[k] + w;
        }
        // maximal sample-free gaps
        for g in 0..=u {
            let left = if g == 0 { 0 } else { support[g - 1].0 + 1 };
            let right = if g == u { n } else { support[g].0 };
            if left < right && emit(left, right - 1, 0).is_break() {
                return;
            }
        }
        // runs support[a..=b]: tightest and loosest interval with exactly those hits
        for a in 0..u {
            let lo_max = if a == 0 { 0 } else { support[a - 1].0 + 1 };
            for b in a..u {
                let hits = prefix[b + 1] - prefix[a];
                let hi_max = if b + 1 == u { n - 1 } else { support[b + 1].0 - 1 };
                if emit(support[a].0, support[b].0, hits).is_break() {
                    return;
                }
                if (lo_max, hi_max) != (support[a].0, support[b].0)
                    && emit(lo_max, hi_max, hits).is_break()
                {
                    return;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{relative_error, uniform_sample, ReplacementMode};

    #[test]
    fn interval_counts_match_generator() {
        for n in [1, 4, 9] {
            let iv = IntervalSpace::new(n).unwrap();
            let f = iv.to_set_system().unwrap();
            assert_eq!(iv.family_size(), f.len() as u64);
            let y = Subset::from_indices(n, (0..n).step_by(2)).unwrap();
            assert_eq!(RangeSpace::trace_count(&iv, &y), f.trace_count(&y) as u64);
        }
    }

    #[test]
    fn restrict_is_intervals_again() {
        let iv = IntervalSpace::new(10).unwrap();
        let y = Subset::from_indices(10, [1, 4, 5, 9]).unwrap();
        let (r, map) = RangeSpace::restrict(&iv, &y).unwrap();
        assert_eq!(r.n(), 4);
        assert_eq!(map.backward(3), 9);
        let explicit = iv.to_set_system().unwrap();
        let (er, _) = explicit.restrict(&y).unwrap();
        assert_eq!(er.len() as u64, r.family_size());
    }

    // Candidate enumeration (large n path) must find the same worst ratio as
    // the explicit family.
    #[test]
    fn candidate_path_agrees_with_explicit_scan() {
        let n = INTERVAL_FULL_SCAN + 37;
        let iv = IntervalSpace::new(n).unwrap();
        for (seed, t, mode) in [
            (1, 40, ReplacementMode::Without),
            (2, 7, ReplacementMode::Without),
            (3, 60, ReplacementMode::With),
        ] {
            let a = uniform_sample(n, t, seed, mode).unwrap();
            let fast = relative_error(&iv, &a, 0.05).unwrap();
            // brute force over all intervals
            let mut weight = vec![0u64; n];
            for (i, w) in a.weighted() {
                weight[i] = w;
            }
            let mut best = 0.0f64;
            for i in 0..n {
                let mut hits = 0u64;
                for j in i..n {
                    hits += weight[j];
                    let s = (j - i + 1) as f64;
                    let dev = (s * a.t() as f64 - hits as f64 * n as f64).abs();
                    let r = dev / (a.t() as f64 * s.max(0.05 * n as f64));
                    best = best.max(r);
                }
            }
            assert!((fast.worst_ratio - best).abs() <= 1e-12 * best.max(1.0), "{} vs {}", fast.worst_ratio, best);
        }
    }
}
