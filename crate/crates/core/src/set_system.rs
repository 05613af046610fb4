//! Finite set systems `(X, F)` with `X = {0, .., n-1}` and the combinatorial
//! primitives built on them: traces, shattering, VC dimension and the
//! Sauer–Shelah growth bound.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::Subset;

/// Largest subset `is_shattered` will examine unless told otherwise.
pub const DEFAULT_SHATTER_GUARD: usize = 30;
/// Default cap on the VC-dimension search.
pub const DEFAULT_MAX_VC: usize = 10;

/// A ground set of `n` elements and a deduplicated family of subsets, kept
/// in first-occurrence order.
#[derive(Clone, Debug)]
pub struct SetSystem {
    n: usize,
    family: Vec<Subset>,
    lookup: HashMap<Subset, usize>,
}

impl PartialEq for SetSystem {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.family == other.family
    }
}

/// Dense re-indexing of a subset `Y` of an original ground set onto `0..|Y|`,
/// ascending in original index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reindex {
    original: Vec<usize>,
    original_n: usize,
}

impl Reindex {
    pub fn new(y: &Subset) -> Self {
        Self {
            original: y.to_vec(),
            original_n: y.universe(),
        }
    }

    /// Number of re-indexed elements, `|Y|`.
    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    pub fn original_n(&self) -> usize {
        self.original_n
    }

    /// New index of an original element, if it lies in `Y`.
    pub fn forward(&self, original: usize) -> Option<usize> {
        self.original.binary_search(&original).ok()
    }

    /// Original index of a re-indexed element.
    pub fn backward(&self, new: usize) -> usize {
        self.original[new]
    }

    /// Maps a subset of the original ground set into the re-indexed one.
    /// Errors if it is not contained in `Y`.
    pub fn map_forward(&self, s: &Subset) -> Result<Subset> {
        let mut out = Subset::empty(self.len());
        for i in s {
            let j = self.forward(i).ok_or(Error::NotContained)?;
            out.insert(j);
        }
        Ok(out)
    }

    /// Maps a subset of the re-indexed ground set back to original indices.
    pub fn map_backward(&self, s: &Subset) -> Subset {
        let mut out = Subset::empty(self.original_n);
        for j in s {
            out.insert(self.original[j]);
        }
        out
    }
}

impl SetSystem {
    /// Builds a set system from index lists. Duplicate indices inside a set and
    /// duplicate sets collapse; family order is first-occurrence order.
    pub fn new<I, S>(n: usize, sets: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[usize]>,
    {
        if n == 0 {
            return Err(Error::EmptyGroundSet);
        }
        let mut subsets = Vec::new();
        for (k, set) in sets.into_iter().enumerate() {
            let mut sub = Subset::empty(n);
            for &i in set.as_ref() {
                if i >= n {
                    return Err(Error::IndexOutOfRange { set: k, index: i, n });
                }
                sub.insert(i);
            }
            subsets.push(sub);
        }
        Self::from_subsets(n, subsets)
    }

    pub fn from_subsets<I>(n: usize, sets: I) -> Result<Self>
    where
        I: IntoIterator<Item = Subset>,
    {
        if n == 0 {
            return Err(Error::EmptyGroundSet);
        }
        let mut family = Vec::new();
        let mut lookup = HashMap::new();
        for s in sets {
            if s.universe() != n {
                return Err(Error::GroundSetMismatch {
                    left: n,
                    right: s.universe(),
                });
            }
            if !lookup.contains_key(&s) {
                lookup.insert(s.clone(), family.len());
                family.push(s);
            }
        }
        Ok(Self { n, family, lookup })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn family(&self) -> &[Subset] {
        &self.family
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.family.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    pub fn get(&self, idx: usize) -> Option<&Subset> {
        self.family.get(idx)
    }

    /// Family index of `s`, if it is a member.
    pub fn index_of(&self, s: &Subset) -> Option<usize> {
        self.lookup.get(s).copied()
    }

    /// The trace `F|_Y = {Y ∩ S : S ∈ F}` re-indexed onto `0..|Y|`.
    pub fn restrict(&self, y: &Subset) -> Result<(SetSystem, Reindex)> {
        if y.universe() != self.n {
            return Err(Error::GroundSetMismatch {
                left: self.n,
                right: y.universe(),
            });
        }
        let map = Reindex::new(y);
        let traced = self.family.iter().map(|s| {
            let mut t = Subset::empty(map.len());
            for (j, &i) in map.original.iter().enumerate() {
                if s.contains(i) {
                    t.insert(j);
                }
            }
            t
        });
        let sys = SetSystem::from_subsets(map.len(), traced.collect::<Vec<_>>())?;
        Ok((sys, map))
    }

    /// `|F|_Y|`, computed without re-indexing.
    pub fn trace_count(&self, y: &Subset) -> usize {
        let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(self.family.len());
        for s in &self.family {
            let key: Vec<u64> = s.words().iter().zip(y.words()).map(|(a, b)| a & b).collect();
            seen.insert(key);
        }
        seen.len()
    }

    /// Distinct trace patterns on a small subset, packed into integers.
    fn small_trace_count(&self, y: &[usize], stop_at: usize) -> usize {
        let mut seen = HashSet::new();
        for s in &self.family {
            let mut key = 0u64;
            for (bit, &i) in y.iter().enumerate() {
                if s.contains(i) {
                    key |= 1 << bit;
                }
            }
            seen.insert(key);
            if seen.len() >= stop_at {
                break;
            }
        }
        seen.len()
    }

    /// Whether `F|_Y = 2^Y`. Refuses subsets larger than `guard` (at most 63).
    pub fn is_shattered_with_guard(&self, y: &Subset, guard: usize) -> Result<bool> {
        if y.universe() != self.n {
            return Err(Error::GroundSetMismatch {
                left: self.n,
                right: y.universe(),
            });
        }
        let guard = guard.min(63);
        if y.len() > guard {
            return Err(Error::ShatterGuard {
                size: y.len(),
                guard,
            });
        }
        Ok(self.shatters(&y.to_vec()))
    }

    pub fn is_shattered(&self, y: &Subset) -> Result<bool> {
        self.is_shattered_with_guard(y, DEFAULT_SHATTER_GUARD)
    }

    fn shatters(&self, y: &[usize]) -> bool {
        let need = 1usize << y.len();
        self.family.len() >= need && self.small_trace_count(y, need) == need
    }

    /// Exact VC dimension when it is at most `max_d`.
    ///
    /// Candidates are grown level by level from shattered sets only, since
    /// every subset of a shattered set is shattered.
    pub fn vc_dimension(&self, max_d: usize) -> VcDimension {
        let max_d = max_d.min(62);
        if self.family.is_empty() {
            return VcDimension::EmptyFamily;
        }
        let mut level: Vec<Vec<usize>> = vec![Vec::new()];
        let mut size = 0;
        loop {
            if size == max_d + 1 {
                return VcDimension::AtLeast(size);
            }
            let members: HashSet<&Vec<usize>> = level.iter().collect();
            let mut next = Vec::new();
            for y in &level {
                let start = y.last().map_or(0, |&m| m + 1);
                for x in start..self.n {
                    let mut cand = y.clone();
                    cand.push(x);
                    // every size-`size` subset must already be shattered
                    let all_sub = (0..cand.len()).all(|drop| {
                        let sub: Vec<usize> = cand
                            .iter()
                            .enumerate()
                            .filter(|&(k, _)| k != drop)
                            .map(|(_, &v)| v)
                            .collect();
                        members.contains(&sub)
                    });
                    if all_sub && self.shatters(&cand) {
                        next.push(cand);
                    }
                }
            }
            if next.is_empty() {
                return VcDimension::Exact(size);
            }
            level = next;
            size += 1;
        }
    }

    /// Checks `|F|_Y| <= (e|Y|/d)^d` on `samples` random `Y` with `|Y| >= d`,
    /// plus `Y = X`.
    pub fn growth_bound_check(&self, d: usize, samples: usize, seed: u64) -> Result<GrowthReport> {
        if d == 0 {
            return Err(Error::InvalidArgument("d must be at least 1".into()));
        }
        let mut report = GrowthReport {
            d,
            checks: Vec::new(),
            violations: Vec::new(),
        };
        if self.n < d {
            return Ok(report);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let check = |y: Subset, report: &mut GrowthReport| {
            let traces = self.trace_count(&y);
            let bound = growth_bound(y.len(), d);
            report.checks.push(GrowthCheck {
                size: y.len(),
                traces,
                bound,
            });
            if traces as f64 > bound {
                report.violations.push(GrowthViolation {
                    y: y.to_vec(),
                    traces,
                    bound,
                });
            }
        };
        check(Subset::full(self.n), &mut report);
        for _ in 0..samples {
            let size = rng.random_range(d..=self.n);
            let picked = index::sample(&mut rng, self.n, size);
            let y = Subset::from_indices(self.n, picked.iter())?;
            check(y, &mut report);
        }
        Ok(report)
    }

    pub fn to_file(&self) -> SetSystemFile {
        SetSystemFile {
            n: self.n,
            sets: self.family.iter().map(Subset::to_vec).collect(),
        }
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, &self.to_file())?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_json(std::io::BufWriter::new(f))
    }
}

/// `(e·size/d)^d`.
pub fn growth_bound(size: usize, d: usize) -> f64 {
    (std::f64::consts::E * size as f64 / d as f64).powi(d as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VcDimension {
    Exact(usize),
    /// Search truncated at the cap: the dimension is at least this value.
    AtLeast(usize),
    /// No subset (not even `∅`) is shattered by an empty family.
    EmptyFamily,
}

impl VcDimension {
    pub fn exact(self) -> Option<usize> {
        match self {
            VcDimension::Exact(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthCheck {
    pub size: usize,
    pub traces: usize,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthViolation {
    pub y: Vec<usize>,
    pub traces: usize,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub d: usize,
    pub checks: Vec<GrowthCheck>,
    pub violations: Vec<GrowthViolation>,
}

impl GrowthReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// On-disk set-system format: `{"n": <int>, "sets": [[ascending ints], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetSystemFile {
    pub n: usize,
    pub sets: Vec<Vec<usize>>,
}

/// A set system read from JSON, with a note of whether duplicate sets were dropped.
#[derive(Clone, Debug)]
pub struct LoadedSystem {
    pub system: SetSystem,
    pub deduplicated: bool,
}

impl SetSystemFile {
    pub fn into_system(self) -> Result<LoadedSystem> {
        for (k, set) in self.sets.iter().enumerate() {
            if let Some(pos) = set.windows(2).position(|w| w[0] >= w[1]) {
                return Err(Error::NotAscending {
                    set: k,
                    position: pos + 1,
                });
            }
        }
        let raw = self.sets.len();
        let system = SetSystem::new(self.n, &self.sets)?;
        let deduplicated = system.len() != raw;
        Ok(LoadedSystem {
            system,
            deduplicated,
        })
    }
}

pub fn read_json<R: Read>(r: R) -> Result<LoadedSystem> {
    let file: SetSystemFile = serde_json::from_reader(r)?;
    file.into_system()
}

pub fn load(path: impl AsRef<Path>) -> Result<LoadedSystem> {
    let f = std::fs::File::open(path)?;
    read_json(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use proptest::prelude::*;

    fn sub(n: usize, v: &[usize]) -> Subset {
        Subset::from_indices(n, v.iter().copied()).unwrap()
    }

    #[test]
    fn dedup_on_construction() {
        let f = SetSystem::new(3, [vec![0, 1], vec![1, 0], vec![1, 2]]).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.family()[0].to_vec(), vec![0, 1]);
        assert_eq!(f.family()[1].to_vec(), vec![1, 2]);
    }

    #[test]
    fn empty_set_allowed() {
        let f = SetSystem::new(1, [Vec::<usize>::new()]).unwrap();
        assert_eq!(f.n(), 1);
        assert_eq!(f.len(), 1);
        assert!(f.family()[0].is_empty());
    }

    #[test]
    fn power_set_of_two() {
        let f = SetSystem::new(2, [vec![0], vec![1], vec![0, 1], vec![]]).unwrap();
        assert_eq!(f.len(), 4);
    }

    #[test]
    fn construction_errors_name_the_offender() {
        match SetSystem::new(3, [vec![0], vec![1, 5]]) {
            Err(Error::IndexOutOfRange { set, index, n }) => {
                assert_eq!((set, index, n), (1, 5, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            SetSystem::new(0, Vec::<Vec<usize>>::new()),
            Err(Error::EmptyGroundSet)
        ));
    }

    #[test]
    fn restrict_examples() {
        let f = SetSystem::new(3, [vec![0, 1], vec![1, 2]]).unwrap();
        let (r, map) = f.restrict(&sub(3, &[1])).unwrap();
        assert_eq!(r.n(), 1);
        assert_eq!(r.len(), 1);
        assert_eq!(r.family()[0].to_vec(), vec![0]);
        assert_eq!(map.backward(0), 1);

        let p = generators::power_set(2).unwrap();
        let (r, _) = p.restrict(&sub(2, &[0, 1])).unwrap();
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn interval_trace_on_three_spread_points() {
        // Brute force: traces of intervals on {0, 2, 4} are the contiguous runs
        // of the three points plus the empty set.
        let f = generators::intervals(5).unwrap();
        let y = sub(5, &[0, 2, 4]);
        let mut expected = HashSet::new();
        for s in f.family() {
            expected.insert(y.iter().filter(|&i| s.contains(i)).collect::<Vec<_>>());
        }
        assert_eq!(expected.len(), 7);
        let (r, _) = f.restrict(&y).unwrap();
        assert_eq!(r.len(), 7);
        assert_eq!(f.trace_count(&y), 7);
    }

    #[test]
    fn shatter_examples() {
        let p = generators::power_set(3).unwrap();
        assert!(p.is_shattered(&sub(3, &[0, 1, 2])).unwrap());
        let iv = generators::intervals(4).unwrap();
        assert!(!iv.is_shattered(&sub(4, &[0, 1, 2])).unwrap());
        assert!(iv.is_shattered(&sub(4, &[])).unwrap());
    }

    #[test]
    fn shatter_guard_refuses() {
        let p = generators::intervals(40).unwrap();
        let y = Subset::full(40);
        assert!(matches!(
            p.is_shattered(&y),
            Err(Error::ShatterGuard { size: 40, guard: 30 })
        ));
        assert!(!p.is_shattered_with_guard(&y, 40).unwrap());
    }

    #[test]
    fn vc_examples() {
        assert_eq!(generators::intervals(6).unwrap().vc_dimension(10), VcDimension::Exact(2));
        assert_eq!(generators::power_set(3).unwrap().vc_dimension(10), VcDimension::Exact(3));
        let only_empty = SetSystem::new(4, [Vec::<usize>::new()]).unwrap();
        assert_eq!(only_empty.vc_dimension(10), VcDimension::Exact(0));
        let none = SetSystem::new(4, Vec::<Vec<usize>>::new()).unwrap();
        assert_eq!(none.vc_dimension(10), VcDimension::EmptyFamily);
    }

    #[test]
    fn vc_truncation_is_reported() {
        let p = generators::power_set(5).unwrap();
        assert_eq!(p.vc_dimension(3), VcDimension::AtLeast(4));
        assert_eq!(p.vc_dimension(4), VcDimension::AtLeast(5));
        assert_eq!(p.vc_dimension(5), VcDimension::Exact(5));
    }

    #[test]
    fn growth_examples() {
        let iv = generators::intervals(20).unwrap();
        assert_eq!(iv.len(), 211);
        let rep = iv.growth_bound_check(2, 50, 7).unwrap();
        assert!(rep.passes());
        assert_eq!(rep.checks[0].traces, 211);
        assert!((rep.checks[0].bound - 738.9).abs() < 0.1);

        // 32 > (e*5/1)^1 ≈ 13.6
        let p = generators::power_set(5).unwrap();
        let rep = p.growth_bound_check(1, 0, 1).unwrap();
        assert!(!rep.passes());
        assert_eq!(rep.violations[0].traces, 32);

        // d >= log2 |F| with Y = X always passes
        let r = generators::random_system(12, 40, 0.4, 3).unwrap();
        let d = (r.len() as f64).log2().ceil() as usize;
        assert!(r.growth_bound_check(d, 0, 0).unwrap().passes());
    }

    #[test]
    fn json_round_trip_records_dedup() {
        let text = r#"{"n": 4, "sets": [[0, 1], [2], [0, 1], []]}"#;
        let loaded = read_json(text.as_bytes()).unwrap();
        assert!(loaded.deduplicated);
        assert_eq!(loaded.system.len(), 3);
        let mut buf = Vec::new();
        loaded.system.write_json(&mut buf).unwrap();
        let again = read_json(buf.as_slice()).unwrap();
        assert!(!again.deduplicated);
        assert_eq!(again.system, loaded.system);
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            r#"{"n":4,"sets":[[0,1],[2],[]]}"#
        );
    }

    #[test]
    fn json_rejects_unsorted_sets() {
        let text = r#"{"n": 4, "sets": [[1, 0]]}"#;
        assert!(matches!(read_json(text.as_bytes()), Err(Error::NotAscending { set: 0, position: 1 })));
        let text = r#"{"n": 4, "sets": [[1, 1]]}"#;
        assert!(read_json(text.as_bytes()).is_err());
    }

    fn brute_vc(f: &SetSystem) -> usize {
        let n = f.n();
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let y: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if y.len() > best && f.shatters(&y) {
                best = y.len();
            }
        }
        best
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn vc_matches_exhaustive(n in 2usize..=10, m in 1usize..40, p in 0.1f64..0.9, seed: u64) {
            let f = generators::random_system(n, m, p, seed).unwrap();
            let d = f.vc_dimension(DEFAULT_MAX_VC).exact().unwrap();
            prop_assert_eq!(d, brute_vc(&f));
            // a witness of size d exists, none of size d+1
            if d < n {
                for mask in 0u32..(1 << n) {
                    if mask.count_ones() as usize == d + 1 {
                        let y: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                        prop_assert!(!f.shatters(&y));
                    }
                }
            }
        }

        #[test]
        fn trace_composition(n in 2usize..=12, m in 1usize..30, seed: u64, ybits: u16, zbits: u16) {
            let f = generators::random_system(n, m, 0.5, seed).unwrap();
            let y = Subset::from_indices(n, (0..n).filter(|i| ybits >> i & 1 == 1)).unwrap();
            prop_assume!(!y.is_empty());
            let (fy, map) = f.restrict(&y).unwrap();
            let z = Subset::from_indices(y.len(), (0..y.len()).filter(|i| zbits >> i & 1 == 1)).unwrap();
            prop_assume!(!z.is_empty());
            let (fyz, _) = fy.restrict(&z).unwrap();
            let pre = map.map_backward(&z);
            let (fz, _) = f.restrict(&pre).unwrap();
            prop_assert_eq!(fyz.len(), fz.len());
            prop_assert_eq!(fz.len(), f.trace_count(&pre));
        }
    }
}
