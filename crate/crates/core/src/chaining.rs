//! Chaining: every set is reached from a coarse packing through a chain of
//! nested packings at scales `εn/2^i`, and a sample that approximates the
//! small per-level difference families approximates the whole family.
//!
//! With `k = ⌈log₂(1/δ)⌉`, `P_0 ⊆ … ⊆ P_k` are maximal `(εn/2^i)`-packings
//! and `P_{k+1} = F`. A set `S` first appearing in `P_{i+1}` has parent
//! `F_S ∈ P_i` at distance `< εn/2^i`; `A_i` and `B_i` collect `S \ F_S` and
//! `F_S \ S` over those sets.

use std::io::Write;

use serde::Serialize;

use crate::bound;
use crate::error::{Error, Result};
use crate::packing::{greedy_maximal_packing, greedy_maximal_packing_seeded, verify_packing, Packing};
use crate::sampling::{self, Sample};
use crate::set_system::SetSystem;
use crate::subset::Subset;

/// Relative slack for bounds assembled in floating point.
const AUDIT_SLACK: f64 = 1e-12;

/// `⌈log₂(1/δ)⌉`: the least `k` with `2^k·δ >= 1`.
pub fn chain_depth(delta: f64) -> usize {
    let mut k = 0;
    let mut x = delta;
    while x < 1.0 {
        x *= 2.0;
        k += 1;
    }
    k
}

/// `ε_i = sqrt((i+1)/2^i)·ε`.
pub fn level_eps(eps: f64, i: usize) -> f64 {
    ((i + 1) as f64 / 2f64.powi(i as i32)).sqrt() * eps
}

pub struct ChainDecomposition<'a> {
    family: &'a SetSystem,
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    /// `P_0 … P_k`.
    pub packings: Vec<Packing>,
    /// Least `i` with `S ∈ P_i`, or `k + 1`.
    first_level: Vec<usize>,
    /// `F_S` for every set outside `P_0`.
    parent: Vec<Option<usize>>,
    /// `A_i` for `i ∈ [0, k]`.
    pub a_families: Vec<SetSystem>,
    /// `B_i` for `i ∈ [0, k]`.
    pub b_families: Vec<SetSystem>,
    /// `A_i ∪ B_i` for `i ∈ [0, k]`.
    pub level_unions: Vec<SetSystem>,
    pub p0: SetSystem,
    /// `ε_i` for `i ∈ [0, k-1]`.
    pub level_eps: Vec<f64>,
}

/// One set's path through the hierarchy.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainRecord {
    /// `S_0, …, S_{k+1}` with `S_{k+1} = S`.
    pub sets: Vec<Subset>,
    /// `A_i = S_{i+1} \ S_i` for `i ∈ [0, k]`.
    pub a_parts: Vec<Subset>,
    /// `B_i = S_i \ S_{i+1}` for `i ∈ [0, k]`.
    pub b_parts: Vec<Subset>,
}

impl ChainRecord {
    /// Replays `S_{i+1} = (S_i \ B_i) ∪ A_i` from `S_0`.
    pub fn reconstruct(&self) -> Result<Subset> {
        let mut cur = self.sets[0].clone();
        for (a, b) in self.a_parts.iter().zip(&self.b_parts) {
            cur = cur.difference(b)?.union(a)?;
        }
        Ok(cur)
    }
}

/// Builds the hierarchy with nested greedy packings.
pub fn build_chain(f: &SetSystem, eps: f64, delta: f64) -> Result<ChainDecomposition<'_>> {
    for (name, v) in [("eps", eps), ("delta", delta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::ParameterRange { name, value: v });
        }
    }
    let n = f.n();
    let k = chain_depth(delta);
    let alpha = |i: usize| eps * n as f64 / 2f64.powi(i as i32);

    let mut packings = vec![greedy_maximal_packing(f, alpha(0))?];
    for i in 1..=k {
        let seeds = packings[i - 1].member_indices.clone();
        packings.push(greedy_maximal_packing_seeded(f, alpha(i), &seeds)?);
    }

    let mut first_level = vec![k + 1; f.len()];
    for (i, p) in packings.iter().enumerate().rev() {
        for &m in &p.member_indices {
            first_level[m] = i;
        }
    }
    let parent: Vec<Option<usize>> = first_level
        .iter()
        .enumerate()
        .map(|(s, &lvl)| (lvl > 0).then(|| packings[lvl - 1].cover_map[s]))
        .collect();

    let family = f.family();
    let mut a_sets = vec![Vec::new(); k + 1];
    let mut b_sets = vec![Vec::new(); k + 1];
    for (s, p) in parent.iter().enumerate() {
        if let Some(p) = *p {
            let i = first_level[s] - 1;
            a_sets[i].push(family[s].difference(&family[p])?);
            b_sets[i].push(family[p].difference(&family[s])?);
        }
    }
    let mut a_families = Vec::with_capacity(k + 1);
    let mut b_families = Vec::with_capacity(k + 1);
    let mut level_unions = Vec::with_capacity(k + 1);
    for (a, b) in a_sets.into_iter().zip(b_sets) {
        level_unions.push(SetSystem::from_subsets(n, a.iter().chain(&b).cloned())?);
        a_families.push(SetSystem::from_subsets(n, a)?);
        b_families.push(SetSystem::from_subsets(n, b)?);
    }
    let p0 = SetSystem::from_subsets(n, packings[0].member_indices.iter().map(|&m| family[m].clone()))?;

    Ok(ChainDecomposition {
        family: f,
        k,
        eps,
        delta,
        packings,
        first_level,
        parent,
        a_families,
        b_families,
        level_unions,
        p0,
        level_eps: (0..k).map(|i| level_eps(eps, i)).collect(),
    })
}

impl ChainDecomposition<'_> {
    pub fn family(&self) -> &SetSystem {
        self.family
    }

    /// `εn/2^i`.
    pub fn alpha(&self, i: usize) -> f64 {
        self.eps * self.family.n() as f64 / 2f64.powi(i as i32)
    }

    /// Least `i` with `S ∈ P_i`, or `k + 1` when `S` is in no packing.
    pub fn first_level(&self, idx: usize) -> usize {
        self.first_level[idx]
    }

    /// `F_S`, for sets outside `P_0`.
    pub fn parent(&self, idx: usize) -> Option<usize> {
        self.parent[idx]
    }

    /// `|P_{i+1}|`, with `P_{k+1} = F`.
    fn next_packing_size(&self, i: usize) -> usize {
        self.packings.get(i + 1).map_or(self.family.len(), Packing::len)
    }

    /// Re-checks every structural invariant of the hierarchy.
    pub fn verify(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Precondition(msg));
        let family = self.family.family();
        for (i, p) in self.packings.iter().enumerate() {
            verify_packing(self.family, p)?;
            if p.alpha != self.alpha(i) {
                return bad(format!("packing {i} has alpha {} instead of {}", p.alpha, self.alpha(i)));
            }
            if i > 0 && !self.packings[i - 1].member_indices.iter().all(|&m| p.contains(m)) {
                return bad(format!("packing {} is not contained in packing {i}", i - 1));
            }
        }
        for (s, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                let i = self.first_level[s] - 1;
                if !self.packings[i].contains(p) {
                    return bad(format!("parent {p} of set {s} is not in packing {i}"));
                }
                let d = family[s].symmetric_difference_count(&family[p]);
                if d as f64 >= self.alpha(i) {
                    return bad(format!("set {s} is at distance {d} from its parent at level {i}"));
                }
            }
        }
        for i in 0..=self.k {
            let alpha = self.alpha(i);
            if let Some(s) = self.level_unions[i].family().iter().find(|s| s.len() as f64 >= alpha) {
                return bad(format!("level {i} has a difference set of size {} >= {alpha}", s.len()));
            }
            let cap = self.next_packing_size(i);
            if self.a_families[i].len() > cap || self.b_families[i].len() > cap {
                return bad(format!("level {i} difference families exceed |P_{}| = {cap}", i + 1));
            }
        }
        Ok(())
    }

    /// The chain of a member of the family.
    pub fn decompose(&self, s: &Subset) -> Result<ChainRecord> {
        let idx = self.family.index_of(s).ok_or(Error::NotAMember)?;
        Ok(self.decompose_index(idx))
    }

    pub fn decompose_index(&self, idx: usize) -> ChainRecord {
        let family = self.family.family();
        let n = self.family.n();
        let k = self.k;
        let mut sets = vec![Subset::empty(n); k + 2];
        let mut a_parts = vec![Subset::empty(n); k + 1];
        let mut b_parts = vec![Subset::empty(n); k + 1];
        let mut cur = idx;
        sets[k + 1] = family[cur].clone();
        for i in (0..=k).rev() {
            if self.first_level[cur] > i {
                let p = self.parent[cur].expect("sets outside P_0 have parents");
                a_parts[i] = family[cur].difference(&family[p]).expect("same ground set");
                b_parts[i] = family[p].difference(&family[cur]).expect("same ground set");
                cur = p;
            }
            sets[i] = family[cur].clone();
        }
        ChainRecord { sets, a_parts, b_parts }
    }

    /// Exact check of the three conditions that drive the error chain.
    pub fn claim7_check(&self, a: &Sample) -> Result<Claim7Report> {
        let check = |sys: &SetSystem, eps: f64, level: Option<usize>| -> Result<LevelCheck> {
            let r = sampling::relative_error(sys, a, eps)?;
            Ok(LevelCheck {
                level,
                eps,
                sets: sys.len(),
                worst_ratio: r.worst_ratio,
                passes: r.passes(self.delta),
            })
        };
        let top = check(&self.level_unions[self.k], self.eps, Some(self.k))?;
        let levels = (0..self.k)
            .map(|i| check(&self.level_unions[i], self.level_eps[i], Some(i)))
            .collect::<Result<Vec<_>>>()?;
        let p0 = check(&self.p0, self.eps, None)?;
        Ok(Claim7Report { delta: self.delta, top, levels, p0 })
    }

    /// Recomputes the error chain for one set and checks each inequality.
    pub fn telescoping_error_audit(&self, a: &Sample, s: &Subset) -> Result<AuditLedger> {
        let idx = self.family.index_of(s).ok_or(Error::NotAMember)?;
        Ok(self.audit_index(a, idx))
    }

    pub fn audit_index(&self, a: &Sample, idx: usize) -> AuditLedger {
        let rec = self.decompose_index(idx);
        let n = self.family.n() as u64;
        let t = a.t();
        let (eps, delta) = (self.eps, self.delta);
        let sdev = |x: &Subset| x.len() as i128 * t as i128 - a.hits(x) as i128 * n as i128;
        let scale = (n as f64) * (t as f64);
        let err = |d: i128| d.unsigned_abs() as f64 / scale;

        let mut steps = Vec::with_capacity(self.k + 1);
        for i in 0..=self.k {
            let (before, after) = (sdev(&rec.sets[i]), sdev(&rec.sets[i + 1]));
            let (da, db) = (sdev(&rec.a_parts[i]), sdev(&rec.b_parts[i]));
            let eps_i = if i < self.k { self.level_eps[i] } else { eps };
            let within = |d: i128| bound::relative_within(d.unsigned_abs(), t as u128, 0, n as u128, eps_i, delta);
            steps.push(AuditStep {
                level: i,
                err_before: err(before),
                err_a: err(da),
                err_b: err(db),
                err_after: err(after),
                step_ok: after.unsigned_abs() <= before.unsigned_abs() + da.unsigned_abs() + db.unsigned_abs(),
                part_bound: delta * eps_i,
                parts_ok: within(da) && within(db),
            });
        }

        let s = &rec.sets[self.k + 1];
        let s0 = &rec.sets[0];
        let dev_s0 = sdev(s0).unsigned_abs();
        let dev_s = sdev(s).unsigned_abs();
        let s0_bound = delta * eps.max(s0.len() as f64 / n as f64);
        let level_eps_sum: f64 = self.level_eps.iter().sum();
        let intermediate_bound = s0_bound + 2.0 * delta * level_eps_sum + 2.0 * delta * eps;
        let final_bound = 2.0 * delta * (s.len() as f64 / n as f64).max(16.0 * eps);
        let size_ok = s0.len() <= s.len()
            || bound::at_most_fraction((s0.len() - s.len()) as u128, n as u128, 2.0 * eps);

        AuditLedger {
            set_index: idx,
            steps,
            err_s: err(dev_s as i128),
            err_s0: err(dev_s0 as i128),
            s0_bound,
            s0_ok: bound::relative_within(dev_s0, t as u128, s0.len() as u128, n as u128, eps, delta),
            level_eps_sum,
            level_eps_sum_ok: level_eps_sum <= 6.0 * eps * (1.0 + AUDIT_SLACK),
            s_size: s.len(),
            s0_size: s0.len(),
            size_ok,
            intermediate_bound,
            intermediate_ok: err(dev_s as i128) <= intermediate_bound * (1.0 + AUDIT_SLACK),
            final_bound,
            final_ok: bound::relative_within(dev_s, t as u128, s.len() as u128, n as u128, 16.0 * eps, 2.0 * delta),
        }
    }

    /// Audits every set of the family; returns the failing ledgers.
    pub fn audit_all(&self, a: &Sample) -> AuditSummary {
        let failures: Vec<AuditLedger> = (0..self.family.len())
            .map(|idx| self.audit_index(a, idx))
            .filter(|l| !l.passes())
            .collect();
        AuditSummary {
            sets_checked: self.family.len(),
            failures,
        }
    }

    pub fn summary(&self) -> ChainSummary {
        let levels = (0..=self.k)
            .map(|i| LevelSummary {
                level: i,
                alpha: self.alpha(i),
                packing_size: self.packings[i].len(),
                new_sets: self.first_level.iter().filter(|&&l| l == i + 1).count(),
                a_size: self.a_families[i].len(),
                b_size: self.b_families[i].len(),
                union_size: self.level_unions[i].len(),
                max_member_size: self.level_unions[i].family().iter().map(Subset::len).max().unwrap_or(0),
                level_eps: if i < self.k { self.level_eps[i] } else { self.eps },
            })
            .collect();
        ChainSummary {
            n: self.family.n(),
            family_size: self.family.len(),
            eps: self.eps,
            delta: self.delta,
            k: self.k,
            levels,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelCheck {
    /// `None` for the `P_0` condition.
    pub level: Option<usize>,
    pub eps: f64,
    pub sets: usize,
    pub worst_ratio: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Claim7Report {
    pub delta: f64,
    /// Relative `(ε, δ)` for `A_k ∪ B_k`.
    pub top: LevelCheck,
    /// Relative `(ε_i, δ)` for `A_i ∪ B_i`, `i < k`.
    pub levels: Vec<LevelCheck>,
    /// Relative `(ε, δ)` for `P_0`.
    pub p0: LevelCheck,
}

impl Claim7Report {
    pub fn passes(&self) -> bool {
        self.top.passes && self.p0.passes && self.levels.iter().all(|l| l.passes)
    }

    /// First failing condition, in the order top level, lower levels, `P_0`.
    pub fn first_failure(&self) -> Option<&LevelCheck> {
        std::iter::once(&self.top)
            .chain(&self.levels)
            .chain(std::iter::once(&self.p0))
            .find(|l| !l.passes)
    }
}

/// One step `S_i → S_{i+1}` of the error chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditStep {
    pub level: usize,
    pub err_before: f64,
    pub err_a: f64,
    pub err_b: f64,
    pub err_after: f64,
    /// `err(S_{i+1}) <= err(S_i) + err(A_i) + err(B_i)`, exact.
    pub step_ok: bool,
    /// `δ·ε_i` (`δ·ε` at the top level).
    pub part_bound: f64,
    pub parts_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditLedger {
    pub set_index: usize,
    pub steps: Vec<AuditStep>,
    pub err_s: f64,
    pub err_s0: f64,
    /// `δ·max{ε, |S_0|/n}`.
    pub s0_bound: f64,
    pub s0_ok: bool,
    /// `Σ_{j<k} ε_j`, which must stay within `6ε`.
    pub level_eps_sum: f64,
    pub level_eps_sum_ok: bool,
    pub s_size: usize,
    pub s0_size: usize,
    /// `|S_0| <= |S| + 2εn`.
    pub size_ok: bool,
    /// `δ·max{ε, |S_0|/n} + 2δ·Σε_j + 2δε`.
    pub intermediate_bound: f64,
    pub intermediate_ok: bool,
    /// `2δ·max{|S|/n, 16ε}`.
    pub final_bound: f64,
    pub final_ok: bool,
}

impl AuditLedger {
    pub fn passes(&self) -> bool {
        self.steps.iter().all(|s| s.step_ok && s.parts_ok)
            && self.s0_ok
            && self.level_eps_sum_ok
            && self.size_ok
            && self.intermediate_ok
            && self.final_ok
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditSummary {
    pub sets_checked: usize,
    pub failures: Vec<AuditLedger>,
}

impl AuditSummary {
    pub fn passes(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Outcome of [`rescale_and_verify`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RescaleOutcome {
    pub claim7_passed: bool,
    /// `None` when the chain conditions failed and no audit was run.
    pub audit_passed: Option<bool>,
    /// Whether `A` is a relative `(ε, δ)`-approximation of `F`.
    pub verified: bool,
}

/// Runs the chain at `(ε/16, δ/2)`, whose audited bound `2δ'·max{|S|/n, 16ε'}`
/// is exactly `δ·max{|S|/n, ε}`, then verifies `A` at `(ε, δ)` directly.
pub fn rescale_and_verify(f: &SetSystem, a: &Sample, eps: f64, delta: f64) -> Result<RescaleOutcome> {
    let chain = build_chain(f, eps / 16.0, delta / 2.0)?;
    let claim7_passed = chain.claim7_check(a)?.passes();
    let audit_passed = claim7_passed.then(|| chain.audit_all(a).passes());
    Ok(RescaleOutcome {
        claim7_passed,
        audit_passed,
        verified: sampling::relative_within(f, a, eps, delta)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: usize,
    pub alpha: f64,
    pub packing_size: usize,
    /// `|P_{i+1} \ P_i|`.
    pub new_sets: usize,
    pub a_size: usize,
    pub b_size: usize,
    pub union_size: usize,
    pub max_member_size: usize,
    pub level_eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainSummary {
    pub n: usize,
    pub family_size: usize,
    pub eps: f64,
    pub delta: f64,
    pub k: usize,
    pub levels: Vec<LevelSummary>,
}

impl ChainSummary {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for l in &self.levels {
            out.serialize(l)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::sampling::{uniform_sample, ReplacementMode};
    use proptest::prelude::*;

    #[test]
    fn depth_examples() {
        assert_eq!(chain_depth(0.5), 1);
        assert_eq!(chain_depth(0.25), 2);
        assert_eq!(chain_depth(0.3), 2);
        assert_eq!(chain_depth(0.99), 1);
        assert_eq!(chain_depth(0.01), 7);
    }

    #[test]
    fn level_eps_examples() {
        assert_eq!(level_eps(0.2, 0), 0.2);
        assert_eq!(level_eps(0.2, 1), 0.2);
        assert!((level_eps(0.2, 3) - 0.2 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn level_eps_sum_stays_below_six() {
        let total: f64 = (0..200).map(|i| level_eps(1.0, i)).sum();
        assert!(total <= 6.0, "{total}");
        assert!(total > 5.5);
    }

    #[test]
    fn power_set_coarse_packing() {
        let f = generators::power_set(3).unwrap();
        let chain = build_chain(&f, 0.9, 0.5).unwrap();
        assert_eq!(chain.k, 1);
        let p0: Vec<Vec<usize>> = chain.p0.family().iter().map(Subset::to_vec).collect();
        assert_eq!(p0, vec![vec![], vec![0, 1, 2]]);
        chain.verify().unwrap();
    }

    #[test]
    fn p0_members_have_trivial_chains() {
        let f = generators::intervals(30).unwrap();
        let chain = build_chain(&f, 0.2, 0.3).unwrap();
        for &m in &chain.packings[0].member_indices {
            let rec = chain.decompose_index(m);
            assert!(rec.sets.iter().all(|s| s == &f.family()[m]));
            assert!(rec.a_parts.iter().chain(&rec.b_parts).all(Subset::is_empty));
        }
    }

    #[test]
    fn every_set_has_one_first_level() {
        let f = generators::random_system(20, 150, 0.4, 3).unwrap();
        let chain = build_chain(&f, 0.25, 0.2).unwrap();
        let mut counts = vec![0usize; chain.k + 2];
        for s in 0..f.len() {
            counts[chain.first_level(s)] += 1;
        }
        assert_eq!(counts[0], chain.packings[0].len());
        for i in 1..=chain.k {
            assert_eq!(counts[i], chain.packings[i].len() - chain.packings[i - 1].len());
        }
        assert_eq!(counts.iter().sum::<usize>(), f.len());
    }

    #[test]
    fn non_member_is_rejected() {
        let f = generators::intervals(6).unwrap();
        let chain = build_chain(&f, 0.3, 0.5).unwrap();
        let s = Subset::from_indices(6, [0, 2]).unwrap();
        assert!(matches!(chain.decompose(&s), Err(Error::NotAMember)));
    }

    #[test]
    fn full_sample_passes_everything() {
        let f = generators::intervals(40).unwrap();
        let chain = build_chain(&f, 0.1, 0.25).unwrap();
        let a = Sample::full(40);
        let report = chain.claim7_check(&a).unwrap();
        assert!(report.passes());
        assert!(chain.audit_all(&a).passes());
        let out = rescale_and_verify(&f, &a, 0.3, 0.5).unwrap();
        assert!(out.verified && out.claim7_passed && out.audit_passed == Some(true));
    }

    #[test]
    fn tiny_sample_fails_a_condition() {
        let f = generators::intervals(60).unwrap();
        let chain = build_chain(&f, 0.1, 0.25).unwrap();
        let a = Sample::from_subset(Subset::from_indices(60, [3, 41]).unwrap());
        let report = chain.claim7_check(&a).unwrap();
        assert!(!report.passes());
        assert!(report.first_failure().is_some());
    }

    #[test]
    fn top_level_sizes_respect_delta() {
        let f = generators::intervals(80).unwrap();
        for delta in [0.2, 0.25, 0.5, 0.7] {
            let chain = build_chain(&f, 0.15, delta).unwrap();
            let top = chain.alpha(chain.k);
            assert!(top <= 0.15 * 80.0 * delta);
            assert!(chain.level_unions[chain.k].family().iter().all(|s| (s.len() as f64) < top));
        }
    }

    #[test]
    fn summary_csv_has_one_row_per_level() {
        let f = generators::intervals(25).unwrap();
        let chain = build_chain(&f, 0.2, 0.25).unwrap();
        let mut buf = Vec::new();
        chain.summary().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), chain.k + 2);
        assert!(text.starts_with("level,alpha,packing_size"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn reconstruction_is_exact(n in 4usize..30, m in 1usize..120, seed: u64,
                                   eps in 0.05f64..0.6, delta in 0.05f64..0.9) {
            let f = generators::random_system(n, m, 0.5, seed).unwrap();
            let chain = build_chain(&f, eps, delta).unwrap();
            prop_assert!(chain.verify().is_ok());
            for (idx, s) in f.family().iter().enumerate() {
                let rec = chain.decompose(s).unwrap();
                prop_assert_eq!(&rec.reconstruct().unwrap(), s);
                let ledger = chain.audit_index(&Sample::full(n), idx);
                prop_assert!(ledger.size_ok);
            }
        }

        // Whenever the chain conditions hold, every set's audit holds.
        #[test]
        fn chain_conditions_imply_audit(n in 10usize..40, t in 1usize..40, seed: u64, with: bool) {
            let f = generators::intervals(n).unwrap();
            let chain = build_chain(&f, 0.2, 0.3).unwrap();
            let mode = if with { ReplacementMode::With } else { ReplacementMode::Without };
            let a = uniform_sample(n, if with { t } else { t.min(n) }, seed, mode).unwrap();
            if chain.claim7_check(&a).unwrap().passes() {
                prop_assert!(chain.audit_all(&a).passes());
            }
        }
    }
}
