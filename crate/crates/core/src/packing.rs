//! Greedy maximal α-packings under symmetric-difference distance, and the
//! trace-distinctness property of packings on relative approximations.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{self, Sample};
use crate::set_system::SetSystem;
use crate::subset::Subset;

/// Members pairwise at distance `>= alpha`, plus a nearest member within
/// distance `< alpha` for every set of the family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Packing {
    pub alpha: f64,
    /// Family indices in admission order.
    pub member_indices: Vec<usize>,
    /// For each family index, the family index of its cover.
    pub cover_map: Vec<usize>,
}

impl Packing {
    pub fn len(&self) -> usize {
        self.member_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_indices.is_empty()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.cover_map.get(idx) == Some(&idx)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha = {alpha} must be positive")))
    }
}

/// Scans the family in index order, admitting a set iff it is at distance
/// `>= alpha` from every admitted member.
pub fn greedy_maximal_packing(f: &SetSystem, alpha: f64) -> Result<Packing> {
    greedy_maximal_packing_seeded(f, alpha, &[])
}

/// As [`greedy_maximal_packing`], with `seeds` admitted first. The seeds must
/// already be pairwise `>= alpha` apart.
pub fn greedy_maximal_packing_seeded(f: &SetSystem, alpha: f64, seeds: &[usize]) -> Result<Packing> {
    check_alpha(alpha)?;
    let family = f.family();
    let mut members: Vec<usize> = Vec::new();
    let mut admitted = vec![false; family.len()];
    let far = |a: &Subset, b: &Subset| {
        // |Δ| >= ||a| - |b||, so a size gap alone can settle it
        a.len().abs_diff(b.len()) as f64 >= alpha || a.symmetric_difference_count(b) as f64 >= alpha
    };
    for &s in seeds {
        let set = family
            .get(s)
            .ok_or_else(|| Error::InvalidArgument(format!("seed {s} is not a family index")))?;
        if admitted[s] {
            continue;
        }
        if let Some(&m) = members.iter().find(|&&m| !far(set, &family[m])) {
            return Err(Error::InvalidArgument(format!(
                "seeds {m} and {s} are closer than {alpha}"
            )));
        }
        admitted[s] = true;
        members.push(s);
    }
    for (s, set) in family.iter().enumerate() {
        if !admitted[s] && members.iter().all(|&m| far(set, &family[m])) {
            admitted[s] = true;
            members.push(s);
        }
    }
    let cover_map = cover(f, &members, &admitted);
    Ok(Packing {
        alpha,
        member_indices: members,
        cover_map,
    })
}

/// Nearest member per set, ties to the lowest family index.
fn cover(f: &SetSystem, members: &[usize], admitted: &[bool]) -> Vec<usize> {
    let family = f.family();
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    family
        .iter()
        .enumerate()
        .map(|(s, set)| {
            if admitted[s] {
                return s;
            }
            let mut best = (usize::MAX, usize::MAX);
            for &m in &sorted {
                if set.len().abs_diff(family[m].len()) >= best.0 {
                    continue;
                }
                let d = set.symmetric_difference_count(&family[m]);
                if d < best.0 {
                    best = (d, m);
                }
            }
            best.1
        })
        .collect()
}

/// Checks the packing and maximality certificates from scratch.
pub fn verify_packing(f: &SetSystem, p: &Packing) -> Result<()> {
    let bad = |msg: String| Err(Error::Precondition(msg));
    let family = f.family();
    if p.cover_map.len() != family.len() {
        return bad(format!("cover map has {} entries for {} sets", p.cover_map.len(), family.len()));
    }
    let mut seen = HashSet::new();
    for &m in &p.member_indices {
        if m >= family.len() || !seen.insert(m) {
            return bad(format!("member {m} is out of range or repeated"));
        }
    }
    for (a, &x) in p.member_indices.iter().enumerate() {
        for &y in &p.member_indices[a + 1..] {
            let d = family[x].symmetric_difference_count(&family[y]);
            if (d as f64) < p.alpha {
                return bad(format!("members {x} and {y} are at distance {d} < {}", p.alpha));
            }
        }
    }
    for (s, &c) in p.cover_map.iter().enumerate() {
        if seen.contains(&s) != (c == s) {
            return bad(format!("set {s} maps to {c}, but members must map to themselves"));
        }
        if !seen.contains(&c) {
            return bad(format!("set {s} is covered by non-member {c}"));
        }
        let d = family[s].symmetric_difference_count(&family[c]);
        if d as f64 >= p.alpha {
            return bad(format!("set {s} is at distance {d} from its cover {c}"));
        }
    }
    Ok(())
}

/// `{Δ(P, P') : P ≠ P' in the packing}`, deduplicated.
pub fn delta_system(f: &SetSystem, p: &Packing) -> Result<SetSystem> {
    let family = f.family();
    let mut out = Vec::new();
    for (a, &x) in p.member_indices.iter().enumerate() {
        for &y in &p.member_indices[a + 1..] {
            out.push(family[x].symmetric_difference(&family[y])?);
        }
    }
    SetSystem::from_subsets(f.n(), out)
}

/// Whether packing members have pairwise distinct traces on `a`.
///
/// Requires `a` to be a relative `(α/n, 1/2)`-approximation of the Δ-system
/// (checked; failure is an error).
pub fn packing_trace_property(f: &SetSystem, p: &Packing, a: &Sample) -> Result<bool> {
    let g = delta_system(f, p)?;
    let eps = p.alpha / f.n() as f64;
    if !sampling::relative_within(&g, a, eps, 0.5)? {
        return Err(Error::Precondition(format!(
            "sample is not a relative ({eps}, 1/2)-approximation of the difference family"
        )));
    }
    let mut traces = HashSet::new();
    for &m in &p.member_indices {
        if !traces.insert(f.family()[m].intersection(a.members())?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(c₃·n/α)^{2d}`.
pub fn packing_size_bound(n: usize, alpha: f64, d: u32, c3: f64) -> f64 {
    (c3 * n as f64 / alpha).powi(2 * d as i32)
}
