//! Range spaces of known VC dimension, plus random families.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::Subset;
use crate::SetSystem;

/// Points in the plane. Duplicates are allowed; `has_duplicates` flags them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointSet2D {
    pub points: Vec<(f64, f64)>,
}

impl PointSet2D {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidArgument("point coordinates must be finite".into()));
        }
        Ok(Self { points })
    }

    /// `m` points uniform in the unit square.
    pub fn random(m: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..m).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_duplicates(&self) -> bool {
        let mut seen = HashSet::new();
        self.points
            .iter()
            .any(|&(x, y)| !seen.insert((x.to_bits(), y.to_bits())))
    }
}

/// Position of the interval `[i, j]` in the family produced by [`intervals`]
/// (index 0 is the empty set).
#[inline]
pub fn interval_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    // intervals starting before i: sum over a < i of (n - a)
    let before = i * n - i * i.saturating_sub(1) / 2;
    1 + before + (j - i)
}

/// All intervals `{i, .., j}` on `n` points, plus the empty set. VC dimension 2
/// once `n >= 2`. Order: `∅`, then by start, then by end.
pub fn intervals(n: usize) -> Result<SetSystem> {
    if n == 0 {
        return Err(Error::EmptyGroundSet);
    }
    let mut sets = Vec::with_capacity(n * (n + 1) / 2 + 1);
    sets.push(Subset::empty(n));
    for i in 0..n {
        let mut s = Subset::empty(n);
        for j in i..n {
            s.insert(j);
            sets.push(s.clone());
        }
    }
    SetSystem::from_subsets(n, sets)
}

/// Every subset of `0..n`. Limited to `n <= 20`.
pub fn power_set(n: usize) -> Result<SetSystem> {
    if n == 0 {
        return Err(Error::EmptyGroundSet);
    }
    if n > 20 {
        return Err(Error::InvalidArgument(format!("power set of {n} elements is too large")));
    }
    let sets = (0u32..1 << n).map(|mask| {
        let mut s = Subset::empty(n);
        for i in 0..n {
            if mask >> i & 1 == 1 {
                s.insert(i);
            }
        }
        s
    });
    SetSystem::from_subsets(n, sets.collect::<Vec<_>>())
}

/// `m` independent Bernoulli(`p`) subsets of `0..n`, deduplicated.
pub fn random_system(n: usize, m: usize, p: f64, seed: u64) -> Result<SetSystem> {
    if n == 0 {
        return Err(Error::EmptyGroundSet);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} is not a probability")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets: Vec<Subset> = (0..m)
        .map(|_| {
            let mut s = Subset::empty(n);
            for i in 0..n {
                if rng.random_bool(p) {
                    s.insert(i);
                }
            }
            s
        })
        .collect();
    SetSystem::from_subsets(n, sets)
}

/// Distinct traces of closed halfplanes `{p : <p, u> >= c}` on the points.
/// VC dimension at most 3.
///
/// The projection order onto `u` only changes at directions orthogonal to
/// some `p - q`; one direction strictly inside each arc between consecutive
/// critical angles sees a strict order, and every halfplane trace is a prefix
/// of one of these orders. Coincident points are never separated.
pub fn halfplanes(pts: &PointSet2D) -> Result<SetSystem> {
    let m = pts.len();
    if m == 0 {
        return Err(Error::EmptyGroundSet);
    }
    let p = &pts.points;
    let mut critical = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let (dx, dy) = (p[b].0 - p[a].0, p[b].1 - p[a].1);
            if dx == 0.0 && dy == 0.0 {
                continue;
            }
            // u orthogonal to (dx, dy), in both orientations
            let theta = (dx).atan2(-dy);
            critical.push(theta.rem_euclid(std::f64::consts::TAU));
            critical.push((theta + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU));
        }
    }
    critical.sort_by(f64::total_cmp);
    critical.dedup();
    let mut directions = Vec::new();
    if critical.is_empty() {
        directions.push(0.0);
    } else {
        for w in critical.windows(2) {
            directions.push(0.5 * (w[0] + w[1]));
        }
        let last = *critical.last().unwrap();
        directions.push(0.5 * (last + critical[0] + std::f64::consts::TAU));
    }

    let mut sets = vec![Subset::empty(m)];
    let mut order: Vec<usize> = (0..m).collect();
    for theta in directions {
        let (ux, uy) = (theta.cos(), theta.sin());
        let proj: Vec<f64> = p.iter().map(|&(x, y)| x * ux + y * uy).collect();
        order.sort_by(|&a, &b| proj[b].total_cmp(&proj[a]));
        let mut s = Subset::empty(m);
        let mut k = 0;
        while k < m {
            // points with identical coordinates enter together
            let first = order[k];
            s.insert(first);
            k += 1;
            while k < m && p[order[k]] == p[first] {
                s.insert(order[k]);
                k += 1;
            }
            sets.push(s.clone());
        }
    }
    SetSystem::from_subsets(m, sets)
}

/// Distinct traces of closed axis-aligned rectangles. VC dimension at most 4.
pub fn axis_rectangles(pts: &PointSet2D) -> Result<SetSystem> {
    let m = pts.len();
    if m == 0 {
        return Err(Error::EmptyGroundSet);
    }
    let p = &pts.points;
    let mut xs: Vec<f64> = p.iter().map(|q| q.0).collect();
    let mut ys: Vec<f64> = p.iter().map(|q| q.1).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();

    let mut by_x: Vec<usize> = (0..m).collect();
    by_x.sort_by(|&a, &b| p[a].0.total_cmp(&p[b].0));

    let mut sets = vec![Subset::empty(m)];
    for (a, &x_lo) in xs.iter().enumerate() {
        for &x_hi in &xs[a..] {
            let strip: Vec<usize> = by_x
                .iter()
                .copied()
                .filter(|&q| p[q].0 >= x_lo && p[q].0 <= x_hi)
                .collect();
            for (c, &y_lo) in ys.iter().enumerate() {
                for &y_hi in &ys[c..] {
                    let mut s = Subset::empty(m);
                    for &q in &strip {
                        if p[q].1 >= y_lo && p[q].1 <= y_hi {
                            s.insert(q);
                        }
                    }
                    sets.push(s);
                }
            }
        }
    }
    SetSystem::from_subsets(m, sets)
}
