//! Exact comparisons between integer counts and float-parameterised bounds.
//!
//! Every `f64` is a dyadic rational, so the inequalities in the verifiers can
//! be decided exactly. A float fast path settles all but near-ties, which
//! fall back to big rationals.

use num::{BigInt, BigRational, Zero};

const SLACK: f64 = 1e-9;

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite parameter")
}

fn int(x: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// `dev <= delta * t * max(s, eps * n)`, i.e. `||S|/n - c/t| <= delta * max(|S|/n, eps)`
/// with `dev = |s*t - c*n|`.
pub fn relative_within(dev: u128, t: u128, s: u128, n: u128, eps: f64, delta: f64) -> bool {
    let lhs = dev as f64;
    let rhs = delta * t as f64 * (s as f64).max(eps * n as f64);
    if lhs <= rhs * (1.0 - SLACK) {
        return true;
    }
    if lhs >= rhs * (1.0 + SLACK) {
        return false;
    }
    let scaled_eps = rat(eps) * int(n);
    let s = int(s);
    let m = if s > scaled_eps { s } else { scaled_eps };
    int(dev) <= rat(delta) * int(t) * m
}

/// `dev <= eps * n * t`, i.e. `||S|/n - c/t| <= eps`.
pub fn additive_within(dev: u128, t: u128, n: u128, eps: f64) -> bool {
    let lhs = dev as f64;
    let rhs = eps * n as f64 * t as f64;
    if lhs <= rhs * (1.0 - SLACK) {
        return true;
    }
    if lhs >= rhs * (1.0 + SLACK) {
        return false;
    }
    int(dev) <= rat(eps) * int(n) * int(t)
}

/// `s >= eps * n`.
pub fn at_least_fraction(s: u128, n: u128, eps: f64) -> bool {
    let lhs = s as f64;
    let rhs = eps * n as f64;
    if lhs >= rhs * (1.0 + SLACK) {
        return true;
    }
    if lhs <= rhs * (1.0 - SLACK) && rhs > 0.0 {
        return false;
    }
    let r = rat(eps) * int(n);
    int(s) >= r || r.is_zero()
}

/// `s <= eps * n`.
pub fn at_most_fraction(s: u128, n: u128, eps: f64) -> bool {
    let lhs = s as f64;
    let rhs = eps * n as f64;
    if lhs <= rhs * (1.0 - SLACK) {
        return true;
    }
    if lhs >= rhs * (1.0 + SLACK) && rhs > 0.0 {
        return false;
    }
    int(s) <= rat(eps) * int(n)
}

/// `|s*t - c*n|`, the deviation `||S|/n - c/t|` scaled by `n*t`.
#[inline]
pub fn scaled_deviation(s: u64, c: u64, n: u64, t: u64) -> u128 {
    let a = s as u128 * t as u128;
    let b = c as u128 * n as u128;
    a.abs_diff(b)
}
