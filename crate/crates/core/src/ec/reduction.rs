//! Point counts over prime fields and local L-factors.

use serde::{Deserialize, Serialize};

use super::arith::{is_prime, mod_u64};
use super::curve::WeierstrassCurve;
use super::EcError;

/// Default upper bound on primes accepted by the exhaustive counter.
pub const DEFAULT_PRIME_BOUND: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    Good,
    Multiplicative,
    Additive,
}

impl Reduction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reduction::Good => "good",
            Reduction::Multiplicative => "multiplicative",
            Reduction::Additive => "additive",
        }
    }
}

/// Projective point count of the reduced equation over `F_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointCount {
    pub p: u64,
    /// All projective solutions, including the point at infinity and, for
    /// bad primes, the singular point.
    pub count: u64,
    pub reduction: Reduction,
    /// Non-singular points (equal to `count` at good primes).
    pub smooth_count: u64,
}

impl PointCount {
    /// `p + 1 - #E(F_p)`; at bad primes this equals `p - #E_ns(F_p)`.
    pub fn trace(&self) -> i64 {
        self.p as i64 + 1 - self.count as i64
    }
}

/// Local data at one prime: reduction type and the trace of Frobenius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalFactor {
    pub p: u64,
    pub reduction: Reduction,
    pub ap: i64,
}

impl LocalFactor {
    /// The Euler factor `L_p(s)` at a real argument (its reciprocal enters
    /// the L-series product).
    pub fn euler_factor(&self, s: f64) -> f64 {
        let p = self.p as f64;
        match self.reduction {
            Reduction::Good => 1.0 - self.ap as f64 * p.powf(-s) + p.powf(1.0 - 2.0 * s),
            Reduction::Multiplicative => 1.0 - self.ap as f64 * p.powf(-s),
            Reduction::Additive => 1.0,
        }
    }
}

fn check_prime(p: u64, bound: u64) -> Result<(), EcError> {
    if !is_prime(p) {
        return Err(EcError::NotPrime(p));
    }
    if p > bound {
        return Err(EcError::PrimeBeyondBound { p, bound });
    }
    Ok(())
}

fn reduced_coeffs(curve: &WeierstrassCurve, p: u64) -> [u64; 5] {
    let c = curve.coeffs();
    [mod_u64(c[0], p), mod_u64(c[1], p), mod_u64(c[2], p), mod_u64(c[3], p), mod_u64(c[4], p)]
}

/// Affine solutions of the reduced equation, counted by completing the
/// square against a table of squares (p odd) or by enumeration (p = 2).
fn affine_count(a: [u64; 5], p: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = a;
    if p == 2 {
        let mut n = 0;
        for x in 0..2u64 {
            for y in 0..2u64 {
                let lhs = (y * y + a1 * x * y + a3 * y) % 2;
                let rhs = (x * x * x + a2 * x * x + a4 * x + a6) % 2;
                if lhs == rhs {
                    n += 1;
                }
            }
        }
        return n;
    }
    // number of y with (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    let mut is_square = vec![false; p as usize];
    for y in 0..p {
        is_square[((y * y) % p) as usize] = true;
    }
    let b2 = (a1 * a1 + 4 * a2) % p;
    let b4 = (2 * a4 + a1 * a3) % p;
    let b6 = (a3 * a3 + 4 * a6) % p;
    let mut n = 0;
    for x in 0..p {
        // Horner in u128 to keep products below overflow for p < 2^32.
        let xx = x as u128;
        let pp = p as u128;
        let f = ((((4 * xx + b2 as u128) % pp * xx + 2 * b4 as u128) % pp * xx) + b6 as u128) % pp;
        if f == 0 {
            n += 1;
        } else if is_square[f as usize] {
            n += 2;
        }
    }
    n
}

/// Counts the projective points of the reduction mod `p` and classifies it.
pub fn count_points_mod_p(curve: &WeierstrassCurve, p: u64) -> Result<PointCount, EcError> {
    count_points_mod_p_bounded(curve, p, DEFAULT_PRIME_BOUND)
}

pub fn count_points_mod_p_bounded(curve: &WeierstrassCurve, p: u64, bound: u64) -> Result<PointCount, EcError> {
    check_prime(p, bound)?;
    let a = reduced_coeffs(curve, p);
    let count = affine_count(a, p) + 1;
    let delta_mod_p = mod_u64(&curve.discriminant(), p);
    if delta_mod_p != 0 {
        return Ok(PointCount { p, count, reduction: Reduction::Good, smooth_count: count });
    }
    // A singular cubic has exactly one singular point; the smooth locus is a
    // group of order p - 1 or p + 1 (node) or p (cusp).
    let smooth_count = count - 1;
    let reduction = if smooth_count == p { Reduction::Additive } else { Reduction::Multiplicative };
    Ok(PointCount { p, count, reduction, smooth_count })
}

/// Local factor at `p` given the conductor `n`; cross-checks the reduction
/// type implied by the conductor against the point count.
pub fn local_factor(curve: &WeierstrassCurve, p: u64, conductor: u64) -> Result<LocalFactor, EcError> {
    local_factor_bounded(curve, p, conductor, DEFAULT_PRIME_BOUND)
}

pub fn local_factor_bounded(curve: &WeierstrassCurve, p: u64, conductor: u64, bound: u64) -> Result<LocalFactor, EcError> {
    let pc = count_points_mod_p_bounded(curve, p, bound)?;
    let divides = conductor.is_multiple_of(p);
    let square_divides = conductor.is_multiple_of(p * p);
    let inconsistent = |reason: &str| EcError::Inconsistent { p, reason: reason.to_string() };
    match (divides, square_divides, pc.reduction) {
        (false, _, Reduction::Good) => Ok(LocalFactor { p, reduction: Reduction::Good, ap: pc.trace() }),
        (false, _, _) => Err(inconsistent("p does not divide the conductor but the discriminant vanishes mod p")),
        (true, _, Reduction::Good) => Err(inconsistent("p divides the conductor but the reduction is good")),
        (true, false, Reduction::Multiplicative) => {
            Ok(LocalFactor { p, reduction: Reduction::Multiplicative, ap: pc.trace() })
        }
        (true, false, Reduction::Additive) => Err(inconsistent("p exactly divides the conductor but the reduction is additive")),
        (true, true, Reduction::Additive) => Ok(LocalFactor { p, reduction: Reduction::Additive, ap: 0 }),
        (true, true, Reduction::Multiplicative) => Err(inconsistent("p^2 divides the conductor but the reduction is multiplicative")),
    }
}
