//! Real period by quadrature between the branch points of `y1^2 = f(x)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::arith::{f64_to_rational, rational_to_f64};
use super::curve::{RationalModel, WeierstrassCurve};
use super::EcError;

/// Roots of the 2-division cubic closer than this are treated as a double root.
pub const ROOT_SEPARATION: f64 = 1e-12;

const MAX_NODES: usize = 1 << 22;
const ROOT_BITS: u32 = 256;
const MAX_NEWTON: usize = 2000;

/// Largest real root of the monic cubic `x^3 + a x^2 + b x + c`; `three_real`
/// selects the trigonometric branch and comes from the exact discriminant sign.
fn largest_real_root(a: f64, b: f64, c: f64, three_real: bool) -> f64 {
    let q = (a * a - 3.0 * b) / 9.0;
    let r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
    if three_real && q > 0.0 {
        let theta = (r / (q * q * q).sqrt()).clamp(-1.0, 1.0).acos();
        let s = q.sqrt();
        let tau = std::f64::consts::TAU;
        [0.0, tau, -tau]
            .iter()
            .map(|k| -2.0 * s * ((theta + k) / 3.0).cos() - a / 3.0)
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        let disc = (r * r - q * q * q).max(0.0);
        let big_a = -r.signum() * (r.abs() + disc.sqrt()).cbrt();
        let big_b = if big_a == 0.0 { 0.0 } else { q / big_a };
        big_a + big_b - a / 3.0
    }
}

/// `f(x) = 4x^3 + b2 x^2 + 2 b4 x + b6` with exact coefficients.
struct Cubic {
    b2: BigRational,
    two_b4: BigRational,
    b6: BigRational,
}

impl Cubic {
    fn eval(&self, x: &BigRational) -> (BigRational, BigRational, BigRational) {
        let four = BigRational::from_integer(BigInt::from(4));
        let f = ((&four * x + &self.b2) * x + &self.two_b4) * x + &self.b6;
        let df = (BigRational::from_integer(BigInt::from(12)) * x + BigRational::from_integer(BigInt::from(2)) * &self.b2)
            * x
            + &self.two_b4;
        let ddf = BigRational::from_integer(BigInt::from(24)) * x + BigRational::from_integer(BigInt::from(2)) * &self.b2;
        (f, df, ddf)
    }
}

/// Rounds to the nearest multiple of `2^-bits`.
fn round_dyadic(x: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    let two = BigInt::from(2);
    let n: BigInt = (x.numer() * &scale * &two + x.denom()).div_floor(&(x.denom() * &two));
    BigRational::new(n, scale)
}

/// Largest real root of `f` to `ROOT_BITS` fractional bits.
///
/// Newton's method is monotone from the side where `f` and `f''` share a
/// sign and `f' > 0`: from the right when the root lies in the convex part,
/// from the left when it lies in the concave part (only possible with one
/// real root). The float estimate is pushed to that side first.
fn refine_largest_root(cubic: &Cubic, guess: f64) -> Result<BigRational, EcError> {
    let bad = || EcError::Precision("root of the 2-division cubic is not finite".into());
    let start = f64_to_rational(guess).ok_or_else(bad)?;
    let from_right = !cubic.eval(&start).2.is_negative();
    let mut bump = guess.abs().max(1.0) * 1e-12;
    let mut x;
    loop {
        let offset = if from_right { bump } else { -bump };
        x = f64_to_rational(guess + offset).ok_or_else(bad)?;
        let (f, df, ddf) = cubic.eval(&x);
        let side_ok = if from_right {
            f.is_positive() && ddf.is_positive()
        } else {
            f.is_negative() && ddf.is_negative()
        };
        if side_ok && df.is_positive() {
            break;
        }
        bump *= 4.0;
        if !bump.is_finite() {
            return Err(bad());
        }
    }
    let tiny = BigRational::new(BigInt::one(), BigInt::one() << (ROOT_BITS - 8));
    for _ in 0..MAX_NEWTON {
        let (f, df, _) = cubic.eval(&x);
        if f.is_zero() {
            return Ok(x);
        }
        let step = f / df;
        x = round_dyadic(&(&x - &step), ROOT_BITS);
        if step.abs() < tiny {
            return Ok(x);
        }
    }
    Err(EcError::Precision("Newton refinement of the largest root did not converge".into()))
}

/// Branch-point data: `alpha`, `beta` are the differences `e1 - e2`,
/// `e1 - e3` from the largest real root `e1` (complex conjugates when only
/// one root is real), stored as (re, im).
#[derive(Clone, Copy, Debug)]
struct BranchData {
    alpha: (f64, f64),
    beta: (f64, f64),
    three_real: bool,
}

fn branch_data(b2: &BigRational, b4: &BigRational, b6: &BigRational, delta_positive: bool) -> Result<BranchData, EcError> {
    let k = |n: i64| BigRational::from_integer(BigInt::from(n));
    let cubic = Cubic { b2: b2.clone(), two_b4: k(2) * b4, b6: b6.clone() };
    let guess = largest_real_root(
        rational_to_f64(b2) / 4.0,
        rational_to_f64(b4) / 2.0,
        rational_to_f64(b6) / 4.0,
        delta_positive,
    );
    let e = refine_largest_root(&cubic, guess)?;
    // alpha + beta = f''(e1)/8 and alpha beta = f'(e1)/4, both exact in e1;
    // their discriminant is (beta - alpha)^2, free of cancellation here.
    let sum = k(3) * &e + b2 / k(4);
    let prod = (k(3) * &e + b2 / k(2)) * &e + b4 / k(2);
    let disc = &sum * &sum - k(4) * &prod;
    let (sum, prod, disc) = (rational_to_f64(&sum), rational_to_f64(&prod), rational_to_f64(&disc));
    let gap = disc.abs().sqrt();
    if gap < ROOT_SEPARATION {
        return Err(EcError::Singular);
    }
    let data = if delta_positive {
        let beta = (sum + gap) / 2.0;
        let alpha = prod / beta;
        if alpha < ROOT_SEPARATION {
            return Err(EcError::Singular);
        }
        BranchData { alpha: (alpha, 0.0), beta: (beta, 0.0), three_real: true }
    } else {
        let (re, im) = (sum / 2.0, gap / 2.0);
        BranchData { alpha: (re, im), beta: (re, -im), three_real: false }
    };
    Ok(data)
}

/// `|(alpha cos^2 t + sin^2 t)(beta cos^2 t + sin^2 t)|^{-1/2}` for the two
/// root configurations (both real, or a conjugate pair).
fn integrand(d: &BranchData, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let (ar, ai) = d.alpha;
    let (br, bi) = d.beta;
    let p = (ar * c2 + s2, ai * c2);
    let q = (br * c2 + s2, bi * c2);
    let prod_re = p.0 * q.0 - p.1 * q.1;
    let prod_im = p.0 * q.1 + p.1 * q.0;
    1.0 / prod_re.hypot(prod_im).sqrt()
}

/// `int_0^{pi/2} integrand dt`, by the trapezoid rule over the full period
/// `[0, pi)` with the node count doubled until two estimates agree.
fn component_integral(d: &BranchData, tol: f64) -> Result<f64, EcError> {
    let pi = std::f64::consts::PI;
    let mut n = 16usize;
    let mut sum: f64 = (0..n).map(|k| integrand(d, k as f64 * pi / n as f64)).sum();
    let mut estimate = 0.5 * sum * pi / n as f64;
    while n < MAX_NODES {
        // Reuse the previous nodes and add the midpoints.
        let mid: f64 = (0..n).map(|k| integrand(d, (k as f64 + 0.5) * pi / n as f64)).sum();
        sum += mid;
        n *= 2;
        let next = 0.5 * sum * pi / n as f64;
        if (next - estimate).abs() <= tol * next.abs() {
            return Ok(next);
        }
        estimate = next;
    }
    Err(EcError::Precision(format!("period quadrature did not converge with {n} nodes")))
}

fn period_from_invariants(b2: &BigRational, b4: &BigRational, b6: &BigRational, delta: &BigRational, tol: f64) -> Result<f64, EcError> {
    if !(tol > 0.0) {
        return Err(EcError::Argument(format!("tolerance must be positive, got {tol}")));
    }
    if delta.is_zero() {
        return Err(EcError::Singular);
    }
    let mut data = branch_data(b2, b4, b6, delta.is_positive())?;
    // I(c alpha, c beta) = I(alpha, beta) / sqrt(c); balance |alpha beta| = 1
    // so the integrand has no narrow peak at either end.
    let scale = (data.alpha.0.hypot(data.alpha.1) * data.beta.0.hypot(data.beta.1)).sqrt();
    for z in [&mut data.alpha, &mut data.beta] {
        z.0 /= scale;
        z.1 /= scale;
    }
    // int_{e1}^inf dx / sqrt(f) = I, and the identity component has period 2I.
    let i = component_integral(&data, (0.1 * tol).max(1e-15))? / scale.sqrt();
    Ok(if data.three_real { 4.0 * i } else { 2.0 * i })
}

/// The real period `Omega`, counted over every real component of the curve.
pub fn real_period(curve: &WeierstrassCurve, tol: f64) -> Result<f64, EcError> {
    real_period_rational(&curve.to_rational(), tol)
}

pub fn real_period_rational(model: &RationalModel, tol: f64) -> Result<f64, EcError> {
    let inv = model.invariants();
    period_from_invariants(&inv.b2, &inv.b4, &inv.b6, &inv.delta, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::change::IsogenyChange;
    use num_complex::Complex64;

    fn agm(mut a: Complex64, mut b: Complex64) -> Complex64 {
        for _ in 0..100 {
            let a1 = (a + b) / 2.0;
            let mut b1 = (a * b).sqrt();
            // right choice of square root
            if (a1 - b1).norm() > (a1 + b1).norm() {
                b1 = -b1;
            }
            a = a1;
            b = b1;
            if (a - b).norm() < 1e-16 * a.norm() {
                break;
            }
        }
        a
    }

    /// Independent route: Gauss' identity int_0^inf dt/sqrt((t^2+a)(t^2+b))
    /// = pi / (2 AGM(sqrt a, sqrt b)).
    fn period_by_agm(curve: &WeierstrassCurve) -> f64 {
        let inv = curve.to_rational().invariants();
        let d = branch_data(&inv.b2, &inv.b4, &inv.b6, inv.delta.is_positive()).unwrap();
        let a = Complex64::new(d.alpha.0, d.alpha.1).sqrt();
        let b = Complex64::new(d.beta.0, d.beta.1).sqrt();
        let i = std::f64::consts::PI / (2.0 * agm(a, b).re);
        if d.three_real {
            4.0 * i
        } else {
            2.0 * i
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn worked_example_period() {
        let e = WeierstrassCurve::from_coeffs([1, -1, 0, -453981, 117847851]);
        let omega = real_period(&e, 1e-10).unwrap();
        assert!(rel(omega, 0.56262) < 1e-4, "{omega}");
    }

    #[test]
    fn small_conductor_periods() {
        // 11a1 (one real root), 37a1 and 389a1 (three real roots); values
        // include the component count.
        let cases = [
            ([0, -1, 1, -10, -20], 1.26920930427955),
            ([0, 0, 1, -1, 0], 5.98691729246392),
            ([0, 1, 1, -2, 0], 4.98042512171010),
        ];
        for (a, expected) in cases {
            let e = WeierstrassCurve::from_coeffs(a);
            let omega = real_period(&e, 1e-12).unwrap();
            assert!(rel(omega, expected) < 1e-10, "{a:?}: {omega}");
            assert!(rel(omega, period_by_agm(&e)) < 1e-10);
        }
    }

    #[test]
    fn scaling_by_u() {
        let e = WeierstrassCurve::from_coeffs([0, 0, 1, -1, 0]);
        let change = IsogenyChange::from_integers(2, 0, 0, 0).unwrap();
        let scaled = change.apply(&e).rational();
        let omega = real_period(&e, 1e-12).unwrap();
        let omega_scaled = real_period_rational(&scaled, 1e-12).unwrap();
        assert!(rel(omega_scaled, 2.0 * omega) < 1e-10);
    }

    #[test]
    fn singular_and_bad_tolerance() {
        assert!(matches!(real_period(&WeierstrassCurve::from_coeffs([0, 0, 0, 0, 0]), 1e-8), Err(EcError::Singular)));
        let e = WeierstrassCurve::from_coeffs([0, 0, 1, -1, 0]);
        assert!(matches!(real_period(&e, 0.0), Err(EcError::Argument(_))));
    }
}
