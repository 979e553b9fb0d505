use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::curve::{RationalModel, WeierstrassCurve};
use super::point::RationalPoint;
use super::EcError;

/// Admissible change of variables `x = u^2 x' + r`, `y = u^3 y' + s u^2 x' + t`.
///
/// Applying a change to a model `E` yields the model `E'` in the primed
/// coordinates; [`IsogenyChange::map_point`] sends points of `E'` back to `E`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IsogenyChange {
    pub u: BigRational,
    pub r: BigRational,
    pub s: BigRational,
    pub t: BigRational,
}

/// Result of transforming an integral model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransformedModel {
    Integral(WeierstrassCurve),
    /// The change does not preserve integrality; coefficients are rational.
    Rational(RationalModel),
}

impl TransformedModel {
    pub fn is_integral(&self) -> bool {
        matches!(self, TransformedModel::Integral(_))
    }

    pub fn integral(&self) -> Option<&WeierstrassCurve> {
        match self {
            TransformedModel::Integral(c) => Some(c),
            TransformedModel::Rational(_) => None,
        }
    }

    pub fn rational(&self) -> RationalModel {
        match self {
            TransformedModel::Integral(c) => c.to_rational(),
            TransformedModel::Rational(m) => m.clone(),
        }
    }
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl IsogenyChange {
    pub fn new(u: BigRational, r: BigRational, s: BigRational, t: BigRational) -> Result<Self, EcError> {
        if u.is_zero() {
            return Err(EcError::ZeroScale);
        }
        Ok(IsogenyChange { u, r, s, t })
    }

    pub fn from_integers(u: i64, r: i64, s: i64, t: i64) -> Result<Self, EcError> {
        Self::new(q(u), q(r), q(s), q(t))
    }

    pub fn identity() -> Self {
        IsogenyChange { u: q(1), r: q(0), s: q(0), t: q(0) }
    }

    pub fn is_identity(&self) -> bool {
        self.u.is_one() && self.r.is_zero() && self.s.is_zero() && self.t.is_zero()
    }

    /// The change equal to applying `self` first and `then` second.
    pub fn compose(&self, then: &IsogenyChange) -> IsogenyChange {
        let (u1, r1, s1, t1) = (&self.u, &self.r, &self.s, &self.t);
        let (u2, r2, s2, t2) = (&then.u, &then.r, &then.s, &then.t);
        let u1_sq = u1 * u1;
        IsogenyChange {
            u: u1 * u2,
            r: r1 + &u1_sq * r2,
            s: s1 + u1 * s2,
            t: t1 + &u1_sq * s1 * r2 + &u1_sq * u1 * t2,
        }
    }

    pub fn inverse(&self) -> IsogenyChange {
        let u_inv = self.u.recip();
        let u2 = &u_inv * &u_inv;
        let u3 = &u2 * &u_inv;
        IsogenyChange {
            u: u_inv.clone(),
            r: -(&self.r * &u2),
            s: -(&self.s * &u_inv),
            t: (&self.r * &self.s - &self.t) * u3,
        }
    }

    /// Coefficients of the transformed model.
    pub fn apply_rational(&self, e: &RationalModel) -> RationalModel {
        let IsogenyChange { u, r, s, t } = self;
        let (a1, a2, a3, a4, a6) = (&e.a1, &e.a2, &e.a3, &e.a4, &e.a6);
        let u2 = u * u;
        let u3 = &u2 * u;
        let u4 = &u2 * &u2;
        let u6 = &u3 * &u3;
        let two = q(2);
        let three = q(3);
        let na1 = (a1 + &two * s) / u;
        let na2 = (a2 - s * a1 + &three * r - s * s) / &u2;
        let na3 = (a3 + r * a1 + &two * t) / &u3;
        let na4 = (a4 - s * a3 + &two * r * a2 - (t + r * s) * a1 + &three * r * r - &two * s * t) / &u4;
        let na6 = (a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1) / &u6;
        RationalModel { a1: na1, a2: na2, a3: na3, a4: na4, a6: na6 }
    }

    pub fn apply(&self, curve: &WeierstrassCurve) -> TransformedModel {
        let m = self.apply_rational(&curve.to_rational());
        match m.to_integral() {
            Some(c) => TransformedModel::Integral(c),
            None => TransformedModel::Rational(m),
        }
    }

    /// Sends a point of the transformed model back to the original model.
    pub fn map_point(&self, p: &RationalPoint) -> RationalPoint {
        match p {
            RationalPoint::Infinity => RationalPoint::Infinity,
            RationalPoint::Affine { x, y } => {
                let u2 = &self.u * &self.u;
                let u3 = &u2 * &self.u;
                RationalPoint::Affine {
                    x: &u2 * x + &self.r,
                    y: &u3 * y + &self.s * &u2 * x + &self.t,
                }
            }
        }
    }

    /// Sends a point of the original model to the transformed model.
    pub fn pull_point(&self, p: &RationalPoint) -> RationalPoint {
        match p {
            RationalPoint::Infinity => RationalPoint::Infinity,
            RationalPoint::Affine { x, y } => {
                let u2 = &self.u * &self.u;
                let u3 = &u2 * &self.u;
                let xr = x - &self.r;
                RationalPoint::Affine {
                    x: &xr / &u2,
                    y: (y - &self.s * &xr - &self.t) / u3,
                }
            }
        }
    }
}

/// Applies `change` to `curve`.
pub fn transform(curve: &WeierstrassCurve, change: &IsogenyChange) -> TransformedModel {
    change.apply(curve)
}

/// Maps a point on the transformed model to the original model.
pub fn transform_point(point: &RationalPoint, change: &IsogenyChange) -> RationalPoint {
    change.map_point(point)
}

/// Integral translation (u = 1) bringing a1, a3 into {0,1} and a2 into {-1,0,1}.
pub fn normalize(curve: &WeierstrassCurve) -> (WeierstrassCurve, IsogenyChange) {
    let two = BigInt::from(2);
    let three = BigInt::from(3);
    let one = BigInt::one();
    let a1 = &curve.a1;
    // a1' = a1 + 2s
    let s = -a1.div_floor(&two);
    // a2' = a2 - s a1 + 3r - s^2
    let a2s = &curve.a2 - &s * a1 - &s * &s;
    let r = -(&a2s + &one).div_floor(&three);
    // a3' = a3 + r a1 + 2t
    let a3r = &curve.a3 + &r * a1;
    let t = -a3r.div_floor(&two);
    let change = IsogenyChange {
        u: BigRational::one(),
        r: BigRational::from_integer(r),
        s: BigRational::from_integer(s),
        t: BigRational::from_integer(t),
    };
    let normalized = change
        .apply(curve)
        .integral()
        .cloned()
        .expect("integral translation keeps the model integral");
    (normalized, change)
}
