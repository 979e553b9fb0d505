use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::curve::{RationalModel, WeierstrassCurve};
use super::EcError;

/// A rational point on a Weierstrass model, or the point at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RationalPoint {
    Infinity,
    Affine { x: BigRational, y: BigRational },
}

impl RationalPoint {
    pub fn new(x: BigRational, y: BigRational) -> Self {
        RationalPoint::Affine { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        RationalPoint::Affine {
            x: BigRational::from_integer(BigInt::from(x)),
            y: BigRational::from_integer(BigInt::from(y)),
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, RationalPoint::Infinity)
    }

    pub fn x(&self) -> Option<&BigRational> {
        match self {
            RationalPoint::Infinity => None,
            RationalPoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn y(&self) -> Option<&BigRational> {
        match self {
            RationalPoint::Infinity => None,
            RationalPoint::Affine { y, .. } => Some(y),
        }
    }
}

/// Displays as `[x:y]`, or `[0:1:0]` for infinity.
impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalPoint::Infinity => write!(f, "[0:1:0]"),
            RationalPoint::Affine { x, y } => write!(f, "[{x}:{y}]"),
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational, EcError> {
    let bad = || EcError::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(BigInt::from_str(s.trim()).map_err(|_| bad())?)),
    }
}

/// Accepts affine `[x:y]` with rational entries and projective `[X:Y:Z]`
/// with integers, the layout used by generator tables.
impl FromStr for RationalPoint {
    type Err = EcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts: Vec<&str> = inner.split(':').collect();
        match parts.as_slice() {
            [x, y] => Ok(RationalPoint::Affine { x: parse_rational(x)?, y: parse_rational(y)? }),
            [x, y, z] => {
                let z = parse_rational(z)?;
                if z.is_zero() {
                    return Ok(RationalPoint::Infinity);
                }
                // Cremona's projective form: x = X/Z, y = Y/Z.
                Ok(RationalPoint::Affine { x: parse_rational(x)? / &z, y: parse_rational(y)? / &z })
            }
            _ => Err(EcError::Parse(format!("bad point {s:?}"))),
        }
    }
}

impl Serialize for RationalPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RationalPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl RationalModel {
    pub fn contains(&self, p: &RationalPoint) -> bool {
        match p {
            RationalPoint::Infinity => true,
            RationalPoint::Affine { x, y } => self.equation_residual(x, y).is_zero(),
        }
    }

    pub fn negate(&self, p: &RationalPoint) -> RationalPoint {
        match p {
            RationalPoint::Infinity => RationalPoint::Infinity,
            RationalPoint::Affine { x, y } => RationalPoint::Affine {
                x: x.clone(),
                y: -y - &self.a1 * x - &self.a3,
            },
        }
    }

    /// Chord-tangent addition on the long Weierstrass form.
    pub fn add(&self, p: &RationalPoint, q: &RationalPoint) -> RationalPoint {
        let (x1, y1, x2, y2) = match (p, q) {
            (RationalPoint::Infinity, _) => return q.clone(),
            (_, RationalPoint::Infinity) => return p.clone(),
            (RationalPoint::Affine { x: x1, y: y1 }, RationalPoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let lambda = if x1 == x2 {
            let denom = y1 + y2 + &self.a1 * x2 + &self.a3;
            if denom.is_zero() {
                return RationalPoint::Infinity;
            }
            // tangent: (3x^2 + 2 a2 x + a4 - a1 y) / (2y + a1 x + a3)
            let three = BigRational::from_integer(3.into());
            let two = BigRational::from_integer(2.into());
            (three * x1 * x1 + two * &self.a2 * x1 + &self.a4 - &self.a1 * y1) / denom
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let nu = y1 - &lambda * x1;
        let x3 = &lambda * &lambda + &self.a1 * &lambda - &self.a2 - x1 - x2;
        let y3 = -(&lambda + &self.a1) * &x3 - nu - &self.a3;
        RationalPoint::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, p: &RationalPoint) -> RationalPoint {
        self.add(p, p)
    }

    /// `n P` by double-and-add; negative `n` multiplies the negation.
    pub fn multiply(&self, n: i64, p: &RationalPoint) -> RationalPoint {
        let mut base = if n < 0 { self.negate(p) } else { p.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = RationalPoint::Infinity;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.double(&base);
            }
        }
        acc
    }

    /// Order of `p` if it is at most `max_order`, else `None`.
    pub fn small_order(&self, p: &RationalPoint, max_order: u32) -> Option<u32> {
        let mut acc = p.clone();
        for n in 1..=max_order {
            if acc.is_infinity() {
                return Some(n);
            }
            // Torsion points have integral coordinates on integral models
            // (up to 2-power denominators); a blown-up denominator means
            // infinite order.
            if let RationalPoint::Affine { x, .. } = &acc {
                if x.denom().bits() > 64 && x.numer().abs().bits() > 64 {
                    return None;
                }
            }
            acc = self.add(&acc, p);
        }
        None
    }
}

impl WeierstrassCurve {
    pub fn contains(&self, p: &RationalPoint) -> bool {
        self.to_rational().contains(p)
    }

    pub fn add(&self, p: &RationalPoint, q: &RationalPoint) -> RationalPoint {
        self.to_rational().add(p, q)
    }

    pub fn negate(&self, p: &RationalPoint) -> RationalPoint {
        self.to_rational().negate(p)
    }

    pub fn multiply(&self, n: i64, p: &RationalPoint) -> RationalPoint {
        self.to_rational().multiply(n, p)
    }

    /// Returns the point if it lies on the curve, else an error.
    pub fn check_point(&self, p: &RationalPoint) -> Result<(), EcError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(EcError::NotOnCurve(p.to_string()))
        }
    }
}
