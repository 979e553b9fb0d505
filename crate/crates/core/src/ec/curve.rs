use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Zero};
use serde::{Deserialize, Serialize};

use super::EcError;

/// Integral long Weierstrass model `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeierstrassCurve {
    #[serde(with = "crate::serde_bigint")]
    pub a1: BigInt,
    #[serde(with = "crate::serde_bigint")]
    pub a2: BigInt,
    #[serde(with = "crate::serde_bigint")]
    pub a3: BigInt,
    #[serde(with = "crate::serde_bigint")]
    pub a4: BigInt,
    #[serde(with = "crate::serde_bigint")]
    pub a6: BigInt,
}

/// Weierstrass model with rational coefficients; produced by coordinate
/// changes that do not preserve integrality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalModel {
    pub a1: BigRational,
    pub a2: BigRational,
    pub a3: BigRational,
    pub a4: BigRational,
    pub a6: BigRational,
}

/// The b- and c-quantities and the discriminant of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariants<T> {
    pub b2: T,
    pub b4: T,
    pub b6: T,
    pub b8: T,
    pub c4: T,
    pub c6: T,
    pub delta: T,
}

pub type CurveInvariants = Invariants<BigInt>;

fn k<T: FromPrimitive>(n: i64) -> T {
    T::from_i64(n).expect("small constant")
}

fn compute<T>(a1: &T, a2: &T, a3: &T, a4: &T, a6: &T) -> Invariants<T>
where
    T: Num + Clone + FromPrimitive,
{
    let b2 = a1.clone() * a1.clone() + k::<T>(4) * a2.clone();
    let b4 = k::<T>(2) * a4.clone() + a1.clone() * a3.clone();
    let b6 = a3.clone() * a3.clone() + k::<T>(4) * a6.clone();
    let b8 = a1.clone() * a1.clone() * a6.clone() + k::<T>(4) * a2.clone() * a6.clone()
        - a1.clone() * a3.clone() * a4.clone()
        + a2.clone() * a3.clone() * a3.clone()
        - a4.clone() * a4.clone();
    let c4 = b2.clone() * b2.clone() - k::<T>(24) * b4.clone();
    let c6 = k::<T>(36) * b2.clone() * b4.clone()
        - b2.clone() * b2.clone() * b2.clone()
        - k::<T>(216) * b6.clone();
    let delta = k::<T>(9) * b2.clone() * b4.clone() * b6.clone()
        - b2.clone() * b2.clone() * b8.clone()
        - k::<T>(8) * b4.clone() * b4.clone() * b4.clone()
        - k::<T>(27) * b6.clone() * b6.clone();
    Invariants { b2, b4, b6, b8, c4, c6, delta }
}

impl<T> Invariants<T>
where
    T: Num + Clone + FromPrimitive,
{
    /// `4 b8 == b2 b6 - b4^2`, an identity that holds for every model.
    pub fn b8_identity_holds(&self) -> bool {
        k::<T>(4) * self.b8.clone()
            == self.b2.clone() * self.b6.clone() - self.b4.clone() * self.b4.clone()
    }

    /// `1728 Δ == c4^3 - c6^2`.
    pub fn c_identity_holds(&self) -> bool {
        k::<T>(1728) * self.delta.clone()
            == self.c4.clone() * self.c4.clone() * self.c4.clone() - self.c6.clone() * self.c6.clone()
    }
}

impl CurveInvariants {
    /// `j = c4^3 / Δ` in lowest terms.
    pub fn j_invariant(&self) -> Result<BigRational, EcError> {
        if self.delta.is_zero() {
            return Err(EcError::Singular);
        }
        Ok(BigRational::new(&self.c4 * &self.c4 * &self.c4, self.delta.clone()))
    }
}

impl Invariants<BigRational> {
    pub fn j_invariant(&self) -> Result<BigRational, EcError> {
        if self.delta.is_zero() {
            return Err(EcError::Singular);
        }
        Ok(&self.c4 * &self.c4 * &self.c4 / &self.delta)
    }
}

impl WeierstrassCurve {
    pub fn new(
        a1: impl Into<BigInt>,
        a2: impl Into<BigInt>,
        a3: impl Into<BigInt>,
        a4: impl Into<BigInt>,
        a6: impl Into<BigInt>,
    ) -> Self {
        WeierstrassCurve { a1: a1.into(), a2: a2.into(), a3: a3.into(), a4: a4.into(), a6: a6.into() }
    }

    pub fn from_coeffs(a: [i64; 5]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4])
    }

    pub fn coeffs(&self) -> [&BigInt; 5] {
        [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6]
    }

    pub fn invariants(&self) -> CurveInvariants {
        compute(&self.a1, &self.a2, &self.a3, &self.a4, &self.a6)
    }

    pub fn discriminant(&self) -> BigInt {
        self.invariants().delta
    }

    pub fn j_invariant(&self) -> Result<BigRational, EcError> {
        self.invariants().j_invariant()
    }

    pub fn is_smooth(&self) -> bool {
        !self.discriminant().is_zero()
    }

    /// a1, a3 in {0, 1} and a2 in {-1, 0, 1}.
    pub fn is_normalized(&self) -> bool {
        let bit = |n: &BigInt| n.is_zero() || n.is_one();
        let unit = |n: &BigInt| bit(n) || *n == BigInt::from(-1);
        bit(&self.a1) && bit(&self.a3) && unit(&self.a2)
    }

    /// The (a1, a2, a3) triple, when it fits in small integers.
    pub fn small_triple(&self) -> Option<(i8, i8, i8)> {
        use num_traits::ToPrimitive;
        Some((self.a1.to_i8()?, self.a2.to_i8()?, self.a3.to_i8()?))
    }

    pub fn to_rational(&self) -> RationalModel {
        let q = |n: &BigInt| BigRational::from_integer(n.clone());
        RationalModel { a1: q(&self.a1), a2: q(&self.a2), a3: q(&self.a3), a4: q(&self.a4), a6: q(&self.a6) }
    }
}

impl RationalModel {
    pub fn invariants(&self) -> Invariants<BigRational> {
        compute(&self.a1, &self.a2, &self.a3, &self.a4, &self.a6)
    }

    pub fn coeffs(&self) -> [&BigRational; 5] {
        [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6]
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs().iter().all(|c| c.is_integer())
    }

    pub fn to_integral(&self) -> Option<WeierstrassCurve> {
        if !self.is_integral() {
            return None;
        }
        Some(WeierstrassCurve::new(
            self.a1.to_integer(),
            self.a2.to_integer(),
            self.a3.to_integer(),
            self.a4.to_integer(),
            self.a6.to_integer(),
        ))
    }

    /// Left side minus right side of the Weierstrass equation at (x, y).
    pub fn equation_residual(&self, x: &BigRational, y: &BigRational) -> BigRational {
        let lhs = y * y + &self.a1 * x * y + &self.a3 * y;
        let rhs = x * x * x + &self.a2 * x * x + &self.a4 * x + &self.a6;
        lhs - rhs
    }

    pub fn is_smooth(&self) -> bool {
        !self.invariants().delta.is_zero()
    }
}

impl From<&WeierstrassCurve> for RationalModel {
    fn from(c: &WeierstrassCurve) -> Self {
        c.to_rational()
    }
}

impl fmt::Display for WeierstrassCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{},{},{}]", self.a1, self.a2, self.a3, self.a4, self.a6)
    }
}

impl FromStr for WeierstrassCurve {
    type Err = EcError;

    /// Parses the bracketed form `[a1,a2,a3,a4,a6]` used by curve tables.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(EcError::Parse(format!("expected 5 coefficients in {s:?}")));
        }
        let mut a = Vec::with_capacity(5);
        for p in parts {
            a.push(
                BigInt::from_str(p).map_err(|_| EcError::Parse(format!("bad coefficient {p:?}")))?,
            );
        }
        let mut it = a.into_iter();
        let mut next = || it.next().unwrap_or_else(BigInt::zero);
        Ok(WeierstrassCurve { a1: next(), a2: next(), a3: next(), a4: next(), a6: next() })
    }
}
