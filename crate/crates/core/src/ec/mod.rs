//! Weierstrass models, the group law, heights, local data and periods.

pub mod arith;
mod bsd;
mod change;
mod curve;
mod height;
mod period;
mod point;
mod reduction;

pub use bsd::{bsd_rhs, bsd_rhs_from_parts};
pub use change::{normalize, transform, transform_point, IsogenyChange, TransformedModel};
pub use curve::{CurveInvariants, Invariants, RationalModel, WeierstrassCurve};
pub use height::{
    canonical_height, canonical_height_by_doubling, height_matrix, height_pairing, naive_height, regulator,
    HeightEstimate, DEFAULT_DIGIT_BUDGET,
};
pub use period::{real_period, real_period_rational, ROOT_SEPARATION};
pub use point::RationalPoint;
pub use reduction::{
    count_points_mod_p, count_points_mod_p_bounded, local_factor, local_factor_bounded, LocalFactor, PointCount,
    Reduction, DEFAULT_PRIME_BOUND,
};

#[derive(Debug, thiserror::Error)]
pub enum EcError {
    #[error("singular curve (zero discriminant)")]
    Singular,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("coordinate change with u = 0")]
    ZeroScale,
    #[error("point {0} is not on the curve")]
    NotOnCurve(String),
    #[error("model is not minimal at {0}")]
    NonMinimal(u64),
    #[error("precision: {0}")]
    Precision(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {p} exceeds the enumeration bound {bound}")]
    PrimeBeyondBound { p: u64, bound: u64 },
    #[error("inconsistent data at p = {p}: {reason}")]
    Inconsistent { p: u64, reason: String },
}
