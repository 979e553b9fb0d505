use serde::{Deserialize, Serialize};

use crate::ec::{RationalPoint, WeierstrassCurve};

/// Orders of the fifteen torsion groups allowed by Mazur's theorem.
pub const TORSION_ORDERS: [u32; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 16];

/// One row of the curve database.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub label: String,
    pub curve: WeierstrassCurve,
    pub conductor: u64,
    pub rank: u8,
    pub torsion_order: u32,
    pub tamagawa_product: u64,
    pub omega: f64,
    pub regulator: f64,
    /// Analytic order of Sha; integral when known exactly.
    pub sha_order: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<RationalPoint>>,
}

impl CurveRecord {
    pub fn triple(&self) -> Option<(i8, i8, i8)> {
        self.curve.small_triple()
    }

    /// True when `sha_order` is within `tol` of an integer.
    pub fn sha_is_integral(&self, tol: f64) -> bool {
        (self.sha_order - self.sha_order.round()).abs() <= tol
    }

    pub fn bsd_rhs(&self) -> f64 {
        crate::ec::bsd_rhs(self)
    }
}
