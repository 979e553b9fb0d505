//! Right-hand side of the BSD formula from tabulated arithmetic data.

use crate::ingest::CurveRecord;

/// `|Sha| * Omega * R * prod c_p / |T|^2`.
pub fn bsd_rhs_from_parts(sha: f64, omega: f64, regulator: f64, tamagawa: f64, torsion: f64) -> f64 {
    sha * omega * regulator * tamagawa / (torsion * torsion)
}

pub fn bsd_rhs(record: &CurveRecord) -> f64 {
    bsd_rhs_from_parts(
        record.sha_order,
        record.omega,
        record.regulator,
        record.tamagawa_product as f64,
        record.torsion_order as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let f = bsd_rhs_from_parts(1.0, 0.56262, 1.0, 3.0, 3.0);
        assert!((f - 0.187540).abs() < 1e-5);
    }

    #[test]
    fn trivial_terms_give_omega() {
        assert_eq!(bsd_rhs_from_parts(1.0, 0.75, 1.0, 1.0, 1.0), 0.75);
    }

    #[test]
    fn linear_in_sha() {
        let f = bsd_rhs_from_parts(1.0, 1.3, 0.4, 6.0, 2.0);
        let g = bsd_rhs_from_parts(2.0, 1.3, 0.4, 6.0, 2.0);
        assert!((g - 2.0 * f).abs() < 1e-15);
    }
}
