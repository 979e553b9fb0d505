use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::record::{CurveRecord, TORSION_ORDERS};
use crate::ec::arith::{factor_u64, mod_u64};

/// One broken invariant of a record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub violation: String,
}

fn v(field: &str, violation: impl Into<String>) -> Violation {
    Violation { field: field.to_string(), violation: violation.into() }
}

/// Checks a record against the database invariants. An empty list means
/// the record is consistent.
pub fn validate(r: &CurveRecord) -> Vec<Violation> {
    let mut out = Vec::new();
    let c = &r.curve;
    if !c.is_normalized() {
        out.push(v("a1,a2,a3", "coefficients not normalized (a1,a3 in {0,1}, a2 in {-1,0,1})"));
    }
    let delta = c.discriminant();
    if delta.is_zero() {
        out.push(v("discriminant", "singular model (discriminant 0)"));
    }
    if !TORSION_ORDERS.contains(&r.torsion_order) {
        out.push(v("torsion_order", format!("torsion order outside Mazur set: {}", r.torsion_order)));
    }
    if r.rank > 4 {
        out.push(v("rank", format!("rank {} outside 0..=4", r.rank)));
    }
    if r.conductor == 0 {
        out.push(v("conductor", "conductor must be positive"));
    }
    if r.tamagawa_product == 0 {
        out.push(v("tamagawa_product", "tamagawa product must be positive"));
    }
    for (field, x) in [("omega", r.omega), ("regulator", r.regulator), ("sha_order", r.sha_order)] {
        if !(x > 0.0 && x.is_finite()) {
            out.push(v(field, format!("{field} must be positive, got {x}")));
        }
    }
    if r.rank == 0 && r.regulator != 1.0 {
        out.push(v("regulator", format!("rank-0 regulator must be 1, got {}", r.regulator)));
    }
    if r.conductor > 0 && !delta.is_zero() {
        for (p, _) in factor_u64(r.conductor) {
            if mod_u64(&delta, p) != 0 {
                out.push(v("conductor", format!("prime {p} divides the conductor but not the discriminant")));
            }
        }
    }
    if let Some(gens) = &r.generators {
        if gens.len() != r.rank as usize {
            out.push(v("generators", format!("{} generators listed for rank {}", gens.len(), r.rank)));
        }
        for g in gens {
            if !c.contains(g) {
                out.push(v("generators", format!("generator {g} is not on the curve")));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::WeierstrassCurve;

    fn worked_example() -> CurveRecord {
        CurveRecord {
            label: "314226b1".into(),
            curve: WeierstrassCurve::from_coeffs([1, -1, 0, -453981, 117847851]),
            conductor: 314226,
            rank: 0,
            torsion_order: 3,
            tamagawa_product: 3,
            omega: 0.56262,
            regulator: 1.0,
            sha_order: 1.0,
            generators: None,
        }
    }

    #[test]
    fn worked_example_is_clean() {
        assert_eq!(validate(&worked_example()), vec![]);
    }

    #[test]
    fn torsion_eleven() {
        let mut r = worked_example();
        r.torsion_order = 11;
        let report = validate(&r);
        assert_eq!(report.len(), 1);
        assert!(report[0].violation.contains("torsion order outside Mazur set"));
    }

    #[test]
    fn rank_zero_regulator() {
        let mut r = worked_example();
        r.regulator = 2.0;
        assert!(validate(&r)[0].violation.contains("rank-0 regulator must be 1"));
    }

    #[test]
    fn conductor_prime_must_divide_discriminant() {
        let mut r = worked_example();
        r.conductor *= 5;
        let report = validate(&r);
        assert_eq!(report.len(), 1);
        assert!(report[0].violation.contains("prime 5"));
    }

    #[test]
    fn generators_checked() {
        let mut r = worked_example();
        r.rank = 1;
        r.regulator = 0.5;
        r.generators = Some(vec!["[0:1]".parse().unwrap()]);
        let report = validate(&r);
        assert!(report.iter().any(|x| x.violation.contains("not on the curve")));
    }
}
