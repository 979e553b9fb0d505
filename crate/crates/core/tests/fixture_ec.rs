use std::path::PathBuf;

use bsdlab::ec::{real_period, regulator};
use bsdlab::ingest::{parse_table, validate, ColumnMap};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn fixture_regulators_and_periods() {
    let t = parse_table(&data("curves_1k.csv"), &ColumnMap::fixture_csv()).unwrap();
    assert!(t.errors.is_empty());
    let mut worst_reg: (f64, String) = (0.0, String::new());
    let mut worst_om: (f64, String) = (0.0, String::new());
    let mut fails = Vec::new();
    for r in &t.records {
        assert_eq!(validate(r), vec![], "{}", r.label);
        let om = match real_period(&r.curve, 1e-10) {
            Ok(om) => om,
            Err(err) => {
                fails.push(format!("{} period error {err} {}", r.label, r.curve));
                continue;
            }
        };
        let e = (om - r.omega).abs() / r.omega;
        if e > worst_om.0 {
            worst_om = (e, r.label.clone());
        }
        if let Some(g) = &r.generators {
            match regulator(&r.curve, g, 1e-10) {
                Ok(reg) => {
                    let e = (reg - r.regulator).abs() / r.regulator;
                    if e > worst_reg.0 {
                        worst_reg = (e, r.label.clone());
                    }
                    if e > 1e-6 {
                        fails.push(format!("{} {} vs {}", r.label, reg, r.regulator));
                    }
                }
                Err(err) => fails.push(format!("{} error {err}", r.label)),
            }
        }
    }
    eprintln!("worst omega {:?} worst reg {:?}", worst_om, worst_reg);
    eprintln!("{} failures: {:#?}", fails.len(), &fails[..fails.len().min(20)]);
    assert!(fails.is_empty());
}
