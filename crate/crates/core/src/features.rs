//! Named numeric columns of a curve record and per-column transforms.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::ingest::CurveRecord;
use crate::stats::slog;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Column {
    A1,
    A2,
    A3,
    A4,
    A6,
    Conductor,
    Rank,
    Torsion,
    Tamagawa,
    Omega,
    Regulator,
    Sha,
    /// `|Sha| Omega R prod(c_p) / |T|^2`.
    Rhs,
}

pub const ALL_COLUMNS: [Column; 13] = [
    Column::A1,
    Column::A2,
    Column::A3,
    Column::A4,
    Column::A6,
    Column::Conductor,
    Column::Rank,
    Column::Torsion,
    Column::Tamagawa,
    Column::Omega,
    Column::Regulator,
    Column::Sha,
    Column::Rhs,
];

impl Column {
    pub fn name(&self) -> &'static str {
        match self {
            Column::A1 => "a1",
            Column::A2 => "a2",
            Column::A3 => "a3",
            Column::A4 => "a4",
            Column::A6 => "a6",
            Column::Conductor => "conductor",
            Column::Rank => "rank",
            Column::Torsion => "torsion",
            Column::Tamagawa => "tamagawa",
            Column::Omega => "omega",
            Column::Regulator => "regulator",
            Column::Sha => "sha",
            Column::Rhs => "rhs",
        }
    }

    pub fn value(&self, r: &CurveRecord) -> f64 {
        let big = |n: &num_bigint::BigInt| n.to_f64().unwrap_or(f64::NAN);
        match self {
            Column::A1 => big(&r.curve.a1),
            Column::A2 => big(&r.curve.a2),
            Column::A3 => big(&r.curve.a3),
            Column::A4 => big(&r.curve.a4),
            Column::A6 => big(&r.curve.a6),
            Column::Conductor => r.conductor as f64,
            Column::Rank => r.rank as f64,
            Column::Torsion => r.torsion_order as f64,
            Column::Tamagawa => r.tamagawa_product as f64,
            Column::Omega => r.omega,
            Column::Regulator => r.regulator,
            Column::Sha => r.sha_order,
            Column::Rhs => r.bsd_rhs(),
        }
    }
}

impl std::str::FromStr for Column {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let alias = match s {
            "N" => "conductor",
            "r" => "rank",
            "T" => "torsion",
            "c" | "tamagawa_product" => "tamagawa",
            "R" => "regulator",
            "sha_order" => "sha",
            "F" | "bsd_rhs" => "rhs",
            other => other,
        };
        ALL_COLUMNS.iter().find(|c| c.name() == alias).copied().ok_or_else(|| format!("unknown column {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    #[default]
    Identity,
    Slog,
    Log,
}

impl Transform {
    pub fn apply(&self, x: f64) -> Result<f64, String> {
        match self {
            Transform::Identity => Ok(x),
            Transform::Slog => Ok(slog(x)),
            Transform::Log if x > 0.0 => Ok(x.ln()),
            Transform::Log => Err(format!("log of non-positive value {x}")),
        }
    }
}

/// A column with its transform, written `name` or `name:transform`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub column: Column,
    pub transform: Transform,
}

impl std::str::FromStr for ColumnSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, t) = s.split_once(':').unwrap_or((s, "identity"));
        let transform = match t {
            "identity" | "id" => Transform::Identity,
            "slog" => Transform::Slog,
            "log" => Transform::Log,
            other => return Err(format!("unknown transform {other:?}")),
        };
        Ok(ColumnSpec { column: name.parse()?, transform })
    }
}

impl std::fmt::Display for ColumnSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.transform {
            Transform::Identity => write!(f, "{}", self.column.name()),
            Transform::Slog => write!(f, "{}:slog", self.column.name()),
            Transform::Log => write!(f, "{}:log", self.column.name()),
        }
    }
}

/// Transformed feature rows for `records`.
pub fn matrix(records: &[CurveRecord], specs: &[ColumnSpec]) -> Result<Vec<Vec<f64>>, String> {
    records
        .iter()
        .map(|r| {
            specs
                .iter()
                .map(|s| s.transform.apply(s.column.value(r)).map_err(|e| format!("{} {}: {e}", r.label, s.column.name())))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_specs() {
        let s: ColumnSpec = "a4:slog".parse().unwrap();
        assert_eq!(s, ColumnSpec { column: Column::A4, transform: Transform::Slog });
        assert_eq!("N".parse::<Column>().unwrap(), Column::Conductor);
        assert_eq!(s.to_string(), "a4:slog");
        assert!("a5".parse::<ColumnSpec>().is_err());
        assert!(Transform::Log.apply(0.0).is_err());
    }
}
