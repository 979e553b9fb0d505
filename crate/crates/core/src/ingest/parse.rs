use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::record::CurveRecord;
use super::IngestError;
use crate::ec::{RationalPoint, WeierstrassCurve};

/// Where a field lives in a row: a column index, a header name, or several
/// columns joined without a separator (Cremona splits labels as `11 a 1`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
    Concat(Vec<ColumnRef>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    #[default]
    Comma,
    Tab,
    Whitespace,
}

/// Config-driven layout of a curve table.
///
/// The coefficients come either from one bracketed column
/// (`coefficients = 3` for `[a1,a2,a3,a4,a6]`) or from five separate
/// columns `a1` .. `a6`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnMap {
    #[serde(default)]
    pub delimiter: Delimiter,
    #[serde(default)]
    pub header: bool,
    pub columns: BTreeMap<String, ColumnRef>,
}

const SCALAR_FIELDS: [&str; 8] =
    ["label", "conductor", "rank", "torsion_order", "tamagawa_product", "omega", "regulator", "sha_order"];
const COEFF_FIELDS: [&str; 5] = ["a1", "a2", "a3", "a4", "a6"];

impl ColumnMap {
    pub fn from_toml(text: &str) -> Result<Self, IngestError> {
        toml::from_str(text).map_err(|e| IngestError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|e| IngestError::Io(path.display().to_string(), e))?;
        Self::from_toml(&text)
    }

    /// Layout of the CSV tables shipped under `data/`.
    pub fn fixture_csv() -> Self {
        let mut columns = BTreeMap::new();
        let names = [
            ("label", "label"),
            ("a1", "a1"),
            ("a2", "a2"),
            ("a3", "a3"),
            ("a4", "a4"),
            ("a6", "a6"),
            ("conductor", "conductor"),
            ("rank", "rank"),
            ("torsion_order", "torsion"),
            ("tamagawa_product", "tamagawa"),
            ("omega", "omega"),
            ("regulator", "regulator"),
            ("sha_order", "sha"),
            ("generators", "generators"),
        ];
        for (field, col) in names {
            columns.insert(field.to_string(), ColumnRef::Name(col.to_string()));
        }
        ColumnMap { delimiter: Delimiter::Comma, header: true, columns }
    }

    fn check_fields(&self) -> Result<(), IngestError> {
        for f in SCALAR_FIELDS {
            if !self.columns.contains_key(f) {
                return Err(IngestError::MissingColumn(f.to_string()));
            }
        }
        if !self.columns.contains_key("coefficients") {
            for f in COEFF_FIELDS {
                if !self.columns.contains_key(f) {
                    return Err(IngestError::MissingColumn(f.to_string()));
                }
            }
        }
        Ok(())
    }

    fn resolve(&self, header: Option<&[String]>) -> Result<BTreeMap<String, ResolvedRef>, IngestError> {
        self.check_fields()?;
        let mut out = BTreeMap::new();
        for (field, r) in &self.columns {
            out.insert(field.clone(), resolve_ref(field, r, header)?);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
enum ResolvedRef {
    Index(usize),
    Concat(Vec<usize>),
}

fn resolve_ref(field: &str, r: &ColumnRef, header: Option<&[String]>) -> Result<ResolvedRef, IngestError> {
    let index_of = |r: &ColumnRef| -> Result<usize, IngestError> {
        match r {
            ColumnRef::Index(i) => Ok(*i),
            ColumnRef::Name(name) => header
                .and_then(|h| h.iter().position(|c| c == name))
                .ok_or_else(|| IngestError::MissingColumn(format!("{field} (column {name:?} not in header)"))),
            ColumnRef::Concat(_) => Err(IngestError::Config(format!("nested column list for {field}"))),
        }
    };
    match r {
        ColumnRef::Concat(parts) => Ok(ResolvedRef::Concat(parts.iter().map(index_of).collect::<Result<_, _>>()?)),
        other => Ok(ResolvedRef::Index(index_of(other)?)),
    }
}

/// A row that could not be turned into a record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    pub line: usize,
    pub field: String,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct ParsedTable {
    pub records: Vec<CurveRecord>,
    /// 1-based source line of each record.
    pub lines: Vec<usize>,
    pub errors: Vec<RowError>,
}

fn split_rows(text: &str, map: &ColumnMap) -> Result<(Option<Vec<String>>, Vec<(usize, Vec<String>)>), IngestError> {
    let mut rows = Vec::new();
    let mut header = None;
    match map.delimiter {
        Delimiter::Whitespace => {
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let cells: Vec<String> = line.split_whitespace().map(str::to_string).collect();
                if map.header && header.is_none() {
                    header = Some(cells);
                } else {
                    rows.push((i + 1, cells));
                }
            }
        }
        Delimiter::Comma | Delimiter::Tab => {
            let delim = if map.delimiter == Delimiter::Comma { b',' } else { b'\t' };
            let mut reader = csv::ReaderBuilder::new()
                .delimiter(delim)
                .has_headers(map.header)
                .flexible(true)
                .from_reader(text.as_bytes());
            if map.header {
                let h = reader.headers().map_err(|e| IngestError::Config(format!("bad header: {e}")))?;
                header = Some(h.iter().map(|c| c.trim().to_string()).collect());
            }
            for rec in reader.records() {
                let rec = rec.map_err(|e| IngestError::Config(format!("malformed table: {e}")))?;
                let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
                if rec.iter().all(|c| c.trim().is_empty()) {
                    continue;
                }
                rows.push((line, rec.iter().map(|c| c.trim().to_string()).collect()));
            }
        }
    }
    Ok((header, rows))
}

fn cell(cells: &[String], r: &ResolvedRef) -> Option<String> {
    match r {
        ResolvedRef::Index(i) => cells.get(*i).cloned(),
        ResolvedRef::Concat(ix) => {
            let mut s = String::new();
            for i in ix {
                s.push_str(cells.get(*i)?);
            }
            Some(s)
        }
    }
}

fn parse_row(line: usize, cells: &[String], cols: &BTreeMap<String, ResolvedRef>) -> Result<CurveRecord, RowError> {
    let err = |field: &str, message: String| RowError { line, field: field.to_string(), message };
    let get = |field: &str| -> Result<String, RowError> {
        cell(cells, &cols[field]).ok_or_else(|| err(field, "missing cell".into()))
    };
    fn num<T: FromStr>(field: &str, s: &str, line: usize) -> Result<T, RowError> {
        s.parse::<T>().map_err(|_| RowError { line, field: field.into(), message: format!("non-numeric value {s:?}") })
    }
    let curve = if let Some(r) = cols.get("coefficients") {
        let s = cell(cells, r).ok_or_else(|| err("coefficients", "missing cell".into()))?;
        WeierstrassCurve::from_str(&s).map_err(|e| err("coefficients", e.to_string()))?
    } else {
        let mut a = Vec::with_capacity(5);
        for f in COEFF_FIELDS {
            a.push(num::<BigInt>(f, &get(f)?, line)?);
        }
        let mut it = a.into_iter();
        WeierstrassCurve::new(it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
    };
    let label = get("label")?;
    if label.is_empty() {
        return Err(err("label", "empty label".into()));
    }
    let float = |f: &str| -> Result<f64, RowError> {
        let v: f64 = num(f, &get(f)?, line)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(err(f, format!("non-finite value {v}")))
        }
    };
    let generators = match cols.get("generators").and_then(|r| cell(cells, r)) {
        None => None,
        Some(s) if s.trim().is_empty() => None,
        Some(s) => Some(parse_generators(&s).map_err(|m| err("generators", m))?),
    };
    Ok(CurveRecord {
        label,
        curve,
        conductor: num("conductor", &get("conductor")?, line)?,
        rank: num("rank", &get("rank")?, line)?,
        torsion_order: num("torsion_order", &get("torsion_order")?, line)?,
        tamagawa_product: num("tamagawa_product", &get("tamagawa_product")?, line)?,
        omega: float("omega")?,
        regulator: float("regulator")?,
        sha_order: float("sha_order")?,
        generators,
    })
}

/// Splits `[x:y] [x:y:z] ...` (separated by spaces, semicolons or commas
/// between brackets) into points.
pub fn parse_generators(s: &str) -> Result<Vec<RationalPoint>, String> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while let Some(start) = rest.find('[') {
        let end = rest[start..].find(']').ok_or_else(|| format!("unbalanced brackets in {s:?}"))? + start;
        out.push(rest[start..=end].parse::<RationalPoint>().map_err(|e| e.to_string())?);
        rest = &rest[end + 1..];
    }
    if !rest.trim().trim_matches(|c| c == ',' || c == ';').trim().is_empty() {
        return Err(format!("trailing text in {s:?}"));
    }
    Ok(out)
}

/// Parses table text; configuration problems are fatal, bad rows are
/// collected with their line numbers.
pub fn parse_str(text: &str, map: &ColumnMap) -> Result<ParsedTable, IngestError> {
    map.check_fields()?;
    let (header, rows) = split_rows(text, map)?;
    if rows.is_empty() {
        return Ok(ParsedTable::default());
    }
    let cols = map.resolve(header.as_deref())?;
    let parsed: Vec<(usize, Result<CurveRecord, RowError>)> =
        rows.par_iter().map(|(line, cells)| (*line, parse_row(*line, cells, &cols))).collect();
    let mut out = ParsedTable::default();
    let mut seen = HashSet::new();
    for (line, r) in parsed {
        match r {
            Ok(rec) => {
                if !seen.insert(rec.label.clone()) {
                    out.errors.push(RowError {
                        line,
                        field: "label".into(),
                        message: format!("duplicate label {}", rec.label),
                    });
                    continue;
                }
                out.records.push(rec);
                out.lines.push(line);
            }
            Err(e) => out.errors.push(e),
        }
    }
    Ok(out)
}

pub fn parse_table(path: &Path, map: &ColumnMap) -> Result<ParsedTable, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::Io(path.display().to_string(), e))?;
    parse_str(&text, map)
}

/// Writes records in the shipped CSV layout (coefficients as decimal strings).
pub fn write_csv<W: std::io::Write>(records: &[CurveRecord], out: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| IngestError::Config(format!("csv write: {e}"));
    w.write_record([
        "label", "a1", "a2", "a3", "a4", "a6", "conductor", "rank", "torsion", "tamagawa", "omega", "regulator", "sha",
        "generators",
    ])
    .map_err(io)?;
    for r in records {
        let gens = r
            .generators
            .as_ref()
            .map(|g| g.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        let c = &r.curve;
        w.write_record([
            r.label.clone(),
            c.a1.to_string(),
            c.a2.to_string(),
            c.a3.to_string(),
            c.a4.to_string(),
            c.a6.to_string(),
            r.conductor.to_string(),
            r.rank.to_string(),
            r.torsion_order.to_string(),
            r.tamagawa_product.to_string(),
            r.omega.to_string(),
            r.regulator.to_string(),
            r.sha_order.to_string(),
            gens,
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| IngestError::Io("csv output".into(), e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "label,a1,a2,a3,a4,a6,conductor,rank,torsion,tamagawa,omega,regulator,sha,generators\n";

    #[test]
    fn worked_example_row() {
        let text = format!("{HEADER}314226b1,1,-1,0,-453981,117847851,314226,0,3,3,0.56262,1,1,\n");
        let t = parse_str(&text, &ColumnMap::fixture_csv()).unwrap();
        assert!(t.errors.is_empty());
        let r = &t.records[0];
        assert_eq!(r.curve, WeierstrassCurve::from_coeffs([1, -1, 0, -453981, 117847851]));
        assert_eq!((r.conductor, r.rank, r.torsion_order, r.tamagawa_product), (314226, 0, 3, 3));
        assert_eq!((r.regulator, r.sha_order), (1.0, 1.0));
        assert!((r.omega - 0.56262).abs() < 1e-12);
        assert_eq!(r.generators, None);
        assert_eq!(t.lines, vec![2]);
    }

    #[test]
    fn empty_file() {
        let t = parse_str("", &ColumnMap::fixture_csv()).unwrap();
        assert!(t.records.is_empty() && t.errors.is_empty());
        let t = parse_str(HEADER, &ColumnMap::fixture_csv()).unwrap();
        assert!(t.records.is_empty() && t.errors.is_empty());
    }

    #[test]
    fn big_coefficients_round_trip() {
        let row = "314706x0,1,0,0,-40101356069987968,-3090912440687373254444800,314706,0,2,960,0.0003373725858894,1,36,\n";
        let text = format!("{HEADER}{row}");
        let t = parse_str(&text, &ColumnMap::fixture_csv()).unwrap();
        let mut buf = Vec::new();
        write_csv(&t.records, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }

    #[test]
    fn row_errors_carry_line_numbers() {
        let text = format!(
            "{HEADER}11a1,0,-1,1,-10,-20,11,0,5,5,1.26,1,1,\n11a2,0,-1,1,x,-20,11,0,5,5,1.26,1,1,\n11a1,0,-1,1,-10,-20,11,0,5,5,1.26,1,1,\n"
        );
        let t = parse_str(&text, &ColumnMap::fixture_csv()).unwrap();
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.errors.len(), 2);
        assert_eq!((t.errors[0].line, t.errors[0].field.as_str()), (3, "a4"));
        assert_eq!(t.errors[1].line, 4);
        assert!(t.errors[1].message.contains("duplicate"));
    }

    #[test]
    fn missing_column_names_the_field() {
        let mut map = ColumnMap::fixture_csv();
        map.columns.remove("omega");
        match parse_str(HEADER, &map) {
            Err(IngestError::MissingColumn(f)) => assert_eq!(f, "omega"),
            other => panic!("{other:?}"),
        }
        let text = HEADER.replace("omega", "period") + "11a1,0,-1,1,-10,-20,11,0,5,5,1.26,1,1,\n";
        match parse_str(&text, &ColumnMap::fixture_csv()) {
            Err(IngestError::MissingColumn(f)) => assert!(f.starts_with("omega")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cremona_whitespace_layout() {
        let map = ColumnMap::from_toml(
            r#"
delimiter = "whitespace"
[columns]
label = [0, 1, 2]
conductor = 0
coefficients = 3
rank = 4
torsion_order = 5
tamagawa_product = 6
omega = 7
regulator = 9
sha_order = 10
"#,
        )
        .unwrap();
        let text = "11 a 1 [0,-1,1,-10,-20] 0 5 5 1.26920930427955 0.253841860855911 1 1\n\
                    37 a 1 [0,0,1,-1,0] 1 1 1 5.98691729246392 0.305999773834052 0.0511114082399688 1\n";
        let t = parse_str(text, &map).unwrap();
        assert!(t.errors.is_empty(), "{:?}", t.errors);
        assert_eq!(t.records[1].label, "37a1");
        assert_eq!(t.records[1].rank, 1);
        assert!((t.records[1].regulator - 0.0511114082399688).abs() < 1e-15);
    }

    #[test]
    fn generator_lists() {
        let g = parse_generators("[0:-1] [1:0]").unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(parse_generators("[1:2:1];[3:4:1]").unwrap().len(), 2);
        assert!(parse_generators("[1:2").is_err());
    }
}
