//! JSON file formats for designs, large sets and explicit incidence matrices.
//!
//! Design file: `{"n":7,"k":3,"t":2,"lambda":1,"blocks":[[1,2,4],...]}`.
//! Large-set file: `{"n":..,"k":..,"t":..,"l":..,"parts":[[[1,2],...],...]}`.
//! Matrix file: `{"rows":[[1,0,1],...]}` or a bare array of rows.
//!
//! Elements are 1-based and every block must be strictly increasing. Syntax
//! errors carry line and column; semantic errors carry the JSON path of the
//! offending value, e.g. `blocks[3][1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repr;
use crate::setsys::{validate_nkt, IncidenceSystem, InstanceParams};
use crate::verify::{Design, LargeSetPartition};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignFile {
    n: u32,
    k: u32,
    t: u32,
    lambda: u64,
    blocks: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LargeSetFile {
    n: u32,
    k: u32,
    t: u32,
    l: u64,
    parts: Vec<Vec<Vec<i64>>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Wrapped { rows: Vec<Vec<i64>> },
    Bare(Vec<Vec<i64>>),
}

#[derive(Serialize)]
struct DesignOut<'a> {
    n: u32,
    k: u32,
    t: u32,
    lambda: u64,
    #[serde(with = "repr::one_based_vec")]
    blocks: &'a [Vec<u32>],
}

#[derive(Serialize)]
struct LargeSetOut<'a> {
    n: u32,
    k: u32,
    t: u32,
    l: u64,
    parts: Vec<PartOut<'a>>,
}

#[derive(Serialize)]
#[serde(transparent)]
struct PartOut<'a>(#[serde(with = "repr::one_based_vec")] &'a [Vec<u32>]);

fn syntax(e: serde_json::Error) -> Error {
    let full = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    let msg = full.strip_suffix(&suffix).unwrap_or(&full);
    Error::Format(format!("line {}, column {}: {msg}", e.line(), e.column()))
}

fn convert_block(path: &str, n: u32, k: u32, raw: &[i64]) -> Result<Vec<u32>> {
    if raw.len() != k as usize {
        return Err(Error::Format(format!(
            "{path}: block has {} elements, expected {k}",
            raw.len()
        )));
    }
    let mut out = Vec::with_capacity(raw.len());
    for (j, &x) in raw.iter().enumerate() {
        if x < 1 || x > i64::from(n) {
            return Err(Error::Format(format!("{path}[{j}]: element {x} outside 1..={n}")));
        }
        if j > 0 && raw[j - 1] >= x {
            return Err(Error::Format(format!(
                "{path}[{j}]: element {x} does not exceed previous element {}",
                raw[j - 1]
            )));
        }
        out.push((x - 1) as u32);
    }
    Ok(out)
}

fn convert_blocks(prefix: &str, n: u32, k: u32, raw: &[Vec<i64>]) -> Result<Vec<Vec<u32>>> {
    raw.iter()
        .enumerate()
        .map(|(i, b)| convert_block(&format!("{prefix}[{i}]"), n, k, b))
        .collect()
}

pub fn parse_design(text: &str) -> Result<Design> {
    let f: DesignFile = serde_json::from_str(text).map_err(syntax)?;
    validate_nkt(f.n, f.k, f.t)?;
    let blocks = convert_blocks("blocks", f.n, f.k, &f.blocks)?;
    Design::new(f.n, f.k, f.t, f.lambda, blocks)
}

pub fn parse_large_set(text: &str) -> Result<LargeSetPartition> {
    let f: LargeSetFile = serde_json::from_str(text).map_err(syntax)?;
    let params = InstanceParams::new(f.n, f.k, f.t, f.l)?;
    let parts = f
        .parts
        .iter()
        .enumerate()
        .map(|(p, part)| convert_blocks(&format!("parts[{p}]"), f.n, f.k, part))
        .collect::<Result<Vec<_>>>()?;
    LargeSetPartition::new(params, parts)
}

pub fn parse_matrix(text: &str) -> Result<IncidenceSystem> {
    let f: MatrixFile = serde_json::from_str(text).map_err(syntax)?;
    let rows = match f {
        MatrixFile::Wrapped { rows } | MatrixFile::Bare(rows) => rows,
    };
    if let Some(i) = rows.iter().position(|r| rows[0].len() != r.len()) {
        return Err(Error::Format(format!(
            "rows[{i}]: has {} entries, expected {}",
            rows[i].len(),
            rows[0].len()
        )));
    }
    IncidenceSystem::from_rows(rows)
}

impl Serialize for Design {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DesignOut { n: self.n, k: self.k, t: self.t, lambda: self.lambda, blocks: &self.blocks }
            .serialize(s)
    }
}

impl Serialize for LargeSetPartition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let InstanceParams { n, k, t, l } = self.params;
        let parts = self.parts.iter().map(|p| PartOut(p)).collect();
        LargeSetOut { n, k, t, l, parts }.serialize(s)
    }
}

pub fn design_to_json(d: &Design) -> String {
    serde_json::to_string(d).expect("design serialization is infallible")
}

pub fn large_set_to_json(ls: &LargeSetPartition) -> String {
    serde_json::to_string(ls).expect("large-set serialization is infallible")
}
