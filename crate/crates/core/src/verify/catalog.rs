//! Pinned instances on which the asserted bounds are attained or nearly so.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::io::parse_hypergraph;
use crate::model::{CoeffTensor, SimplexCoeffs, WeightedHypergraph};

const CATALOG_JSON: &str = include_str!("../../data/extremal_catalog.json");

#[derive(Debug, Deserialize)]
struct RawSimplex {
    d: usize,
    n: usize,
    entries: Vec<(Vec<usize>, f64)>,
}

#[derive(Debug, Deserialize)]
struct RawEntry {
    name: String,
    suites: Vec<String>,
    tensor: Option<CoeffTensor>,
    simplex: Option<RawSimplex>,
    vector: Option<Vec<f64>>,
    graph: Option<String>,
    expected: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CatalogObject {
    Tensor(CoeffTensor),
    Simplex(SimplexCoeffs),
    Vector(Vec<f64>),
    Graph(WeightedHypergraph),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub suites: Vec<String>,
    pub object: CatalogObject,
    /// Values the instance is known to produce, keyed by quantity name.
    pub expected: BTreeMap<String, f64>,
}

impl CatalogEntry {
    pub fn belongs_to(&self, suite: &str) -> bool {
        self.suites.iter().any(|s| s == suite)
    }
}

fn convert(raw: RawEntry) -> Result<CatalogEntry> {
    let object = match (raw.tensor, raw.simplex, raw.vector, raw.graph) {
        (Some(t), None, None, None) => CatalogObject::Tensor(t),
        (None, Some(s), None, None) => {
            CatalogObject::Simplex(SimplexCoeffs::from_entries(s.d, s.n, s.entries)?)
        }
        (None, None, Some(v), None) => CatalogObject::Vector(v),
        (None, None, None, Some(g)) => CatalogObject::Graph(parse_hypergraph(g.as_bytes())?),
        _ => {
            return Err(Error::Invariant(format!(
                "catalog entry {} must hold exactly one object",
                raw.name
            )))
        }
    };
    Ok(CatalogEntry {
        name: raw.name,
        suites: raw.suites,
        object,
        expected: raw.expected,
    })
}

/// The extremal catalog shipped with the crate.
pub fn catalog() -> Vec<CatalogEntry> {
    let raw: Vec<RawEntry> = serde_json::from_str(CATALOG_JSON).expect("catalog parses");
    raw.into_iter()
        .map(|r| convert(r).expect("catalog entries are valid"))
        .collect()
}
