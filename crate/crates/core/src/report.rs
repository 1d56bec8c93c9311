//! CSV and JSON output for inequality reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::verify::InequalityReport;

pub const CSV_COLUMNS: [&str; 14] = [
    "inequality",
    "s",
    "t",
    "kappa",
    "Q1",
    "Q2",
    "C1",
    "C2",
    "empirical_best",
    "theoretical",
    "witness",
    "pass",
    "hypotheses_violated",
    "seconds",
];

/// Where a report came from.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub space_hash: String,
    pub params: BTreeMap<String, String>,
    pub version: String,
}

impl Provenance {
    pub fn new(seed: u64, space_hash: String) -> Provenance {
        Provenance { seed, space_hash, params: BTreeMap::new(), version: env!("CARGO_PKG_VERSION").to_string() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Provenance {
        self.params.insert(key.to_string(), value.to_string());
        self
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn to_csv(reports: &[InequalityReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in reports {
        w.write_record([
            r.inequality.clone(),
            r.s.to_string(),
            r.t.to_string(),
            opt(r.kappa),
            opt(r.q1),
            opt(r.q2),
            opt(r.c1),
            opt(r.c2),
            r.empirical_best.to_string(),
            r.theoretical.to_string(),
            r.witness.clone().unwrap_or_default(),
            r.pass.to_string(),
            r.hypotheses_violated.to_string(),
            opt(r.seconds),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct JsonReport<'a> {
    provenance: &'a Provenance,
    reports: &'a [InequalityReport],
}

pub fn to_json(reports: &[InequalityReport], provenance: &Provenance) -> String {
    serde_json::to_string_pretty(&JsonReport { provenance, reports }).expect("reports serialize")
}
