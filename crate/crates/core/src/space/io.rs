use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Space;
use crate::error::{Error, Result};

/// On-disk layout of a space.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpaceFile {
    pub vertices: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<[f64; 2]>>,
    pub edges: Vec<(usize, usize, f64)>,
    pub measure: Vec<f64>,
}

fn schema(field: &str, detail: impl Into<String>) -> Error {
    Error::Schema { field: field.to_string(), detail: detail.into() }
}

pub fn space_to_json(space: &Space) -> String {
    let file = SpaceFile {
        vertices: space.n(),
        coords: space.coords().map(|c| c.to_vec()),
        edges: space.edges().to_vec(),
        measure: space.measure().to_vec(),
    };
    serde_json::to_string(&file).expect("space serializes")
}

pub fn space_from_json(text: &str) -> Result<Space> {
    let file: SpaceFile = serde_json::from_str(text).map_err(|e| {
        let field = match e.classify() {
            serde_json::error::Category::Data => "document",
            _ => "json",
        };
        schema(field, format!("{e} (line {}, column {})", e.line(), e.column()))
    })?;
    let n = file.vertices;
    if n == 0 {
        return Err(schema("vertices", "must be positive"));
    }
    if file.measure.len() != n {
        return Err(schema("measure", format!("expected {n} entries, found {}", file.measure.len())));
    }
    if let Some((i, m)) = file.measure.iter().enumerate().find(|(_, m)| !(**m > 0.0 && m.is_finite())) {
        return Err(schema("measure", format!("entry {i} is {m}, masses must be positive")));
    }
    for (i, &(u, v, len)) in file.edges.iter().enumerate() {
        if u >= n || v >= n {
            return Err(schema("edges", format!("edge {i} = ({u}, {v}) references a missing vertex")));
        }
        if !(len > 0.0 && len.is_finite()) {
            return Err(schema("edges", format!("edge {i} has length {len}")));
        }
    }
    if let Some(c) = &file.coords {
        if c.len() != n {
            return Err(schema("coords", format!("expected {n} entries, found {}", c.len())));
        }
    }
    Space::with_coords(n, file.edges, file.measure, file.coords)
}

pub fn save_space(space: &Space, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, space_to_json(space))?;
    Ok(())
}

pub fn load_space(path: impl AsRef<Path>) -> Result<Space> {
    let text = fs::read_to_string(path)?;
    space_from_json(&text)
}
