//! JSON instance files.
//!
//! ```json
//! {"n": 6, "s": 3, "model": "classical", "params": {}, "seed": 1, "v": 2,
//!  "clique": [0, 2, 5], "edges": [[0, 2], [0, 5], [2, 5]],
//!  "grid": {"design": "lines", "m": 11, "k": 2, "r_star": 1, "h_star": 4,
//!           "points": [[4, 0], ...]}}
//! ```
//!
//! The edge list is sorted with `i < j` and is the canonical serialization.
//! Null instances have `s = 0`, an empty clique and `v = null`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::design::{Design, DesignKind, Point};
use super::generators::{GridConfig, Model, PlantedInstance};
use super::graph::Graph;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub s: usize,
    pub model: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub v: Option<usize>,
    pub clique: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub design: DesignKind,
    pub m: u32,
    pub k: u32,
    pub r_star: Option<u32>,
    pub h_star: Option<u32>,
    pub points: Vec<[u32; 2]>,
}

impl GridRecord {
    fn from_config(cfg: &GridConfig) -> Self {
        Self {
            design: cfg.design.kind(),
            m: cfg.m(),
            k: cfg.k(),
            r_star: cfg.planted_line.map(|l| l.0),
            h_star: cfg.planted_line.map(|l| l.1),
            points: cfg.points.iter().map(|p| [p.a, p.b]).collect(),
        }
    }

    pub fn to_config(&self) -> Result<GridConfig> {
        let design = Design::from_parts(self.design, self.m, self.k)
            .map_err(|e| Error::Format(e.to_string()))?;
        let planted_line = match (self.r_star, self.h_star) {
            (Some(r), Some(h)) => Some((r, h)),
            (None, None) => None,
            _ => {
                return Err(Error::Format(
                    "r_star and h_star must be both set or both null".into(),
                ))
            }
        };
        let points = self
            .points
            .iter()
            .map(|&[a, b]| {
                if a < self.m && b < self.m {
                    Ok(Point::new(a, b))
                } else {
                    Err(Error::Format(format!(
                        "point [{a}, {b}] outside the {0}x{0} grid",
                        self.m
                    )))
                }
            })
            .collect::<Result<_>>()?;
        Ok(GridConfig {
            design,
            points,
            planted_line,
            q: design.edge_rate(),
        })
    }
}

fn edge_list(graph: &Graph) -> Vec<[usize; 2]> {
    graph.edges().map(|(i, j)| [i, j]).collect()
}

impl InstanceFile {
    pub fn from_planted(inst: &PlantedInstance) -> Self {
        Self {
            n: inst.n(),
            s: inst.s(),
            model: inst.model.tag().to_string(),
            params: inst.model.params(),
            seed: inst.seed,
            v: Some(inst.revealed),
            clique: inst.clique.clone(),
            edges: edge_list(&inst.graph),
            grid: inst.grid.as_ref().map(GridRecord::from_config),
        }
    }

    /// A null instance: no planted clique, no revealed vertex.
    pub fn from_null(graph: &Graph, cfg: &GridConfig, model: &Model, seed: u64) -> Self {
        Self {
            n: graph.n(),
            s: 0,
            model: model.tag().to_string(),
            params: model.params(),
            seed,
            v: None,
            clique: Vec::new(),
            edges: edge_list(graph),
            grid: Some(GridRecord::from_config(cfg)),
        }
    }

    /// Validates the record and rebuilds the graph.
    pub fn graph(&self) -> Result<Graph> {
        if !self.edges.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Format("edges must be sorted and unique".into()));
        }
        if let Some(&[i, j]) = self.edges.iter().find(|&&[i, j]| i >= j) {
            return Err(Error::Format(format!("edge [{i}, {j}] must have i < j")));
        }
        Graph::from_edges(self.n, self.edges.iter().map(|&[i, j]| (i, j)))
    }

    /// Rebuilds a planted instance. Fails for null instances.
    pub fn to_planted(&self) -> Result<PlantedInstance> {
        let graph = self.graph()?;
        let revealed = self
            .v
            .ok_or_else(|| Error::Format("instance has no revealed vertex".into()))?;
        if self.clique.len() != self.s || self.s == 0 {
            return Err(Error::Format(format!(
                "clique has {} vertices but s = {}",
                self.clique.len(),
                self.s
            )));
        }
        let inst = PlantedInstance {
            graph,
            clique: self.clique.clone(),
            revealed,
            model: Model::from_tag(&self.model, &self.params)?,
            seed: self.seed,
            grid: self.grid.as_ref().map(GridRecord::to_config).transpose()?,
        };
        if !inst.is_valid() {
            return Err(Error::Format(
                "clique is not a sorted clique containing v".into(),
            ));
        }
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
