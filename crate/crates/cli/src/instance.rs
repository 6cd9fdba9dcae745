//! Instance files: generator parameters, public data, and a hidden part that
//! stays unparsed until the harness builds oracles from it.

use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use oracle_geom::instances::{gen_kdisks, gen_ktriangles, gen_terrain, gen_ulp, DiskLayout, PlanePiece};
use oracle_geom::terrain::TerrainPoint;
use oracle_geom::{Hyperplane, Point};

use crate::SchemaError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Ulp,
    Kdisks,
    Ktriangles,
    Terrain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Default,
    Separable,
    Chain,
}

impl From<Layout> for DiskLayout {
    fn from(l: Layout) -> DiskLayout {
        match l {
            Layout::Default => DiskLayout::Default,
            Layout::Separable => DiskLayout::Separable,
            Layout::Chain => DiskLayout::Chain,
        }
    }
}

/// Generator parameters. Unset fields take per-kind defaults, and the file
/// records the values actually used.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Layout>,
}

impl GenParams {
    pub fn resolved(&self, kind: Kind) -> GenParams {
        let mut p = self.clone();
        match kind {
            Kind::Ulp => {
                p.d.get_or_insert(2);
                p.feasible.get_or_insert(true);
            }
            Kind::Kdisks => {
                let layout = *p.layout.get_or_insert(Layout::Default);
                p.k.get_or_insert(1);
                p.margin.get_or_insert(match layout {
                    Layout::Default => 0.05,
                    Layout::Separable => 0.01,
                    Layout::Chain => 0.0,
                });
            }
            Kind::Ktriangles => {
                p.k.get_or_insert(2);
                p.margin.get_or_insert(0.02);
            }
            Kind::Terrain => {
                p.k.get_or_insert(4);
                p.eps.get_or_insert(0.1);
            }
        }
        p
    }
}

/// Data every runner may read.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Public {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Vec<Hyperplane>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Point>>,
    /// Terrain samples are the learner's input, so their heights are public.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heights: Option<Vec<f64>>,
}

/// Hidden part of a terrain file: the planted pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerrainPieces {
    pub pieces: Vec<PlanePiece>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub kind: Kind,
    pub seed: u64,
    pub params: GenParams,
    pub public: Public,
    /// Read only by [`crate::harness::Harness`].
    pub hidden: Box<RawValue>,
}

impl InstanceFile {
    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Terrain file for points read from an `.xyz` file; nothing is planted.
    pub fn from_xyz(points: &[TerrainPoint]) -> Result<InstanceFile> {
        Ok(InstanceFile {
            kind: Kind::Terrain,
            seed: 0,
            params: GenParams { n: points.len(), ..Default::default() },
            public: Public {
                points: Some(points.iter().map(TerrainPoint::xy).collect()),
                heights: Some(points.iter().map(|p| p.z).collect()),
                ..Default::default()
            },
            hidden: raw(&TerrainPieces { pieces: Vec::new() })?,
        })
    }

    pub fn load(path: &Path) -> Result<InstanceFile> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        InstanceFile::parse(&text)
    }

    pub fn parse(text: &str) -> Result<InstanceFile> {
        let f: InstanceFile = serde_json::from_str(text).map_err(|e| SchemaError(format!("instance file: {e}")))?;
        f.check()?;
        Ok(f)
    }

    /// The public fields the kind needs are present and sized consistently.
    fn check(&self) -> Result<()> {
        let p = &self.public;
        let bad = |what: &str| Err(SchemaError(format!("{:?} instance: {what}", self.kind)).into());
        match self.kind {
            Kind::Ulp => {
                let (Some(dim), Some(cons)) = (p.dim, &p.constraints) else { return bad("needs public dim and constraints") };
                if cons.iter().any(|h| h.dim() != dim) {
                    return bad("constraint dimension differs from dim");
                }
            }
            Kind::Kdisks | Kind::Ktriangles => {
                if p.points.is_none() {
                    return bad("needs public points");
                }
            }
            Kind::Terrain => {
                let (Some(pts), Some(h)) = (&p.points, &p.heights) else { return bad("needs public points and heights") };
                if pts.len() != h.len() {
                    return bad("points and heights differ in length");
                }
            }
        }
        Ok(())
    }
}

fn raw<T: Serialize>(v: &T) -> Result<Box<RawValue>> {
    Ok(serde_json::value::to_raw_value(v)?)
}

/// Planted instance of `kind`; the same arguments give the same file.
pub fn generate(kind: Kind, params: &GenParams, seed: u64) -> Result<InstanceFile> {
    let params = params.resolved(kind);
    let n = params.n;
    let (public, hidden) = match kind {
        Kind::Ulp => {
            let inst = gen_ulp(n, params.d.unwrap(), params.feasible.unwrap(), seed)?;
            (Public { dim: Some(inst.dim), constraints: Some(inst.constraints), ..Default::default() }, raw(&inst.hidden)?)
        }
        Kind::Kdisks => {
            let inst = gen_kdisks(params.k.unwrap(), n, params.margin.unwrap(), params.layout.unwrap().into(), seed)?;
            (Public { points: Some(inst.points), ..Default::default() }, raw(&inst.hidden)?)
        }
        Kind::Ktriangles => {
            let inst = gen_ktriangles(params.k.unwrap(), n, params.margin.unwrap(), seed)?;
            (Public { points: Some(inst.points), ..Default::default() }, raw(&inst.hidden)?)
        }
        Kind::Terrain => {
            let inst = gen_terrain(params.k.unwrap(), n, params.eps.unwrap(), seed)?;
            (
                Public { points: Some(inst.points), heights: Some(inst.hidden.heights), ..Default::default() },
                raw(&TerrainPieces { pieces: inst.hidden.pieces })?,
            )
        }
    };
    Ok(InstanceFile { kind, seed, params, public, hidden })
}
