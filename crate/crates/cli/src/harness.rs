//! The harness is the one place that parses hidden instance data. It builds
//! oracles for the runners and checks their answers against the truth.

use std::collections::BTreeMap;

use anyhow::Result;
use oracle_geom::instances::{ColoredHidden, UlpHidden};
use oracle_geom::lift::Ball;
use oracle_geom::oracle::{ColorOracle, ColoredGroundTruth, UlpGroundTruth, UlpOracle, Validation};
use oracle_geom::terrain::{TerrainMesh, TerrainPoint, Triangle3};
use oracle_geom::triangle::TriangleCover;
use oracle_geom::ulp::UlpResult;
use oracle_geom::{Color, Point, QueryLedger};

use crate::instance::{InstanceFile, Kind, TerrainPieces};
use crate::SchemaError;

/// Named pass/fail checks, in a stable order.
pub type Verdicts = BTreeMap<String, bool>;

#[derive(Debug)]
enum Hidden {
    Ulp(UlpHidden),
    Colored(ColoredHidden),
    Terrain(TerrainPieces),
}

#[derive(Debug)]
pub struct Harness {
    hidden: Hidden,
}

fn schema(e: impl std::fmt::Display) -> SchemaError {
    SchemaError(format!("hidden data: {e}"))
}

impl Harness {
    pub fn open(file: &InstanceFile) -> Result<Harness> {
        let text = file.hidden.get();
        let hidden = match file.kind {
            Kind::Ulp => Hidden::Ulp(serde_json::from_str(text).map_err(schema)?),
            Kind::Kdisks | Kind::Ktriangles => Hidden::Colored(serde_json::from_str(text).map_err(schema)?),
            Kind::Terrain => Hidden::Terrain(serde_json::from_str(text).map_err(schema)?),
        };
        let n = file.n();
        let len = match (&hidden, file.public.constraints.as_ref(), file.public.points.as_ref()) {
            (Hidden::Ulp(h), Some(c), _) => (h.sides.len(), c.len()),
            (Hidden::Colored(h), _, Some(p)) => (h.colors.len(), p.len()),
            (Hidden::Terrain(_), _, Some(p)) => (p.len(), p.len()),
            _ => (0, n),
        };
        if len.0 != len.1 || len.1 != n {
            return Err(schema(format!("sizes disagree: {} hidden, {} public, n = {n}", len.0, len.1)).into());
        }
        Ok(Harness { hidden })
    }

    fn ulp_hidden(&self) -> &UlpHidden {
        match &self.hidden {
            Hidden::Ulp(h) => h,
            _ => unreachable!("runner and instance kind checked together"),
        }
    }

    fn colors(&self) -> &[Color] {
        match &self.hidden {
            Hidden::Colored(h) => &h.colors,
            _ => unreachable!("runner and instance kind checked together"),
        }
    }

    fn ulp_truth(&self, file: &InstanceFile) -> Result<UlpGroundTruth> {
        let h = self.ulp_hidden();
        let p = &file.public;
        Ok(UlpGroundTruth::with_dim(
            p.dim.unwrap_or(0),
            p.constraints.clone().unwrap_or_default(),
            h.sides.clone(),
            h.implicit_mask.clone(),
        )?)
    }

    pub fn ulp_oracle(&self, file: &InstanceFile) -> Result<UlpOracle> {
        Ok(UlpOracle::new(self.ulp_truth(file)?, QueryLedger::shared()))
    }

    pub fn color_oracle(&self, file: &InstanceFile) -> Result<ColorOracle> {
        let gt = ColoredGroundTruth::new(file.public.points.clone().unwrap_or_default(), self.colors().to_vec())?;
        Ok(ColorOracle::new(gt, QueryLedger::shared()))
    }

    pub fn planted_pieces(&self) -> Option<usize> {
        match &self.hidden {
            Hidden::Terrain(t) if !t.pieces.is_empty() => Some(t.pieces.len()),
            _ => None,
        }
    }

    pub fn verify_ulp(&self, file: &InstanceFile, r: &UlpResult) -> Result<Verdicts> {
        let gt = self.ulp_truth(file)?;
        let planted_feasible = self.ulp_hidden().planted.is_some();
        let mut v = Verdicts::new();
        v.insert("outcome_matches_planted".into(), r.is_feasible() == planted_feasible);
        match r.witness() {
            Some(w) => {
                v.insert("witness_satisfies_all".into(), gt.satisfies_all(&w));
            }
            None => {
                v.insert("committed_set_certifies_infeasible".into(), r.certifies_infeasible(gt.dim())?);
            }
        }
        Ok(v)
    }

    fn labels_exact(&self, labels: &[Color]) -> (String, bool) {
        ("labels_exact".into(), labels == self.colors())
    }

    /// Single ball: holds the red points and no blue one, up to the
    /// boundary band.
    pub fn verify_single_ball(&self, file: &InstanceFile, ball: Option<&Ball>, labels: &[Color]) -> Verdicts {
        let pts = file.public.points.as_deref().unwrap_or_default();
        let separates = match ball {
            Some(b) => {
                let band = 1e-9 * (1.0 + b.radius * b.radius);
                pts.iter().zip(self.colors()).all(|(p, c)| match c {
                    Color::Red => b.contains_with(p, band),
                    Color::Blue => !b.contains_with(p, -band),
                })
            }
            None => self.colors().iter().all(|&c| c == Color::Blue),
        };
        Verdicts::from([self.labels_exact(labels), ("ball_separates".into(), separates)])
    }

    /// Every point strictly inside a learned ball has the ball's color.
    pub fn verify_k_balls(&self, file: &InstanceFile, balls: &[(Ball, Color)], labels: &[Color]) -> Verdicts {
        let pts = file.public.points.as_deref().unwrap_or_default();
        let mono = balls.iter().all(|(b, color)| {
            let band = 1e-9 * (1.0 + b.radius * b.radius);
            pts.iter().zip(self.colors()).all(|(p, c)| c == color || !b.contains_with(p, -band))
        });
        Verdicts::from([self.labels_exact(labels), ("balls_monochromatic".into(), mono)])
    }

    pub fn verify_triangles(&self, file: &InstanceFile, cover: &TriangleCover) -> Verdicts {
        let pts = file.public.points.as_deref().unwrap_or_default();
        let mono = cover
            .triangles
            .iter()
            .all(|(t, color)| pts.iter().zip(self.colors()).all(|(p, c)| c == color || !t.contains(p)));
        let covered = pts.iter().all(|p| cover.triangles.iter().any(|(t, _)| t.contains(p)));
        let labels: Vec<Option<Color>> = pts.iter().map(|p| cover.label_of(p)).collect();
        let exact = labels.iter().zip(self.colors()).all(|(l, c)| *l == Some(*c));
        Verdicts::from([
            ("triangles_monochromatic".into(), mono),
            ("all_points_covered".into(), covered),
            ("labels_exact".into(), exact),
        ])
    }
}

/// Terrain checks need only public data: heights are the learner's input.
pub fn verify_terrain(points: &[TerrainPoint], cover: &[Triangle3], mesh: &TerrainMesh, eps: f64) -> Result<Verdicts> {
    let errors = mesh.vertical_errors(points);
    let covered = errors.iter().all(Option::is_some);
    let within = errors.iter().flatten().all(|&e| e <= eps + 1e-9);
    let gt = ColoredGroundTruth::terrain(points.iter().map(TerrainPoint::xy).collect(), points.iter().map(|p| p.z).collect())?;
    let fresh = ColorOracle::new(gt, QueryLedger::shared());
    let mut valid = true;
    for t in cover {
        valid &= matches!(fresh.validate_triangle_query(&t.base, eps)?, Validation::Valid { .. });
    }
    Ok(Verdicts::from([
        ("all_points_covered".into(), covered),
        ("vertical_error_within_eps".into(), within),
        ("cover_triangles_validate".into(), valid),
    ]))
}

/// Points of a terrain instance file, heights attached.
pub fn terrain_points(file: &InstanceFile) -> Vec<TerrainPoint> {
    let pts: &[Point] = file.public.points.as_deref().unwrap_or_default();
    let hs = file.public.heights.as_deref().unwrap_or_default();
    pts.iter().zip(hs).map(|(p, &z)| TerrainPoint::new(p.x(), p.y(), z)).collect()
}
