//! Numeric tolerances shared by every module.
//!
//! All geometric predicates read the same record so that a run can be
//! reproduced exactly. The record can be overridden once per process through
//! the `ORACLE_GEOM_TOL` environment variable, written as comma separated
//! `key=value` pairs, e.g. `side=1e-9,dedup=1e-7,box=1e6,lex=1e-3`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ENV_VAR: &str = "ORACLE_GEOM_TOL";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Band around a unit-normalized hyperplane reported as "on the plane".
    pub side: f64,
    /// Distance under which two vertices are considered the same.
    pub dedup: f64,
    /// Half-width `M` of the bounding box `[-M, M]^d`.
    pub box_m: f64,
    /// Ratio of the lexicographic objective used for pure feasibility LPs.
    pub eps_lex: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            side: 1e-9,
            dedup: 1e-7,
            box_m: 1e6,
            eps_lex: 1e-3,
        }
    }
}

impl Tolerances {
    /// Parses an override string on top of the defaults.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut t = Tolerances::default();
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Contract(format!("bad tolerance entry `{part}`")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Contract(format!("bad tolerance value `{value}`")))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Contract(format!("tolerance `{key}` must be positive")));
            }
            match key.trim() {
                "side" => t.side = v,
                "dedup" => t.dedup = v,
                "box" | "box_m" => t.box_m = v,
                "lex" | "eps_lex" => t.eps_lex = v,
                other => return Err(Error::Contract(format!("unknown tolerance `{other}`"))),
            }
        }
        Ok(t)
    }

    fn from_env() -> Self {
        match std::env::var(ENV_VAR) {
            Ok(s) => Tolerances::parse(&s).unwrap_or_else(|e| {
                eprintln!("ignoring {ENV_VAR}: {e}");
                Tolerances::default()
            }),
            Err(_) => Tolerances::default(),
        }
    }
}

static GLOBAL: OnceLock<Tolerances> = OnceLock::new();

/// The process-wide tolerance record.
pub fn tol() -> &'static Tolerances {
    GLOBAL.get_or_init(Tolerances::from_env)
}
