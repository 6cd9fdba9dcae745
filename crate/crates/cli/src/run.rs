//! Single runs: one command on one instance, producing a [`RunReport`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use oracle_geom::ball::{learn_k_ball_cover, learn_single_ball, KBallParams, MonoParams, MonoStrategy, SingleBallParams};
use oracle_geom::terrain::{simplify_terrain, TerrainSidecar};
use oracle_geom::triangle::{learn_triangle_cover, TriangleParams, TriangleStrategy};
use oracle_geom::ulp::{
    solve_ulp_1d, solve_ulp_centerpoint, solve_ulp_cutting_2d, solve_ulp_naive_loop, solve_ulp_seplab_2d, CuttingParams,
    SeplabParams, UlpOutcome, UlpResult,
};
use oracle_geom::oracle::LedgerSnapshot;
use oracle_geom::{Error, OracleKind};

use crate::harness::{terrain_points, verify_terrain, Harness, Verdicts};
use crate::instance::{GenParams, InstanceFile, Kind};
use crate::SchemaError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SolveUlp,
    LearnBall,
    LearnKballs,
    CoverTriangles,
    SimplifyTerrain,
}

impl Command {
    /// Instance kind the command reads.
    pub fn kind(self) -> Kind {
        match self {
            Command::SolveUlp => Kind::Ulp,
            Command::LearnBall | Command::LearnKballs => Kind::Kdisks,
            Command::CoverTriangles => Kind::Ktriangles,
            Command::SimplifyTerrain => Kind::Terrain,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::SolveUlp => "solve-ulp",
            Command::LearnBall => "learn-ball",
            Command::LearnKballs => "learn-kballs",
            Command::CoverTriangles => "cover-triangles",
            Command::SimplifyTerrain => "simplify-terrain",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
pub enum Solver {
    #[value(name = "oneD")]
    #[serde(rename = "oneD")]
    OneD,
    #[serde(rename = "centerpoint")]
    Centerpoint,
    #[serde(rename = "cutting")]
    Cutting,
    #[serde(rename = "seplab")]
    Seplab,
    #[serde(rename = "naive-loop")]
    NaiveLoop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    ImplicitCenterpoint,
    CounterexampleLoop,
    SampleTriples,
    LineTriples,
}

/// Solver and learner settings shared by single runs and sweeps.
#[derive(Args, Clone, Debug, Default)]
pub struct RunOptions {
    /// ULP solver; picked from the dimension when unset.
    #[arg(long, value_enum)]
    pub solver: Option<Solver>,
    /// Mono-ball strategy (learn-kballs) or candidate strategy (cover-triangles, simplify-terrain).
    #[arg(long, value_enum)]
    pub strategy: Option<Strategy>,
    /// Cutting parameter r.
    #[arg(long)]
    pub r: Option<usize>,
    /// Cutting recursion base size.
    #[arg(long)]
    pub base_size: Option<usize>,
    /// Sample-size constant (cutting, k-ball and triangle samplers).
    #[arg(long)]
    pub sample_const: Option<f64>,
    /// Terrain tolerance; the instance's value when unset.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Assumed number of balls or triangles; the instance's value when unset.
    #[arg(long)]
    pub k: Option<usize>,
    /// Solver seed; the instance seed when unset.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run the mono-ball searches of an iteration, and sweep cells, one at a time.
    #[arg(long)]
    pub sequential: bool,
    /// Arrangement vertex cap of the centerpoint solver.
    #[arg(long)]
    pub vertex_cap: Option<usize>,
    /// Iteration cap of the naive loop (default 4n + 64).
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// simplify-terrain: write the mesh as OBJ here, with a `.json` sidecar next to it.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceInfo {
    pub kind: Kind,
    pub n: usize,
    pub seed: u64,
    pub params: GenParams,
}

/// One measured ratio, with its bound where a hard one exists.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub measure: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within: Option<bool>,
}

impl Envelope {
    fn ratio(measure: &str, value: f64) -> Envelope {
        Envelope { measure: measure.into(), value, bound: None, within: None }
    }

    fn bounded(measure: &str, value: f64, bound: f64) -> Envelope {
        Envelope { measure: measure.into(), value, bound: Some(bound), within: Some(value <= bound) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: Command,
    pub instance: InstanceInfo,
    pub settings: BTreeMap<String, Value>,
    pub outcome: Value,
    pub ledger: LedgerSnapshot,
    pub total_queries: u64,
    pub iterations: Vec<Value>,
    pub verification: Verdicts,
    pub envelope: Vec<Envelope>,
    pub wall_time_s: f64,
}

pub const CSV_HEADER: &str = "command,n,k,seed,solver,strategy,outcome,Separation,Labeling,NN,FN,Triangle,SampleUncovered,ValidateTriangle,total,iterations,verified,wall_time_s";

impl RunReport {
    pub fn verified(&self) -> bool {
        self.verification.values().all(|&b| b)
    }

    pub fn csv_row(&self) -> String {
        let setting = |key: &str| self.settings.get(key).and_then(Value::as_str).unwrap_or("").to_string();
        let k = self.settings.get("k").and_then(Value::as_u64).map(|k| k.to_string()).unwrap_or_default();
        let counts: Vec<String> = OracleKind::ALL.iter().map(|&kind| self.ledger.get(kind).to_string()).collect();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{:.6}",
            self.command.name(),
            self.instance.n,
            k,
            self.settings.get("seed").and_then(Value::as_u64).unwrap_or(0),
            setting("solver"),
            setting("strategy"),
            self.outcome.get("result").and_then(Value::as_str).unwrap_or(""),
            counts.join(","),
            self.total_queries,
            self.iterations.len(),
            self.verified(),
            self.wall_time_s,
        )
    }
}

fn log2(n: usize) -> f64 {
    (n as f64).log2().max(1.0)
}

fn usage(msg: String) -> anyhow::Error {
    SchemaError(msg).into()
}

fn to_values<T: Serialize>(items: &[T]) -> Vec<Value> {
    items.iter().map(|x| serde_json::to_value(x).expect("plain data")).collect()
}

struct Done {
    settings: BTreeMap<String, Value>,
    outcome: Value,
    ledger: LedgerSnapshot,
    iterations: Vec<Value>,
    verification: Verdicts,
    envelope: Vec<Envelope>,
    wall: f64,
}

fn timed<T>(f: impl FnOnce() -> oracle_geom::Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64()))
}

/// Runs `cmd` on `file`, checking the answer through the harness.
pub fn run_one(cmd: Command, file: &InstanceFile, opts: &RunOptions) -> Result<RunReport> {
    if file.kind != cmd.kind() {
        return Err(usage(format!("{} needs a {:?} instance, got {:?}", cmd.name(), cmd.kind(), file.kind)));
    }
    if opts.solver.is_some() && cmd != Command::SolveUlp {
        return Err(usage(format!("--solver does not apply to {}", cmd.name())));
    }
    let seed = opts.seed.unwrap_or(file.seed);
    let harness = Harness::open(file)?;
    let done = match cmd {
        Command::SolveUlp => solve_ulp(&harness, file, opts, seed)?,
        Command::LearnBall => learn_ball(&harness, file, opts, seed)?,
        Command::LearnKballs => learn_kballs(&harness, file, opts, seed)?,
        Command::CoverTriangles => cover_triangles(&harness, file, opts, seed)?,
        Command::SimplifyTerrain => terrain(&harness, file, opts, seed)?,
    };
    Ok(RunReport {
        command: cmd,
        instance: InstanceInfo { kind: file.kind, n: file.n(), seed: file.seed, params: file.params.clone() },
        settings: done.settings,
        outcome: done.outcome,
        total_queries: done.ledger.total(),
        ledger: done.ledger,
        iterations: done.iterations,
        verification: done.verification,
        envelope: done.envelope,
        wall_time_s: done.wall,
    })
}

fn settings(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn solve_ulp(h: &Harness, file: &InstanceFile, opts: &RunOptions, seed: u64) -> Result<Done> {
    if opts.strategy.is_some() {
        return Err(usage("--strategy does not apply to solve-ulp".into()));
    }
    let lines = file.public.constraints.as_deref().unwrap_or_default();
    let dim = file.public.dim.unwrap_or(0);
    let n = lines.len();
    let solver = opts.solver.unwrap_or(match dim {
        1 => Solver::OneD,
        2 => Solver::Cutting,
        3 => Solver::Centerpoint,
        _ => Solver::NaiveLoop,
    });
    let oracle = h.ulp_oracle(file)?;
    let mut set = vec![("solver", json!(solver)), ("seed", json!(seed))];
    let (r, wall): (UlpResult, f64) = match solver {
        Solver::OneD => {
            if dim != 1 {
                return Err(Error::UnsupportedDimension(dim).into());
            }
            let cuts: Vec<f64> = lines.iter().map(|h| h.offset / h.normal.x()).collect();
            timed(|| Ok(solve_ulp_1d(&cuts, &oracle)))?
        }
        Solver::Centerpoint => {
            let cap = opts.vertex_cap.unwrap_or(oracle_geom::ulp::CenterpointSolverParams::default().vertex_cap);
            set.push(("vertex_cap", json!(cap)));
            timed(|| solve_ulp_centerpoint(lines, &oracle, dim, cap))?
        }
        Solver::Cutting => {
            let d = CuttingParams::default();
            let p = CuttingParams {
                r: opts.r.unwrap_or(d.r),
                base_size: opts.base_size.unwrap_or(d.base_size),
                c_cut: opts.sample_const.unwrap_or(d.c_cut),
                seed,
                ..d
            };
            set.extend([("r", json!(p.r)), ("base_size", json!(p.base_size)), ("sample_const", json!(p.c_cut))]);
            timed(|| solve_ulp_cutting_2d(lines, &oracle, &p))?
        }
        Solver::Seplab => {
            let p = SeplabParams { seed, ..Default::default() };
            set.push(("s_net", json!(p.s_net)));
            timed(|| solve_ulp_seplab_2d(lines, &oracle, &oracle, &p))?
        }
        Solver::NaiveLoop => {
            let cap = opts.max_iters.unwrap_or(4 * n + 64);
            set.push(("max_iters", json!(cap)));
            timed(|| solve_ulp_naive_loop(&oracle, cap, seed))?
        }
    };
    let outcome = match r.outcome {
        UlpOutcome::Feasible { witness } => json!({ "result": "feasible", "witness": witness }),
        UlpOutcome::Infeasible => json!({
            "result": "infeasible",
            "committed": r.committed.iter().map(|c| c.index).collect::<Vec<_>>(),
        }),
    };
    let sep = r.ledger.separation as f64;
    let envelope = match solver {
        Solver::OneD => {
            let budget = (n.max(1) as f64).log2().ceil() + 2.0;
            vec![Envelope::bounded("separation queries vs ceil(log2 n) + 2", sep, budget)]
        }
        Solver::Cutting => vec![Envelope::ratio("separation / log2(n)^2", sep / log2(n).powi(2))],
        Solver::Seplab => vec![Envelope::ratio("queries / log2 n", r.ledger.total() as f64 / log2(n))],
        Solver::Centerpoint | Solver::NaiveLoop => vec![Envelope::ratio("separation / log2 n", sep / log2(n))],
    };
    Ok(Done {
        settings: settings(&set),
        outcome,
        ledger: r.ledger,
        iterations: r.rounds.iter().map(|&active| json!({ "active": active })).collect(),
        verification: h.verify_ulp(file, &r)?,
        envelope,
        wall,
    })
}

fn learn_ball(h: &Harness, file: &InstanceFile, opts: &RunOptions, seed: u64) -> Result<Done> {
    if opts.strategy.is_some() {
        return Err(usage("--strategy does not apply to learn-ball".into()));
    }
    let oracle = h.color_oracle(file)?;
    let mut p = SingleBallParams::default();
    p.solver.seed = seed;
    if let Some(cap) = opts.vertex_cap {
        p.solver.vertex_cap = cap;
    }
    let (r, wall) = timed(|| learn_single_ball(&oracle, &p))?;
    let n = file.n();
    Ok(Done {
        settings: settings(&[("seed", json!(seed)), ("vertex_cap", json!(p.solver.vertex_cap))]),
        outcome: json!({
            "result": "labeled",
            "ball": r.ball,
            "labels": r.labels,
            "probes": r.probes,
            "separation_calls": r.separation_calls,
        }),
        ledger: r.ledger,
        iterations: Vec::new(),
        verification: h.verify_single_ball(file, r.ball.as_ref(), &r.labels),
        envelope: vec![Envelope::ratio("(NN + FN) / log2 n", (r.ledger.nn + r.ledger.fn_) as f64 / log2(n))],
        wall,
    })
}

fn assumed_k(file: &InstanceFile, opts: &RunOptions) -> Result<usize> {
    opts.k.or(file.params.k).ok_or_else(|| usage("--k is required when the instance does not record k".into()))
}

fn learn_kballs(h: &Harness, file: &InstanceFile, opts: &RunOptions, seed: u64) -> Result<Done> {
    let strategy = match opts.strategy {
        None | Some(Strategy::ImplicitCenterpoint) => MonoStrategy::ImplicitCenterpoint,
        Some(Strategy::CounterexampleLoop) => MonoStrategy::CounterexampleLoop,
        Some(s) => return Err(usage(format!("--strategy {s:?} does not apply to learn-kballs"))),
    };
    let k = assumed_k(file, opts)?;
    let d = KBallParams::default();
    let mut mono = MonoParams { strategy, ..Default::default() };
    if let Some(cap) = opts.vertex_cap {
        mono.solver.vertex_cap = cap;
    }
    let p = KBallParams { k, seed, c_ra: opts.sample_const.unwrap_or(d.c_ra), mono, sequential: opts.sequential, ..d };
    let oracle = h.color_oracle(file)?;
    let (r, wall) = timed(|| learn_k_ball_cover(&oracle, &p))?;
    let accepted = r.accepted_iterations();
    Ok(Done {
        settings: settings(&[
            ("k", json!(k)),
            ("seed", json!(seed)),
            ("strategy", json!(strategy)),
            ("sample_const", json!(p.c_ra)),
            ("sequential", json!(p.sequential)),
        ]),
        outcome: json!({
            "result": "labeled",
            "balls": r.balls.iter().map(|(b, c)| json!({ "ball": b, "color": c })).collect::<Vec<_>>(),
            "labels": r.labels,
            "fallbacks": r.fallbacks,
        }),
        ledger: r.ledger,
        iterations: to_values(&r.iterations),
        verification: h.verify_k_balls(file, &r.balls, &r.labels),
        envelope: vec![Envelope::ratio("accepted iterations / (k log2 n)", accepted as f64 / (k as f64 * log2(file.n())))],
        wall,
    })
}

fn triangle_params(file: &InstanceFile, opts: &RunOptions, seed: u64, cmd: Command) -> Result<TriangleParams> {
    let strategy = match opts.strategy {
        None | Some(Strategy::SampleTriples) => TriangleStrategy::SampleTriples,
        Some(Strategy::LineTriples) => TriangleStrategy::LineTriples,
        Some(s) => return Err(usage(format!("--strategy {s:?} does not apply to {}", cmd.name()))),
    };
    let d = TriangleParams::default();
    Ok(TriangleParams { k: assumed_k(file, opts)?, seed, strategy, sample_const: opts.sample_const.unwrap_or(d.sample_const), ..d })
}

fn triangle_settings(p: &TriangleParams) -> Vec<(&'static str, Value)> {
    vec![("k", json!(p.k)), ("seed", json!(p.seed)), ("strategy", json!(p.strategy)), ("sample_const", json!(p.sample_const))]
}

fn cover_triangles(h: &Harness, file: &InstanceFile, opts: &RunOptions, seed: u64) -> Result<Done> {
    let p = triangle_params(file, opts, seed, Command::CoverTriangles)?;
    let oracle = h.color_oracle(file)?;
    let (r, wall) = timed(|| learn_triangle_cover(&oracle, &p))?;
    let size = r.triangles.len();
    Ok(Done {
        settings: settings(&triangle_settings(&p)),
        outcome: json!({
            "result": "covered",
            "size": size,
            "triangles": r.triangles.iter().map(|(t, c)| json!({ "triangle": t, "color": c })).collect::<Vec<_>>(),
        }),
        ledger: r.ledger,
        iterations: to_values(&r.iterations),
        verification: h.verify_triangles(file, &r),
        envelope: vec![Envelope::ratio("cover size / (k log2 n)", size as f64 / (p.k as f64 * log2(file.n())))],
        wall,
    })
}

fn terrain(h: &Harness, file: &InstanceFile, opts: &RunOptions, seed: u64) -> Result<Done> {
    let p = triangle_params(file, opts, seed, Command::SimplifyTerrain)?;
    let eps = opts.eps.or(file.params.eps).ok_or_else(|| usage("--eps is required when the instance does not record eps".into()))?;
    let points = terrain_points(file);
    let (r, wall) = timed(|| simplify_terrain(&points, eps, &p))?;
    let sidecar = TerrainSidecar::new(&r, &points, eps);
    if let Some(path) = &opts.mesh {
        write_mesh(path, &r.mesh.to_obj(), &sidecar)?;
    }
    let size = r.cover.len();
    let mut set = triangle_settings(&p);
    set.push(("eps", json!(eps)));
    Ok(Done {
        settings: settings(&set),
        outcome: json!({
            "result": "simplified",
            "size": size,
            "faces": sidecar.faces,
            "planted_pieces": h.planted_pieces(),
            "max_vertical_error": sidecar.max_vertical_error,
            "cover": r.cover,
        }),
        ledger: r.ledger,
        iterations: to_values(&r.iterations),
        verification: verify_terrain(&points, &r.cover, &r.mesh, eps)?,
        envelope: vec![Envelope::ratio("cover size / (k log2 n)", size as f64 / (p.k as f64 * log2(file.n())))],
        wall,
    })
}

/// Sidecar path for a mesh file: the mesh path with `.json` appended.
pub fn sidecar_path(mesh: &Path) -> PathBuf {
    let mut s = mesh.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_mesh(path: &Path, obj: &str, sidecar: &TerrainSidecar) -> Result<()> {
    std::fs::write(path, obj).with_context(|| format!("writing {}", path.display()))?;
    let side = sidecar_path(path);
    std::fs::write(&side, serde_json::to_string_pretty(sidecar)? + "\n").with_context(|| format!("writing {}", side.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate;

    #[test]
    fn ulp_runs_verify_for_every_planar_solver() {
        for feasible in [true, false] {
            let f = generate(Kind::Ulp, &GenParams { n: 64, feasible: Some(feasible), ..Default::default() }, 5).unwrap();
            for solver in [Solver::Centerpoint, Solver::Cutting, Solver::Seplab, Solver::NaiveLoop] {
                let r = run_one(Command::SolveUlp, &f, &RunOptions { solver: Some(solver), ..Default::default() }).unwrap();
                assert!(r.verified(), "{solver:?} feasible={feasible}: {:?}", r.verification);
            }
        }
    }

    #[test]
    fn one_d_run_reports_its_bound() {
        let f = generate(Kind::Ulp, &GenParams { n: 100, d: Some(1), ..Default::default() }, 2).unwrap();
        let r = run_one(Command::SolveUlp, &f, &RunOptions::default()).unwrap();
        assert!(r.verified());
        assert_eq!(r.envelope[0].within, Some(true));
    }

    #[test]
    fn wrong_kind_is_a_usage_error() {
        let f = generate(Kind::Ulp, &GenParams { n: 10, ..Default::default() }, 0).unwrap();
        let e = run_one(Command::LearnBall, &f, &RunOptions::default()).unwrap_err();
        assert!(e.downcast_ref::<SchemaError>().is_some());
    }

    #[test]
    fn csv_row_matches_header_width() {
        let f = generate(Kind::Ktriangles, &GenParams { n: 60, k: Some(1), ..Default::default() }, 4).unwrap();
        let r = run_one(Command::CoverTriangles, &f, &RunOptions::default()).unwrap();
        assert_eq!(r.csv_row().split(',').count(), CSV_HEADER.split(',').count());
    }
}
