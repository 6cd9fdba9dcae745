//! Parameter sweeps: generate an instance per (n, seed) cell, run it, and
//! summarize per n.

use std::collections::BTreeMap;

use anyhow::Result;
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use crate::instance::{generate, GenParams, Layout};
use crate::run::{run_one, Command, RunOptions, RunReport};
use crate::{exit_code, SchemaError};

#[derive(Args, Clone, Debug, Default)]
pub struct SweepArgs {
    /// Generate and run instead of reading a file: `n=a..b` doubles from a
    /// to b, `n=a,b,c` lists sizes.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Seeds per size in a sweep (0..seeds). ULP sweeps use even seeds for
    /// feasible instances and odd seeds for infeasible ones.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// Sweep generator: dimension of ULP instances.
    #[arg(long)]
    pub d: Option<usize>,
    /// Sweep generator: planted margin.
    #[arg(long)]
    pub margin: Option<f64>,
    /// Sweep generator: disk layout.
    #[arg(long, value_enum)]
    pub layout: Option<Layout>,
}

/// Sizes named by a `--sweep` value.
pub fn parse_sweep(spec: &str) -> Result<Vec<usize>> {
    let bad = || SchemaError(format!("bad --sweep `{spec}`: expected n=a..b or n=a,b,c"));
    let body = spec.trim().strip_prefix("n=").ok_or_else(bad)?;
    let num = |s: &str| s.trim().parse::<usize>().ok().filter(|&v| v > 0).ok_or_else(bad);
    let ns = match body.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(bad().into());
            }
            std::iter::successors(Some(a), |&x| x.checked_mul(2)).take_while(|&x| x <= b).collect()
        }
        None => body.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
    };
    Ok(ns)
}

#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub n: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub exit_code: i32,
    #[serde(skip)]
    pub report: Option<RunReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub runs: usize,
    pub errors: usize,
    pub verified: usize,
    pub median_total: Option<u64>,
    pub max_total: Option<u64>,
    pub median_iterations: Option<usize>,
    /// Median of each envelope measure over the successful runs.
    pub median_envelope: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub command: Command,
    pub generator: GenParams,
    pub seeds: u64,
    pub sizes: Vec<SizeSummary>,
    pub failures: Vec<Cell>,
}

fn median<T: Copy + PartialOrd>(mut v: Vec<T>) -> Option<T> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    v.get(v.len() / 2).copied()
}

fn cell_params(cmd: Command, base: &GenParams, n: usize, seed: u64) -> GenParams {
    let mut p = GenParams { n, ..base.clone() };
    match cmd {
        Command::SolveUlp => p.feasible = Some(seed % 2 == 0),
        Command::LearnBall => {
            p.k = Some(1);
            p.layout.get_or_insert(Layout::Separable);
        }
        _ => {}
    }
    p
}

fn run_cell(cmd: Command, base: &GenParams, opts: &RunOptions, n: usize, seed: u64) -> Cell {
    let result = generate(cmd.kind(), &cell_params(cmd, base, n, seed), seed).and_then(|f| run_one(cmd, &f, opts));
    match result {
        Ok(r) => Cell { n, seed, error: None, exit_code: 0, report: Some(r) },
        Err(e) => Cell { n, seed, error: Some(format!("{e:#}")), exit_code: exit_code(&e), report: None },
    }
}

/// Runs every (n, seed) cell, in parallel unless `opts.sequential`. Cells
/// come back in (n, seed) order either way.
pub fn run_sweep(cmd: Command, ns: &[usize], sweep: &SweepArgs, opts: &RunOptions) -> Vec<Cell> {
    let base = GenParams { n: 0, d: sweep.d, k: opts.k, feasible: None, margin: sweep.margin, eps: opts.eps, layout: sweep.layout };
    let cells: Vec<(usize, u64)> = ns.iter().flat_map(|&n| (0..sweep.seeds).map(move |s| (n, s))).collect();
    if opts.sequential {
        cells.iter().map(|&(n, s)| run_cell(cmd, &base, opts, n, s)).collect()
    } else {
        cells.par_iter().map(|&(n, s)| run_cell(cmd, &base, opts, n, s)).collect()
    }
}

pub fn summarize(cmd: Command, ns: &[usize], sweep: &SweepArgs, opts: &RunOptions, cells: &[Cell]) -> SweepSummary {
    let sizes = ns
        .iter()
        .map(|&n| {
            let row: Vec<&Cell> = cells.iter().filter(|c| c.n == n).collect();
            let ok: Vec<&RunReport> = row.iter().filter_map(|c| c.report.as_ref()).collect();
            let mut env: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for r in &ok {
                for e in &r.envelope {
                    env.entry(e.measure.clone()).or_default().push(e.value);
                }
            }
            SizeSummary {
                n,
                runs: row.len(),
                errors: row.len() - ok.len(),
                verified: ok.iter().filter(|r| r.verified()).count(),
                median_total: median(ok.iter().map(|r| r.total_queries).collect()),
                max_total: ok.iter().map(|r| r.total_queries).max(),
                median_iterations: median(ok.iter().map(|r| r.iterations.len()).collect()),
                median_envelope: env.into_iter().filter_map(|(k, v)| Some((k, median(v)?))).collect(),
            }
        })
        .collect();
    let base = GenParams { n: 0, d: sweep.d, k: opts.k, feasible: None, margin: sweep.margin, eps: opts.eps, layout: sweep.layout };
    SweepSummary {
        command: cmd,
        generator: base,
        seeds: sweep.seeds,
        sizes,
        failures: cells.iter().filter(|c| c.error.is_some()).cloned().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_specs() {
        assert_eq!(parse_sweep("n=256..4096").unwrap(), vec![256, 512, 1024, 2048, 4096]);
        assert_eq!(parse_sweep("n=100..300").unwrap(), vec![100, 200]);
        assert_eq!(parse_sweep("n=100,200,400").unwrap(), vec![100, 200, 400]);
        for bad in ["256..4096", "n=4096..256", "n=0..8", "n=a,b", "n="] {
            assert!(parse_sweep(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn parallel_and_sequential_sweeps_agree() {
        let sweep = SweepArgs { seeds: 3, ..Default::default() };
        let ns = [32, 64];
        let a = run_sweep(Command::SolveUlp, &ns, &sweep, &RunOptions::default());
        let b = run_sweep(Command::SolveUlp, &ns, &sweep, &RunOptions { sequential: true, ..Default::default() });
        let key = |c: &Cell| c.report.as_ref().map(|r| (r.outcome.clone(), r.ledger));
        assert_eq!(a.iter().map(key).collect::<Vec<_>>(), b.iter().map(key).collect::<Vec<_>>());
        assert!(a.iter().all(|c| c.report.as_ref().is_some_and(RunReport::verified)));
        let s = summarize(Command::SolveUlp, &ns, &sweep, &RunOptions::default(), &a);
        assert_eq!(s.sizes.len(), 2);
        assert_eq!(s.sizes[0].runs, 3);
    }
}
