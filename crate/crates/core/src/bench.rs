//! Benchmark protocols on planted-partition graphs.
//!
//! * `table2` / `table3`: misclassification and runtime at `q = 0.1` with
//!   Pareto shape 1.4 / 1.8, for `(m, k)` in `(200, 2), (450, 2), (200, 3), (200, 4)`.
//! * `shape-sweep`: misclassification against the Pareto shape
//!   `1.1, 1.2, ..., 1.9` for `q` in `0.05, 0.1, 0.15, 0.2` and `m` in `200, 450`, `k = 2`.
//! * `k-sweep`: CC, S and Q for `k` in `5, 10, 20, 30, 50, 100, 200` with `p = 5`.
//! * `p-sweep`: CC, S and Q for `p` in `1, 2, 5, 10, 20` with `k = 100`.
//!
//! Every detection runs a batch of restarts and keeps the best modularity.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::{misclassification, MetricsReport};
use crate::solver::{detect, SolverConfig};
use crate::synth::{generate_dcsbm, SynthConfig};

pub const TABLE_GRID: [(usize, usize); 4] = [(200, 2), (450, 2), (200, 3), (200, 4)];
pub const TABLE_Q: f64 = 0.1;
pub const TABLE2_ALPHA: f64 = 1.4;
pub const TABLE3_ALPHA: f64 = 1.8;
pub const SHAPE_ALPHAS: [f64; 9] = [1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9];
pub const SHAPE_QS: [f64; 4] = [0.05, 0.1, 0.15, 0.2];
pub const SHAPE_MS: [usize; 2] = [200, 450];
pub const K_SWEEP: [usize; 7] = [5, 10, 20, 30, 50, 100, 200];
pub const K_SWEEP_P: usize = 5;
pub const P_SWEEP: [usize; 5] = [1, 2, 5, 10, 20];
pub const P_SWEEP_K: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Table2,
    Table3,
    ShapeSweep,
    KSweep,
    PSweep,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "table2" => Suite::Table2,
            "table3" => Suite::Table3,
            "shape-sweep" => Suite::ShapeSweep,
            "k-sweep" => Suite::KSweep,
            "p-sweep" => Suite::PSweep,
            other => return Err(Error::UnknownSuite(other.to_string())),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Table2 => "table2",
            Suite::Table3 => "table3",
            Suite::ShapeSweep => "shape-sweep",
            Suite::KSweep => "k-sweep",
            Suite::PSweep => "p-sweep",
        })
    }
}

/// Solver settings shared by every run of a suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchOptions {
    pub trials: usize,
    pub seed: u64,
    pub restarts: usize,
    pub sigma: f64,
    pub max_sweeps: usize,
    pub rounding_every: usize,
    pub threads: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            trials: 20,
            seed: 0,
            restarts: 10,
            sigma: crate::solver::DEFAULT_SIGMA,
            max_sweeps: 100,
            rounding_every: 0,
            threads: 1,
        }
    }
}

impl BenchOptions {
    pub fn solver_config(&self, k: usize, p: usize, seed: u64) -> SolverConfig {
        SolverConfig {
            p,
            sigma: self.sigma,
            max_sweeps: self.max_sweeps,
            restarts: self.restarts,
            rounding_every: self.rounding_every,
            threads: self.threads,
            seed,
            ..SolverConfig::new(k)
        }
    }
}

/// The synthetic graph used by the k- and p-sweeps when none is supplied:
/// 50 planted communities of 100 nodes.
pub fn sweep_graph_config(seed: u64) -> SynthConfig {
    SynthConfig {
        ratio: 0.02,
        ..SynthConfig::new(50, 100, 0.3, 1.8, seed)
    }
}

/// SplitMix64 finalizer over a combination of inputs; gives per-draw seeds.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Aggregate of repeated detections on planted-partition draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSummary {
    pub m: usize,
    pub k: usize,
    pub q: f64,
    pub alpha: f64,
    pub errs: Vec<f64>,
    pub times: Vec<f64>,
}

impl SyntheticSummary {
    pub fn err_mean(&self) -> f64 {
        mean(&self.errs)
    }

    pub fn time_mean(&self) -> f64 {
        mean(&self.times)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// `trials` graph draws at `(m, k, q, alpha)`, each solved with `p = k`.
/// `tag` separates the seed streams of different grid cells.
pub fn run_synthetic(m: usize, k: usize, q: f64, alpha: f64, tag: u64, opts: &BenchOptions) -> Result<SyntheticSummary> {
    let mut errs = Vec::with_capacity(opts.trials);
    let mut times = Vec::with_capacity(opts.trials);
    for trial in 0..opts.trials {
        let graph_seed = derive_seed(opts.seed, tag, trial as u64);
        let (g, truth) = generate_dcsbm(&SynthConfig::new(k, m, q, alpha, graph_seed))?;
        let cfg = opts.solver_config(k, k, derive_seed(graph_seed, 1, 0));
        let started = Instant::now();
        let det = detect(&g, &cfg)?;
        times.push(started.elapsed().as_secs_f64());
        errs.push(misclassification(&truth.partition(), &det.partition)?.err);
    }
    Ok(SyntheticSummary {
        m,
        k,
        q,
        alpha,
        errs,
        times,
    })
}

/// One `(k, p)` point of a metric sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub k: usize,
    pub p: usize,
    pub report: MetricsReport,
}

/// Runs detection for every `(k, p)` in `grid` on `g` and reports CC, S, Q.
pub fn run_metric_sweep(g: &Graph, grid: &[(usize, usize)], opts: &BenchOptions) -> Result<Vec<SweepPoint>> {
    grid.iter()
        .map(|&(k, p)| {
            let cfg = opts.solver_config(k, p, opts.seed);
            let det = detect(g, &cfg)?;
            Ok(SweepPoint {
                k,
                p,
                report: det.report,
            })
        })
        .collect()
}

pub fn k_sweep_grid() -> Vec<(usize, usize)> {
    K_SWEEP.iter().map(|&k| (k, K_SWEEP_P.min(k))).collect()
}

pub fn p_sweep_grid() -> Vec<(usize, usize)> {
    P_SWEEP.iter().map(|&p| (P_SWEEP_K, p)).collect()
}

/// A CSV table: fixed header plus rows.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl BenchTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()
    }
}

pub const TABLE_HEADER: [&str; 9] = ["m", "k", "n", "q", "alpha", "trials", "err_mean", "err_max", "time_mean_s"];
pub const SHAPE_HEADER: [&str; 7] = ["m", "k", "q", "alpha", "trials", "err_mean", "time_mean_s"];
pub const METRIC_HEADER: [&str; 7] = ["k", "p", "CC", "S", "Q", "k0", "time_s"];

/// Runs a suite. The k- and p-sweeps use `graph` when given and the
/// default sweep graph otherwise.
pub fn run_suite(suite: Suite, opts: &BenchOptions, graph: Option<&Graph>) -> Result<BenchTable> {
    match suite {
        Suite::Table2 | Suite::Table3 => {
            let alpha = if suite == Suite::Table2 { TABLE2_ALPHA } else { TABLE3_ALPHA };
            let mut rows = Vec::new();
            for (idx, &(m, k)) in TABLE_GRID.iter().enumerate() {
                let s = run_synthetic(m, k, TABLE_Q, alpha, idx as u64, opts)?;
                log::info!("{suite} m={m} k={k}: err {:.4}%", 100.0 * s.err_mean());
                rows.push(vec![
                    m.to_string(),
                    k.to_string(),
                    (m * k).to_string(),
                    TABLE_Q.to_string(),
                    alpha.to_string(),
                    opts.trials.to_string(),
                    format!("{:.6}", s.err_mean()),
                    format!("{:.6}", s.errs.iter().cloned().fold(0.0, f64::max)),
                    format!("{:.6}", s.time_mean()),
                ]);
            }
            Ok(BenchTable {
                header: TABLE_HEADER.to_vec(),
                rows,
            })
        }
        Suite::ShapeSweep => {
            let mut rows = Vec::new();
            let mut tag = 0u64;
            for &m in &SHAPE_MS {
                for &q in &SHAPE_QS {
                    for &alpha in &SHAPE_ALPHAS {
                        let s = run_synthetic(m, 2, q, alpha, 100 + tag, opts)?;
                        tag += 1;
                        log::info!("shape-sweep m={m} q={q} alpha={alpha}: err {:.4}%", 100.0 * s.err_mean());
                        rows.push(vec![
                            m.to_string(),
                            "2".into(),
                            q.to_string(),
                            alpha.to_string(),
                            opts.trials.to_string(),
                            format!("{:.6}", s.err_mean()),
                            format!("{:.6}", s.time_mean()),
                        ]);
                    }
                }
            }
            Ok(BenchTable {
                header: SHAPE_HEADER.to_vec(),
                rows,
            })
        }
        Suite::KSweep | Suite::PSweep => {
            let owned;
            let g = match graph {
                Some(g) => g,
                None => {
                    owned = generate_dcsbm(&sweep_graph_config(opts.seed))?.0;
                    &owned
                }
            };
            let grid = if suite == Suite::KSweep { k_sweep_grid() } else { p_sweep_grid() };
            let grid: Vec<(usize, usize)> = grid.into_iter().filter(|&(k, _)| k <= g.n()).collect();
            let points = run_metric_sweep(g, &grid, opts)?;
            let rows = points
                .iter()
                .map(|pt| {
                    log::info!("{suite} k={} p={}: Q {:.4}", pt.k, pt.p, pt.report.modularity);
                    vec![
                        pt.k.to_string(),
                        pt.p.to_string(),
                        format!("{:.6}", pt.report.cluster_coefficient),
                        format!("{:.6}", pt.report.strength),
                        format!("{:.6}", pt.report.modularity),
                        pt.report.k0.to_string(),
                        format!("{:.6}", pt.report.wall_time_s),
                    ]
                })
                .collect();
            Ok(BenchTable {
                header: METRIC_HEADER.to_vec(),
                rows,
            })
        }
    }
}
