//! Proximal row-by-row (RBR) block coordinate descent for
//!
//! ```text
//! min <C, U U^T>  s.t.  |u_i| = 1,  |u_i|_0 <= p,  U >= 0
//! ```
//!
//! Each row update minimizes the objective in `u_i` plus `sigma/2 |x - u_i|^2`.
//! On the sphere that reduces to `min b^T x` with
//! `b = 2 C_{-i}^i U_{-i} - sigma u_i`, which has a closed-form solution
//! (see [`subproblem_solve`]). `b` is formed from the adjacency, the degrees
//! and a maintained accumulator `d^T U` in `O(d_i p + k)`.
//!
//! With `p = k` and `sigma > 0` a sequential sweep decreases the objective
//! by at least `sigma/2 |U_new - U_old|_F^2`. The asynchronous driver gives
//! up that guarantee in exchange for lock-free parallel row updates.

mod factor;
mod kernel;
mod objective;
mod parallel;
mod subproblem;

use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use factor::{FactorMatrix, InitScheme, Row};
pub use objective::objective;
pub use subproblem::subproblem_solve;

use crate::cluster::{recover, Partition, Recovery};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::{modularity, MetricsReport};
use kernel::{compute_b_into, update_row, Workspace};
use parallel::SharedFactor;

/// Default proximal weight. Descent holds for any positive value.
pub const DEFAULT_SIGMA: f64 = 0.01;

/// Accumulator drift (relative to `|d|_1`) that triggers a recompute.
pub const DRIFT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Columns of `U`, the target community count.
    pub k: usize,
    /// Row sparsity cap, `1 <= p <= k`.
    pub p: usize,
    pub sigma: f64,
    pub max_sweeps: usize,
    pub restarts: usize,
    /// Round `U` in place every this many sweeps; 0 disables.
    pub rounding_every: usize,
    pub threads: usize,
    pub seed: u64,
    /// Sequential stopping threshold on `|U^t - U^{t-1}|_F^2`;
    /// `None` means `1e-8 * n`. Ignored by the asynchronous driver.
    pub tol: Option<f64>,
    pub init: InitScheme,
    pub recovery: Recovery,
}

impl SolverConfig {
    pub fn new(k: usize) -> Self {
        SolverConfig {
            k,
            p: k,
            sigma: DEFAULT_SIGMA,
            max_sweeps: 100,
            restarts: 10,
            rounding_every: 0,
            threads: 1,
            seed: 0,
            tol: None,
            init: InitScheme::default(),
            recovery: Recovery::default(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.p < 1 || self.p > self.k {
            return Err(Error::config(format!("need 1 <= p <= k, got p = {}, k = {}", self.p, self.k)));
        }
        if self.k > n {
            return Err(Error::config(format!("k = {} exceeds node count {n}", self.k)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::config(format!("sigma = {} must be finite and >= 0", self.sigma)));
        }
        if self.max_sweeps < 1 {
            return Err(Error::config("max_sweeps must be >= 1"));
        }
        if self.restarts < 1 {
            return Err(Error::config("restarts must be >= 1"));
        }
        if self.threads < 1 {
            return Err(Error::config("threads must be >= 1"));
        }
        if let Some(tol) = self.tol {
            if !(tol >= 0.0) {
                return Err(Error::config("tol must be >= 0"));
            }
        }
        Ok(())
    }

    fn tol_for(&self, n: usize) -> f64 {
        self.tol.unwrap_or(1e-8 * n as f64)
    }
}

/// Passed to a progress callback after every sweep (before any in-loop rounding).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepReport {
    pub sweep: usize,
    pub objective: f64,
    pub delta_sq: f64,
}

pub type Progress<'a> = &'a mut dyn FnMut(&SweepReport);

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunTrace {
    pub sweeps: usize,
    /// `|U^t - U^{t-1}|_F^2` per sweep.
    pub delta_sq: Vec<f64>,
    pub converged: bool,
    pub roundings: usize,
    pub dtu_refreshes: usize,
    /// Largest observed `|d^T U - sum d_i u_i|_inf` after a sweep (asynchronous driver).
    pub max_drift: f64,
}

/// `b` for row `i` against the current `U` and stored accumulator.
pub fn compute_b(g: &Graph, u: &FactorMatrix, i: usize, sigma: f64) -> Vec<f64> {
    let mut b = vec![0.0; u.k()];
    compute_b_into(g, u, i, sigma, &mut b);
    b
}

/// One Gauss-Seidel pass over rows `0..n`; returns `|U_new - U_old|_F^2`.
pub fn sweep_sequential(g: &Graph, u: &mut FactorMatrix, sigma: f64) -> f64 {
    let mut ws = Workspace::new(u.k(), u.p());
    let p = u.p();
    (0..g.n()).map(|i| update_row(g, u, i, p, sigma, &mut ws)).sum()
}

fn check_factor(g: &Graph, u: &FactorMatrix, cfg: &SolverConfig) -> Result<()> {
    cfg.validate(g.n())?;
    if u.n() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            got: u.n(),
        });
    }
    if (u.k(), u.p()) != (cfg.k, cfg.p) {
        return Err(Error::config(format!(
            "factor has (k, p) = ({}, {}), config asks for ({}, {})",
            u.k(),
            u.p(),
            cfg.k,
            cfg.p
        )));
    }
    Ok(())
}

/// Sequential RBR until `max_sweeps` or `delta_sq < tol`.
pub fn run_sequential(
    g: &Graph,
    u: &mut FactorMatrix,
    cfg: &SolverConfig,
    mut progress: Option<Progress<'_>>,
) -> Result<RunTrace> {
    check_factor(g, u, cfg)?;
    let tol = cfg.tol_for(g.n());
    let mut trace = RunTrace::default();
    for t in 1..=cfg.max_sweeps {
        let delta = sweep_sequential(g, u, cfg.sigma);
        trace.sweeps = t;
        trace.delta_sq.push(delta);
        if let Some(cb) = progress.as_mut() {
            cb(&SweepReport {
                sweep: t,
                objective: objective(g, u),
                delta_sq: delta,
            });
        }
        if cfg.rounding_every > 0 && t % cfg.rounding_every == 0 {
            u.round_in_place(g);
            trace.roundings += 1;
        }
        if delta < tol {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// Asynchronous parallel RBR for exactly `max_sweeps` sweeps.
///
/// Rows are claimed dynamically by `cfg.threads` workers that read and
/// write `U` and `d^T U` without locks. After each sweep the accumulator
/// is checked against a recomputation and refreshed if the drift exceeds
/// `DRIFT_TOLERANCE * |d|_1`. With one thread the iterates are identical
/// to [`run_sequential`].
pub fn run_async(
    g: &Graph,
    u: &mut FactorMatrix,
    cfg: &SolverConfig,
    mut progress: Option<Progress<'_>>,
) -> Result<RunTrace> {
    check_factor(g, u, cfg)?;
    let drift_limit = DRIFT_TOLERANCE * g.total_degree();
    let mut shared = SharedFactor::from_factor(u);
    let mut trace = RunTrace::default();
    for t in 1..=cfg.max_sweeps {
        let delta = shared.sweep(g, cfg.sigma, cfg.threads);
        trace.sweeps = t;
        trace.delta_sq.push(delta);
        shared.store_into(u);

        let mut reload = false;
        let drift = u.dtu_drift(g);
        trace.max_drift = trace.max_drift.max(drift);
        if drift > drift_limit {
            u.refresh_dtu(g);
            trace.dtu_refreshes += 1;
            reload = true;
        }
        if let Some(cb) = progress.as_mut() {
            cb(&SweepReport {
                sweep: t,
                objective: objective(g, u),
                delta_sq: delta,
            });
        }
        if cfg.rounding_every > 0 && t % cfg.rounding_every == 0 {
            u.round_in_place(g);
            trace.roundings += 1;
            reload = true;
        }
        if reload {
            shared = SharedFactor::from_factor(u);
        }
    }
    Ok(trace)
}

/// Sequential when `threads == 1`, asynchronous otherwise.
pub fn solve(g: &Graph, u: &mut FactorMatrix, cfg: &SolverConfig, progress: Option<Progress<'_>>) -> Result<RunTrace> {
    if cfg.threads <= 1 {
        run_sequential(g, u, cfg, progress)
    } else {
        run_async(g, u, cfg, progress)
    }
}

/// RNG of restart `r`: stream `r` of the ChaCha8 generator keyed by `seed`.
pub fn restart_rng(seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub objective_initial: f64,
    pub objective_final: f64,
    /// Objective of the indicator factor of the recovered partition.
    pub objective_rounded: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub modularity: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Detection {
    pub partition: Partition,
    pub report: MetricsReport,
    pub restarts: Vec<RestartSummary>,
    pub best_restart: usize,
}

/// Solve from `restarts` random starting points, recover a partition from
/// each and keep the one with the highest modularity (earliest on ties).
pub fn detect(g: &Graph, cfg: &SolverConfig) -> Result<Detection> {
    cfg.validate(g.n())?;
    let started = Instant::now();
    let mut best: Option<(usize, Partition, f64)> = None;
    let mut summaries = Vec::with_capacity(cfg.restarts);

    for r in 0..cfg.restarts {
        let t0 = Instant::now();
        let mut rng = restart_rng(cfg.seed, r);
        let mut u = FactorMatrix::random(g, cfg.k, cfg.p, cfg.init, &mut rng)?;
        let objective_initial = objective(g, &u);
        let trace = solve(g, &mut u, cfg, None)?;
        let objective_final = objective(g, &u);
        let partition = recover(&u, cfg.recovery, g, &mut rng)?;
        let q = modularity(g, &partition)?;
        let rounded = FactorMatrix::from_labels(g, partition.k0(), partition.labels())?;
        let summary = RestartSummary {
            restart: r,
            objective_initial,
            objective_final,
            objective_rounded: objective(g, &rounded),
            sweeps: trace.sweeps,
            converged: trace.converged,
            modularity: q,
            seconds: t0.elapsed().as_secs_f64(),
        };
        log::debug!(
            "restart {r}: f {:.6} -> {:.6}, {} sweeps, Q = {q:.6}, k0 = {}",
            objective_initial,
            objective_final,
            trace.sweeps,
            partition.k0()
        );
        summaries.push(summary);
        if best.as_ref().is_none_or(|(_, _, bq)| q > *bq) {
            best = Some((r, partition, q));
        }
    }

    let (best_restart, partition, _) = best.expect("restarts >= 1");
    let mut report = MetricsReport::evaluate(g, &partition, None)?;
    report.wall_time_s = started.elapsed().as_secs_f64();
    Ok(Detection {
        partition,
        report,
        restarts: summaries,
        best_restart,
    })
}
