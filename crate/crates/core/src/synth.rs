//! Planted-partition benchmark graphs (SBM and degree-corrected SBM).
//!
//! `n = m * k` nodes are split into `k` consecutive blocks of `m` nodes.
//! Each unordered pair `i < j` in blocks `a, b` is joined independently
//! with probability `min(1, theta_i * theta_j * B_ab)` where `B_aa = q` and
//! `B_ab = ratio * q` off the diagonal. In the degree-corrected model the
//! `theta_i` are i.i.d. Pareto with shape `alpha` and scale
//! `(alpha - 1) / alpha`, which puts their mean at one.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, so a
//! configuration reproduces bit-identical graphs across platforms.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Pareto};
use serde::Serialize;

use crate::cluster::Partition;
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub k: usize,
    /// Nodes per community.
    pub m: usize,
    pub q: f64,
    pub ratio: f64,
    pub alpha: f64,
    pub seed: u64,
    pub degree_corrected: bool,
}

impl SynthConfig {
    pub fn new(k: usize, m: usize, q: f64, alpha: f64, seed: u64) -> Self {
        SynthConfig {
            k,
            m,
            q,
            ratio: 0.3,
            alpha,
            seed,
            degree_corrected: true,
        }
    }

    pub fn n(&self) -> usize {
        self.m * self.k
    }

    /// Block connection probability between communities `a` and `b`.
    pub fn block_probability(&self, a: usize, b: usize) -> f64 {
        if a == b {
            self.q
        } else {
            self.ratio * self.q
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::config("synthetic graphs need k >= 2"));
        }
        if self.m < 1 {
            return Err(Error::config("synthetic graphs need m >= 1"));
        }
        // q = 0 is accepted; it yields an edgeless graph, rejected by Graph.
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::config(format!("q = {} outside [0, 1]", self.q)));
        }
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return Err(Error::config(format!("ratio = {} outside (0, 1]", self.ratio)));
        }
        if self.degree_corrected && !(self.alpha > 1.0 && self.alpha.is_finite()) {
            return Err(Error::config(format!(
                "Pareto shape alpha = {} must exceed 1 for a finite mean",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub labels: Vec<usize>,
    pub theta: Vec<f64>,
    pub k: usize,
}

impl GroundTruth {
    pub fn partition(&self) -> Partition {
        Partition::from_labels(self.labels.clone())
    }
}

/// Pareto scale giving unit mean for shape `alpha`.
pub fn pareto_scale(alpha: f64) -> f64 {
    (alpha - 1.0) / alpha
}

/// Draws `count` i.i.d. Pareto(`alpha`, `(alpha-1)/alpha`) samples.
pub fn sample_pareto_theta<R: Rng + ?Sized>(alpha: f64, count: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::config(format!(
            "Pareto shape alpha = {alpha} must exceed 1 for a finite mean"
        )));
    }
    let dist = Pareto::new(pareto_scale(alpha), alpha)
        .map_err(|e| Error::config(format!("Pareto distribution: {e}")))?;
    Ok((0..count).map(|_| dist.sample(rng)).collect())
}

/// Samples a graph and its planted partition.
pub fn generate_dcsbm(cfg: &SynthConfig) -> Result<(Graph, GroundTruth)> {
    cfg.validate()?;
    let n = cfg.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let theta = if cfg.degree_corrected {
        sample_pareto_theta(cfg.alpha, n, &mut rng)?
    } else {
        vec![1.0; n]
    };
    let labels: Vec<usize> = (0..n).map(|i| i / cfg.m).collect();

    let intra = cfg.q;
    let inter = cfg.ratio * cfg.q;
    let mut edges = Vec::new();
    for i in 0..n {
        let (ti, ci) = (theta[i], labels[i]);
        for j in (i + 1)..n {
            let b = if labels[j] == ci { intra } else { inter };
            let prob = (ti * theta[j] * b).min(1.0);
            if rng.random::<f64>() < prob {
                edges.push((i, j));
            }
        }
    }
    let graph = Graph::from_edges(n, edges)?;
    Ok((
        graph,
        GroundTruth {
            labels,
            theta,
            k: cfg.k,
        },
    ))
}
