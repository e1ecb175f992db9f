//! Recovering a hard partition from a factor `U`.
//!
//! Three schemes are available: direct rounding (each node joins the column
//! holding its largest entry), K-means on the rows of `U`, and K-means with
//! residuals scaled by node degree (`min |D (Phi X_c - U)|_F^2`).

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::solver::FactorMatrix;

/// Community label per node; labels are `0..k0` and all of them are used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    labels: Vec<usize>,
    k0: usize,
}

impl Partition {
    /// Relabels `raw` onto `0..k0`, keeping the relative order of label values.
    pub fn from_labels(raw: Vec<usize>) -> Partition {
        let mut used: Vec<usize> = raw.clone();
        used.sort_unstable();
        used.dedup();
        let labels = raw
            .iter()
            .map(|l| used.binary_search(l).expect("label collected above"))
            .collect();
        Partition {
            labels,
            k0: used.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k0];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Writes `node_id label` lines using the graph's original identifiers.
    pub fn write_labels<W: Write>(&self, g: &Graph, mut w: W) -> std::io::Result<()> {
        for (i, &l) in self.labels.iter().enumerate() {
            writeln!(w, "{} {}", g.node_id(i), l)?;
        }
        w.flush()
    }

    pub fn read_labels(path: impl AsRef<Path>, g: &Graph) -> Result<Partition> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse_labels(file, g)
    }

    /// Parses `node_id label` lines (`#` comments allowed). Every node of
    /// `g` must be labelled exactly once.
    pub fn parse_labels<R: Read>(reader: R, g: &Graph) -> Result<Partition> {
        let mut labels: Vec<Option<usize>> = vec![None; g.n()];
        for (lineno, line) in BufReader::new(reader).lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(|e| Error::io("<labels>", e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| Error::Parse { line: lineno, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(bad("expected `node label`".into()));
            }
            let id: u64 = fields[0]
                .parse()
                .map_err(|_| bad(format!("invalid node identifier `{}`", fields[0])))?;
            let label: usize = fields[1]
                .parse()
                .map_err(|_| bad(format!("invalid label `{}`", fields[1])))?;
            let i = g
                .index_of(id)
                .ok_or_else(|| bad(format!("node {id} is not in the graph")))?;
            if labels[i].replace(label).is_some() {
                return Err(bad(format!("node {id} labelled twice")));
            }
        }
        let got = labels.iter().filter(|l| l.is_some()).count();
        if got != g.n() {
            return Err(Error::SizeMismatch {
                expected: g.n(),
                got,
            });
        }
        Ok(Partition::from_labels(labels.into_iter().map(Option::unwrap).collect()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Recovery {
    #[default]
    Rounding,
    KMeans,
    WKMeans,
}

impl FromStr for Recovery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rounding" => Ok(Recovery::Rounding),
            "kmeans" => Ok(Recovery::KMeans),
            "wkmeans" => Ok(Recovery::WKMeans),
            other => Err(Error::config(format!(
                "unknown recovery `{other}` (expected rounding, kmeans or wkmeans)"
            ))),
        }
    }
}

impl fmt::Display for Recovery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Recovery::Rounding => "rounding",
            Recovery::KMeans => "kmeans",
            Recovery::WKMeans => "wkmeans",
        })
    }
}

pub fn recover<R: Rng + ?Sized>(u: &FactorMatrix, scheme: Recovery, g: &Graph, rng: &mut R) -> Result<Partition> {
    match scheme {
        Recovery::Rounding => Ok(recover_rounding(u)),
        Recovery::KMeans => recover_kmeans(u, u.k(), None, rng),
        Recovery::WKMeans => recover_kmeans(u, u.k(), Some(g.degrees()), rng),
    }
}

/// Label of each node is the column of its largest entry (lowest on ties).
pub fn recover_rounding(u: &FactorMatrix) -> Partition {
    Partition::from_labels(u.rows().map(|r| r.argmax()).collect())
}

/// K-means (optionally degree weighted) on the rows of `U`.
pub fn recover_kmeans<R: Rng + ?Sized>(
    u: &FactorMatrix,
    k: usize,
    weights: Option<&[f64]>,
    rng: &mut R,
) -> Result<Partition> {
    let fit = kmeans(&u.to_dense(), u.k(), k, weights, rng)?;
    Ok(Partition::from_labels(fit.labels))
}

pub const KMEANS_RESTARTS: usize = 5;
pub const KMEANS_MAX_ITERS: usize = 100;
/// Stop once no centroid moves more than this (squared Euclidean).
pub const KMEANS_MOVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    /// Row-major `k x dim`.
    pub centroids: Vec<f64>,
    pub objective: f64,
    /// Objective after every assignment step.
    pub history: Vec<f64>,
}

/// Best of [`KMEANS_RESTARTS`] k-means++ seeded Lloyd runs.
///
/// `points` is row-major `n x dim`. With `weights = Some(w)` point `i`
/// contributes `w_i^2 |x_i - c|^2`, i.e. the residual is scaled by `w_i`.
pub fn kmeans<R: Rng + ?Sized>(
    points: &[f64],
    dim: usize,
    k: usize,
    weights: Option<&[f64]>,
    rng: &mut R,
) -> Result<KMeansFit> {
    if dim == 0 || !points.len().is_multiple_of(dim) {
        return Err(Error::config("points length is not a multiple of dim"));
    }
    let n = points.len() / dim;
    if k < 1 || k > n {
        return Err(Error::config(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let w2: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    got: w.len(),
                });
            }
            if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::config("k-means weights must be finite and nonnegative"));
            }
            w.iter().map(|x| x * x).collect()
        }
        None => vec![1.0; n],
    };

    let mut best: Option<KMeansFit> = None;
    for _ in 0..KMEANS_RESTARTS {
        let fit = lloyd(points, dim, k, &w2, rng);
        if best.as_ref().is_none_or(|b| fit.objective < b.objective) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[inline]
fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    match WeightedIndex::new(weights) {
        Ok(dist) => dist.sample(rng),
        // All weights zero: every remaining choice is equally (un)useful.
        Err(_) => rng.random_range(0..weights.len()),
    }
}

fn seed_plus_plus<R: Rng + ?Sized>(points: &[f64], dim: usize, k: usize, w2: &[f64], rng: &mut R) -> Vec<f64> {
    let n = w2.len();
    let mut centroids = Vec::with_capacity(k * dim);
    let first = sample_index(w2, rng);
    centroids.extend_from_slice(&points[first * dim..(first + 1) * dim]);
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| dist_sq(&points[i * dim..(i + 1) * dim], &centroids[..dim]))
        .collect();
    let mut scores = vec![0.0; n];
    for c in 1..k {
        for i in 0..n {
            scores[i] = w2[i] * nearest[i];
        }
        let next = sample_index(&scores, rng);
        centroids.extend_from_slice(&points[next * dim..(next + 1) * dim]);
        let cen = &centroids[c * dim..(c + 1) * dim];
        for i in 0..n {
            nearest[i] = nearest[i].min(dist_sq(&points[i * dim..(i + 1) * dim], cen));
        }
    }
    centroids
}

fn assign(points: &[f64], dim: usize, centroids: &[f64], w2: &[f64], labels: &mut [usize]) -> f64 {
    let k = centroids.len() / dim;
    let mut objective = 0.0;
    for (i, label) in labels.iter_mut().enumerate() {
        let x = &points[i * dim..(i + 1) * dim];
        let mut best = (0, f64::INFINITY);
        for c in 0..k {
            let d = dist_sq(x, &centroids[c * dim..(c + 1) * dim]);
            if d < best.1 {
                best = (c, d);
            }
        }
        *label = best.0;
        objective += w2[i] * best.1;
    }
    objective
}

fn lloyd<R: Rng + ?Sized>(points: &[f64], dim: usize, k: usize, w2: &[f64], rng: &mut R) -> KMeansFit {
    let n = w2.len();
    let mut centroids = seed_plus_plus(points, dim, k, w2, rng);
    let mut labels = vec![0usize; n];
    let mut history = Vec::new();

    for _ in 0..KMEANS_MAX_ITERS {
        history.push(assign(points, dim, &centroids, w2, &mut labels));

        let mut sums = vec![0.0; k * dim];
        let mut mass = vec![0.0; k];
        let mut plain = vec![0.0; k * dim];
        let mut count = vec![0usize; k];
        for i in 0..n {
            let (c, x) = (labels[i], &points[i * dim..(i + 1) * dim]);
            mass[c] += w2[i];
            count[c] += 1;
            for t in 0..dim {
                sums[c * dim + t] += w2[i] * x[t];
                plain[c * dim + t] += x[t];
            }
        }

        // Weighted cost of each point against its current centroid, for reseeding.
        let mut cost: Vec<f64> = (0..n)
            .map(|i| {
                let c = labels[i];
                w2[i] * dist_sq(&points[i * dim..(i + 1) * dim], &centroids[c * dim..(c + 1) * dim])
            })
            .collect();

        let mut moved: f64 = 0.0;
        for c in 0..k {
            let new: Vec<f64> = if count[c] == 0 {
                // Empty cluster: restart it at the currently worst-served point.
                let far = (0..n).fold(0, |b, i| if cost[i] > cost[b] { i } else { b });
                cost[far] = 0.0;
                points[far * dim..(far + 1) * dim].to_vec()
            } else if mass[c] > 0.0 {
                sums[c * dim..(c + 1) * dim].iter().map(|s| s / mass[c]).collect()
            } else {
                // Only zero-weight members: they do not affect the objective.
                plain[c * dim..(c + 1) * dim].iter().map(|s| s / count[c] as f64).collect()
            };
            let cen = &mut centroids[c * dim..(c + 1) * dim];
            moved = moved.max(dist_sq(cen, &new));
            cen.copy_from_slice(&new);
        }
        if moved < KMEANS_MOVE_TOL {
            break;
        }
    }
    let objective = assign(points, dim, &centroids, w2, &mut labels);
    history.push(objective);
    KMeansFit {
        labels,
        centroids,
        objective,
        history,
    }
}
