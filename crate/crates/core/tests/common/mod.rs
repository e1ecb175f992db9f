//! Dense and brute-force reference implementations shared by the
//! integration tests. Everything here is deliberately naive.
#![allow(dead_code)]

use rand::Rng;
use rbrcd::{FactorMatrix, Graph, Partition};

/// Random simple graph on `n` nodes with at least one edge.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, density: f64) -> Graph {
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < density {
                    edges.push((i, j));
                }
            }
        }
        if let Ok(g) = Graph::from_edges(n, edges) {
            return g;
        }
    }
}

pub fn dense_adjacency(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.n();
    let mut a = vec![vec![0.0; n]; n];
    for (i, j) in g.edges() {
        a[i][j] = 1.0;
        a[j][i] = 1.0;
    }
    a
}

/// `C = -(A - d d^T / |d|_1)` built entry by entry.
pub fn dense_c(g: &Graph) -> Vec<Vec<f64>> {
    let a = dense_adjacency(g);
    let n = g.n();
    let d: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let total: f64 = d.iter().sum();
    (0..n)
        .map(|i| (0..n).map(|j| -(a[i][j] - d[i] * d[j] / total)).collect())
        .collect()
}

/// Random feasible rows: support size in `1..=p`, positive values, unit norm.
pub fn random_rows<R: Rng>(rng: &mut R, n: usize, k: usize, p: usize) -> Vec<Vec<(usize, f64)>> {
    (0..n)
        .map(|_| {
            let size = rng.random_range(1..=p);
            let cols = rand::seq::index::sample(rng, k, size);
            let mut row: Vec<(usize, f64)> = cols.iter().map(|c| (c, 0.05 + rng.random::<f64>())).collect();
            let norm = row.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
            row.iter_mut().for_each(|e| e.1 /= norm);
            row
        })
        .collect()
}

pub fn dense_rows(u: &FactorMatrix) -> Vec<Vec<f64>> {
    (0..u.n())
        .map(|i| {
            let mut r = vec![0.0; u.k()];
            for (c, v) in u.row(i).iter() {
                r[c] = v;
            }
            r
        })
        .collect()
}

/// `2 sum_{j != i} C_ij u_j - sigma u_i`.
pub fn dense_b(c: &[Vec<f64>], u: &[Vec<f64>], i: usize, sigma: f64) -> Vec<f64> {
    let k = u[0].len();
    (0..k)
        .map(|col| {
            let s: f64 = (0..u.len()).filter(|&j| j != i).map(|j| c[i][j] * u[j][col]).sum();
            2.0 * s - sigma * u[i][col]
        })
        .collect()
}

/// `<C, U U^T>`.
pub fn dense_objective(c: &[Vec<f64>], u: &[Vec<f64>]) -> f64 {
    let n = u.len();
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = u[i].iter().zip(&u[j]).map(|(a, b)| a * b).sum();
            f += c[i][j] * dot;
        }
    }
    f
}

/// Minimum of `b^T u` over unit nonnegative `u` with at most `p` nonzeros,
/// by checking every stationary point: each vertex `e_j`, and on each face
/// `T` (|T| <= p) whose `b` entries are all negative, `-b_T / |b_T|`.
pub fn subproblem_oracle(b: &[f64], p: usize) -> f64 {
    let k = b.len();
    let mut best = b.iter().cloned().fold(f64::INFINITY, f64::min);
    for mask in 1u32..(1 << k) {
        if mask.count_ones() as usize > p {
            continue;
        }
        let face: Vec<usize> = (0..k).filter(|&j| mask & (1 << j) != 0).collect();
        if face.iter().all(|&j| b[j] < 0.0) {
            let norm = face.iter().map(|&j| b[j] * b[j]).sum::<f64>().sqrt();
            best = best.min(-norm);
        }
    }
    best
}

/// `Q = (1 / 2m) sum_ij (A_ij - d_i d_j / 2m) [c_i == c_j]`.
pub fn dense_modularity(g: &Graph, labels: &[usize]) -> f64 {
    let a = dense_adjacency(g);
    let n = g.n();
    let d: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = d.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - d[i] * d[j] / two_m;
            }
        }
    }
    q / two_m
}

fn communities(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); k];
    for (v, &l) in labels.iter().enumerate() {
        out[l].push(v);
    }
    out.retain(|c| !c.is_empty());
    out
}

/// Per-community mean of local clustering restricted to the community,
/// by enumerating neighbor pairs directly.
pub fn dense_cluster_coefficient(g: &Graph, labels: &[usize]) -> f64 {
    let a = dense_adjacency(g);
    let comms = communities(labels);
    let mut total = 0.0;
    for comm in &comms {
        let mut sum = 0.0;
        for &v in comm {
            let d = a[v].iter().sum::<f64>();
            if d <= 1.0 {
                continue;
            }
            let mut links = 0.0;
            for &s in comm {
                for &t in comm {
                    if s < t && a[v][s] == 1.0 && a[v][t] == 1.0 && a[s][t] == 1.0 {
                        links += 1.0;
                    }
                }
            }
            sum += 2.0 * links / (d * (d - 1.0));
        }
        total += sum / comm.len() as f64;
    }
    total / comms.len() as f64
}

pub fn dense_strength(g: &Graph, labels: &[usize]) -> f64 {
    let a = dense_adjacency(g);
    let n = g.n();
    let comms = communities(labels);
    let mut total = 0.0;
    for comm in &comms {
        let inside = |v: usize| comm.iter().filter(|&&t| a[v][t] == 1.0).count();
        let outside = |v: usize| (0..n).filter(|t| !comm.contains(t) && a[v][*t] == 1.0).count();
        let strong = comm.iter().all(|&v| inside(v) > outside(v));
        let sum_in: usize = comm.iter().map(|&v| inside(v)).sum();
        let sum_out: usize = comm.iter().map(|&v| outside(v)).sum();
        total += if strong {
            1.0
        } else if sum_in > sum_out {
            0.5
        } else {
            0.0
        };
    }
    total / comms.len() as f64
}

/// Misclassification as literally defined: for each detected community,
/// the largest overlap with any true community, summed, over n.
pub fn literal_err(truth: &[usize], found: &[usize]) -> f64 {
    let n = truth.len();
    let mut hit = 0usize;
    for det in communities(found) {
        let best = communities(truth)
            .iter()
            .map(|tc| det.iter().filter(|v| tc.contains(v)).count())
            .max()
            .unwrap_or(0);
        hit += best;
    }
    1.0 - hit as f64 / n as f64
}

/// Error under the best one-to-one matching of communities, by trying
/// every injective assignment.
pub fn permutation_err(truth: &[usize], found: &[usize]) -> f64 {
    let tc = communities(truth);
    let fc = communities(found);
    let overlap = |a: &[usize], b: &[usize]| a.iter().filter(|v| b.contains(v)).count();
    fn go(i: usize, fc: &[Vec<usize>], tc: &[Vec<usize>], used: &mut Vec<bool>, f: &dyn Fn(&[usize], &[usize]) -> usize) -> usize {
        if i == fc.len() {
            return 0;
        }
        // Detected community `i` stays unmatched...
        let mut best = go(i + 1, fc, tc, used, f);
        // ...or takes a free true community.
        for t in 0..tc.len() {
            if !used[t] {
                used[t] = true;
                best = best.max(f(&fc[i], &tc[t]) + go(i + 1, fc, tc, used, f));
                used[t] = false;
            }
        }
        best
    }
    let mut used = vec![false; tc.len()];
    let matched = go(0, &fc, &tc, &mut used, &overlap);
    1.0 - matched as f64 / truth.len() as f64
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

pub fn partition(labels: &[usize]) -> Partition {
    Partition::from_labels(labels.to_vec())
}

/// Peak resident set size of this process in bytes, if available.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
