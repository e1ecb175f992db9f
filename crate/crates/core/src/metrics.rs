//! Partition quality: modularity, cluster coefficient, strength and
//! misclassification against a planted partition.

use serde::Serialize;

use crate::cluster::Partition;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest community count for which the optimal label matching is enumerated.
pub const EXACT_MATCH_MAX_K: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    #[serde(rename = "Q")]
    pub modularity: f64,
    #[serde(rename = "CC")]
    pub cluster_coefficient: f64,
    #[serde(rename = "S")]
    pub strength: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub err_exact: Option<f64>,
    pub k0: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion: Option<Vec<Vec<usize>>>,
    pub wall_time_s: f64,
}

impl MetricsReport {
    pub fn evaluate(g: &Graph, part: &Partition, truth: Option<&Partition>) -> Result<MetricsReport> {
        let mis = truth.map(|t| misclassification(t, part)).transpose()?;
        Ok(MetricsReport {
            modularity: modularity(g, part)?,
            cluster_coefficient: cluster_coefficient(g, part)?,
            strength: strength(g, part)?,
            err: mis.as_ref().map(|m| m.err),
            err_exact: mis.as_ref().and_then(|m| m.err_exact),
            k0: part.k0(),
            confusion: mis.map(|m| m.confusion),
            wall_time_s: 0.0,
        })
    }
}

fn check_len(g: &Graph, part: &Partition) -> Result<()> {
    if part.len() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            got: part.len(),
        });
    }
    Ok(())
}

/// `Q = sum_c [ e_c / |E| - (D_c / 2|E|)^2 ]` with `e_c` the intra-community
/// edge count and `D_c` the degree sum of community `c`.
pub fn modularity(g: &Graph, part: &Partition) -> Result<f64> {
    check_len(g, part)?;
    let labels = part.labels();
    let mut intra = vec![0usize; part.k0()];
    let mut degree_sum = vec![0.0; part.k0()];
    for (i, j) in g.edges() {
        if labels[i] == labels[j] {
            intra[labels[i]] += 1;
        }
    }
    for (i, &d) in g.degrees().iter().enumerate() {
        degree_sum[labels[i]] += d;
    }
    let m = g.num_edges() as f64;
    let two_m = g.total_degree();
    Ok(intra
        .iter()
        .zip(&degree_sum)
        .map(|(&e, &dc)| e as f64 / m - (dc / two_m) * (dc / two_m))
        .sum())
}

/// Mean over communities of the mean over members `v` of
/// `2 |{edges among N(v) within v's community}| / (d(v) (d(v) - 1))`.
///
/// Nodes with `d(v) <= 1` contribute 0.
pub fn cluster_coefficient(g: &Graph, part: &Partition) -> Result<f64> {
    check_len(g, part)?;
    let labels = part.labels();
    let n = g.n();
    let mut per_community = vec![0.0; part.k0()];
    // mark[t] == v + 1 iff t is a neighbor of v in v's community.
    let mut mark = vec![0usize; n];
    for v in 0..n {
        let d = g.degree(v);
        if d <= 1 {
            continue;
        }
        let lv = labels[v];
        for &t in g.neighbors(v) {
            if labels[t as usize] == lv {
                mark[t as usize] = v + 1;
            }
        }
        let mut links = 0usize;
        for &t in g.neighbors(v) {
            let t = t as usize;
            if mark[t] != v + 1 {
                continue;
            }
            links += g
                .neighbors(t)
                .iter()
                .filter(|&&s| s as usize > t && mark[s as usize] == v + 1)
                .count();
        }
        per_community[lv] += 2.0 * links as f64 / (d * (d - 1)) as f64;
    }
    let sizes = part.sizes();
    Ok(mean_over_communities(per_community.iter().zip(&sizes).map(|(s, &c)| s / c as f64)))
}

fn mean_over_communities(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let count = values.len();
    if count == 0 {
        return 0.0;
    }
    values.sum::<f64>() / count as f64
}

/// Mean community score: 1 if every member has more neighbors inside than
/// outside, 0.5 if only the totals satisfy that, 0 otherwise.
pub fn strength(g: &Graph, part: &Partition) -> Result<f64> {
    check_len(g, part)?;
    let labels = part.labels();
    let k0 = part.k0();
    let mut all_inside = vec![true; k0];
    let mut d_in = vec![0usize; k0];
    let mut d_out = vec![0usize; k0];
    for v in 0..g.n() {
        let lv = labels[v];
        let inside = g.neighbors(v).iter().filter(|&&t| labels[t as usize] == lv).count();
        let outside = g.degree(v) - inside;
        if inside <= outside {
            all_inside[lv] = false;
        }
        d_in[lv] += inside;
        d_out[lv] += outside;
    }
    Ok(mean_over_communities((0..k0).map(|c| {
        if all_inside[c] {
            1.0
        } else if d_in[c] > d_out[c] {
            0.5
        } else {
            0.0
        }
    })))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Misclassification {
    /// `1 - sum_i max_j |C_i ∩ C*_j| / n` over detected communities `C_i`.
    pub err: f64,
    /// `1 - max over one-to-one matchings / n`; present when both
    /// community counts are at most [`EXACT_MATCH_MAX_K`].
    pub err_exact: Option<f64>,
    /// `k_true x k0` overlap counts.
    pub confusion: Vec<Vec<usize>>,
}

pub fn confusion_matrix(truth: &Partition, found: &Partition) -> Result<Vec<Vec<usize>>> {
    if truth.len() != found.len() {
        return Err(Error::SizeMismatch {
            expected: truth.len(),
            got: found.len(),
        });
    }
    let mut conf = vec![vec![0usize; found.k0()]; truth.k0()];
    for (&t, &f) in truth.labels().iter().zip(found.labels()) {
        conf[t][f] += 1;
    }
    Ok(conf)
}

pub fn misclassification(truth: &Partition, found: &Partition) -> Result<Misclassification> {
    let confusion = confusion_matrix(truth, found)?;
    let n = truth.len() as f64;
    let k_true = truth.k0();
    let k_found = found.k0();
    let greedy: usize = (0..k_found)
        .map(|f| (0..k_true).map(|t| confusion[t][f]).max().unwrap_or(0))
        .sum();
    let err_exact = (k_true.max(k_found) <= EXACT_MATCH_MAX_K).then(|| 1.0 - best_matching(&confusion, k_found) as f64 / n);
    Ok(Misclassification {
        err: 1.0 - greedy as f64 / n,
        err_exact,
        confusion,
    })
}

/// Maximum total overlap over one-to-one matchings of detected to true
/// communities (detected communities may stay unmatched), by DP over
/// subsets of true communities.
fn best_matching(confusion: &[Vec<usize>], k_found: usize) -> usize {
    let k_true = confusion.len();
    let states = 1usize << k_true;
    let mut best = vec![None::<usize>; states];
    best[0] = Some(0);
    for f in 0..k_found {
        let mut next = best.clone();
        for mask in 0..states {
            let Some(score) = best[mask] else { continue };
            for t in 0..k_true {
                if mask & (1 << t) == 0 {
                    let m = mask | (1 << t);
                    let s = score + confusion[t][f];
                    if next[m].is_none_or(|cur| s > cur) {
                        next[m] = Some(s);
                    }
                }
            }
        }
        best = next;
    }
    best.into_iter().flatten().max().unwrap_or(0)
}
