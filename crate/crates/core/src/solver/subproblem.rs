//! Closed-form minimizer of `b^T x` over unit-norm, nonnegative vectors
//! with at most `p` nonzeros.
//!
//! If `b` has a negative part `b- = max(-b, 0) != 0`, the minimizer keeps
//! the `p` largest entries of `b-` and normalizes them; the optimum is
//! `-|b-_p|`. Otherwise every feasible `x` gives `b^T x >= min_j b_j` and the
//! minimizer is the coordinate vector at `argmin_j b_j`.
//!
//! Ties (equal magnitudes at the `p`-th place, or equal minima) go to the
//! lowest column index.

use crate::error::{Error, Result};

/// Scratch space reused across row solves.
#[derive(Debug, Default, Clone)]
pub(crate) struct SubproblemScratch {
    candidates: Vec<(u32, f64)>,
}

impl SubproblemScratch {
    pub(crate) fn with_capacity(k: usize) -> Self {
        SubproblemScratch {
            candidates: Vec::with_capacity(k),
        }
    }
}

/// Writes the minimizer into `out` as `(column, value)` pairs sorted by column.
/// `b` must be finite.
pub(crate) fn solve_into(b: &[f64], p: usize, scratch: &mut SubproblemScratch, out: &mut Vec<(u32, f64)>) {
    debug_assert!(p >= 1);
    out.clear();
    let cand = &mut scratch.candidates;
    cand.clear();
    cand.extend(
        b.iter()
            .enumerate()
            .filter(|(_, &v)| v < 0.0)
            .map(|(c, &v)| (c as u32, -v)),
    );

    if cand.is_empty() {
        let mut j0 = 0;
        for (j, &v) in b.iter().enumerate() {
            if v < b[j0] {
                j0 = j;
            }
        }
        out.push((j0 as u32, 1.0));
        return;
    }

    if cand.len() > p {
        // Total order: larger magnitude first, then lower column.
        let order = |a: &(u32, f64), b: &(u32, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
        cand.select_nth_unstable_by(p - 1, order);
        cand.truncate(p);
        cand.sort_unstable_by_key(|&(c, _)| c);
    }
    let norm = cand.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
    out.extend(cand.iter().map(|&(c, v)| (c, v / norm)));
}

/// Solves `argmin { b^T x : |x| = 1, x >= 0, |x|_0 <= p }`.
///
/// Returns the sparse minimizer as `(column, value)` pairs in column order.
pub fn subproblem_solve(b: &[f64], p: usize) -> Result<Vec<(usize, f64)>> {
    if b.is_empty() || p < 1 || p > b.len() {
        return Err(Error::config(format!("need 1 <= p <= k, got p = {p}, k = {}", b.len())));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut scratch = SubproblemScratch::with_capacity(b.len());
    let mut out = Vec::with_capacity(p);
    solve_into(b, p, &mut scratch, &mut out);
    Ok(out.into_iter().map(|(c, v)| (c as usize, v)).collect())
}
