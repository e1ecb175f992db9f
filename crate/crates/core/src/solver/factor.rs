use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// How a random feasible starting point is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    /// `min(p, k)` uniformly chosen columns with uniform(0, 1] magnitudes, normalized.
    #[default]
    DenseSupport,
    /// A single random unit coordinate vector per row.
    SingleCoordinate,
}

/// Row-sparse nonnegative factor `U` (n x k) with unit-norm rows of at most
/// `p` nonzeros, plus the accumulator `d^T U`.
///
/// Each row owns `p` fixed slots; the first `len` hold `(column, value)`
/// pairs in ascending column order with strictly positive values.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrix {
    n: usize,
    k: usize,
    p: usize,
    cols: Vec<u32>,
    vals: Vec<f64>,
    lens: Vec<u32>,
    dtu: Vec<f64>,
}

/// Borrowed view of one row.
#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    pub cols: &'a [u32],
    pub vals: &'a [f64],
}

impl<'a> Row<'a> {
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        let vals = self.vals;
        self.cols.iter().zip(vals).map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, col: usize) -> f64 {
        self.cols
            .binary_search(&(col as u32))
            .map(|s| self.vals[s])
            .unwrap_or(0.0)
    }

    /// Column of the largest entry, lowest column on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for s in 1..self.vals.len() {
            if self.vals[s] > self.vals[best] {
                best = s;
            }
        }
        self.cols[best] as usize
    }

    pub fn dot(&self, other: &Row<'_>) -> f64 {
        sparse_dot(self.cols, self.vals, other.cols, other.vals)
    }
}

pub(crate) fn sparse_dot(ca: &[u32], va: &[f64], cb: &[u32], vb: &[f64]) -> f64 {
    let (mut a, mut b, mut acc) = (0, 0, 0.0);
    while a < ca.len() && b < cb.len() {
        match ca[a].cmp(&cb[b]) {
            std::cmp::Ordering::Less => a += 1,
            std::cmp::Ordering::Greater => b += 1,
            std::cmp::Ordering::Equal => {
                acc += va[a] * vb[b];
                a += 1;
                b += 1;
            }
        }
    }
    acc
}

impl FactorMatrix {
    fn empty(n: usize, k: usize, p: usize) -> Self {
        FactorMatrix {
            n,
            k,
            p,
            cols: vec![0; n * p],
            vals: vec![0.0; n * p],
            lens: vec![0; n],
            dtu: vec![0.0; k],
        }
    }

    fn check_dims(g: &Graph, k: usize, p: usize) -> Result<()> {
        if p < 1 || p > k {
            return Err(Error::config(format!("need 1 <= p <= k, got p = {p}, k = {k}")));
        }
        if k > g.n() {
            return Err(Error::config(format!("k = {k} exceeds node count {}", g.n())));
        }
        if k > u32::MAX as usize {
            return Err(Error::config("k exceeds u32 range"));
        }
        Ok(())
    }

    /// Draws a random feasible point.
    pub fn random<R: Rng + ?Sized>(
        g: &Graph,
        k: usize,
        p: usize,
        scheme: InitScheme,
        rng: &mut R,
    ) -> Result<Self> {
        Self::check_dims(g, k, p)?;
        let mut u = Self::empty(g.n(), k, p);
        let mut row: Vec<(u32, f64)> = Vec::with_capacity(p);
        for i in 0..g.n() {
            row.clear();
            match scheme {
                InitScheme::DenseSupport => {
                    for c in index::sample(rng, k, p) {
                        // (0, 1] keeps every stored value strictly positive.
                        row.push((c as u32, 1.0 - rng.random::<f64>()));
                    }
                    row.sort_unstable_by_key(|&(c, _)| c);
                    let norm = row.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
                    row.iter_mut().for_each(|e| e.1 /= norm);
                }
                InitScheme::SingleCoordinate => {
                    row.push((rng.random_range(0..k) as u32, 1.0));
                }
            }
            u.write_row(i, &row);
        }
        u.refresh_dtu(g);
        Ok(u)
    }

    /// Builds a factor from explicit sparse rows, validating feasibility.
    pub fn from_rows(g: &Graph, k: usize, p: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self> {
        Self::check_dims(g, k, p)?;
        if rows.len() != g.n() {
            return Err(Error::SizeMismatch {
                expected: g.n(),
                got: rows.len(),
            });
        }
        let mut u = Self::empty(g.n(), k, p);
        let mut buf: Vec<(u32, f64)> = Vec::with_capacity(p);
        for (i, row) in rows.iter().enumerate() {
            buf.clear();
            buf.extend(row.iter().filter(|e| e.1 != 0.0).map(|&(c, v)| (c as u32, v)));
            buf.sort_unstable_by_key(|&(c, _)| c);
            if buf.len() > p || buf.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::config(format!("row {i}: more than p entries or repeated column")));
            }
            if buf.iter().any(|&(c, v)| c as usize >= k || !(v > 0.0) || !v.is_finite()) {
                return Err(Error::config(format!("row {i}: column out of range or non-positive value")));
            }
            let norm = buf.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::config(format!("row {i}: norm {norm} is not 1")));
            }
            u.write_row(i, &buf);
        }
        u.refresh_dtu(g);
        Ok(u)
    }

    /// Factor whose rows are the indicators of `labels` (values in `0..k`).
    pub fn from_labels(g: &Graph, k: usize, labels: &[usize]) -> Result<Self> {
        let rows: Vec<Vec<(usize, f64)>> = labels.iter().map(|&l| vec![(l, 1.0)]).collect();
        Self::from_rows(g, k, 1, &rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> Row<'_> {
        let start = i * self.p;
        let end = start + self.lens[i] as usize;
        Row {
            cols: &self.cols[start..end],
            vals: &self.vals[start..end],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        (0..self.n).map(move |i| self.row(i))
    }

    /// Stored accumulator `d^T U`.
    pub fn dtu(&self) -> &[f64] {
        &self.dtu
    }

    pub(crate) fn dtu_mut(&mut self) -> &mut [f64] {
        &mut self.dtu
    }

    #[inline]
    pub(crate) fn write_row(&mut self, i: usize, entries: &[(u32, f64)]) {
        debug_assert!(entries.len() <= self.p);
        let start = i * self.p;
        for (s, &(c, v)) in entries.iter().enumerate() {
            self.cols[start + s] = c;
            self.vals[start + s] = v;
        }
        self.lens[i] = entries.len() as u32;
    }

    /// `sum_i d_i u_i` computed from the rows.
    pub fn fresh_dtu(&self, g: &Graph) -> Vec<f64> {
        let mut acc = vec![0.0; self.k];
        for (i, &d) in g.degrees().iter().enumerate() {
            for (c, v) in self.row(i).iter() {
                acc[c] += d * v;
            }
        }
        acc
    }

    pub fn refresh_dtu(&mut self, g: &Graph) {
        self.dtu = self.fresh_dtu(g);
    }

    /// `max_c |dtU_c - (sum_i d_i u_i)_c|`.
    pub fn dtu_drift(&self, g: &Graph) -> f64 {
        self.fresh_dtu(g)
            .iter()
            .zip(&self.dtu)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Checks the row invariants: unit norm within `tol`, at most `p`
    /// strictly positive entries in increasing column order.
    pub fn check_feasible(&self, tol: f64) -> std::result::Result<(), String> {
        for i in 0..self.n {
            let row = self.row(i);
            if row.cols.is_empty() || row.cols.len() > self.p {
                return Err(format!("row {i} has {} entries", row.cols.len()));
            }
            if row.cols.windows(2).any(|w| w[0] >= w[1]) || row.cols.iter().any(|&c| c as usize >= self.k) {
                return Err(format!("row {i} has bad column indices"));
            }
            if row.vals.iter().any(|&v| !(v > 0.0)) {
                return Err(format!("row {i} has a non-positive value"));
            }
            let norm = row.vals.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > tol {
                return Err(format!("row {i} has norm {norm}"));
            }
        }
        Ok(())
    }

    /// Dense row-major copy (n x k).
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.k];
        for i in 0..self.n {
            for (c, v) in self.row(i).iter() {
                out[i * self.k + c] = v;
            }
        }
        out
    }

    /// `|U - other|_F^2`.
    pub fn distance_sq(&self, other: &FactorMatrix) -> f64 {
        assert_eq!((self.n, self.k), (other.n, other.k));
        (0..self.n)
            .map(|i| {
                let (a, b) = (self.row(i), other.row(i));
                let na: f64 = a.vals.iter().map(|v| v * v).sum();
                let nb: f64 = b.vals.iter().map(|v| v * v).sum();
                (na + nb - 2.0 * a.dot(&b)).max(0.0)
            })
            .sum()
    }

    /// Replaces every row by the indicator of its largest entry (lowest
    /// column on ties) and recomputes `d^T U`.
    pub fn round_in_place(&mut self, g: &Graph) {
        for i in 0..self.n {
            let j = self.row(i).argmax() as u32;
            self.write_row(i, &[(j, 1.0)]);
        }
        self.refresh_dtu(g);
    }
}
