//! The per-row update shared by the sequential and asynchronous drivers.

use std::cmp::Ordering;

use super::factor::FactorMatrix;
use super::subproblem::{solve_into, SubproblemScratch};
use crate::graph::Graph;

/// Storage the row update reads from and writes to.
///
/// Implemented by [`FactorMatrix`] (exclusive access) and by
/// `&SharedFactor` (lock-free shared access from worker threads).
pub(crate) trait RowStore {
    fn for_each_entry<F: FnMut(usize, f64)>(&self, i: usize, f: F);
    fn dtu_at(&self, c: usize) -> f64;
    fn replace_row(&mut self, i: usize, entries: &[(u32, f64)]);
    fn dtu_add(&mut self, c: usize, delta: f64);
}

impl RowStore for FactorMatrix {
    #[inline]
    fn for_each_entry<F: FnMut(usize, f64)>(&self, i: usize, mut f: F) {
        for (c, v) in self.row(i).iter() {
            f(c, v);
        }
    }

    #[inline]
    fn dtu_at(&self, c: usize) -> f64 {
        self.dtu()[c]
    }

    #[inline]
    fn replace_row(&mut self, i: usize, entries: &[(u32, f64)]) {
        self.write_row(i, entries);
    }

    #[inline]
    fn dtu_add(&mut self, c: usize, delta: f64) {
        self.dtu_mut()[c] += delta;
    }
}

/// Per-worker buffers.
#[derive(Debug, Clone)]
pub(crate) struct Workspace {
    pub(crate) b: Vec<f64>,
    old: Vec<(u32, f64)>,
    new: Vec<(u32, f64)>,
    scratch: SubproblemScratch,
}

impl Workspace {
    pub(crate) fn new(k: usize, p: usize) -> Self {
        Workspace {
            b: vec![0.0; k],
            old: Vec::with_capacity(p),
            new: Vec::with_capacity(p),
            scratch: SubproblemScratch::with_capacity(k),
        }
    }
}

/// `b = -2 sum_{j in N(i)} u_j + 2 lambda d_i (d^T U - d_i u_i) - sigma u_i`.
#[inline]
pub(crate) fn compute_b_into<S: RowStore>(g: &Graph, store: &S, i: usize, sigma: f64, b: &mut [f64]) {
    b.fill(0.0);
    for &j in g.neighbors(i) {
        store.for_each_entry(j as usize, |c, v| b[c] += v);
    }
    let di = g.degrees()[i];
    let scale = 2.0 * g.lambda() * di;
    for (c, bc) in b.iter_mut().enumerate() {
        *bc = -2.0 * *bc + scale * store.dtu_at(c);
    }
    store.for_each_entry(i, |c, v| b[c] -= (scale * di + sigma) * v);
}

/// Squared distance between two column-sorted sparse rows.
fn sparse_distance_sq(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let (mut x, mut y, mut acc) = (0, 0, 0.0);
    while x < a.len() || y < b.len() {
        let d = match (a.get(x), b.get(y)) {
            (Some(&(ca, va)), Some(&(cb, vb))) => match ca.cmp(&cb) {
                Ordering::Equal => {
                    x += 1;
                    y += 1;
                    va - vb
                }
                Ordering::Less => {
                    x += 1;
                    va
                }
                Ordering::Greater => {
                    y += 1;
                    vb
                }
            },
            (Some(&(_, va)), None) => {
                x += 1;
                va
            }
            (None, Some(&(_, vb))) => {
                y += 1;
                vb
            }
            (None, None) => unreachable!(),
        };
        acc += d * d;
    }
    acc
}

/// Replaces row `i` by the minimizer of its proximal subproblem (the
/// current row is the proximal center), updates `d^T U` incrementally and
/// returns `|u_i_new - u_i_old|^2`.
#[inline]
pub(crate) fn update_row<S: RowStore>(
    g: &Graph,
    store: &mut S,
    i: usize,
    p: usize,
    sigma: f64,
    ws: &mut Workspace,
) -> f64 {
    compute_b_into(g, store, i, sigma, &mut ws.b);
    solve_into(&ws.b, p, &mut ws.scratch, &mut ws.new);

    ws.old.clear();
    store.for_each_entry(i, |c, v| ws.old.push((c as u32, v)));
    if ws.old == ws.new {
        return 0.0;
    }
    let delta = sparse_distance_sq(&ws.old, &ws.new);

    store.replace_row(i, &ws.new);
    let di = g.degrees()[i];
    if di != 0.0 {
        for &(c, v) in &ws.old {
            store.dtu_add(c as usize, -di * v);
        }
        for &(c, v) in &ws.new {
            store.dtu_add(c as usize, di * v);
        }
    }
    delta
}
