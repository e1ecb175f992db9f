//! Lock-free shared storage for the asynchronous driver.
//!
//! Workers claim rows through an atomic cursor, so each row has at most one
//! writer per sweep. Reads of other rows and of `d^T U` are unsynchronized:
//! a reader may see a row that is stale or half-written. All cells are
//! atomics accessed with `Relaxed` ordering, which keeps these races
//! well-defined while compiling to plain loads and stores. Accumulator
//! updates use a compare-exchange add so no increment is lost.

use std::sync::atomic::{AtomicU32, AtomicU64, AtomicUsize, Ordering::Relaxed};

use super::factor::FactorMatrix;
use super::kernel::{update_row, RowStore, Workspace};
use crate::graph::Graph;

/// Rows claimed per cursor increment.
const CHUNK: usize = 32;

pub(crate) struct SharedFactor {
    k: usize,
    p: usize,
    cols: Vec<AtomicU32>,
    vals: Vec<AtomicU64>,
    lens: Vec<AtomicU32>,
    dtu: Vec<AtomicU64>,
}

impl SharedFactor {
    pub(crate) fn from_factor(u: &FactorMatrix) -> Self {
        let (n, k, p) = (u.n(), u.k(), u.p());
        let mut cols: Vec<AtomicU32> = (0..n * p).map(|_| AtomicU32::new(0)).collect();
        let mut vals: Vec<AtomicU64> = (0..n * p).map(|_| AtomicU64::new(0)).collect();
        let mut lens = Vec::with_capacity(n);
        for i in 0..n {
            let row = u.row(i);
            for (s, (c, v)) in row.iter().enumerate() {
                *cols[i * p + s].get_mut() = c as u32;
                *vals[i * p + s].get_mut() = v.to_bits();
            }
            lens.push(AtomicU32::new(row.cols.len() as u32));
        }
        let dtu = u.dtu().iter().map(|v| AtomicU64::new(v.to_bits())).collect();
        SharedFactor {
            k,
            p,
            cols,
            vals,
            lens,
            dtu,
        }
    }

    /// Copies rows and accumulator back into `u`.
    pub(crate) fn store_into(&self, u: &mut FactorMatrix) {
        let mut buf = Vec::with_capacity(self.p);
        for i in 0..u.n() {
            buf.clear();
            self.for_each_entry(i, |c, v| buf.push((c as u32, v)));
            u.write_row(i, &buf);
        }
        for (dst, src) in u.dtu_mut().iter_mut().zip(&self.dtu) {
            *dst = f64::from_bits(src.load(Relaxed));
        }
    }

    /// One asynchronous pass over all rows; returns the summed squared row change.
    pub(crate) fn sweep(&self, g: &Graph, sigma: f64, threads: usize) -> f64 {
        let n = g.n();
        let cursor = AtomicUsize::new(0);
        let work = || {
            let mut view = self;
            let mut ws = Workspace::new(self.k, self.p);
            let mut delta = 0.0;
            loop {
                let start = cursor.fetch_add(CHUNK, Relaxed);
                if start >= n {
                    break;
                }
                for i in start..(start + CHUNK).min(n) {
                    delta += update_row(g, &mut view, i, self.p, sigma, &mut ws);
                }
            }
            delta
        };
        if threads <= 1 {
            return work();
        }
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads).map(|_| s.spawn(work)).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("solver worker panicked"))
                .sum()
        })
    }
}

impl RowStore for &SharedFactor {
    #[inline]
    fn for_each_entry<F: FnMut(usize, f64)>(&self, i: usize, mut f: F) {
        let len = (self.lens[i].load(Relaxed) as usize).min(self.p);
        let base = i * self.p;
        for s in base..base + len {
            let c = self.cols[s].load(Relaxed) as usize;
            let v = f64::from_bits(self.vals[s].load(Relaxed));
            f(c, v);
        }
    }

    #[inline]
    fn dtu_at(&self, c: usize) -> f64 {
        f64::from_bits(self.dtu[c].load(Relaxed))
    }

    #[inline]
    fn replace_row(&mut self, i: usize, entries: &[(u32, f64)]) {
        let base = i * self.p;
        for (s, &(c, v)) in entries.iter().enumerate() {
            self.cols[base + s].store(c, Relaxed);
            self.vals[base + s].store(v.to_bits(), Relaxed);
        }
        self.lens[i].store(entries.len() as u32, Relaxed);
    }

    #[inline]
    fn dtu_add(&mut self, c: usize, delta: f64) {
        let cell = &self.dtu[c];
        let mut cur = cell.load(Relaxed);
        loop {
            let next = (f64::from_bits(cur) + delta).to_bits();
            match cell.compare_exchange_weak(cur, next, Relaxed, Relaxed) {
                Ok(_) => break,
                Err(seen) => cur = seen,
            }
        }
    }
}
