use super::factor::FactorMatrix;
use crate::graph::Graph;

/// `f(U) = <C, U U^T>` with `C = -(A - lambda d d^T)`, evaluated without
/// forming `C`:
///
/// `f(U) = -sum_i sum_{j in N(i)} <u_i, u_j> + lambda |sum_i d_i u_i|^2`.
///
/// The diagonal of `C` (`lambda d_i^2`) is included. The accumulator is
/// recomputed from the rows, so a drifted `d^T U` does not leak in.
pub fn objective(g: &Graph, u: &FactorMatrix) -> f64 {
    let dtu = u.fresh_dtu(g);
    let mut adjacency = 0.0;
    for i in 0..g.n() {
        let ri = u.row(i);
        for &j in g.neighbors(i) {
            adjacency += ri.dot(&u.row(j as usize));
        }
    }
    -adjacency + g.lambda() * dtu.iter().map(|v| v * v).sum::<f64>()
}
