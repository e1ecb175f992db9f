//! Undirected, unweighted graphs in CSR form.
//!
//! A [`Graph`] stores the symmetric 0/1 adjacency `A` (zero diagonal), the
//! degree vector `d` and `lambda = 1 / |d|_1`. The modularity matrix
//! `C = -(A - lambda d d^T)` is never formed; consumers work from `A`, `d`
//! and `lambda` directly.
//!
//! Edge lists are whitespace separated `u v` pairs, one per line, with `#`
//! comment lines (the SNAP convention). Node identifiers are arbitrary
//! non-negative integers and are remapped to `0..n` in ascending id order.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    degrees: Vec<f64>,
    total_degree: f64,
    lambda: f64,
    /// Original identifier of each dense node index, ascending.
    node_ids: Vec<u64>,
}

impl Graph {
    /// Builds a graph on nodes `0..n` from an edge iterator.
    ///
    /// Self-loops are dropped, duplicate edges (in either orientation) are
    /// collapsed and the adjacency is symmetrized.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::with_node_ids(n, edges, (0..n as u64).collect())
    }

    fn with_node_ids<I>(n: usize, edges: I, node_ids: Vec<u64>) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        debug_assert_eq!(node_ids.len(), n);
        if n > u32::MAX as usize {
            return Err(Error::config("node count exceeds u32 range"));
        }
        let mut arcs: Vec<(u32, u32)> = Vec::new();
        for (u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                continue;
            }
            arcs.push((u as u32, v as u32));
            arcs.push((v as u32, u as u32));
        }
        arcs.sort_unstable();
        arcs.dedup();
        if arcs.is_empty() {
            return Err(Error::EmptyGraph);
        }

        let mut row_ptr = vec![0usize; n + 1];
        for &(u, _) in &arcs {
            row_ptr[u as usize + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx: Vec<u32> = arcs.into_iter().map(|(_, v)| v).collect();
        let degrees: Vec<f64> = row_ptr.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
        let total_degree = col_idx.len() as f64;

        Ok(Graph {
            row_ptr,
            col_idx,
            degrees,
            total_degree,
            lambda: 1.0 / total_degree,
            node_ids,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// Number of undirected edges `|E|`.
    #[inline]
    pub fn num_edges(&self) -> usize {
        self.col_idx.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    #[inline]
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// `|d|_1 = 2|E|`.
    #[inline]
    pub fn total_degree(&self) -> f64 {
        self.total_degree
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn degrees_and_lambda(&self) -> (&[f64], f64) {
        (&self.degrees, self.lambda)
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[u32] {
        &self.col_idx
    }

    /// `true` iff `j` is a neighbor of `i`.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    pub fn node_id(&self, i: usize) -> u64 {
        self.node_ids[i]
    }

    pub fn node_ids(&self) -> &[u64] {
        &self.node_ids
    }

    /// Dense index of an original node identifier.
    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.node_ids.binary_search(&id).ok()
    }

    pub fn isolated_nodes(&self) -> usize {
        (0..self.n()).filter(|&i| self.degree(i) == 0).count()
    }

    /// Undirected edges `(i, j)` with `i < j`, in CSR order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// Writes the graph as an edge list using original node identifiers.
    ///
    /// Isolated nodes are written as `v v` lines; the loader drops the
    /// self-loop but keeps the node, so a reload reproduces the same CSR.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# nodes: {} edges: {}", self.n(), self.num_edges())?;
        for i in 0..self.n() {
            if self.degree(i) == 0 {
                writeln!(w, "{0} {0}", self.node_ids[i])?;
            }
        }
        for (i, j) in self.edges() {
            writeln!(w, "{} {}", self.node_ids[i], self.node_ids[j])?;
        }
        w.flush()
    }
}

/// Reads an edge-list file. See [`parse_edge_list`].
pub fn load_edge_list(path: impl AsRef<Path>, dedup: bool) -> Result<Graph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file), dedup).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parses an edge list.
///
/// With `dedup` unset a repeated undirected edge is reported as an error;
/// with it set, repeats are collapsed. Self-loops are always dropped, but
/// the node they name is kept.
pub fn parse_edge_list<R: Read>(reader: R, dedup: bool) -> Result<Graph> {
    let reader = BufReader::new(reader);
    let mut raw: Vec<(u64, u64, usize)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io("<edge list>", e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: lineno,
                message: "expected two node identifiers".into(),
            });
        };
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                message: "unexpected third column (weighted edge lists are not supported)".into(),
            });
        }
        let parse = |s: &str| {
            s.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid node identifier `{s}`"),
            })
        };
        raw.push((parse(a)?, parse(b)?, lineno));
    }

    if !dedup {
        let mut keys: Vec<(u64, u64, usize)> = raw
            .iter()
            .filter(|(u, v, _)| u != v)
            .map(|&(u, v, l)| (u.min(v), u.max(v), l))
            .collect();
        keys.sort_unstable();
        if let Some(w) = keys.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::Parse {
                line: w[0].2.max(w[1].2),
                message: format!("duplicate edge {} {}", w[0].0, w[0].1),
            });
        }
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v, _)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let index = |id: u64| ids.binary_search(&id).expect("id collected above");
    let edges: Vec<(usize, usize)> = raw.iter().map(|&(u, v, _)| (index(u), index(v))).collect();
    let n = ids.len();
    Graph::with_node_ids(n, edges, ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str, dedup: bool) -> Result<Graph> {
        parse_edge_list(s.as_bytes(), dedup)
    }

    #[test]
    fn triangle() {
        let g = parse("0 1\n1 2\n2 0\n", false).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.degrees(), &[2.0, 2.0, 2.0]);
        assert_eq!(g.total_degree(), 6.0);
        let (_, lambda) = g.degrees_and_lambda();
        assert_eq!(lambda, 1.0 / 6.0);
    }

    #[test]
    fn duplicates_and_self_loops() {
        let g = parse("0 1\n1 0\n0 0\n", true).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.degrees(), &[1.0, 1.0]);

        match parse("0 1\n1 0\n", false) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("expected duplicate error on line 2, got {other:?}"),
        }
    }

    #[test]
    fn star_and_bridge() {
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let (d, lambda) = star.degrees_and_lambda();
        assert_eq!(d, &[3.0, 1.0, 1.0, 1.0]);
        assert_eq!(lambda, 1.0 / 6.0);

        let bridged =
            Graph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]).unwrap();
        assert_eq!(bridged.num_edges(), 7);
        assert_eq!(bridged.lambda(), 1.0 / 14.0);
    }

    #[test]
    fn remaps_sparse_ids() {
        let g = parse("# comment\n5 17\n17 42\n", false).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.node_ids(), &[5, 17, 42]);
        assert_eq!(g.index_of(42), Some(2));
        assert_eq!(g.index_of(6), None);
        let restored: Vec<(u64, u64)> =
            g.edges().map(|(i, j)| (g.node_id(i), g.node_id(j))).collect();
        assert_eq!(restored, vec![(5, 17), (17, 42)]);
    }

    #[test]
    fn isolated_nodes_survive_round_trip() {
        let g = parse("0 1\n7 7\n", false).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.isolated_nodes(), 1);
        assert_eq!(g.degree(2), 0);

        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let again = parse_edge_list(buf.as_slice(), false).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse("0 1\n2\n", true), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("0 1 0.5\n", true), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("0 x\n", true), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("# nothing\n3 3\n", true), Err(Error::EmptyGraph)));
        assert!(matches!(
            Graph::from_edges(2, [(0, 2)]),
            Err(Error::NodeOutOfRange { node: 2, n: 2 })
        ));
    }

    #[test]
    fn missing_file() {
        let err = load_edge_list("/nonexistent/graph.edges", true).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
