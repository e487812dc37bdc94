use std::fmt::Write;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{content_lines, parse_header};
use crate::mask::SubsetMask;
use crate::probability::{sample_p_subset, PBiasedParams};

/// Largest vertex count a [`Graph`] accepts.
pub const MAX_VERTICES: usize = 128;

/// Zero-based index of the edge `{u, v}`, `1 ≤ u < v`: `(v−1)(v−2)/2 + (u−1)`.
pub fn edge_index(u: usize, v: usize) -> usize {
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    debug_assert!(u >= 1 && u < v);
    (v - 1) * (v - 2) / 2 + (u - 1)
}

/// Inverse of [`edge_index`].
pub fn edge_pair(index: usize) -> (usize, usize) {
    // Largest v with (v−1)(v−2)/2 ≤ index.
    let mut v = ((((8 * index + 1) as f64).sqrt() + 3.0) / 2.0) as usize;
    while (v - 1) * (v - 2) / 2 > index {
        v -= 1;
    }
    while v * (v - 1) / 2 <= index {
        v += 1;
    }
    (index - (v - 1) * (v - 2) / 2 + 1, v)
}

pub fn edge_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Edge set of `K_A` as a mask over edge elements (edge index `i` is element `i + 1`).
pub fn clique_edges(a: &SubsetMask) -> SubsetMask {
    let vs: Vec<usize> = a.elements().collect();
    let mut edges = SubsetMask::empty();
    for (i, &u) in vs.iter().enumerate() {
        for &v in &vs[i + 1..] {
            edges.insert(edge_index(u, v) + 1);
        }
    }
    edges
}

/// A simple undirected graph on `[n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Graph {
    n: usize,
    edges: SubsetMask,
}

impl Graph {
    pub fn empty(n: usize) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::TooLarge {
                what: "graph".into(),
                size: n,
                cap: MAX_VERTICES,
            });
        }
        Ok(Self {
            n,
            edges: SubsetMask::empty(),
        })
    }

    /// Wraps an edge mask; every element must be at most `C(n, 2)`.
    pub fn from_edge_mask(n: usize, edges: SubsetMask) -> Result<Self> {
        let g = Self::empty(n)?;
        if !edges.fits_in(edge_count(n)) {
            return Err(Error::invalid(format!(
                "edge mask exceeds the {} pairs of {n} vertices",
                edge_count(n)
            )));
        }
        Ok(Self { edges, ..g })
    }

    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_mask(&self) -> &SubsetMask {
        &self.edges
    }

    pub fn edge_len(&self) -> usize {
        self.edges.len()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u == v || u == 0 || v == 0 || u > self.n || v > self.n {
            return Err(Error::invalid(format!(
                "{{{u}, {v}}} is not an edge on {} vertices",
                self.n
            )));
        }
        self.edges.insert(edge_index(u, v) + 1);
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && u >= 1 && v >= 1 && self.edges.contains(edge_index(u, v) + 1)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.elements().map(|e| edge_pair(e - 1))
    }

    pub fn union(&self, other: &Graph) -> Graph {
        Graph {
            n: self.n.max(other.n),
            edges: self.edges.union(&other.edges),
        }
    }

    /// `K_A ⊆ G`.
    pub fn contains_clique(&self, a: &SubsetMask) -> bool {
        clique_edges(a).is_subset(&self.edges)
    }

    fn adjacency(&self) -> Vec<u128> {
        // Vertex v sits at bit v − 1.
        let mut adj = vec![0u128; self.n];
        for (u, v) in self.edges() {
            adj[u - 1] |= 1 << (v - 1);
            adj[v - 1] |= 1 << (u - 1);
        }
        adj
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }

    /// Parses `n=<int>` followed by one `u v` edge per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (line_no, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header"))?;
        let n = parse_header(line_no, header)?;
        let mut g = Self::empty(n).map_err(|e| Error::parse(line_no, e.to_string()))?;
        for (line_no, line) in lines {
            let mut parts = line.split_whitespace();
            let mut vertex = || -> Result<usize> {
                let tok = parts
                    .next()
                    .ok_or_else(|| Error::parse(line_no, "expected `u v`"))?;
                tok.parse()
                    .map_err(|_| Error::parse(line_no, format!("bad vertex `{tok}`")))
            };
            let (u, v) = (vertex()?, vertex()?);
            if parts.next().is_some() {
                return Err(Error::parse(line_no, "trailing tokens after edge"));
            }
            g.add_edge(u, v)
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
        }
        Ok(g)
    }
}

/// `K_A` on `n` vertices; empty when `|A| ≤ 1`.
pub fn clique_graph(n: usize, a: &SubsetMask) -> Result<Graph> {
    if !a.fits_in(n) {
        return Err(Error::invalid(format!("{a} is not a subset of [{n}]")));
    }
    Graph::from_edge_mask(n, clique_edges(a))
}

/// `G(n, p)`: every edge independently with probability `p`.
pub fn gnp_sample<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    let edges = sample_p_subset(
        &PBiasedParams {
            p,
            n: edge_count(n),
        },
        rng,
    );
    Graph::from_edge_mask(n, edges)
}

/// Whether `g` contains a clique on `k` vertices.
pub fn has_k_clique(g: &Graph, k: usize) -> bool {
    if k <= 1 {
        return k == 0 || g.n >= 1;
    }
    let adj = g.adjacency();
    fn extend(adj: &[u128], size: usize, k: usize, candidates: u128) -> bool {
        if size == k {
            return true;
        }
        if size + (candidates.count_ones() as usize) < k {
            return false;
        }
        let mut rest = candidates;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if size + 1 + (rest.count_ones() as usize) < k {
                return false;
            }
            if extend(adj, size + 1, k, rest & adj[v]) {
                return true;
            }
        }
        false
    }
    let all = if g.n == 128 {
        u128::MAX
    } else {
        (1u128 << g.n) - 1
    };
    extend(&adj, 0, k, all)
}
