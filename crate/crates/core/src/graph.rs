//! Finite unoriented multigraphs with stable edge identifiers.
//!
//! Networks are immutable once built. Edges are stored in id order (the id
//! is the position in the edge list) and carry an implicit orientation
//! `u -> v`; the orientation is only a sign convention for flows, never a
//! restriction on them. Parallel edges are allowed, self-loops are not.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// An undirected edge, stored with its sign convention `u -> v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

impl Edge {
    /// The endpoint opposite to `x`, if `x` is an endpoint at all.
    pub fn other(&self, x: usize) -> Option<usize> {
        if x == self.u {
            Some(self.v)
        } else if x == self.v {
            Some(self.u)
        } else {
            None
        }
    }
}

/// A finite multigraph, optionally embedded in an integer lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    vertices: usize,
    edges: Vec<Edge>,
    coords: Option<Vec<Vec<i64>>>,
}

impl Network {
    /// Build a network from an edge list. Endpoints are validated; edge ids
    /// are the list positions.
    pub fn from_edges(vertices: usize, list: &[(usize, usize)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(list.len());
        for (id, &(u, v)) in list.iter().enumerate() {
            if u == v {
                return Err(Error::SelfLoop { edge: id });
            }
            for &x in &[u, v] {
                if x >= vertices {
                    return Err(Error::VertexOutOfRange { vertex: x, count: vertices });
                }
            }
            edges.push(Edge { u, v });
        }
        Ok(Network { vertices, edges, coords: None })
    }

    /// Attach integer lattice coordinates. Every edge must join vertices at
    /// l1-distance exactly 1.
    pub fn with_coords(mut self, coords: Vec<Vec<i64>>) -> Result<Self> {
        if coords.len() != self.vertices {
            return Err(Error::InvalidCoordinates("one coordinate vector per vertex"));
        }
        let dim = coords.first().map(Vec::len).unwrap_or(0);
        if coords.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidCoordinates("mixed coordinate arity"));
        }
        for (id, e) in self.edges.iter().enumerate() {
            let d1: i64 = coords[e.u]
                .iter()
                .zip(&coords[e.v])
                .map(|(a, b)| (a - b).abs())
                .sum();
            if d1 != 1 {
                let _ = id;
                return Err(Error::InvalidCoordinates("edge does not join lattice neighbors"));
            }
        }
        self.coords = Some(coords);
        Ok(self)
    }

    /// The closed box `[0, side]^d` of the integer lattice, with edges
    /// between all l1-neighbors. Vertices are indexed with the first
    /// coordinate varying fastest.
    pub fn box_lattice(d: usize, side: usize) -> Result<Self> {
        if !(1..=4).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        if side == 0 {
            return Err(Error::ZeroSide);
        }
        let n = side + 1;
        let mut vertices = 1usize;
        for _ in 0..d {
            vertices = vertices.checked_mul(n).ok_or(Error::SizeOverflow)?;
        }
        vertices
            .checked_mul(d)
            .and_then(|x| x.checked_mul(2))
            .ok_or(Error::SizeOverflow)?;

        // strides[k] = n^k, so index = sum coord[k] * strides[k]
        let mut strides = [0usize; 4];
        let mut s = 1usize;
        for stride in strides.iter_mut().take(d) {
            *stride = s;
            s *= n;
        }

        let mut coords = vec![vec![0i64; d]; vertices];
        for (idx, c) in coords.iter_mut().enumerate() {
            let mut rem = idx;
            for coord in c.iter_mut() {
                *coord = (rem % n) as i64;
                rem /= n;
            }
        }

        let mut edges = Vec::with_capacity(d * side * vertices / n);
        for idx in 0..vertices {
            let mut rem = idx;
            for &stride in strides.iter().take(d) {
                let coord = rem % n;
                rem /= n;
                if coord < side {
                    edges.push(Edge { u: idx, v: idx + stride });
                }
            }
        }

        Ok(Network { vertices, edges, coords: Some(coords) })
    }

    /// The staged parallel-series network: vertices `0..=n`, with `2i+1`
    /// parallel edges between `i` and `i+1`, labelled in stage order.
    pub fn parallel_series(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroStages);
        }
        n.checked_mul(n).ok_or(Error::SizeOverflow)?;
        let mut edges = Vec::with_capacity(n * n);
        for i in 0..n {
            for _ in 0..2 * i + 1 {
                edges.push(Edge { u: i, v: i + 1 });
            }
        }
        Ok(Network { vertices: n + 1, edges, coords: None })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn coords(&self) -> Option<&[Vec<i64>]> {
        self.coords.as_deref()
    }

    /// Linear scan for the vertex at a lattice coordinate.
    pub fn find_vertex(&self, coord: &[i64]) -> Option<usize> {
        let coords = self.coords.as_ref()?;
        coords.iter().position(|c| c.as_slice() == coord)
    }

    /// Incidence lists: for every vertex, the ids of its incident edges.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.vertices];
        for (id, e) in self.edges.iter().enumerate() {
            inc[e.u].push(id);
            inc[e.v].push(id);
        }
        inc
    }

    /// True iff some path joins the sources to the sinks.
    pub fn connects(&self, t: &TerminalPair) -> bool {
        if t.validate(self).is_err() {
            return false;
        }
        let inc = self.incidence();
        let mut seen = vec![false; self.vertices];
        let mut queue: Vec<usize> = t.sources().to_vec();
        for &s in t.sources() {
            seen[s] = true;
        }
        while let Some(x) = queue.pop() {
            if t.is_sink(x) {
                return true;
            }
            for &eid in &inc[x] {
                let y = self.edges[eid].other(x).unwrap();
                if !seen[y] {
                    seen[y] = true;
                    queue.push(y);
                }
            }
        }
        false
    }

    /// Terminal pair for left-right flow on a 2-d box: sources are the
    /// vertices with first coordinate 0, sinks those with the maximal first
    /// coordinate.
    pub fn left_right_terminals(&self) -> Result<TerminalPair> {
        let coords = self.coords.as_ref().ok_or(Error::MissingCoordinates)?;
        if coords.first().map(Vec::len) != Some(2) {
            return Err(Error::InvalidCoordinates("left-right terminals need 2-d coordinates"));
        }
        let side = coords.iter().map(|c| c[0]).max().ok_or(Error::ZeroSide)?;
        if side == 0 {
            return Err(Error::ZeroSide);
        }
        let sources: Vec<usize> = (0..self.vertices).filter(|&v| coords[v][0] == 0).collect();
        let sinks: Vec<usize> = (0..self.vertices).filter(|&v| coords[v][0] == side).collect();
        TerminalPair::new(&sources, &sinks)
    }

    /// Merge the sources into a single vertex and the sinks into another.
    ///
    /// Edges internal to a terminal set become self-loops and are dropped
    /// (they carry no current in any minimizer); every other edge keeps its
    /// original id through [`Contraction::edge_map`] and its original
    /// orientation.
    pub fn contract(&self, t: &TerminalPair) -> Result<Contraction> {
        t.validate(self)?;
        // Representative of each vertex: itself, or the smallest member of
        // its terminal set. New labels are ranks of representatives, which
        // keeps the relative vertex order.
        let s_rep = t.sources()[0];
        let z_rep = t.sinks()[0];
        let mut rep = Vec::with_capacity(self.vertices);
        for v in 0..self.vertices {
            if t.is_source(v) {
                rep.push(s_rep);
            } else if t.is_sink(v) {
                rep.push(z_rep);
            } else {
                rep.push(v);
            }
        }
        let mut is_kept = vec![false; self.vertices];
        for &r in &rep {
            is_kept[r] = true;
        }
        let mut new_label = vec![usize::MAX; self.vertices];
        let mut next = 0usize;
        for v in 0..self.vertices {
            if is_kept[v] {
                new_label[v] = next;
                next += 1;
            }
        }
        let vertex_map: Vec<usize> = rep.iter().map(|&r| new_label[r]).collect();

        let mut edges = Vec::new();
        let mut edge_map = Vec::new();
        for (id, e) in self.edges.iter().enumerate() {
            let (nu, nv) = (vertex_map[e.u], vertex_map[e.v]);
            if nu == nv {
                continue; // internal to a terminal set
            }
            edges.push(Edge { u: nu, v: nv });
            edge_map.push(id);
        }

        Ok(Contraction {
            network: Network { vertices: next, edges, coords: None },
            source: new_label[s_rep],
            sink: new_label[z_rep],
            edge_map,
            vertex_map,
        })
    }
}

/// Disjoint, non-empty source and sink vertex sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TerminalPair {
    sources: Vec<usize>,
    sinks: Vec<usize>,
}

impl TerminalPair {
    pub fn new(sources: &[usize], sinks: &[usize]) -> Result<Self> {
        let mut sources = sources.to_vec();
        let mut sinks = sinks.to_vec();
        sources.sort_unstable();
        sources.dedup();
        sinks.sort_unstable();
        sinks.dedup();
        if sources.is_empty() || sinks.is_empty() {
            return Err(Error::InvalidTerminals("source and sink sets must be non-empty"));
        }
        if sources.iter().any(|s| sinks.binary_search(s).is_ok()) {
            return Err(Error::InvalidTerminals("source and sink sets must be disjoint"));
        }
        Ok(TerminalPair { sources, sinks })
    }

    /// Single source, single sink.
    pub fn singleton(source: usize, sink: usize) -> Result<Self> {
        Self::new(&[source], &[sink])
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn sinks(&self) -> &[usize] {
        &self.sinks
    }

    pub fn is_source(&self, v: usize) -> bool {
        self.sources.binary_search(&v).is_ok()
    }

    pub fn is_sink(&self, v: usize) -> bool {
        self.sinks.binary_search(&v).is_ok()
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.is_source(v) || self.is_sink(v)
    }

    /// Check the vertex range against a concrete network.
    pub fn validate(&self, net: &Network) -> Result<()> {
        let count = net.vertex_count();
        for &v in self.sources.iter().chain(&self.sinks) {
            if v >= count {
                return Err(Error::VertexOutOfRange { vertex: v, count });
            }
        }
        Ok(())
    }
}

/// Result of merging the terminal sets of a network.
#[derive(Clone, Debug)]
pub struct Contraction {
    /// The contracted network.
    pub network: Network,
    /// Label of the merged source vertex.
    pub source: usize,
    /// Label of the merged sink vertex.
    pub sink: usize,
    /// For each contracted edge, the id of the original edge it came from.
    pub edge_map: Vec<usize>,
    /// For each original vertex, its label in the contracted network.
    pub vertex_map: Vec<usize>,
}
