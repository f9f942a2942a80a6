//! Grounded Laplacian solver.
//!
//! The conductance-weighted Laplacian of the contracted network, with the
//! sink row/column grounded, is symmetric positive definite on the
//! component of the ground vertex. Two backends sit behind one interface:
//!
//! * direct elimination (banded Cholesky under a reverse Cuthill-McKee
//!   ordering) for systems up to [`SolveOptions::dense_cutoff`] unknowns —
//!   lattice boxes order so tightly that this is effectively exact;
//! * Jacobi-preconditioned conjugate gradient above the cutoff, with an
//!   iteration cap of `iter_cap_factor * unknowns`.
//!
//! Disconnection is detected by graph search before any factorization, so
//! an unreachable vertex surfaces as [`Error::Disconnected`], never as a
//! solver breakdown.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::math;

/// Tuning knobs for the linear solver.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Relative residual target of the conjugate gradient backend.
    pub rel_residual: f64,
    /// Iteration cap as a multiple of the number of unknowns.
    pub iter_cap_factor: usize,
    /// Largest system handed to the direct banded backend.
    pub dense_cutoff: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { rel_residual: 1e-10, iter_cap_factor: 10, dense_cutoff: 2000 }
    }
}

/// Potentials on the full vertex range plus solve diagnostics.
#[derive(Clone, Debug)]
pub(crate) struct RawSolution {
    pub potentials: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Sparse row storage over the unknown slots.
struct Csr {
    rowptr: Vec<usize>,
    colind: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl Csr {
    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.diag.len() {
            let mut acc = self.diag[i] * x[i];
            for k in self.rowptr[i]..self.rowptr[i + 1] {
                acc += self.vals[k] * x[self.colind[k]];
            }
            y[i] = acc;
        }
    }
}

enum Backend {
    Direct(BandedCholesky),
    ConjugateGradient,
}

struct BandedCholesky {
    bw: usize,
    /// Lower factor, row-major bands: `L[i][j]` lives at `i * (bw + 1) + (i - j)`.
    factor: Vec<f64>,
    /// Band position -> unknown slot.
    perm: Vec<usize>,
}

/// A grounded system, factored or preconditioned once, reusable across
/// right-hand sides.
pub(crate) struct Prepared {
    vertex_count: usize,
    /// Vertex -> unknown slot, `usize::MAX` for ground and unreachable vertices.
    slot_of: Vec<usize>,
    /// Unknown slot -> vertex.
    vertex_of: Vec<usize>,
    csr: Csr,
    backend: Backend,
    opts: SolveOptions,
}

impl Prepared {
    /// Assemble and prepare the Laplacian of `(edges, conductances)` on
    /// `vertex_count` vertices, grounded at `ground`.
    pub fn new(
        vertex_count: usize,
        edges: &[Edge],
        conductances: &[f64],
        ground: usize,
        opts: SolveOptions,
    ) -> Result<Self> {
        debug_assert_eq!(edges.len(), conductances.len());

        // Neighbor lists with parallel edges merged.
        let mut degree = vec![0usize; vertex_count];
        for e in edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut adj_ptr = vec![0usize; vertex_count + 1];
        for v in 0..vertex_count {
            adj_ptr[v + 1] = adj_ptr[v] + degree[v];
        }
        let mut adj_to = vec![0usize; adj_ptr[vertex_count]];
        let mut adj_c = vec![0f64; adj_ptr[vertex_count]];
        let mut fill = adj_ptr.clone();
        for (e, &c) in edges.iter().zip(conductances) {
            adj_to[fill[e.u]] = e.v;
            adj_c[fill[e.u]] = c;
            fill[e.u] += 1;
            adj_to[fill[e.v]] = e.u;
            adj_c[fill[e.v]] = c;
            fill[e.v] += 1;
        }

        // Component of the ground vertex.
        let mut in_comp = vec![false; vertex_count];
        in_comp[ground] = true;
        let mut stack = vec![ground];
        while let Some(x) = stack.pop() {
            for &y in &adj_to[adj_ptr[x]..adj_ptr[x + 1]] {
                if !in_comp[y] {
                    in_comp[y] = true;
                    stack.push(y);
                }
            }
        }

        let mut slot_of = vec![usize::MAX; vertex_count];
        let mut vertex_of = Vec::new();
        for v in 0..vertex_count {
            if in_comp[v] && v != ground {
                slot_of[v] = vertex_of.len();
                vertex_of.push(v);
            }
        }
        let n = vertex_of.len();

        // Reduced CSR: off-diagonal entries -c between unknowns, merged;
        // the diagonal keeps the full degree, including edges to ground.
        let mut rowptr = vec![0usize; n + 1];
        let mut diag = vec![0f64; n];
        let mut entries: Vec<(usize, f64)> = Vec::new();
        let mut colind = Vec::new();
        let mut vals = Vec::new();
        for (i, &v) in vertex_of.iter().enumerate() {
            entries.clear();
            let mut d = 0.0;
            for k in adj_ptr[v]..adj_ptr[v + 1] {
                d += adj_c[k];
                let j = slot_of[adj_to[k]];
                if j != usize::MAX {
                    entries.push((j, -adj_c[k]));
                }
            }
            entries.sort_unstable_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
            for &(j, w) in entries.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += w,
                    _ => merged.push((j, w)),
                }
            }
            diag[i] = d;
            for (j, w) in merged {
                colind.push(j);
                vals.push(w);
            }
            rowptr[i + 1] = colind.len();
        }
        let csr = Csr { rowptr, colind, vals, diag };

        let backend = if n <= opts.dense_cutoff {
            Backend::Direct(BandedCholesky::factor(&csr)?)
        } else {
            Backend::ConjugateGradient
        };

        Ok(Prepared { vertex_count, slot_of, vertex_of, csr, backend, opts })
    }

    pub fn in_component(&self, vertex: usize) -> bool {
        self.slot_of[vertex] != usize::MAX
    }

    /// Solve with a unit current injected at `source` (and extracted at the
    /// ground). Potentials come back on the full vertex range, zero at the
    /// ground and on unreachable vertices.
    pub fn solve_unit(&self, source: usize) -> Result<RawSolution> {
        let slot = self.slot_of[source];
        if slot == usize::MAX {
            return Err(Error::Disconnected);
        }
        let n = self.vertex_of.len();
        let mut rhs = vec![0.0; n];
        rhs[slot] = 1.0;
        let (x, iterations, residual) = match &self.backend {
            Backend::Direct(f) => {
                let x = f.solve(&rhs);
                let r = self.relative_residual(&x, &rhs);
                (x, 0, r)
            }
            Backend::ConjugateGradient => self.pcg(&rhs)?,
        };
        let mut potentials = vec![0.0; self.vertex_count];
        for (i, &v) in self.vertex_of.iter().enumerate() {
            potentials[v] = x[i];
        }
        Ok(RawSolution { potentials, iterations, residual })
    }

    fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let n = x.len();
        let mut ax = vec![0.0; n];
        self.csr.matvec(x, &mut ax);
        let mut rr = 0.0;
        let mut bb = 0.0;
        for i in 0..n {
            let d = b[i] - ax[i];
            rr += d * d;
            bb += b[i] * b[i];
        }
        if bb == 0.0 {
            0.0
        } else {
            math::sqrt(rr / bb)
        }
    }

    fn pcg(&self, b: &[f64]) -> Result<(Vec<f64>, usize, f64)> {
        let n = b.len();
        let cap = self.opts.iter_cap_factor.saturating_mul(n).max(1);
        let tol = self.opts.rel_residual;
        let dinv: Vec<f64> = self.csr.diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();

        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let bnorm = math::sqrt(dot(b, b));
        if bnorm == 0.0 {
            return Ok((x, 0, 0.0));
        }
        let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(ri, di)| ri * di).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut q = vec![0.0; n];
        let mut rnorm = math::sqrt(dot(&r, &r));

        for it in 1..=cap {
            self.csr.matvec(&p, &mut q);
            let pq = dot(&p, &q);
            if pq <= 0.0 || pq.is_nan() {
                return Err(Error::SingularSystem);
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            rnorm = math::sqrt(dot(&r, &r));
            if rnorm <= tol * bnorm {
                return Ok((x, it, rnorm / bnorm));
            }
            for i in 0..n {
                z[i] = r[i] * dinv[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::NonConvergence { iterations: cap, residual: rnorm / bnorm })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl BandedCholesky {
    fn factor(csr: &Csr) -> Result<Self> {
        let n = csr.diag.len();
        let perm = rcm_order(csr);
        let mut inv_perm = vec![0usize; n];
        for (pos, &slot) in perm.iter().enumerate() {
            inv_perm[slot] = pos;
        }

        let mut bw = 0usize;
        for i in 0..n {
            for k in csr.rowptr[i]..csr.rowptr[i + 1] {
                let d = inv_perm[i].abs_diff(inv_perm[csr.colind[k]]);
                bw = bw.max(d);
            }
        }

        let w = bw + 1;
        let mut band = vec![0.0; n * w];
        for pos in 0..n {
            let slot = perm[pos];
            band[pos * w] = csr.diag[slot];
            for k in csr.rowptr[slot]..csr.rowptr[slot + 1] {
                let other = inv_perm[csr.colind[k]];
                if other < pos {
                    band[pos * w + (pos - other)] = csr.vals[k];
                }
            }
        }

        // In-place banded Cholesky, lower factor.
        for j in 0..n {
            let start = j.saturating_sub(bw);
            let mut d = band[j * w];
            for k in start..j {
                let l = band[j * w + (j - k)];
                d -= l * l;
            }
            if d <= 0.0 || d.is_nan() {
                return Err(Error::SingularSystem);
            }
            let dj = math::sqrt(d);
            band[j * w] = dj;
            let hi = (j + bw).min(n - 1);
            for i in j + 1..=hi {
                let mut s = band[i * w + (i - j)];
                let lo = start.max(i.saturating_sub(bw));
                for k in lo..j {
                    s -= band[i * w + (i - k)] * band[j * w + (j - k)];
                }
                band[i * w + (i - j)] = s / dj;
            }
        }

        Ok(BandedCholesky { bw, factor: band, perm })
    }

    #[allow(clippy::needless_range_loop)] // textbook banded substitution
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let w = self.bw + 1;
        let mut y = vec![0.0; n];
        for pos in 0..n {
            y[pos] = rhs[self.perm[pos]];
        }
        // forward: L y' = y
        for i in 0..n {
            let start = i.saturating_sub(self.bw);
            let mut s = y[i];
            for k in start..i {
                s -= self.factor[i * w + (i - k)] * y[k];
            }
            y[i] = s / self.factor[i * w];
        }
        // backward: L^T x = y'
        for i in (0..n).rev() {
            let hi = (i + self.bw).min(n - 1);
            let mut s = y[i];
            for k in i + 1..=hi {
                s -= self.factor[k * w + (k - i)] * y[k];
            }
            y[i] = s / self.factor[i * w];
        }
        let mut x = vec![0.0; n];
        for pos in 0..n {
            x[self.perm[pos]] = y[pos];
        }
        x
    }
}

/// Reverse Cuthill-McKee ordering of the unknown slots. Returns the
/// permutation as `position -> slot`. Disconnected pieces are ordered one
/// after another.
fn rcm_order(csr: &Csr) -> Vec<usize> {
    let n = csr.diag.len();
    let degree = |i: usize| csr.rowptr[i + 1] - csr.rowptr[i];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut nbrs: Vec<usize> = Vec::new();

    let mut slots_by_degree: Vec<usize> = (0..n).collect();
    slots_by_degree.sort_unstable_by_key(|&i| degree(i));

    for &seed in &slots_by_degree {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        let mut head = order.len();
        order.push(seed);
        while head < order.len() {
            let x = order[head];
            head += 1;
            nbrs.clear();
            for k in csr.rowptr[x]..csr.rowptr[x + 1] {
                let y = csr.colind[k];
                if !visited[y] {
                    visited[y] = true;
                    nbrs.push(y);
                }
            }
            nbrs.sort_unstable_by_key(|&y| degree(y));
            order.extend_from_slice(&nbrs);
        }
    }
    order.reverse();
    order
}
