//! Five-point Dirichlet Schrödinger operator `−Δ + V` on a masked grid and a
//! solver for its lowest eigenpairs.
//!
//! Unknowns are the masked nodes in increasing array index. Dropping the
//! out-of-mask neighbours from the stencil imposes the Dirichlet condition.
//!
//! [`smallest_k`] runs block subspace iteration on `(H − σ)⁻¹` with a banded
//! Cholesky factor, re-orthonormalising by QR and extracting Ritz pairs by
//! Rayleigh–Ritz each sweep.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::grid::GridGeometry;
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 1000;
const NONE: usize = usize::MAX;
/// Below this many unknowns the operator is diagonalised densely.
const DENSE_LIMIT: usize = 400;

#[derive(Debug, Clone)]
pub struct DiscreteHamiltonian {
    geometry: GridGeometry,
    potential: Vec<f64>,
    /// Array index of each unknown.
    nodes: Vec<usize>,
    /// In-mask neighbours of each unknown, padded with `NONE`.
    adjacency: Vec<[usize; 4]>,
    inv_h2: f64,
}

/// Operator for `geometry` with the potential sampled at node positions.
pub fn assemble(geometry: &GridGeometry, potential: impl Fn(f64, f64) -> f64) -> Result<DiscreteHamiltonian> {
    let nodes = geometry.nodes();
    if nodes.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let mut dof = vec![NONE; geometry.len()];
    for (k, &idx) in nodes.iter().enumerate() {
        dof[idx] = k;
    }
    let mut adjacency = Vec::with_capacity(nodes.len());
    let mut values = Vec::with_capacity(nodes.len());
    for &idx in &nodes {
        let mut nb = [NONE; 4];
        for (slot, w) in geometry.neighbors(idx).filter(|&w| dof[w] != NONE).enumerate() {
            nb[slot] = dof[w];
        }
        adjacency.push(nb);
        let (x, y) = geometry.xy(idx);
        let v = potential(x, y);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("potential is {v} at ({x}, {y})")));
        }
        values.push(v);
    }
    let h = geometry.h();
    Ok(DiscreteHamiltonian {
        geometry: geometry.clone(),
        potential: values,
        nodes,
        adjacency,
        inv_h2: 1.0 / (h * h),
    })
}

/// The free Laplacian, `V = 0`.
pub fn assemble_free(geometry: &GridGeometry) -> Result<DiscreteHamiltonian> {
    assemble(geometry, |_, _| 0.0)
}

impl DiscreteHamiltonian {
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Array index of each unknown.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    fn neighbours(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[k].iter().copied().take_while(|&j| j != NONE)
    }

    fn diagonal(&self, k: usize) -> f64 {
        4.0 * self.inv_h2 + self.potential[k]
    }

    /// `y = H x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        for k in 0..self.dim() {
            let off: f64 = self.neighbours(k).map(|j| x[j]).sum();
            y[k] = self.diagonal(k) * x[k] - self.inv_h2 * off;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.matvec(x, &mut y);
        y
    }

    pub fn max_abs_potential(&self) -> f64 {
        self.potential.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `8/h² + max|V|`, an upper bound on the operator norm.
    pub fn norm_estimate(&self) -> f64 {
        8.0 * self.inv_h2 + self.max_abs_potential()
    }

    /// `4/h² + max|V|`; residuals are accepted below `tol` times this.
    pub fn residual_scale(&self) -> f64 {
        4.0 * self.inv_h2 + self.max_abs_potential()
    }

    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        let hx = self.apply(x);
        dot(x, &hx) / dot(x, x)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut a = DMatrix::zeros(n, n);
        for k in 0..n {
            a[(k, k)] = self.diagonal(k);
            for j in self.neighbours(k) {
                a[(k, j)] = -self.inv_h2;
            }
        }
        a
    }

    /// Field on the unknowns spread back onto the full array, zero elsewhere.
    pub fn to_array(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.geometry.len()];
        for (&idx, &v) in self.nodes.iter().zip(values) {
            out[idx] = v;
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    pub value: f64,
    /// Unit 2-norm, indexed like [`DiscreteHamiltonian::nodes`].
    #[serde(skip)]
    pub vector: Vec<f64>,
    /// `‖H u − λ u‖₂`
    pub residual: f64,
}

/// Cholesky factor of `H − σ` stored by rows within a fixed bandwidth, under
/// a reordering that keeps neighbours close.
struct BandCholesky {
    n: usize,
    bw: usize,
    /// Row `i` holds `L[i][i−bw ..= i]`.
    rows: Vec<f64>,
    /// Position of each unknown in the factor ordering.
    pos: Vec<usize>,
}

impl BandCholesky {
    fn new(op: &DiscreteHamiltonian, shift: f64) -> Option<Self> {
        let n = op.dim();
        let pos = band_ordering(op);
        let mut bw = 0;
        for k in 0..n {
            for j in op.neighbours(k) {
                bw = bw.max(pos[k].abs_diff(pos[j]));
            }
        }
        let w = bw + 1;
        let mut rows = vec![0.0; n * w];
        let at = |i: usize, j: usize| i * w + (j + bw - i);
        for k in 0..n {
            let i = pos[k];
            rows[at(i, i)] = op.diagonal(k) - shift;
            for j in op.neighbours(k) {
                let pj = pos[j];
                if pj < i {
                    rows[at(i, pj)] = -op.inv_h2;
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(bw));
                let mut s = rows[at(i, j)];
                for k in klo..j {
                    s -= rows[at(i, k)] * rows[at(j, k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return None;
                    }
                    rows[at(i, i)] = s.sqrt();
                } else {
                    rows[at(i, j)] = s / rows[at(j, j)];
                }
            }
        }
        Some(BandCholesky { n, bw, rows, pos })
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let at = |i: usize, j: usize| i * w + (j + bw - i);
        let mut z = vec![0.0; n];
        for (k, &p) in self.pos.iter().enumerate() {
            z[p] = b[k];
        }
        for i in 0..n {
            let mut s = z[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.rows[at(i, k)] * z[k];
            }
            z[i] = s / self.rows[at(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n.min(i + bw + 1) {
                s -= self.rows[at(k, i)] * z[k];
            }
            z[i] = s / self.rows[at(i, i)];
        }
        for (k, &p) in self.pos.iter().enumerate() {
            x[k] = z[p];
        }
    }
}

/// Lexicographic ordering along whichever axis gives the narrower band.
fn band_ordering(op: &DiscreteHamiltonian) -> Vec<usize> {
    let g = &op.geometry;
    let by_rows: Vec<usize> = (0..op.dim()).collect();
    let mut by_cols = by_rows.clone();
    by_cols.sort_by_key(|&k| {
        let (i, j) = g.ij(op.nodes[k]);
        (i, j)
    });
    let width = |order: &[usize]| {
        let mut pos = vec![0; order.len()];
        for (p, &k) in order.iter().enumerate() {
            pos[k] = p;
        }
        let bw = (0..op.dim())
            .flat_map(|k| op.neighbours(k).map(move |j| (k, j)))
            .map(|(k, j)| pos[k].abs_diff(pos[j]))
            .max()
            .unwrap_or(0);
        (bw, pos)
    };
    let (bw_r, pos_r) = width(&by_rows);
    let (bw_c, pos_c) = width(&by_cols);
    if bw_c < bw_r {
        pos_c
    } else {
        pos_r
    }
}

/// Largest-magnitude entry made positive, first index on ties.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residual(op: &DiscreteHamiltonian, value: f64, v: &[f64]) -> f64 {
    let hv = op.apply(v);
    hv.iter().zip(v).map(|(a, b)| (a - value * b).powi(2)).sum::<f64>().sqrt()
}

fn dense_pairs(op: &DiscreteHamiltonian, k: usize) -> Vec<EigenPair> {
    let eig = SymmetricEigen::new(op.to_dense());
    let mut order: Vec<usize> = (0..op.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .take(k)
        .map(|c| {
            let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            let s = norm(&v);
            v.iter_mut().for_each(|x| *x /= s);
            fix_sign(&mut v);
            let value = op.rayleigh_quotient(&v);
            EigenPair { value, residual: residual(op, value, &v), vector: v }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: DEFAULT_TOL, seed: 0, max_iter: DEFAULT_MAX_ITER }
    }
}

/// The `k` lowest eigenpairs in ascending order, each with residual at most
/// `tol · (4/h² + max|V|)`. Deterministic for a given seed.
pub fn smallest_k(op: &DiscreteHamiltonian, k: usize, tol: f64, seed: u64) -> Result<Vec<EigenPair>> {
    smallest_k_with(op, k, SolverOptions { tol, seed, ..SolverOptions::default() })
}

pub fn smallest_k_with(op: &DiscreteHamiltonian, k: usize, opts: SolverOptions) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    if k == 0 {
        return Ok(Vec::new());
    }
    if k > n {
        return Err(Error::Precondition(format!("asked for {k} eigenpairs of a {n}-dimensional operator")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if n <= DENSE_LIMIT {
        return Ok(dense_pairs(op, k));
    }
    let threshold = opts.tol * op.residual_scale();
    let p = n.min(k + k.max(8));

    // −Δ_h is positive definite, so any shift at or below min V works.
    let vmin = op.potential.iter().copied().fold(f64::INFINITY, f64::min);
    let factor = BandCholesky::new(op, vmin)
        .or_else(|| BandCholesky::new(op, vmin - 1.0))
        .ok_or_else(|| Error::Precondition("shifted operator is not positive definite".into()))?;
    log::debug!("band factor: n = {n}, bandwidth = {}", factor.bw);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0));
    q = q.qr().q();

    let mut best: Vec<f64> = vec![f64::INFINITY; k];
    let mut col = vec![0.0; n];
    let mut out = vec![0.0; n];
    for iter in 1..=opts.max_iter {
        for c in 0..p {
            col.copy_from_slice(q.column(c).as_slice());
            factor.solve(&col, &mut out);
            q.column_mut(c).copy_from_slice(&out);
        }
        q = q.qr().q();

        let mut hq = DMatrix::zeros(n, p);
        for c in 0..p {
            op.matvec(q.column(c).as_slice(), &mut out);
            hq.column_mut(c).copy_from_slice(&out);
        }
        let t = q.transpose() * &hq;
        let t = (&t + t.transpose()) * 0.5;
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let rot = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
        let thetas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        q = &q * &rot;
        let hq = hq * &rot;

        let residuals: Vec<f64> = (0..k)
            .map(|c| {
                let r: DVector<f64> = hq.column(c) - q.column(c) * thetas[c];
                r.norm()
            })
            .collect();
        for (b, r) in best.iter_mut().zip(&residuals) {
            *b = b.min(*r);
        }
        if residuals.iter().all(|&r| r <= threshold) {
            log::debug!("converged after {iter} sweeps");
            return Ok((0..k)
                .map(|c| {
                    let mut v: Vec<f64> = q.column(c).iter().copied().collect();
                    fix_sign(&mut v);
                    EigenPair { value: thetas[c], vector: v, residual: residuals[c] }
                })
                .collect());
        }
    }
    Err(Error::Convergence { iterations: opts.max_iter, residuals: best })
}

/// Closed-form eigenvalues of the free operator on an `nx × ny` block of
/// interior nodes: `(4/h²)(sin²(mπ/(2(nx+1))) + sin²(nπ/(2(ny+1))))`,
/// ascending, first `k`.
pub fn discrete_oracle(nx: usize, ny: usize, h: f64, k: usize) -> Vec<f64> {
    let factor = |m: usize, n: usize| {
        let s = (m as f64 * std::f64::consts::PI / (2.0 * (n + 1) as f64)).sin();
        s * s
    };
    let xs: Vec<f64> = (1..=nx).map(|m| factor(m, nx)).collect();
    let ys: Vec<f64> = (1..=ny).map(|m| factor(m, ny)).collect();
    let mut all: Vec<f64> = xs
        .iter()
        .flat_map(|a| ys.iter().map(move |b| 4.0 / (h * h) * (a + b)))
        .collect();
    all.sort_by(f64::total_cmp);
    all.truncate(k);
    all
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayleighReport {
    /// `|⟨u, Hu⟩ − λ|` per pair.
    pub quotient_errors: Vec<f64>,
    /// For each `j`, the smallest quotient over random trials orthogonal to the
    /// first `j` vectors, minus `λ_{j+1}`; should not be negative beyond `tol`.
    pub deflation_margins: Vec<f64>,
    pub tol: f64,
    pub holds: bool,
}

/// Rayleigh-quotient consistency and the min–max characterisation sampled
/// with `trials` random vectors per deflation level.
pub fn rayleigh_check(op: &DiscreteHamiltonian, pairs: &[EigenPair], trials: usize, seed: u64) -> RayleighReport {
    let tol = DEFAULT_TOL * op.norm_estimate();
    let quotient_errors: Vec<f64> = pairs
        .iter()
        .map(|p| (op.rayleigh_quotient(&p.vector) - p.value).abs())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = op.dim();
    let mut deflation_margins = Vec::with_capacity(pairs.len());
    for j in 0..pairs.len() {
        let mut lowest = f64::INFINITY;
        for _ in 0..trials {
            let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for _ in 0..2 {
                for p in &pairs[..j] {
                    let c = dot(&x, &p.vector);
                    x.iter_mut().zip(&p.vector).for_each(|(a, b)| *a -= c * b);
                }
            }
            lowest = lowest.min(op.rayleigh_quotient(&x));
        }
        deflation_margins.push(lowest - pairs[j].value);
    }
    let holds = quotient_errors.iter().all(|&e| e <= tol) && deflation_margins.iter().all(|&m| m >= -tol);
    RayleighReport { quotient_errors, deflation_margins, tol, holds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_node() {
        let g = GridGeometry::rectangle(1, 1, 0.5, (0.0, 0.0)).unwrap();
        let op = assemble_free(&g).unwrap();
        assert_eq!(op.to_dense(), DMatrix::from_element(1, 1, 16.0));
        let pairs = smallest_k(&op, 1, 1e-9, 0).unwrap();
        assert!((pairs[0].value - 16.0).abs() < 1e-12);
        assert!((discrete_oracle(1, 1, 0.5, 1)[0] - 16.0).abs() < 1e-12);
    }

    #[test]
    fn strip_is_tridiagonal() {
        let g = GridGeometry::rectangle(3, 1, 1.0, (0.0, 0.0)).unwrap();
        let a = assemble_free(&g).unwrap().to_dense();
        let expected = DMatrix::from_row_slice(3, 3, &[4.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 4.0]);
        assert_eq!(a, expected);
    }

    #[test]
    fn oracle_values() {
        let v = discrete_oracle(3, 1, 0.25, 1);
        let one_d = 16.0 * (2.0 - 2f64.sqrt());
        let y = 64.0 * (PI / 4.0).sin().powi(2);
        assert!((v[0] - (one_d + y)).abs() < 1e-9);
        assert!((one_d - 9.3726).abs() < 1e-4);
        let mut a = discrete_oracle(4, 7, 0.3, 28);
        let mut b = discrete_oracle(7, 4, 0.3, 28);
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * x);
        }
    }

    #[test]
    fn nonfinite_potential_rejected() {
        let g = GridGeometry::rectangle(3, 3, 1.0, (0.0, 0.0)).unwrap();
        assert!(matches!(assemble(&g, |_, _| f64::NAN), Err(Error::NonFinite(_))));
    }

    #[test]
    fn iterative_matches_oracle_on_small_square() {
        let g = GridGeometry::rectangle(31, 31, PI / 32.0, (0.0, 0.0)).unwrap();
        let op = assemble_free(&g).unwrap();
        let pairs = smallest_k(&op, 6, 1e-9, 7).unwrap();
        let oracle = discrete_oracle(31, 31, PI / 32.0, 6);
        for (p, o) in pairs.iter().zip(&oracle) {
            assert!((p.value - o).abs() <= 1e-8 * o, "{} vs {}", p.value, o);
            assert!(p.residual <= 1e-9 * op.residual_scale());
        }
        for (i, a) in pairs.iter().enumerate() {
            for (j, b) in pairs.iter().enumerate() {
                let d = dot(&a.vector, &b.vector);
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((d - e).abs() < 1e-8);
            }
        }
        let again = smallest_k(&op, 6, 1e-9, 7).unwrap();
        assert_eq!(pairs, again);
        let r = rayleigh_check(&op, &pairs, 20, 1);
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn convergence_failure_is_reported() {
        let g = GridGeometry::rectangle(31, 31, 0.1, (0.0, 0.0)).unwrap();
        let op = assemble_free(&g).unwrap();
        let r = smallest_k_with(&op, 4, SolverOptions { tol: 1e-14, seed: 0, max_iter: 2 });
        match r {
            Err(Error::Convergence { iterations, residuals }) => {
                assert_eq!(iterations, 2);
                assert_eq!(residuals.len(), 4);
            }
            other => panic!("expected a convergence error, got {other:?}"),
        }
    }

    #[test]
    fn band_solve_inverts() {
        let g = GridGeometry::rectangle(9, 5, 0.5, (0.0, 0.0)).unwrap();
        let op = assemble(&g, |x, _| x).unwrap();
        let f = BandCholesky::new(&op, 0.0).unwrap();
        let b: Vec<f64> = (0..op.dim()).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; b.len()];
        f.solve(&b, &mut x);
        let back = op.apply(&x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).abs() < 1e-10);
        }
    }
}
