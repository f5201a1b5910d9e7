//! Discrete capacity on a grid.
//!
//! `Cap_U(A)` is the minimum of `Σ_edges (s_i − s_j)²` over node functions
//! with `s = 1` on `A` and `s = 0` off the mask of `U`. The minimiser is
//! discrete harmonic on `U ∖ A` and is found with conjugate gradients
//! preconditioned by symmetric SOR. In two dimensions the energy carries no
//! `h` weight, matching the scale invariance of the continuum Dirichlet
//! integral.

use serde::Serialize;

use crate::grid::{GridGeometry, SubdomainFamily};
use crate::nodal::{extract, NodalDecomposition};
use crate::{Error, Result};

pub const DEFAULT_SOLVE_TOL: f64 = 1e-10;
/// Capacities at or below this count as zero.
pub const CAPACITY_FLOOR: f64 = 1e-12;
const NONE: usize = usize::MAX;
const MAX_ITER: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityResult {
    /// Dirichlet energy of the harmonic extension.
    pub capacity: f64,
    /// Net flux out of `A`; equals the energy for an exact minimiser.
    pub flux: f64,
    pub iterations: usize,
    pub relative_residual: f64,
}

impl CapacityResult {
    fn zero() -> Self {
        CapacityResult { capacity: 0.0, flux: 0.0, iterations: 0, relative_residual: 0.0 }
    }
}

/// Capacity of the node set `a` (a mask over the array of `u`) relative to
/// the masked region of `u`.
pub fn capacity(u: &GridGeometry, a: &[bool], solve_tol: f64) -> Result<CapacityResult> {
    if a.len() != u.len() {
        return Err(Error::Precondition("set A has the wrong mask size".into()));
    }
    if let Some(i) = (0..a.len()).find(|&i| a[i] && !u.mask()[i]) {
        return Err(Error::Precondition(format!("node {i} of A lies outside U")));
    }
    if !a.iter().any(|&b| b) {
        return Ok(CapacityResult::zero());
    }

    let mut dof = vec![NONE; u.len()];
    let mut free = Vec::new();
    for i in 0..u.len() {
        if u.mask()[i] && !a[i] {
            dof[i] = free.len();
            free.push(i);
        }
    }
    let n = free.len();
    let mut adj = vec![[NONE; 4]; n];
    let mut rhs = vec![0.0; n];
    for (k, &i) in free.iter().enumerate() {
        for (slot, w) in u.neighbors(i).enumerate() {
            if a[w] {
                rhs[k] += 1.0;
            } else {
                adj[k][slot] = dof[w];
            }
        }
    }

    let (s_free, iterations, rel) = if n == 0 {
        (Vec::new(), 0, 0.0)
    } else {
        pcg_ssor(&adj, &rhs, solve_tol, u)?
    };
    let mut s = vec![0.0; u.len()];
    for (k, &i) in free.iter().enumerate() {
        s[i] = s_free[k];
    }
    for i in 0..u.len() {
        if a[i] {
            s[i] = 1.0;
        }
    }

    let mut energy = 0.0;
    let mut flux = 0.0;
    for i in 0..u.len() {
        if !u.mask()[i] {
            continue;
        }
        for w in u.neighbors(i) {
            let d = s[i] - s[w];
            // interior edges are seen from both ends
            energy += if u.mask()[w] { 0.5 * d * d } else { d * d };
            if a[i] {
                flux += d;
            }
        }
    }
    Ok(CapacityResult { capacity: energy, flux, iterations, relative_residual: rel })
}

/// `4 s_k − Σ_{free neighbours} s_j`
fn apply(adj: &[[usize; 4]], x: &[f64], y: &mut [f64]) {
    for (k, nb) in adj.iter().enumerate() {
        let mut off = 0.0;
        for &j in nb {
            if j != NONE {
                off += x[j];
            }
        }
        y[k] = 4.0 * x[k] - off;
    }
}

/// Symmetric SOR preconditioner `z = M⁻¹ r` for the constant-diagonal operator.
fn ssor(adj: &[[usize; 4]], omega: f64, r: &[f64], z: &mut [f64]) {
    let n = r.len();
    let d = 4.0;
    // forward sweep: (D/ω + L) y = r
    for k in 0..n {
        let mut s = r[k];
        for &j in &adj[k] {
            if j != NONE && j < k {
                s += z[j];
            }
        }
        z[k] = s * omega / d;
    }
    // scale by D (2−ω)/ω
    let scale = d * (2.0 - omega) / omega;
    for v in z.iter_mut() {
        *v *= scale;
    }
    // backward sweep: (D/ω + U) z = y
    for k in (0..n).rev() {
        let mut s = z[k];
        for &j in &adj[k] {
            if j != NONE && j > k {
                s += z[j];
            }
        }
        z[k] = s * omega / d;
    }
}

fn pcg_ssor(adj: &[[usize; 4]], b: &[f64], tol: f64, u: &GridGeometry) -> Result<(Vec<f64>, usize, f64)> {
    let n = b.len();
    let side = (u.nx().max(u.ny())) as f64;
    let omega = 2.0 / (1.0 + std::f64::consts::PI / side);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    ssor(adj, omega, &r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = 1.0;
    for it in 1..=MAX_ITER {
        apply(adj, &p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= tol {
            // recompute the true residual to guard against drift
            apply(adj, &x, &mut ap);
            let true_rel = ap.iter().zip(b).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt() / bnorm;
            if true_rel <= tol * 10.0 {
                return Ok((x, it, true_rel));
            }
            for k in 0..n {
                r[k] = b[k] - ap[k];
            }
        }
        ssor(adj, omega, &r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(Error::Convergence { iterations: MAX_ITER, residuals: vec![rel] })
}

/// Nodes of `g`'s array strictly within Euclidean distance `r` of node `x`.
fn ball(g: &GridGeometry, x: usize, r: f64) -> Vec<bool> {
    let (cx, cy) = g.xy(x);
    let eps = 1e-9 * g.h();
    (0..g.len())
        .map(|i| {
            let (px, py) = g.xy(i);
            (px - cx).hypot(py - cy) < r - eps
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusEntry {
    pub requested: f64,
    pub radius: f64,
    pub clipped: bool,
    pub capacity: f64,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub node: usize,
    pub entries: Vec<RadiusEntry>,
    pub regular: bool,
}

/// Capacity of `B(x, r) ∖ D` relative to `B(x, 2r)` for each radius; `x` is
/// regular when every one is above [`CAPACITY_FLOOR`]. `d` is a mask over the
/// array of `omega0`. Radii whose outer ball would leave the array are
/// clipped.
pub fn is_capacity_regular(omega0: &GridGeometry, d: &[bool], x: usize, radii: &[f64]) -> Result<RegularityReport> {
    if d.len() != omega0.len() {
        return Err(Error::Precondition("domain D has the wrong mask size".into()));
    }
    let (i, j) = omega0.ij(x);
    let edge = i.min(j).min(omega0.nx() - 1 - i).min(omega0.ny() - 1 - j) as f64 * omega0.h();
    let mut entries = Vec::with_capacity(radii.len());
    for &requested in radii {
        if !(requested > 0.0) {
            return Err(Error::Precondition(format!("radius must be positive, got {requested}")));
        }
        let radius = requested.min(edge / 2.0);
        let clipped = radius < requested;
        if clipped {
            log::warn!("radius {requested} at node {x} clipped to {radius} to stay on the grid");
        }
        let outer = ball(omega0, x, 2.0 * radius);
        let inner = ball(omega0, x, radius);
        let a: Vec<bool> = inner.iter().zip(d).map(|(&b, &in_d)| b && !in_d).collect();
        let cap = if a.iter().any(|&v| v) {
            let u = omega0.with_mask(outer)?;
            capacity(&u, &a, DEFAULT_SOLVE_TOL)?.capacity
        } else {
            0.0
        };
        entries.push(RadiusEntry { requested, radius, clipped, capacity: cap, positive: cap > CAPACITY_FLOOR });
    }
    let regular = entries.iter().all(|e| e.positive);
    Ok(RegularityReport { node: x, entries, regular })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarPoint {
    pub h: f64,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarScaling {
    pub points: Vec<PolarPoint>,
    pub strictly_decreasing: bool,
    /// Least squares `Cap ≈ c / ln(1/h)`.
    pub c: f64,
    /// Centred coefficient of determination of that fit.
    pub r_squared: f64,
    /// The same about zero, the usual figure for a fit without intercept.
    pub r_squared_uncentered: f64,
    /// Least squares `1/Cap ≈ α ln(1/h) + β`, i.e. `Cap ≈ (1/α) / (ln(1/h) + β/α)`.
    pub alpha: f64,
    pub beta: f64,
    pub r_squared_offset: f64,
}

/// Capacity of the centre node of the unit disk for each spacing.
pub fn polar_scaling(h_ladder: &[f64]) -> Result<PolarScaling> {
    if h_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("spacings must be strictly decreasing".into()));
    }
    let mut points = Vec::with_capacity(h_ladder.len());
    for &h in h_ladder {
        let cap = single_node_capacity(h, 1)?;
        log::info!("h = {h}: single-node capacity {cap}");
        points.push(PolarPoint { h, capacity: cap });
    }
    let strictly_decreasing = points.windows(2).all(|w| w[1].capacity < w[0].capacity)
        && points.iter().all(|p| p.capacity > 0.0);

    let xs: Vec<f64> = points.iter().map(|p| (1.0 / p.h).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.capacity).collect();
    let f: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
    let c = dot(&f, &ys) / dot(&f, &f);
    let fitted: Vec<f64> = f.iter().map(|v| c * v).collect();
    let r_squared = r2(&ys, &fitted);
    let r_squared_uncentered = 1.0 - dist2(&ys, &fitted) / dot(&ys, &ys);

    let inv: Vec<f64> = ys.iter().map(|y| 1.0 / y).collect();
    let (alpha, beta) = linear_fit(&xs, &inv);
    let r_squared_offset = r2(&inv, &xs.iter().map(|x| alpha * x + beta).collect::<Vec<_>>());
    Ok(PolarScaling { points, strictly_decreasing, c, r_squared, r_squared_uncentered, alpha, beta, r_squared_offset })
}

/// Capacity of `nodes` consecutive nodes on the x axis, starting at the
/// centre of the unit disk, for spacing `h`.
pub fn single_node_capacity(h: f64, nodes: usize) -> Result<f64> {
    use crate::grid::{rasterize, BBox, Shape};
    let g = rasterize(&Shape::disk(0.0, 0.0, 1.0), BBox { x0: -1.0, y0: -1.0, x1: 1.0, y1: 1.0 }, h)?;
    let c = (g.nx() / 2, g.ny() / 2);
    let mut a = vec![false; g.len()];
    for k in 0..nodes {
        a[g.index(c.0 + k, c.1)] = true;
    }
    Ok(capacity(&g, &a, DEFAULT_SOLVE_TOL)?.capacity)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn r2(y: &[f64], fit: &[f64]) -> f64 {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = y.iter().zip(fit).map(|(a, b)| (a - b).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|a| (a - m).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapregReport {
    pub radii: Vec<f64>,
    /// Boundary nodes of family members inside the parent domain.
    pub checked: usize,
    pub regular: usize,
    /// Regular boundary nodes further than one cell from the nodal set.
    pub violations: Vec<usize>,
    /// Nodal domains of `u` against the nodal domains of `u` restricted to
    /// each member, compared away from the one-cell band around the nodal set.
    pub domains_of_u: usize,
    pub domains_of_members: usize,
    pub corollary_mismatches: usize,
    pub holds: bool,
}

/// Nodes of the parent domain outside member `m` with a 4-neighbour in it.
fn outer_boundary(g: &GridGeometry, m: &[bool]) -> Vec<usize> {
    (0..m.len())
        .filter(|&i| g.mask()[i] && !m[i] && g.neighbors(i).any(|w| m[w]))
        .collect()
}

/// Boundary points of an equality family that are capacity-regular must lie
/// in the nodal set of `u`, and the nodal domains of `u` must be those of the
/// restrictions of `u` to the members.
pub fn verify_capreg(
    u: &[f64],
    decomp: &NodalDecomposition,
    family: &SubdomainFamily,
    radii: &[f64],
) -> Result<CapregReport> {
    let g = family.parent();
    if g != decomp.geometry() {
        return Err(Error::Precondition("family and decomposition live on different grids".into()));
    }
    let near = band(g, decomp.nodal_nodes());

    let mut checked = 0;
    let mut regular = 0;
    let mut violations = Vec::new();
    for m in family.masks() {
        for x in outer_boundary(g, m) {
            checked += 1;
            if is_capacity_regular(g, m, x, radii)?.regular {
                regular += 1;
                if !near[x] {
                    violations.push(x);
                }
            }
        }
    }
    violations.sort_unstable();
    violations.dedup();

    let field = {
        let mut f = vec![0.0; g.len()];
        for (&i, &v) in g.nodes().iter().zip(u) {
            f[i] = v;
        }
        f
    };
    let mut member_domains = Vec::new();
    for l in 0..family.len() {
        let member = family.member(l)?;
        let restricted: Vec<f64> = member.nodes().iter().map(|&i| field[i]).collect();
        if restricted.iter().all(|&v| v == 0.0) {
            continue;
        }
        let d = extract(&restricted, &member, decomp.zero_tol())?;
        member_domains.extend(d.domains().iter().cloned());
    }
    let owner = |doms: &[Vec<usize>]| {
        let mut o = vec![NONE; g.len()];
        for (c, d) in doms.iter().enumerate() {
            for &i in d {
                o[i] = c;
            }
        }
        o
    };
    let own_u = owner(decomp.domains());
    let own_m = owner(&member_domains);
    // each member domain must sit inside one domain of u and vice versa,
    // ignoring nodes in the band
    let mut pairing_um = vec![NONE; decomp.domains().len()];
    let mut pairing_mu = vec![NONE; member_domains.len()];
    let mut mismatches = 0;
    for i in 0..g.len() {
        if near[i] || (own_u[i] == NONE && own_m[i] == NONE) {
            continue;
        }
        let (a, b) = (own_u[i], own_m[i]);
        if a == NONE || b == NONE {
            mismatches += 1;
            continue;
        }
        for (slot, val) in [(&mut pairing_um[a], b), (&mut pairing_mu[b], a)] {
            if *slot == NONE {
                *slot = val;
            } else if *slot != val {
                mismatches += 1;
            }
        }
    }
    let holds = violations.is_empty() && mismatches == 0 && decomp.domains().len() == member_domains.len();
    Ok(CapregReport {
        radii: radii.to_vec(),
        checked,
        regular,
        violations,
        domains_of_u: decomp.domains().len(),
        domains_of_members: member_domains.len(),
        corollary_mismatches: mismatches,
        holds,
    })
}

/// Nodes within Chebyshev distance one of `nodes`.
fn band(g: &GridGeometry, nodes: &[usize]) -> Vec<bool> {
    let mut out = vec![false; g.len()];
    for &n in nodes {
        let (i, j) = g.ij(n);
        for dj in -1isize..=1 {
            for di in -1isize..=1 {
                let (a, b) = (i as isize + di, j as isize + dj);
                if a >= 0 && b >= 0 && (a as usize) < g.nx() && (b as usize) < g.ny() {
                    out[g.index(a as usize, b as usize)] = true;
                }
            }
        }
    }
    out
}
