//! Nodal sets and nodal domains of grid eigenvectors.
//!
//! Nodes are signed `+1`, `−1` or `0` by thresholding at `zero_tol · ‖u‖∞`.
//! The nodal domains are the 4-connected components of the nodes of one
//! strict sign. The nodal set is the zero nodes together with both endpoints
//! of every edge across which `u` changes sign; as subdomains, nodal domains
//! exclude it.

use serde::Serialize;

use crate::counting::{count_numeric, NumericSpectrum};
use crate::eigensolver::{smallest_k, DiscreteHamiltonian, EigenPair};
use crate::grid::{components, mask_from_nodes, GridGeometry, SubdomainFamily};
use crate::image::pgm;
use crate::{Error, Result};

pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct NodalDecomposition {
    geometry: GridGeometry,
    /// Per array node; zero outside the mask and on near-zero nodes.
    signs: Vec<i8>,
    /// Per array node; `None` off the nodal domains.
    component_id: Vec<Option<usize>>,
    domains: Vec<Vec<usize>>,
    nodal_nodes: Vec<usize>,
    zero_tol: f64,
}

/// Decomposes `vector`, given on the masked nodes of `geometry` in index order.
pub fn extract(vector: &[f64], geometry: &GridGeometry, zero_tol: f64) -> Result<NodalDecomposition> {
    let nodes = geometry.nodes();
    if vector.len() != nodes.len() {
        return Err(Error::Precondition(format!(
            "vector has {} entries for {} masked nodes",
            vector.len(),
            nodes.len()
        )));
    }
    let peak = vector.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::DegenerateInput("eigenvector vanishes identically".into()));
    }
    let cut = zero_tol * peak;
    let mut signs = vec![0i8; geometry.len()];
    for (&idx, &v) in nodes.iter().zip(vector) {
        signs[idx] = if v > cut {
            1
        } else if v < -cut {
            -1
        } else {
            0
        };
    }
    let mut nodal = vec![false; geometry.len()];
    for &idx in &nodes {
        if signs[idx] == 0 {
            nodal[idx] = true;
            continue;
        }
        for w in geometry.neighbors(idx) {
            if signs[w] * signs[idx] < 0 {
                nodal[idx] = true;
                nodal[w] = true;
            }
        }
    }
    let mut domains = Vec::new();
    for sign in [1i8, -1] {
        let part: Vec<bool> = signs.iter().map(|&s| s == sign).collect();
        domains.extend(components(geometry, &part));
    }
    domains.sort_by_key(|d| d[0]);
    let mut component_id = vec![None; geometry.len()];
    for (c, dom) in domains.iter().enumerate() {
        for &i in dom {
            component_id[i] = Some(c);
        }
    }
    Ok(NodalDecomposition {
        geometry: geometry.clone(),
        signs,
        component_id,
        domains,
        nodal_nodes: (0..geometry.len()).filter(|&i| nodal[i]).collect(),
        zero_tol,
    })
}

impl NodalDecomposition {
    /// Number of nodal domains.
    pub fn mu(&self) -> usize {
        self.domains.len()
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn component_id(&self) -> &[Option<usize>] {
        &self.component_id
    }

    /// Node lists of the nodal domains, ordered by smallest node.
    pub fn domains(&self) -> &[Vec<usize>] {
        &self.domains
    }

    pub fn nodal_nodes(&self) -> &[usize] {
        &self.nodal_nodes
    }

    pub fn nodal_mask(&self) -> Vec<bool> {
        mask_from_nodes(self.geometry.len(), &self.nodal_nodes)
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    /// Sign of each nodal domain.
    pub fn domain_signs(&self) -> Vec<i8> {
        self.domains.iter().map(|d| self.signs[d[0]]).collect()
    }

    /// Sorted `x` coordinates of the nodal nodes on row `j`.
    pub fn nodal_abscissas_on_row(&self, j: usize) -> Vec<f64> {
        self.nodal_nodes
            .iter()
            .filter(|&&i| self.geometry.ij(i).1 == j)
            .map(|&i| self.geometry.xy(i).0)
            .collect()
    }

    /// Grey-level picture: nodal nodes black, outside white, the rest of each
    /// domain in its own grey.
    pub fn to_pgm(&self) -> Vec<u8> {
        let g = &self.geometry;
        let mut gray = vec![255u8; g.len()];
        for &i in &self.nodal_nodes {
            gray[i] = 0;
        }
        let mu = self.mu().max(1);
        for (c, dom) in self.domains.iter().enumerate() {
            let level = 48 + (c * 160 / mu) as u8;
            for &i in dom {
                if gray[i] != 0 {
                    gray[i] = level;
                }
            }
        }
        pgm(g.nx(), g.ny(), &gray)
    }
}

/// One subdomain per nodal domain, in the order of
/// [`NodalDecomposition::domains`], each without its nodal nodes.
pub fn nodal_family(decomp: &NodalDecomposition) -> Result<SubdomainFamily> {
    let nodal = decomp.nodal_mask();
    let len = decomp.geometry.len();
    SubdomainFamily::new(
        decomp.geometry.clone(),
        decomp
            .domains
            .iter()
            .map(|d| {
                let mut m = mask_from_nodes(len, d);
                m.iter_mut().zip(&nodal).for_each(|(a, &b)| *a &= !b);
                m
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub k: usize,
    pub value: f64,
    pub residual: f64,
    pub mu: usize,
    pub n_lower: usize,
    /// `n(λ_k)`
    pub n_mid: usize,
    pub n_upper: usize,
    pub cluster_size: usize,
    pub holds: bool,
    pub sharp: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CourantAudit {
    pub seed: u64,
    pub cluster_tol: f64,
    pub zero_tol: f64,
    /// Eigenpairs computed to separate the last audited cluster.
    pub computed: usize,
    pub entries: Vec<AuditEntry>,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOptions {
    pub tol: f64,
    pub seed: u64,
    pub cluster_tol: f64,
    pub zero_tol: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            tol: crate::eigensolver::DEFAULT_TOL,
            seed: 0,
            cluster_tol: crate::counting::DEFAULT_CLUSTER_TOL,
            zero_tol: DEFAULT_ZERO_TOL,
        }
    }
}

/// Nodal count bound for each of the first `k_max` eigenvectors.
///
/// Extra eigenpairs are computed until the cluster of `λ_{k_max}` is
/// separated from the top of the computed spectrum.
pub fn courant_audit(op: &DiscreteHamiltonian, k_max: usize, opts: AuditOptions) -> Result<CourantAudit> {
    courant_audit_with_pairs(op, k_max, opts).map(|(audit, _)| audit)
}

/// As [`courant_audit`], also returning every eigenpair that was computed.
pub fn courant_audit_with_pairs(
    op: &DiscreteHamiltonian,
    k_max: usize,
    opts: AuditOptions,
) -> Result<(CourantAudit, Vec<EigenPair>)> {
    if k_max == 0 || k_max > op.dim() {
        return Err(Error::Precondition(format!(
            "cannot audit {k_max} eigenvectors of a {}-dimensional operator",
            op.dim()
        )));
    }
    let mut pad = 4;
    loop {
        let want = (k_max + pad).min(op.dim());
        let pairs = smallest_k(op, want, opts.tol, opts.seed)?;
        let spectrum = NumericSpectrum::new(pairs.iter().map(|p| p.value).collect(), opts.cluster_tol)?;
        let counts: Result<Vec<_>> = pairs[..k_max].iter().map(|p| count_numeric(&spectrum, p.value)).collect();
        let counts = match counts {
            Err(Error::InsufficientSpectrum(_)) if want < op.dim() => {
                pad *= 2;
                continue;
            }
            other => other?,
        };
        let mut entries = Vec::with_capacity(k_max);
        for (i, (p, t)) in pairs.iter().zip(counts).enumerate() {
            let mu = extract(&p.vector, op.geometry(), opts.zero_tol)?.mu();
            entries.push(AuditEntry {
                k: i + 1,
                value: p.value,
                residual: p.residual,
                mu,
                n_lower: t.n_lower,
                n_mid: t.n_mid,
                n_upper: t.n_upper,
                cluster_size: t.multiplicity(),
                holds: mu <= t.n_mid,
                sharp: mu == t.n_mid,
            });
        }
        let holds = entries.iter().all(|e| e.holds);
        let audit = CourantAudit {
            seed: opts.seed,
            cluster_tol: opts.cluster_tol,
            zero_tol: opts.zero_tol,
            computed: want,
            entries,
            holds,
        };
        return Ok((audit, pairs));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HarnackViolation {
    pub node: usize,
    pub missing_positive: bool,
    pub missing_negative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackReport {
    pub radius_nodes: usize,
    pub tau: f64,
    pub checked: usize,
    pub violations: Vec<HarnackViolation>,
}

/// Every nodal node should see both signs above `τ‖u‖∞` within a Chebyshev
/// ball of `radius_nodes` nodes.
pub fn harnack_probe(
    decomp: &NodalDecomposition,
    vector: &[f64],
    radius_nodes: usize,
    tau: f64,
) -> Result<HarnackReport> {
    if radius_nodes == 0 {
        return Err(Error::Precondition("probe radius must be at least one node".into()));
    }
    let g = &decomp.geometry;
    let field = {
        let mut f = vec![0.0; g.len()];
        for (&i, &v) in g.nodes().iter().zip(vector) {
            f[i] = v;
        }
        f
    };
    let peak = vector.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cut = tau * peak;
    let r = radius_nodes as isize;
    let mut violations = Vec::new();
    for &node in &decomp.nodal_nodes {
        let (i0, j0) = g.ij(node);
        let (mut pos, mut neg) = (false, false);
        for dj in -r..=r {
            for di in -r..=r {
                let (i, j) = (i0 as isize + di, j0 as isize + dj);
                if i < 0 || j < 0 || i >= g.nx() as isize || j >= g.ny() as isize {
                    continue;
                }
                let idx = g.index(i as usize, j as usize);
                if !g.mask()[idx] {
                    continue;
                }
                pos |= field[idx] > cut;
                neg |= field[idx] < -cut;
            }
        }
        if !(pos && neg) {
            violations.push(HarnackViolation { node, missing_positive: !pos, missing_negative: !neg });
        }
    }
    Ok(HarnackReport { radius_nodes, tau, checked: decomp.nodal_nodes.len(), violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square(n: usize) -> GridGeometry {
        GridGeometry::rectangle(n - 1, n - 1, PI / n as f64, (0.0, 0.0)).unwrap()
    }

    fn sample(g: &GridGeometry, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let v: Vec<f64> = g.nodes().iter().map(|&i| {
            let (x, y) = g.xy(i);
            f(x, y)
        }).collect();
        let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / s).collect()
    }

    #[test]
    fn ground_state_has_one_domain() {
        let g = square(32);
        let u = sample(&g, |x, y| x.sin() * y.sin());
        let d = extract(&u, &g, DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(d.mu(), 1);
        assert!(d.nodal_nodes().is_empty());
        assert_eq!(d.domain_signs(), vec![1]);
        let r = harnack_probe(&d, &u, 3, 1e-3).unwrap();
        assert_eq!(r.checked, 0);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn second_mode_splits_in_half() {
        let g = square(64);
        let u = sample(&g, |x, y| (2.0 * x).sin() * y.sin());
        let d = extract(&u, &g, DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(d.mu(), 2);
        for &i in d.nodal_nodes() {
            assert!((g.xy(i).0 - PI / 2.0).abs() <= g.h() + 1e-12);
        }
        let fam = nodal_family(&d).unwrap();
        assert_eq!(fam.len(), 2);
        assert!(crate::grid::check_disjoint(&fam).disjoint);
        assert_eq!(fam.masks()[0].iter().filter(|&&b| b).count(), 31 * 63);

        let r = harnack_probe(&d, &u, 3, 1e-3).unwrap();
        assert!(r.violations.is_empty());

        let flipped: Vec<f64> = u.iter().map(|x| -x).collect();
        let e = extract(&flipped, &g, DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(e.mu(), d.mu());
        assert_eq!(e.domains(), d.domains());
        assert!(e.signs().iter().zip(d.signs()).all(|(a, b)| *a == -*b));
    }

    #[test]
    fn off_node_line_gives_sign_change_band() {
        let g = square(31);
        let u = sample(&g, |x, y| (2.0 * x).sin() * y.sin());
        let d = extract(&u, &g, DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(d.mu(), 2);
        // the line x = π/2 falls between columns 15 and 16
        assert_eq!(d.nodal_abscissas_on_row(10).len(), 2);
    }

    #[test]
    fn zero_vector_rejected() {
        let g = square(8);
        let u = vec![0.0; g.count()];
        assert!(matches!(extract(&u, &g, 1e-8), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn probe_flags_a_flattened_block() {
        let g = square(32);
        let mut u = sample(&g, |x, y| x.sin() * y.sin());
        let nodes = g.nodes();
        let centre = g.index(16, 16);
        for (k, &i) in nodes.iter().enumerate() {
            let (a, b) = (g.ij(i), g.ij(centre));
            if a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1 {
                u[k] = 0.0;
            }
        }
        let d = extract(&u, &g, DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(d.nodal_nodes().len(), 9);
        let r = harnack_probe(&d, &u, 3, 1e-3).unwrap();
        assert_eq!(r.violations.len(), 9);
        assert!(r.violations.iter().all(|v| v.missing_negative && !v.missing_positive));
    }

    #[test]
    fn nodal_picture() {
        let g = square(8);
        let u = sample(&g, |x, y| (2.0 * x).sin() * y.sin());
        let d = extract(&u, &g, DEFAULT_ZERO_TOL).unwrap();
        let img = d.to_pgm();
        let header = format!("P5\n{} {}\n255\n", g.nx(), g.ny()).len();
        assert_eq!(img.len(), header + g.len());
        assert_eq!(img[header], 255);
    }
}
