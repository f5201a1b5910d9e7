//! Eigenvalue counting functions.
//!
//! For a spectrum `λ_1 ≤ λ_2 ≤ …` and an energy `λ`:
//!
//! * `n̲(λ) = #{j : λ_j < λ}`
//! * `n̄(λ) = #{j : λ_j ≤ λ}`
//! * `n(λ) = n̲(λ) + 1` if `λ` is an eigenvalue, `n̲(λ)` otherwise.
//!
//! Exact spectra answer by rational equality. Numeric spectra group values into
//! clusters of relative width `cluster_tol` and treat a query within that
//! width of a cluster as hitting the eigenvalue.

use std::fmt;
use std::ops::Range;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::exact_spectra::{self, ExactSpectrum, Scale};
use crate::rational;
use crate::{Error, Result};

/// Default relative tolerance for grouping numerically computed eigenvalues.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

/// `(n̲, n, n̄)` at one energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingTriple {
    pub n_lower: usize,
    pub n_mid: usize,
    pub n_upper: usize,
    pub is_eigenvalue: bool,
}

impl CountingTriple {
    /// Builds the triple from `#{λ_j < λ}` and `#{λ_j ≤ λ}`.
    pub fn from_counts(below: usize, at_or_below: usize) -> Self {
        debug_assert!(below <= at_or_below);
        let is_eigenvalue = at_or_below > below;
        Self {
            n_lower: below,
            n_mid: if is_eigenvalue { below + 1 } else { below },
            n_upper: at_or_below,
            is_eigenvalue,
        }
    }

    /// `n̄ − n̲`: the multiplicity when `λ` is an eigenvalue, else 0.
    pub fn multiplicity(&self) -> usize {
        self.n_upper - self.n_lower
    }

    /// `n̄ − n`, the quantity minimised in the partition inequality.
    pub fn upper_gap(&self) -> usize {
        self.n_upper - self.n_mid
    }
}

/// How a spectrum decides equality of energies. Spectra can only be compared
/// under one convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Convention {
    Exact(Scale),
    Numeric { cluster_tol: f64 },
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Convention::Exact(scale) => write!(f, "exact ({scale})"),
            Convention::Numeric { cluster_tol } => write!(f, "numeric (cluster_tol={cluster_tol:e})"),
        }
    }
}

/// A spectrum the counting functions can be evaluated on.
pub trait Spectrum: Sized {
    type Energy: Clone + fmt::Debug;

    fn triple(&self, energy: &Self::Energy) -> Result<CountingTriple>;

    /// `λ_k`, 1-based, counted with multiplicity.
    fn kth(&self, k: usize) -> Result<Self::Energy>;

    /// Whether two energies denote the same eigenvalue under this spectrum's convention.
    fn same_energy(&self, a: &Self::Energy, b: &Self::Energy) -> bool;

    fn convention(&self) -> Convention;

    fn merge(parts: &[Self]) -> Result<Self>;

    fn label(energy: &Self::Energy) -> String;
}

/// Counting triple on an exact spectrum.
pub fn count_exact(spectrum: &ExactSpectrum, q: &BigRational) -> Result<CountingTriple> {
    if q > spectrum.q_max() {
        return Err(Error::InsufficientCutoff(format!(
            "query {} exceeds the enumeration cutoff {}",
            rational::format(q),
            rational::format(spectrum.q_max())
        )));
    }
    let (below, at_or_below) = spectrum.counts(q);
    Ok(CountingTriple::from_counts(below, at_or_below))
}

impl Spectrum for ExactSpectrum {
    type Energy = BigRational;

    fn triple(&self, energy: &BigRational) -> Result<CountingTriple> {
        count_exact(self, energy)
    }

    fn kth(&self, k: usize) -> Result<BigRational> {
        self.kth_eigenvalue(k).cloned()
    }

    fn same_energy(&self, a: &BigRational, b: &BigRational) -> bool {
        a == b
    }

    fn convention(&self) -> Convention {
        Convention::Exact(self.scale())
    }

    fn merge(parts: &[Self]) -> Result<Self> {
        exact_spectra::merge_disjoint(parts)
    }

    fn label(energy: &BigRational) -> String {
        rational::format(energy)
    }
}

/// Sorted floating-point eigenvalues with a clustering tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericSpectrum {
    values: Vec<f64>,
    cluster_tol: f64,
    #[serde(skip)]
    clusters: Vec<Range<usize>>,
}

impl NumericSpectrum {
    /// Sorts `values` ascending; rejects non-finite values and a non-positive tolerance.
    pub fn new(mut values: Vec<f64>, cluster_tol: f64) -> Result<Self> {
        if !(cluster_tol > 0.0 && cluster_tol.is_finite()) {
            return Err(Error::Precondition(format!(
                "cluster_tol must be positive, got {cluster_tol}"
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("eigenvalue {bad}")));
        }
        values.sort_by(f64::total_cmp);
        let clusters = cluster(&values, cluster_tol);
        Ok(Self {
            values,
            cluster_tol,
            clusters,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    /// Index ranges of the clusters, ascending.
    pub fn clusters(&self) -> &[Range<usize>] {
        &self.clusters
    }

    fn width(&self, lambda: f64) -> f64 {
        self.cluster_tol * lambda.abs().max(1.0)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let values = value
            .get("values")
            .and_then(serde_json::Value::as_array)
            .ok_or_else(|| Error::Parse("numeric spectrum JSON lacks \"values\"".into()))?
            .iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| Error::Parse("non-numeric eigenvalue".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let tol = value
            .get("cluster_tol")
            .and_then(serde_json::Value::as_f64)
            .unwrap_or(DEFAULT_CLUSTER_TOL);
        Self::new(values, tol)
    }
}

/// Chains consecutive values closer than `tol·max(1, |v|)`.
fn cluster(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut out: Vec<Range<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(last) if v - values[i - 1] <= tol * v.abs().max(1.0) => last.end = i + 1,
            _ => out.push(i..i + 1),
        }
    }
    out
}

/// Counting triple on a numeric spectrum.
pub fn count_numeric(spectrum: &NumericSpectrum, lambda: f64) -> Result<CountingTriple> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite(format!("query energy {lambda}")));
    }
    let values = &spectrum.values;
    let Some(&last) = values.last() else {
        return Err(Error::InsufficientSpectrum("spectrum is empty".into()));
    };
    let w = spectrum.width(lambda);
    if lambda > last - w {
        return Err(Error::InsufficientSpectrum(format!(
            "query {lambda} is not separated from the last computed eigenvalue {last}; compute more eigenvalues"
        )));
    }
    let hit = spectrum
        .clusters
        .iter()
        .find(|c| values[c.start..c.end].iter().any(|&v| (v - lambda).abs() <= w));
    Ok(match hit {
        Some(c) => CountingTriple::from_counts(c.start, c.end),
        None => {
            let below = values.partition_point(|&v| v < lambda);
            CountingTriple::from_counts(below, below)
        }
    })
}

impl Spectrum for NumericSpectrum {
    type Energy = f64;

    fn triple(&self, energy: &f64) -> Result<CountingTriple> {
        count_numeric(self, *energy)
    }

    fn kth(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::Precondition("eigenvalue index is 1-based".into()));
        }
        self.values.get(k - 1).copied().ok_or_else(|| {
            Error::InsufficientSpectrum(format!(
                "λ_{k} requested but only {} eigenvalues were computed",
                self.values.len()
            ))
        })
    }

    fn same_energy(&self, a: &f64, b: &f64) -> bool {
        (a - b).abs() <= self.width(*a)
    }

    fn convention(&self) -> Convention {
        Convention::Numeric {
            cluster_tol: self.cluster_tol,
        }
    }

    fn merge(parts: &[Self]) -> Result<Self> {
        merge_numeric(parts)
    }

    fn label(energy: &f64) -> String {
        format!("{energy}")
    }
}

/// Multiset union of numeric spectra sharing one tolerance.
pub fn merge_numeric(parts: &[NumericSpectrum]) -> Result<NumericSpectrum> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidMerge("no spectra to merge".into()))?;
    if let Some(other) = parts.iter().find(|p| p.cluster_tol != first.cluster_tol) {
        return Err(Error::InvalidMerge(format!(
            "cluster tolerances differ ({} vs {})",
            first.cluster_tol, other.cluster_tol
        )));
    }
    let values = parts.iter().flat_map(|p| p.values.iter().copied()).collect();
    NumericSpectrum::new(values, first.cluster_tol)
}

/// Multiset union of spectra of one kind: the spectrum of a disjoint union.
pub fn merge_disjoint<S: Spectrum>(parts: &[S]) -> Result<S> {
    S::merge(parts)
}

/// Fails unless every spectrum uses the same convention as the first.
pub fn ensure_same_convention<'a, S: Spectrum + 'a>(
    spectra: impl IntoIterator<Item = &'a S>,
) -> Result<()> {
    let mut iter = spectra.into_iter();
    let Some(first) = iter.next() else {
        return Ok(());
    };
    let c0 = first.convention();
    for s in iter {
        if s.convention() != c0 {
            return Err(Error::Precondition(format!(
                "mixed counting conventions: {c0} vs {}",
                s.convention()
            )));
        }
    }
    Ok(())
}
