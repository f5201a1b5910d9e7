//! Partition inequalities between the spectrum of a domain `Ω0` and the
//! spectra of pairwise disjoint open subsets `Ω1, …, Ωk`.
//!
//! Every check is evaluated on spectra only; the caller is responsible for
//! the subsets being disjoint (see [`crate::grid::check_disjoint`] when the
//! geometry is available). A violated inequality is returned in the report
//! with `holds == false` rather than as an error: on true spectra it would
//! falsify the statement, on numeric spectra it usually means the cluster
//! tolerance is off, and the per-domain triples are kept for diagnosis.

use serde::Serialize;

use crate::counting::{ensure_same_convention, CountingTriple, Spectrum};
use crate::{Error, Result};

/// Which form of the main inequality was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MainVariant {
    /// `λ ∈ σ(Ω0)`: `Σ n̄_ℓ ≤ n_0 + min_{ℓ≥0}(n̄_ℓ − n_ℓ)`.
    OnSpectrum,
    /// `λ ∉ σ(Ω0)`: `Σ n̄_ℓ ≤ n_0`.
    OffSpectrum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyReport {
    pub lambda: String,
    pub variant: MainVariant,
    /// `Σ_{ℓ≥1} n̄_ℓ`
    pub lhs: usize,
    pub rhs: usize,
    pub holds: bool,
    pub equality: bool,
    /// `ℓ` attaining `min_{ℓ≥0}(n̄_ℓ − n_ℓ)`, smallest on ties; 0 off-spectrum.
    pub min_index: usize,
    pub min_value: usize,
    /// Index 0 is `Ω0`.
    pub per_domain: Vec<CountingTriple>,
}

fn triples<S: Spectrum>(spec0: &S, subs: &[S], lambda: &S::Energy) -> Result<Vec<CountingTriple>> {
    ensure_same_convention(std::iter::once(spec0).chain(subs.iter()))?;
    std::iter::once(spec0)
        .chain(subs.iter())
        .map(|s| s.triple(lambda))
        .collect()
}

/// Main inequality for the family `subs` inside `spec0` at `lambda`.
///
/// Off the spectrum of `Ω0` the simpler form `Σ n̄_ℓ ≤ n_0` is checked and the
/// report is tagged [`MainVariant::OffSpectrum`].
pub fn check_main<S: Spectrum>(spec0: &S, subs: &[S], lambda: &S::Energy) -> Result<FamilyReport> {
    if subs.is_empty() {
        return Err(Error::Precondition("the family of subdomains is empty".into()));
    }
    let per_domain = triples(spec0, subs, lambda)?;
    let lhs: usize = per_domain[1..].iter().map(|t| t.n_upper).sum();
    let n0 = per_domain[0].n_mid;

    let (variant, min_index, min_value) = if per_domain[0].is_eigenvalue {
        let (idx, val) = per_domain
            .iter()
            .map(CountingTriple::upper_gap)
            .enumerate()
            .min_by_key(|&(i, v)| (v, i))
            .expect("family is nonempty");
        (MainVariant::OnSpectrum, idx, val)
    } else {
        (MainVariant::OffSpectrum, 0, 0)
    };
    let rhs = n0 + min_value;
    Ok(FamilyReport {
        lambda: S::label(lambda),
        variant,
        lhs,
        rhs,
        holds: lhs <= rhs,
        equality: lhs == rhs,
        min_index,
        min_value,
        per_domain,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeakReport {
    pub lambda: String,
    pub lhs: usize,
    pub n_upper_0: usize,
    pub holds: bool,
}

/// `Σ n̄_ℓ ≤ n̄_0`; needs neither connectedness nor `λ ∈ σ(Ω0)`.
pub fn check_weak<S: Spectrum>(spec0: &S, subs: &[S], lambda: &S::Energy) -> Result<WeakReport> {
    let per_domain = triples(spec0, subs, lambda)?;
    let lhs: usize = per_domain[1..].iter().map(|t| t.n_upper).sum();
    let n_upper_0 = per_domain[0].n_upper;
    Ok(WeakReport {
        lambda: S::label(lambda),
        lhs,
        n_upper_0,
        holds: lhs <= n_upper_0,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConverseReport {
    pub lambda: String,
    /// `Σ n̄_ℓ`
    pub sum_upper: usize,
    pub n_mid_0: usize,
    /// `Σ n̄_ℓ ≥ n_0`
    pub hypothesis_holds: bool,
    /// `λ ∈ σ(Ω_ℓ)` for each member.
    pub membership: Vec<bool>,
    /// When the hypothesis holds, every member must have `λ` in its spectrum;
    /// `false` here is a falsification finding. `true` when the hypothesis fails.
    pub holds: bool,
}

/// Converse direction: if `Σ n̄_ℓ ≥ n_0` then `λ` is an eigenvalue of every `Ω_ℓ`.
pub fn check_converse<S: Spectrum>(
    spec0: &S,
    subs: &[S],
    lambda: &S::Energy,
) -> Result<ConverseReport> {
    let per_domain = triples(spec0, subs, lambda)?;
    if !per_domain[0].is_eigenvalue {
        return Err(Error::Precondition(format!(
            "{} is not an eigenvalue of the ambient domain",
            S::label(lambda)
        )));
    }
    let sum_upper: usize = per_domain[1..].iter().map(|t| t.n_upper).sum();
    let n_mid_0 = per_domain[0].n_mid;
    let hypothesis_holds = sum_upper >= n_mid_0;
    let membership: Vec<bool> = per_domain[1..].iter().map(|t| t.is_eigenvalue).collect();
    let holds = !hypothesis_holds || membership.iter().all(|&m| m);
    Ok(ConverseReport {
        lambda: S::label(lambda),
        sum_upper,
        n_mid_0,
        hypothesis_holds,
        membership,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetReport {
    pub lambda: String,
    pub subset: Vec<usize>,
    pub equality_case: bool,
    /// `Σ_{ℓ∈L} n̄_ℓ`
    pub lhs: usize,
    pub star: CountingTriple,
    /// `min_{ℓ∈L}(n̄_ℓ − n_ℓ)`
    pub family_gap: usize,
    /// `n̄(λ, Ω*_L) − n(λ, Ω*_L)`
    pub star_gap: usize,
    /// `n(λ, Ω*_L) + min(family_gap, star_gap)`, the equality-case right side.
    pub rhs_equality: usize,
    /// `Σ_{all ℓ} n̄_ℓ ≥ n_0`, the hypothesis of the inequality form.
    pub hypothesis_holds: bool,
    pub holds: bool,
}

/// Subfamily statements for `L ⊂ {members}` (0-based indices into `subs`),
/// given the spectrum of the reconstituted domain `Ω*_L`.
///
/// In the equality case the identity
/// `Σ_{ℓ∈L} n̄_ℓ = n(λ,Ω*_L) + min(min_{ℓ∈L}(n̄_ℓ−n_ℓ), n̄(λ,Ω*_L)−n(λ,Ω*_L))`
/// is verified; otherwise `Σ_{ℓ∈L} n̄_ℓ ≥ n(λ,Ω*_L)` is verified when
/// `Σ n̄_ℓ ≥ n_0` holds (and reported vacuous otherwise). Both branch values
/// are exposed in the report.
pub fn check_subset<S: Spectrum>(
    spec0: &S,
    subs: &[S],
    subset: &[usize],
    spec_star: &S,
    lambda: &S::Energy,
    equality_case: bool,
) -> Result<SubsetReport> {
    if subset.is_empty() {
        return Err(Error::Precondition("index set L is empty".into()));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= subs.len()) {
        return Err(Error::Precondition(format!(
            "index {bad} out of range for a family of {}",
            subs.len()
        )));
    }
    ensure_same_convention([spec0, spec_star])?;
    let per_domain = triples(spec0, subs, lambda)?;
    if !per_domain[0].is_eigenvalue {
        return Err(Error::Precondition(format!(
            "{} is not an eigenvalue of the ambient domain",
            S::label(lambda)
        )));
    }
    let star = spec_star.triple(lambda)?;
    let members = || subset.iter().map(|&i| per_domain[i + 1]);
    let lhs: usize = members().map(|t| t.n_upper).sum();
    let family_gap = members().map(|t| t.upper_gap()).min().expect("L nonempty");
    let star_gap = star.upper_gap();
    let rhs_equality = star.n_mid + family_gap.min(star_gap);
    let total: usize = per_domain[1..].iter().map(|t| t.n_upper).sum();
    let hypothesis_holds = total >= per_domain[0].n_mid;
    let holds = if equality_case {
        lhs == rhs_equality
    } else {
        !hypothesis_holds || lhs >= star.n_mid
    };
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    Ok(SubsetReport {
        lambda: S::label(lambda),
        subset: sorted,
        equality_case,
        lhs,
        star,
        family_gap,
        star_gap,
        rhs_equality,
        hypothesis_holds,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CourantReport {
    pub lambda: String,
    pub mu: usize,
    /// `n(λ, Ω0)`
    pub bound: usize,
    pub holds: bool,
    /// `μ = n(λ)`
    pub sharp: bool,
}

/// Nodal count bound `μ ≤ n(λ, Ω0)` for an eigenfunction with `mu` nodal domains.
pub fn courant_check<S: Spectrum>(mu: usize, spec0: &S, lambda: &S::Energy) -> Result<CourantReport> {
    let t = spec0.triple(lambda)?;
    if !t.is_eigenvalue {
        return Err(Error::Precondition(format!(
            "{} is not an eigenvalue",
            S::label(lambda)
        )));
    }
    Ok(CourantReport {
        lambda: S::label(lambda),
        mu,
        bound: t.n_mid,
        holds: mu <= t.n_mid,
        sharp: mu == t.n_mid,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubmuReport {
    pub k: usize,
    pub ell: usize,
    pub lambda_k: String,
    pub lambda_ell: String,
    /// `λ_ℓ(Ω_L) = λ_k`
    pub equal: bool,
    /// Multiplicity of `λ_ℓ(Ω_L)` is one.
    pub simple: bool,
}

/// For a Courant-sharp eigenfunction with `k` nodal domains, a subfamily of
/// `ell` of them reconstitutes `Ω_L` with `λ_ℓ(Ω_L) = λ_k`.
pub fn check_submu<S: Spectrum>(
    spec_l: &S,
    k: usize,
    ell: usize,
    lambda_k: &S::Energy,
) -> Result<SubmuReport> {
    let lambda_ell = spec_l.kth(ell)?;
    let t = spec_l.triple(&lambda_ell)?;
    Ok(SubmuReport {
        k,
        ell,
        lambda_k: S::label(lambda_k),
        lambda_ell: S::label(&lambda_ell),
        equal: spec_l.same_energy(&lambda_ell, lambda_k),
        simple: t.multiplicity() == 1,
    })
}
