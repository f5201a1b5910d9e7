//! Exact Dirichlet spectra of rectangles with zero potential.
//!
//! A rectangle is described by two positive rationals `p1`, `p2` and a scale
//! tag `κ`; its eigenvalues are `κ·(p1·m² + p2·n²)` for `m, n ≥ 1`. Only the
//! rational part `q = p1·m² + p2·n²` is ever stored, so ties between modes
//! (the multiplicities) are detected exactly.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::rational;
use crate::{Error, Result};

/// The symbolic factor `κ` in front of every eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scale {
    /// `κ = 1`: sides are rational multiples of `π`.
    #[serde(rename = "unit")]
    Unit,
    /// `κ = π²`: sides are rational lengths.
    #[serde(rename = "pi2")]
    PiSquared,
}

impl Scale {
    pub fn factor(self) -> f64 {
        match self {
            Scale::Unit => 1.0,
            Scale::PiSquared => std::f64::consts::PI * std::f64::consts::PI,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scale::Unit => "unit",
            Scale::PiSquared => "pi2",
        }
    }
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" | "1" => Ok(Scale::Unit),
            "pi2" | "pi^2" => Ok(Scale::PiSquared),
            other => Err(Error::Parse(format!("unknown scale {other:?} (expected unit|pi2)"))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coefficients of `κ·(p1·m² + p2·n²)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RectSpec {
    p1: BigRational,
    p2: BigRational,
    scale: Scale,
}

impl RectSpec {
    pub fn new(p1: BigRational, p2: BigRational, scale: Scale) -> Result<Self> {
        if !p1.is_positive() || !p2.is_positive() {
            return Err(Error::InvalidSpec(format!(
                "coefficients must be positive, got p1={}, p2={}",
                rational::format(&p1),
                rational::format(&p2)
            )));
        }
        Ok(Self { p1, p2, scale })
    }

    /// Rectangle `(0, a)×(0, b)` with rational side lengths, eigenvalues in `π²` units.
    pub fn from_sides(a: &BigRational, b: &BigRational) -> Result<Self> {
        if !a.is_positive() || !b.is_positive() {
            return Err(Error::InvalidSpec("side lengths must be positive".into()));
        }
        Self::new((a * a).recip(), (b * b).recip(), Scale::PiSquared)
    }

    /// Rectangle `(0, a·π)×(0, b·π)`, eigenvalues in unit scale.
    pub fn from_pi_multiples(a: &BigRational, b: &BigRational) -> Result<Self> {
        if !a.is_positive() || !b.is_positive() {
            return Err(Error::InvalidSpec("side multiples must be positive".into()));
        }
        Self::new((a * a).recip(), (b * b).recip(), Scale::Unit)
    }

    pub fn p1(&self) -> &BigRational {
        &self.p1
    }

    pub fn p2(&self) -> &BigRational {
        &self.p2
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn eigenvalue(&self, m: u64, n: u64) -> BigRational {
        let m2 = BigRational::from_integer(BigInt::from(m) * m);
        let n2 = BigRational::from_integer(BigInt::from(n) * n);
        &self.p1 * m2 + &self.p2 * n2
    }

    /// Smallest eigenvalue `p1 + p2`.
    pub fn ground(&self) -> BigRational {
        &self.p1 + &self.p2
    }
}

/// One mode `(m, n)` of component rectangle `part` (always 0 for a single rectangle).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub part: usize,
    pub m: u64,
    pub n: u64,
}

/// A distinct eigenvalue together with every mode realising it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactEigenvalue {
    pub q: BigRational,
    pub modes: Vec<Mode>,
}

impl ExactEigenvalue {
    pub fn multiplicity(&self) -> usize {
        self.modes.len()
    }
}

/// All eigenvalues `q ≤ q_max` of a rectangle, or of a disjoint union of
/// rectangles after [`merge_disjoint`], grouped by value and sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSpectrum {
    parts: Vec<RectSpec>,
    scale: Scale,
    q_max: BigRational,
    entries: Vec<ExactEigenvalue>,
    // cumulative[i] = number of modes in entries[..i]
    cumulative: Vec<usize>,
}

impl ExactSpectrum {
    fn from_parts(
        parts: Vec<RectSpec>,
        scale: Scale,
        q_max: BigRational,
        entries: Vec<ExactEigenvalue>,
    ) -> Self {
        let mut cumulative = Vec::with_capacity(entries.len() + 1);
        let mut total = 0;
        cumulative.push(0);
        for e in &entries {
            total += e.modes.len();
            cumulative.push(total);
        }
        Self {
            parts,
            scale,
            q_max,
            entries,
            cumulative,
        }
    }

    pub fn parts(&self) -> &[RectSpec] {
        &self.parts
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn q_max(&self) -> &BigRational {
        &self.q_max
    }

    pub fn entries(&self) -> &[ExactEigenvalue] {
        &self.entries
    }

    /// Number of eigenvalues counted with multiplicity.
    pub fn total_modes(&self) -> usize {
        *self.cumulative.last().unwrap_or(&0)
    }

    /// Distinct values.
    pub fn values(&self) -> impl Iterator<Item = &BigRational> {
        self.entries.iter().map(|e| &e.q)
    }

    /// Eigenvalues with multiplicity, as floats including the scale factor.
    pub fn to_f64_with_multiplicity(&self) -> Vec<f64> {
        let kappa = self.scale.factor();
        let mut out = Vec::with_capacity(self.total_modes());
        for e in &self.entries {
            let v = rational::to_f64(&e.q) * kappa;
            out.extend(std::iter::repeat_n(v, e.modes.len()));
        }
        out
    }

    /// Index of the entry equal to `q`, or the insertion point.
    pub(crate) fn search(&self, q: &BigRational) -> std::result::Result<usize, usize> {
        self.entries.binary_search_by(|e| e.q.cmp(q))
    }

    /// `#{j : λ_j < q}` and `#{j : λ_j ≤ q}`; the caller checks the cutoff.
    pub(crate) fn counts(&self, q: &BigRational) -> (usize, usize) {
        match self.search(q) {
            Ok(i) => (self.cumulative[i], self.cumulative[i + 1]),
            Err(i) => (self.cumulative[i], self.cumulative[i]),
        }
    }

    /// The `k`-th eigenvalue (1-based) counted with multiplicity.
    pub fn kth_eigenvalue(&self, k: usize) -> Result<&BigRational> {
        if k == 0 {
            return Err(Error::Precondition("eigenvalue index is 1-based".into()));
        }
        if k > self.total_modes() {
            return Err(Error::InsufficientCutoff(format!(
                "λ_{k} requested but only {} eigenvalues lie below q_max={}; raise q_max to about {}",
                self.total_modes(),
                rational::format(&self.q_max),
                self.weyl_cutoff_estimate(k)
            )));
        }
        // first entry whose cumulative count reaches k
        let idx = self.cumulative.partition_point(|&c| c < k);
        Ok(&self.entries[idx - 1].q)
    }

    /// Rough cutoff needed to hold `k` eigenvalues, from the leading Weyl term
    /// `n(q) ≈ π q / (4 √(p1 p2))` summed over the parts, doubled for margin.
    fn weyl_cutoff_estimate(&self, k: usize) -> String {
        let density: f64 = self
            .parts
            .iter()
            .map(|p| {
                let prod = rational::to_f64(&(&p.p1 * &p.p2));
                std::f64::consts::PI / (4.0 * prod.sqrt())
            })
            .sum();
        if density > 0.0 {
            format!("{:.3}", 2.0 * k as f64 / density)
        } else {
            "?".into()
        }
    }

    pub fn to_json(&self) -> Value {
        let entries_json = |part_tag: bool| -> Vec<Value> {
            self.entries
                .iter()
                .map(|e| {
                    let modes: Vec<Value> = e
                        .modes
                        .iter()
                        .map(|md| {
                            if part_tag {
                                serde_json::json!([md.part, md.m, md.n])
                            } else {
                                serde_json::json!([md.m, md.n])
                            }
                        })
                        .collect();
                    serde_json::json!({ "q": rational::format(&e.q), "modes": modes })
                })
                .collect()
        };
        if let [single] = self.parts.as_slice() {
            serde_json::json!({
                "p1": rational::format(&single.p1),
                "p2": rational::format(&single.p2),
                "scale": self.scale.as_str(),
                "q_max": rational::format(&self.q_max),
                "entries": entries_json(false),
            })
        } else {
            let parts: Vec<Value> = self
                .parts
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "p1": rational::format(&p.p1),
                        "p2": rational::format(&p.p2),
                    })
                })
                .collect();
            serde_json::json!({
                "parts": parts,
                "scale": self.scale.as_str(),
                "q_max": rational::format(&self.q_max),
                "entries": entries_json(true),
            })
        }
    }

    /// Reads the JSON written by [`ExactSpectrum::to_json`] and re-enumerates
    /// it; the file's entries must agree with the enumeration.
    ///
    /// A file without `q_max` is taken to be complete up to its last entry.
    pub fn from_json(value: &Value) -> Result<Self> {
        let field = |key: &str| -> Result<BigRational> {
            let s = value
                .get(key)
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse(format!("spectrum JSON lacks string field {key:?}")))?;
            rational::parse(s)
        };
        let scale: Scale = value
            .get("scale")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("spectrum JSON lacks \"scale\"".into()))?
            .parse()?;
        let parsed_entries: Vec<BigRational> = value
            .get("entries")
            .and_then(Value::as_array)
            .map(|arr| {
                arr.iter()
                    .map(|e| {
                        e.get("q")
                            .and_then(Value::as_str)
                            .ok_or_else(|| Error::Parse("entry lacks \"q\"".into()))
                            .and_then(rational::parse)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?
            .unwrap_or_default();
        let q_max = match value.get("q_max") {
            Some(_) => field("q_max")?,
            None => parsed_entries
                .last()
                .cloned()
                .ok_or_else(|| Error::Parse("spectrum JSON has neither q_max nor entries".into()))?,
        };

        let spectrum = if let Some(parts) = value.get("parts").and_then(Value::as_array) {
            let specs = parts
                .iter()
                .map(|p| {
                    let get = |k: &str| {
                        p.get(k)
                            .and_then(Value::as_str)
                            .ok_or_else(|| Error::Parse(format!("part lacks {k:?}")))
                            .and_then(rational::parse)
                    };
                    RectSpec::new(get("p1")?, get("p2")?, scale)
                })
                .collect::<Result<Vec<_>>>()?;
            let pieces = specs
                .iter()
                .map(|s| enumerate(s, &q_max))
                .collect::<Result<Vec<_>>>()?;
            merge_disjoint(&pieces)?
        } else {
            let spec = RectSpec::new(field("p1")?, field("p2")?, scale)?;
            enumerate(&spec, &q_max)?
        };

        if value.get("entries").is_some() {
            let ours: Vec<&BigRational> = spectrum.values().collect();
            let theirs: Vec<&BigRational> = parsed_entries.iter().collect();
            if ours != theirs {
                return Err(Error::Parse(
                    "spectrum JSON entries disagree with the enumeration of its coefficients".into(),
                ));
            }
        }
        Ok(spectrum)
    }
}

/// Enumerates every `(m, n)` with `p1·m² + p2·n² ≤ q_max`, grouped by value.
///
/// With `p1 = a/b`, `p2 = c/d` every eigenvalue is an integer `K = a·d·m² + c·b·n²`
/// over the common denominator `b·d`, so the enumeration bound and all ties are
/// decided in integer arithmetic.
pub fn enumerate(spec: &RectSpec, q_max: &BigRational) -> Result<ExactSpectrum> {
    let (a, b) = (spec.p1.numer(), spec.p1.denom());
    let (c, d) = (spec.p2.numer(), spec.p2.denom());
    let coef_m = a * d;
    let coef_n = c * b;
    let common = b * d;

    let mut modes: Vec<(BigInt, u64, u64)> = Vec::new();
    if !q_max.is_negative() {
        // K ≤ q_max·b·d  ⇔  K ≤ floor(q_max·b·d) since K is an integer.
        let scaled = q_max * BigRational::from_integer(common.clone());
        let bound = scaled.floor().to_integer();
        let mut n: u64 = 1;
        loop {
            let n_term = &coef_n * BigInt::from(n) * n;
            let rest = &bound - &n_term;
            if rest < coef_m {
                break;
            }
            let m_max = rational::isqrt(&(rest / &coef_m))
                .to_u64()
                .ok_or_else(|| Error::InvalidSpec("enumeration bound exceeds u64".into()))?;
            for m in 1..=m_max {
                modes.push((&coef_m * BigInt::from(m) * m + &n_term, m, n));
            }
            n += 1;
        }
    }
    modes.sort_unstable();

    let mut entries: Vec<ExactEigenvalue> = Vec::new();
    let mut last_key: Option<BigInt> = None;
    for (key, m, n) in modes {
        let mode = Mode { part: 0, m, n };
        if last_key.as_ref() == Some(&key) {
            entries.last_mut().expect("entry exists").modes.push(mode);
        } else {
            entries.push(ExactEigenvalue {
                q: BigRational::new(key.clone(), common.clone()),
                modes: vec![mode],
            });
            last_key = Some(key);
        }
    }
    Ok(ExactSpectrum::from_parts(
        vec![spec.clone()],
        spec.scale,
        q_max.clone(),
        entries,
    ))
}

/// Multiset union of spectra: the spectrum of a disjoint union of the domains.
///
/// All inputs must share the scale tag and the cutoff.
pub fn merge_disjoint(spectra: &[ExactSpectrum]) -> Result<ExactSpectrum> {
    let first = spectra
        .first()
        .ok_or_else(|| Error::InvalidMerge("no spectra to merge".into()))?;
    for s in &spectra[1..] {
        if s.scale != first.scale {
            return Err(Error::InvalidMerge(format!(
                "scale tags differ ({} vs {})",
                first.scale, s.scale
            )));
        }
        if s.q_max != first.q_max {
            return Err(Error::InvalidMerge(format!(
                "cutoffs differ ({} vs {})",
                rational::format(&first.q_max),
                rational::format(&s.q_max)
            )));
        }
    }
    if spectra.len() == 1 {
        return Ok(first.clone());
    }

    let mut parts = Vec::new();
    let mut tagged: Vec<(BigRational, Mode)> = Vec::new();
    for s in spectra {
        let offset = parts.len();
        parts.extend(s.parts.iter().cloned());
        for e in &s.entries {
            for md in &e.modes {
                tagged.push((
                    e.q.clone(),
                    Mode {
                        part: md.part + offset,
                        ..*md
                    },
                ));
            }
        }
    }
    tagged.sort();

    let mut entries: Vec<ExactEigenvalue> = Vec::new();
    for (q, mode) in tagged {
        match entries.last_mut() {
            Some(last) if last.q == q => last.modes.push(mode),
            _ => entries.push(ExactEigenvalue { q, modes: vec![mode] }),
        }
    }
    Ok(ExactSpectrum::from_parts(
        parts,
        first.scale,
        first.q_max.clone(),
        entries,
    ))
}

/// Outcome of the rectangle `Q = (0, a)×(0, 1)` example with `9/4 < a² < 8/3`,
/// all eigenvalues in `π²` units.
#[derive(Debug, Clone, Serialize)]
pub struct Section62Report {
    pub a_squared: String,
    pub lambda3: String,
    pub lambda4: String,
    /// `λ3 < λ4`, and both formulas agree with the enumerated spectrum of `Q`.
    pub ordering_ok: bool,
    /// Nodal lines of `u4` at `x = a/3` and `x = 2a/3`.
    pub zeroset_abscissas: [f64; 2],
    /// Second eigenvalue of the left two-thirds `(0, 2a/3)×(0, 1)`.
    pub half_domain_lambda2: String,
    pub half_domain_matches: bool,
}

/// Exact evaluation of the three-nodal-domain example on `(0, a)×(0, 1)`.
pub fn section62_scenario(a_squared: &BigRational) -> Result<Section62Report> {
    let lo = rational::ratio(9, 4);
    let hi = rational::ratio(8, 3);
    if *a_squared <= lo || *a_squared >= hi {
        return Err(Error::Precondition(format!(
            "a² = {} must lie in the open interval (9/4, 8/3)",
            rational::format(a_squared)
        )));
    }
    let inv = a_squared.recip();
    let lambda3 = &inv + rational::from_int(4);
    let lambda4 = &inv * rational::from_int(9) + BigRational::one();

    let q = RectSpec::new(inv.clone(), BigRational::one(), Scale::PiSquared)?;
    let spectrum_q = enumerate(&q, &(&lambda4 + BigRational::one()))?;
    let ordering_ok = lambda3 < lambda4
        && *spectrum_q.kth_eigenvalue(3)? == lambda3
        && *spectrum_q.kth_eigenvalue(4)? == lambda4;

    // Width 2a/3 gives p1 = 1/(2a/3)² = 9/(4a²).
    let half = RectSpec::new(&inv * rational::ratio(9, 4), BigRational::one(), Scale::PiSquared)?;
    let spectrum_half = enumerate(&half, &(&lambda4 + BigRational::one()))?;
    let half_lambda2 = spectrum_half.kth_eigenvalue(2)?.clone();

    let a = rational::to_f64(a_squared).sqrt();
    Ok(Section62Report {
        a_squared: rational::format(a_squared),
        lambda3: rational::format(&lambda3),
        lambda4: rational::format(&lambda4),
        ordering_ok,
        zeroset_abscissas: [a / 3.0, 2.0 * a / 3.0],
        half_domain_matches: half_lambda2 == lambda4,
        half_domain_lambda2: rational::format(&half_lambda2),
    })
}

impl fmt::Display for ExactSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>5}  {:>12}  {:>4}  modes", "index", "q", "mult")?;
        for (i, e) in self.entries.iter().enumerate() {
            let first = self.cumulative[i] + 1;
            let modes: Vec<String> = e
                .modes
                .iter()
                .map(|m| {
                    if self.parts.len() > 1 {
                        format!("{}:({},{})", m.part, m.m, m.n)
                    } else {
                        format!("({},{})", m.m, m.n)
                    }
                })
                .collect();
            writeln!(
                f,
                "{:>5}  {:>12}  {:>4}  {}",
                first,
                rational::format(&e.q),
                e.modes.len(),
                modes.join(" ")
            )?;
        }
        Ok(())
    }
}

impl ExactSpectrum {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
