//! Lattice points in ellipses `a m² + b n² ≤ λ`.
//!
//! For the long rectangle `(0, 2π) × (0, π)` the Dirichlet eigenvalues are
//! `m²/4 + n²`, so the positive-quadrant count with `a = 1/4, b = 1` is the
//! counting function `n̄`. Splitting the rectangle into two squares compares it
//! with twice the count for `a = b = 1`; the difference grows like `½√λ`, which
//! is why the partition inequality stops being sharp for large `λ`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::exact_spectra::{enumerate, RectSpec, Scale};
use crate::partition_check::check_main;
use crate::rational::{self, from_int, isqrt, ratio};
use crate::{Error, Result};

/// `a m² + b n² ≤ λ` rewritten as `A m² + B n² ≤ L` over the integers.
struct Cleared {
    a: BigInt,
    b: BigInt,
    l: BigInt,
}

fn clear(a: &BigRational, b: &BigRational, lambda: &BigRational) -> Cleared {
    let (an, ad) = (a.numer(), a.denom());
    let (bn, bd) = (b.numer(), b.denom());
    let (ln, ld) = (lambda.numer(), lambda.denom());
    Cleared {
        a: an * bd * ld,
        b: bn * ad * ld,
        l: ln * ad * bd,
    }
}

impl Cleared {
    /// Largest `n ≥ 0` with `B n² ≤ L`, or `None` when `L < 0`.
    fn rows(&self) -> Option<BigInt> {
        if self.l.is_negative() {
            None
        } else {
            Some(isqrt(&(&self.l / &self.b)))
        }
    }

    /// Largest `m ≥ 0` with `A m² ≤ L − B n²`.
    fn row_extent(&self, n: &BigInt) -> BigInt {
        let rest = &self.l - &self.b * n * n;
        isqrt(&(rest / &self.a))
    }
}

fn check_axes(a: &BigRational, b: &BigRational) -> Result<()> {
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::InvalidSpec(format!(
            "ellipse coefficients must be positive, got a = {}, b = {}",
            rational::format(a),
            rational::format(b)
        )));
    }
    Ok(())
}

/// `#{(m, n) ∈ ℤ² : a m² + b n² ≤ λ}`; zero for `λ < 0`.
///
/// # Panics
/// If `a` or `b` is not positive.
pub fn count_full(a: &BigRational, b: &BigRational, lambda: &BigRational) -> BigInt {
    check_axes(a, b).expect("count_full needs a, b > 0");
    let c = clear(a, b, lambda);
    let Some(rows) = c.rows() else {
        return BigInt::zero();
    };
    let mut total = c.row_extent(&BigInt::zero()) * 2 + 1;
    let mut n = BigInt::one();
    while n <= rows {
        total += (c.row_extent(&n) * 2 + 1) * 2;
        n += 1;
    }
    total
}

/// `#{m, n ≥ 1 : a m² + b n² ≤ λ}`.
///
/// # Panics
/// If `a` or `b` is not positive.
pub fn count_positive(a: &BigRational, b: &BigRational, lambda: &BigRational) -> BigInt {
    check_axes(a, b).expect("count_positive needs a, b > 0");
    let c = clear(a, b, lambda);
    let Some(rows) = c.rows() else {
        return BigInt::zero();
    };
    let mut total = BigInt::zero();
    let mut n = BigInt::one();
    while n <= rows {
        total += c.row_extent(&n);
        n += 1;
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EllipseCount {
    pub a: String,
    pub b: String,
    pub lambda: String,
    #[serde(rename = "A")]
    pub full: BigIntString,
    #[serde(rename = "A_plus")]
    pub positive: BigIntString,
}

/// A JSON integer when it fits in `i64`, a decimal string otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigIntString(pub BigInt);

impl Serialize for BigIntString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl EllipseCount {
    pub fn new(a: &BigRational, b: &BigRational, lambda: &BigRational) -> Result<Self> {
        check_axes(a, b)?;
        Ok(EllipseCount {
            a: rational::format(a),
            b: rational::format(b),
            lambda: rational::format(lambda),
            full: BigIntString(count_full(a, b, lambda)),
            positive: BigIntString(count_positive(a, b, lambda)),
        })
    }

    /// The full count rebuilt from the quadrant count and the two semi-axes.
    pub fn identity_rhs(a: &BigRational, b: &BigRational, lambda: &BigRational) -> BigInt {
        if lambda.is_negative() {
            return BigInt::zero();
        }
        let pos = count_positive(a, b, lambda);
        pos * 4 + rational::floor_sqrt(&(lambda / a)) * 2 + rational::floor_sqrt(&(lambda / b)) * 2 + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficitReport {
    pub lambda: String,
    #[serde(rename = "A0_plus")]
    pub a0_plus: BigIntString,
    #[serde(rename = "A1_plus")]
    pub a1_plus: BigIntString,
    pub deficit: BigIntString,
    /// `deficit / (½√λ)`; zero at `λ = 0`.
    pub ratio: f64,
}

/// `A⁺(1/4, 1, λ) − 2 A⁺(1, 1, λ)`, the long rectangle against its two halves.
pub fn deficit(lambda: &BigRational) -> DeficitReport {
    let a0 = count_positive(&ratio(1, 4), &from_int(1), lambda);
    let a1 = count_positive(&from_int(1), &from_int(1), lambda);
    let d: BigInt = &a0 - &a1 * 2;
    let half_sqrt = 0.5 * rational::to_f64(lambda).max(0.0).sqrt();
    let ratio = if half_sqrt > 0.0 {
        d.to_f64().unwrap_or(f64::NAN) / half_sqrt
    } else {
        0.0
    };
    DeficitReport {
        lambda: rational::format(lambda),
        a0_plus: BigIntString(a0),
        a1_plus: BigIntString(a1),
        deficit: BigIntString(d),
        ratio,
    }
}

pub const DEFICIT_CSV_HEADER: &str = "lambda,A0_plus,A1_plus,deficit,ratio";

impl DeficitReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.lambda, self.a0_plus.0, self.a1_plus.0, self.deficit.0, self.ratio
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SharpnessScan {
    pub lambda_max: String,
    /// Eigenvalues of the long rectangle where the half split is an equality.
    pub equalities: Vec<String>,
    /// Largest equality found; every entry of `equalities` is at or below it.
    pub cutoff: Option<String>,
    /// No equality in `(λ_max/2, λ_max]`.
    pub top_half_quiet: bool,
    /// Number of distinct eigenvalues examined.
    pub checked: usize,
}

/// Exhaustive exact scan over the eigenvalues `λ ≤ λ_max` of the long
/// rectangle `(0, 2π) × (0, π)` for equality in the main inequality with the
/// split into two `π`-squares.
pub fn sharpness_scan(lambda_max: &BigRational) -> Result<SharpnessScan> {
    let big = enumerate(&RectSpec::new(ratio(1, 4), from_int(1), Scale::Unit)?, lambda_max)?;
    let square = enumerate(&RectSpec::new(from_int(1), from_int(1), Scale::Unit)?, lambda_max)?;
    let subs = [square.clone(), square];
    let mut found = Vec::new();
    for e in big.entries() {
        if check_main(&big, &subs, &e.q)?.equality {
            found.push(e.q.clone());
        }
    }
    let half = lambda_max / from_int(2);
    Ok(SharpnessScan {
        lambda_max: rational::format(lambda_max),
        equalities: found.iter().map(rational::format).collect(),
        cutoff: found.last().map(rational::format),
        top_half_quiet: found.last().is_none_or(|q| *q <= half),
        checked: big.entries().len(),
    })
}
