//! Named domains used by the tests and the command line.
//!
//! Exact fixtures are rectangle spectra; grid fixtures are rasterised
//! domains with a fixed spacing per reference length.

use std::f64::consts::PI;
use std::str::FromStr;

use num_rational::BigRational;

use crate::exact_spectra::{enumerate, ExactSpectrum, RectSpec, Scale};
use crate::grid::{rasterize, BBox, GridGeometry, Shape, SubdomainFamily};
use crate::rational::{from_int, ratio};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// `(0, π)²`
    PiSquare,
    /// `(0, 2π) × (0, π)`
    Sec61Rect,
    /// `(0, 2π) × (0, π)` split at `x = π`
    Sec61Halves,
    /// `(0, a) × (0, 1)` with `a² = 5/2`
    Sec62,
    /// `(0, 2)² ∖ [1, 2]²`
    LShape,
}

pub const ALL: [Fixture; 5] =
    [Fixture::PiSquare, Fixture::Sec61Rect, Fixture::Sec61Halves, Fixture::Sec62, Fixture::LShape];

impl Fixture {
    pub fn name(self) -> &'static str {
        match self {
            Fixture::PiSquare => "pi-square",
            Fixture::Sec61Rect => "sec61-rect",
            Fixture::Sec61Halves => "sec61-halves",
            Fixture::Sec62 => "sec62",
            Fixture::LShape => "L-shape",
        }
    }

    /// Cells per reference length when none is given.
    pub fn default_resolution(self) -> usize {
        match self {
            Fixture::PiSquare => 64,
            Fixture::Sec61Rect | Fixture::Sec61Halves => 32,
            Fixture::Sec62 => 201,
            Fixture::LShape => 32,
        }
    }

    /// The ambient grid domain. The reference length is `π` for the π-scaled
    /// fixtures, `a/3` for the long rectangle and `1` for the L-shape.
    pub fn grid(self, resolution: usize) -> Result<GridGeometry> {
        if resolution < 2 {
            return Err(Error::InvalidSpec(format!("resolution must be at least 2, got {resolution}")));
        }
        let n = resolution as f64;
        match self {
            Fixture::PiSquare => rect_grid(PI, PI, PI / n),
            Fixture::Sec61Rect | Fixture::Sec61Halves => rect_grid(2.0 * PI, PI, PI / n),
            Fixture::Sec62 => {
                let a = SEC62_A_SQUARED.sqrt();
                rect_grid(a, 1.0, a / n)
            }
            Fixture::LShape => {
                let h = 1.0 / n;
                let shape = Shape::rect(0.0, 0.0, 2.0, 2.0).minus(Shape::rect(1.0, 1.0, 2.0, 2.0));
                rasterize(&shape, BBox { x0: 0.0, y0: 0.0, x1: 2.0, y1: 2.0 }, h)
            }
        }
    }

    /// Subdomain family carried by the fixture, if any.
    pub fn family(self, resolution: usize) -> Result<Option<SubdomainFamily>> {
        match self {
            Fixture::Sec61Halves => Ok(Some(sec61_halves_grid(resolution)?)),
            _ => Ok(None),
        }
    }

    /// Exact spectrum of the ambient domain where one is known.
    pub fn exact(self, q_max: &BigRational) -> Result<Option<ExactSpectrum>> {
        let spec = match self {
            Fixture::PiSquare => RectSpec::new(from_int(1), from_int(1), Scale::Unit)?,
            Fixture::Sec61Rect | Fixture::Sec61Halves => RectSpec::new(ratio(1, 4), from_int(1), Scale::Unit)?,
            Fixture::Sec62 => RectSpec::new(ratio(2, 5), from_int(1), Scale::PiSquared)?,
            Fixture::LShape => return Ok(None),
        };
        Ok(Some(enumerate(&spec, q_max)?))
    }
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL.iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<&str> = ALL.iter().map(|f| f.name()).collect();
                Error::InvalidSpec(format!("unknown fixture '{s}', expected one of {}", names.join(", ")))
            })
    }
}

/// `a²` of the rectangle `(0, a) × (0, 1)` with a three-domain fourth mode.
pub const SEC62_A_SQUARED: f64 = 2.5;

/// `(0, w) × (0, ht)` on a grid of spacing `h` anchored at the origin. The box
/// is padded so that nodes on the far sides stay inside the array.
fn rect_grid(w: f64, ht: f64, h: f64) -> Result<GridGeometry> {
    let pad = |len: f64| ((len / h - 1e-9).ceil() + 1.0) * h;
    rasterize(&Shape::rect(0.0, 0.0, w, ht), BBox { x0: 0.0, y0: 0.0, x1: pad(w), y1: pad(ht) }, h)
}

/// The two `π`-squares of the long rectangle as a family on its grid.
pub fn sec61_halves_grid(resolution: usize) -> Result<SubdomainFamily> {
    let g = Fixture::Sec61Rect.grid(resolution)?;
    let mid = resolution;
    let left = (0..g.len()).map(|i| g.mask()[i] && g.ij(i).0 < mid).collect();
    let right = (0..g.len()).map(|i| g.mask()[i] && g.ij(i).0 > mid).collect();
    SubdomainFamily::new(g, vec![left, right])
}

/// Long rectangle and its two halves as exact spectra up to `q_max`.
pub fn sec61_exact(q_max: i64) -> Result<(ExactSpectrum, Vec<ExactSpectrum>)> {
    let big = enumerate(&RectSpec::new(ratio(1, 4), from_int(1), Scale::Unit)?, &from_int(q_max))?;
    let square = enumerate(&RectSpec::new(from_int(1), from_int(1), Scale::Unit)?, &from_int(q_max))?;
    Ok((big, vec![square.clone(), square]))
}
