//! Open sets rasterised on a uniform grid.
//!
//! A [`GridGeometry`] covers the closed bounding box: node `(i, j)` sits at
//! `origin + h·(i, j)` for `0 ≤ i < nx`, `0 ≤ j < ny`, and the mask marks the
//! nodes strictly inside the open set. Nodes on the outer ring of the box are
//! never in a mask, so every masked node has four neighbours in the array.
//! All adjacency is 4-connectivity.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Constructive description of a planar open set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Shape {
    /// `(x0, x1) × (y0, y1)`
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Disk { cx: f64, cy: f64, r: f64 },
    Union { parts: Vec<Shape> },
    /// `a` minus the closure of `b`.
    Difference { a: Box<Shape>, b: Box<Shape> },
}

impl Shape {
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Shape::Rect { x0, y0, x1, y1 }
    }

    pub fn disk(cx: f64, cy: f64, r: f64) -> Self {
        Shape::Disk { cx, cy, r }
    }

    pub fn union(parts: Vec<Shape>) -> Self {
        Shape::Union { parts }
    }

    pub fn minus(self, b: Shape) -> Self {
        Shape::Difference { a: Box::new(self), b: Box::new(b) }
    }

    /// Membership in the open set, or in its closure when `closed`;
    /// `eps` decides points that land on the boundary up to rounding.
    pub fn contains(&self, x: f64, y: f64, closed: bool, eps: f64) -> bool {
        let e = if closed { -eps } else { eps };
        match self {
            Shape::Rect { x0, y0, x1, y1 } => x > x0 + e && x < x1 - e && y > y0 + e && y < y1 - e,
            Shape::Disk { cx, cy, r } => (x - cx).hypot(y - cy) < r - e,
            Shape::Union { parts } => parts.iter().any(|p| p.contains(x, y, closed, eps)),
            Shape::Difference { a, b } => a.contains(x, y, closed, eps) && !b.contains(x, y, !closed, eps),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry {
    nx: usize,
    ny: usize,
    h: f64,
    origin: (f64, f64),
    mask: Vec<bool>,
}

impl GridGeometry {
    pub fn from_mask(nx: usize, ny: usize, h: f64, origin: (f64, f64), mask: Vec<bool>) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidSpec(format!("grid spacing must be positive, got {h}")));
        }
        if nx * ny != mask.len() {
            return Err(Error::InvalidSpec(format!(
                "mask has {} nodes, expected {nx}×{ny}",
                mask.len()
            )));
        }
        let g = GridGeometry { nx, ny, h, origin, mask };
        if let Some(idx) = (0..g.len()).find(|&i| g.mask[i] && g.on_ring(i)) {
            return Err(Error::InvalidSpec(format!(
                "mask node {idx} lies on the outer ring of the grid"
            )));
        }
        if g.count() == 0 {
            return Err(Error::EmptyDomain);
        }
        Ok(g)
    }

    /// Interior nodes of `(x0, x0 + (nx+1)h) × (y0, y0 + (ny+1)h)`: an
    /// `nx × ny` block inside a one-node frame.
    pub fn rectangle(nx: usize, ny: usize, h: f64, origin: (f64, f64)) -> Result<Self> {
        let (w, hgt) = (nx + 2, ny + 2);
        let mut mask = vec![false; w * hgt];
        for j in 1..=ny {
            for i in 1..=nx {
                mask[j * w + i] = true;
            }
        }
        Self::from_mask(w, hgt, h, origin, mask)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Total number of array nodes, masked or not.
    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    /// Number of masked nodes.
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn xy(&self, idx: usize) -> (f64, f64) {
        let (i, j) = self.ij(idx);
        (self.origin.0 + i as f64 * self.h, self.origin.1 + j as f64 * self.h)
    }

    fn on_ring(&self, idx: usize) -> bool {
        let (i, j) = self.ij(idx);
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    /// In-array 4-neighbours of a node.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> {
        let (i, j) = self.ij(idx);
        let (nx, ny) = (self.nx, self.ny);
        [
            (i > 0).then(|| idx - 1),
            (i + 1 < nx).then(|| idx + 1),
            (j > 0).then(|| idx - nx),
            (j + 1 < ny).then(|| idx + nx),
        ]
        .into_iter()
        .flatten()
    }

    /// Same array and spacing, different mask.
    pub fn with_mask(&self, mask: Vec<bool>) -> Result<Self> {
        Self::from_mask(self.nx, self.ny, self.h, self.origin, mask)
    }

    /// Masked node indices in increasing order.
    pub fn nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn header(&self) -> GridHeader {
        GridHeader { nx: self.nx, ny: self.ny, h: self.h, origin: [self.origin.0, self.origin.1] }
    }
}

/// Sidecar metadata for a mask bitmap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: [f64; 2],
}

/// Node-centre rasterisation of `shape` on the closed box `bbox`.
pub fn rasterize(shape: &Shape, bbox: BBox, h: f64) -> Result<GridGeometry> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidSpec(format!("grid spacing must be positive, got {h}")));
    }
    let w = bbox.x1 - bbox.x0;
    let hg = bbox.y1 - bbox.y0;
    if !(w > 0.0 && hg > 0.0) {
        return Err(Error::InvalidSpec("bounding box is empty".into()));
    }
    let nx = (w / h).round() as usize + 1;
    let ny = (hg / h).round() as usize + 1;
    let eps = 1e-9 * h;
    let mut mask = vec![false; nx * ny];
    for j in 1..ny.saturating_sub(1) {
        for i in 1..nx.saturating_sub(1) {
            let x = bbox.x0 + i as f64 * h;
            let y = bbox.y0 + j as f64 * h;
            mask[j * nx + i] = shape.contains(x, y, false, eps);
        }
    }
    GridGeometry::from_mask(nx, ny, h, (bbox.x0, bbox.y0), mask)
}

/// Maximal 4-connected subsets of `mask`, each sorted, ordered by smallest node.
pub fn components(geometry: &GridGeometry, mask: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; mask.len()];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for w in geometry.neighbors(v) {
                if mask[w] && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub fn mask_from_nodes(len: usize, nodes: &[usize]) -> Vec<bool> {
    let mut m = vec![false; len];
    for &i in nodes {
        m[i] = true;
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainFamily {
    parent: GridGeometry,
    masks: Vec<Vec<bool>>,
}

impl SubdomainFamily {
    /// Each mask must lie inside the parent mask; disjointness is checked
    /// separately by [`check_disjoint`].
    pub fn new(parent: GridGeometry, masks: Vec<Vec<bool>>) -> Result<Self> {
        for (l, m) in masks.iter().enumerate() {
            if m.len() != parent.len() {
                return Err(Error::InvalidSpec(format!("member {l} has the wrong mask size")));
            }
            if let Some(idx) = (0..m.len()).find(|&i| m[i] && !parent.mask[i]) {
                return Err(Error::InvalidSpec(format!(
                    "member {l} leaves the parent domain at node {idx}"
                )));
            }
        }
        Ok(SubdomainFamily { parent, masks })
    }

    pub fn parent(&self) -> &GridGeometry {
        &self.parent
    }

    pub fn masks(&self) -> &[Vec<bool>] {
        &self.masks
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Member `l` as a geometry of its own.
    pub fn member(&self, l: usize) -> Result<GridGeometry> {
        self.parent.with_mask(self.masks[l].clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Collision {
    pub node: usize,
    pub first: usize,
    pub second: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DisjointReport {
    pub disjoint: bool,
    /// Smallest shared node and the two members that share it.
    pub witness: Option<Collision>,
}

pub fn check_disjoint(family: &SubdomainFamily) -> DisjointReport {
    let mut owner: Vec<Option<usize>> = vec![None; family.parent.len()];
    let mut witness: Option<Collision> = None;
    for (l, m) in family.masks.iter().enumerate() {
        for (idx, _) in m.iter().enumerate().filter(|(_, &b)| b) {
            match owner[idx] {
                Some(first) => {
                    if witness.is_none_or(|w| idx < w.node) {
                        witness = Some(Collision { node: idx, first, second: l });
                    }
                }
                None => owner[idx] = Some(l),
            }
        }
    }
    DisjointReport { disjoint: witness.is_none(), witness }
}

fn dilate(g: &GridGeometry, m: &[bool]) -> Vec<bool> {
    let mut out = m.to_vec();
    for idx in 0..m.len() {
        if m[idx] {
            for w in g.neighbors(idx) {
                out[w] = true;
            }
        }
    }
    out
}

fn erode(g: &GridGeometry, m: &[bool]) -> Vec<bool> {
    (0..m.len())
        .map(|idx| m[idx] && g.neighbors(idx).count() == 4 && g.neighbors(idx).all(|w| m[w]))
        .collect()
}

/// Discrete interior of the union of the closures of the members in `subset`,
/// restricted to the parent domain.
///
/// The closure of a member is the member plus its 4-neighbours. A parent node
/// is kept when it lies in one of these closures and each edge to an in-domain
/// neighbour lies in a single member's closure. Requiring one member per edge
/// keeps two members apart across a gap of two grid lines while a one-line
/// interface between abutting members is filled in.
pub fn star_interior(family: &SubdomainFamily, subset: &[usize]) -> Result<Vec<bool>> {
    if subset.is_empty() {
        return Err(Error::Precondition("index set L is empty".into()));
    }
    let g = &family.parent;
    let closures = subset
        .iter()
        .map(|&l| {
            family.masks.get(l).map(|m| dilate(g, m)).ok_or_else(|| {
                Error::Precondition(format!("index {l} out of range for a family of {}", family.len()))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let edge_covered = |p: usize, q: usize| closures.iter().any(|c| c[p] && c[q]);
    Ok((0..g.len())
        .map(|p| {
            g.mask[p]
                && closures.iter().any(|c| c[p])
                && g.neighbors(p).all(|q| !g.mask[q] || edge_covered(p, q))
        })
        .collect())
}

/// Nodes of `m` with at least one 4-neighbour outside `m`.
pub fn inner_boundary(g: &GridGeometry, m: &[bool]) -> Vec<usize> {
    (0..m.len())
        .filter(|&idx| m[idx] && g.neighbors(idx).any(|w| !m[w]))
        .collect()
}

/// One erosion step of `m` against its complement.
pub fn erode_mask(g: &GridGeometry, m: &[bool]) -> Vec<bool> {
    erode(g, m)
}
