//! Rasterized domain: cells carry area `h²`, facets carry length `h`.
//!
//! Cells are indexed row-major (`y * width + x`, `y` growing upwards).
//! Facets come in two families, listed x-family first:
//!
//! * x-facets separate `(x, y)` and `(x + 1, y)`; id `y * (width - 1) + x`;
//! * y-facets separate `(x, y)` and `(x, y + 1)`; id `nx + y * width + x`.
//!
//! A facet is *interior* when both adjacent cells are free (not wire). Facets
//! against the wire or the box edge are not represented at all, so contact
//! with the wire is never charged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::scene::SceneConfig;

pub type CellId = usize;
pub type FacetId = usize;
/// Lattice vertex id `vy * (width + 1) + vx`.
pub type VertexId = usize;

macro_rules! id_set {
    ($name:ident, $what:literal) => {
        #[doc = concat!("Membership bitmap over ", $what, " with a cached count.")]
        #[derive(Clone, Debug, PartialEq, Eq, Hash)]
        pub struct $name {
            bits: Vec<bool>,
            count: usize,
        }

        impl $name {
            pub fn empty(len: usize) -> Self {
                $name { bits: vec![false; len], count: 0 }
            }

            pub fn from_ids(len: usize, ids: impl IntoIterator<Item = usize>) -> Self {
                let mut s = Self::empty(len);
                for id in ids {
                    s.insert(id);
                }
                s
            }

            pub fn from_bits(bits: Vec<bool>) -> Self {
                let count = bits.iter().filter(|&&b| b).count();
                $name { bits, count }
            }

            /// Size of the underlying universe.
            pub fn universe(&self) -> usize {
                self.bits.len()
            }

            pub fn count(&self) -> usize {
                self.count
            }

            pub fn is_empty(&self) -> bool {
                self.count == 0
            }

            #[inline]
            pub fn contains(&self, id: usize) -> bool {
                self.bits[id]
            }

            pub fn insert(&mut self, id: usize) -> bool {
                let fresh = !self.bits[id];
                if fresh {
                    self.bits[id] = true;
                    self.count += 1;
                }
                fresh
            }

            pub fn remove(&mut self, id: usize) -> bool {
                let had = self.bits[id];
                if had {
                    self.bits[id] = false;
                    self.count -= 1;
                }
                had
            }

            pub fn set(&mut self, id: usize, on: bool) {
                if on {
                    self.insert(id);
                } else {
                    self.remove(id);
                }
            }

            pub fn toggle(&mut self, id: usize) -> bool {
                if self.bits[id] {
                    self.remove(id);
                    false
                } else {
                    self.insert(id);
                    true
                }
            }

            pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
                self.bits.iter().enumerate().filter_map(|(i, &b)| b.then_some(i))
            }

            pub fn bits(&self) -> &[bool] {
                &self.bits
            }

            pub fn union(&self, other: &Self) -> Self {
                Self::from_bits(self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect())
            }

            pub fn intersection(&self, other: &Self) -> Self {
                Self::from_bits(self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect())
            }

            pub fn difference(&self, other: &Self) -> Self {
                Self::from_bits(self.bits.iter().zip(&other.bits).map(|(a, b)| *a && !*b).collect())
            }

            pub fn symmetric_difference(&self, other: &Self) -> Self {
                Self::from_bits(self.bits.iter().zip(&other.bits).map(|(a, b)| *a != *b).collect())
            }

            pub fn is_subset(&self, other: &Self) -> bool {
                self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
            }
        }
    };
}

id_set!(CellSet, "grid cells");
id_set!(FacetSet, "grid facets");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    /// Facet normal along x.
    X,
    /// Facet normal along y.
    Y,
}

/// Position of a facet relative to a cell set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FacetDensityClass {
    InteriorOfE,
    ExteriorOfE,
    ReducedBoundary,
}

#[derive(Clone, Debug)]
pub struct Domain {
    pub width: usize,
    pub height: usize,
    pub h: f64,
    pub wire_cells: CellSet,
    pub omega_cells: CellSet,
    interior: Vec<bool>,
}

impl Domain {
    /// Domain from an explicit wire bitmap (box-sized, row-major).
    pub fn from_wire(width: usize, height: usize, h: f64, wire: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || !(h > 0.0) {
            return Err(Error::BadScene("empty box or non-positive spacing".into()));
        }
        if wire.len() != width * height {
            return Err(Error::BadScene("wire bitmap size does not match the box".into()));
        }
        let omega: Vec<bool> = wire.iter().map(|w| !w).collect();
        let wire_cells = CellSet::from_bits(wire);
        let omega_cells = CellSet::from_bits(omega);
        if omega_cells.is_empty() {
            return Err(Error::EmptyOmega);
        }
        let mut dom = Domain { width, height, h, wire_cells, omega_cells, interior: Vec::new() };
        dom.interior = (0..dom.n_facets())
            .map(|f| {
                let (a, b) = dom.facet_cells(f);
                dom.omega_cells.contains(a) && dom.omega_cells.contains(b)
            })
            .collect();
        Ok(dom)
    }

    /// Wire-free box of `width x height` cells.
    pub fn open_box(width: usize, height: usize, h: f64) -> Result<Self> {
        Self::from_wire(width, height, h, vec![false; width * height])
    }

    pub fn n_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn n_x_facets(&self) -> usize {
        (self.width - 1) * self.height
    }

    pub fn n_facets(&self) -> usize {
        self.n_x_facets() + self.width * (self.height - 1)
    }

    pub fn n_vertices(&self) -> usize {
        (self.width + 1) * (self.height + 1)
    }

    #[inline]
    pub fn cell(&self, x: usize, y: usize) -> CellId {
        y * self.width + x
    }

    #[inline]
    pub fn cell_xy(&self, c: CellId) -> (usize, usize) {
        (c % self.width, c / self.width)
    }

    pub fn cell_center(&self, c: CellId) -> Point {
        let (x, y) = self.cell_xy(c);
        [(x as f64 + 0.5) * self.h, (y as f64 + 0.5) * self.h]
    }

    /// Cell containing a point, if inside the box.
    pub fn locate(&self, p: Point) -> Option<CellId> {
        let x = (p[0] / self.h).floor();
        let y = (p[1] / self.h).floor();
        if x < 0.0 || y < 0.0 || x >= self.width as f64 || y >= self.height as f64 {
            None
        } else {
            Some(self.cell(x as usize, y as usize))
        }
    }

    pub fn is_omega(&self, c: CellId) -> bool {
        self.omega_cells.contains(c)
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    #[inline]
    pub fn facet_axis(&self, f: FacetId) -> Axis {
        if f < self.n_x_facets() {
            Axis::X
        } else {
            Axis::Y
        }
    }

    /// The two cells of a facet, lower/left first.
    #[inline]
    pub fn facet_cells(&self, f: FacetId) -> (CellId, CellId) {
        let nx = self.n_x_facets();
        if f < nx {
            let (x, y) = (f % (self.width - 1), f / (self.width - 1));
            (self.cell(x, y), self.cell(x + 1, y))
        } else {
            let g = f - nx;
            let (x, y) = (g % self.width, g / self.width);
            (self.cell(x, y), self.cell(x, y + 1))
        }
    }

    /// Facet between two 4-adjacent cells.
    pub fn facet_between(&self, a: CellId, b: CellId) -> Option<FacetId> {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (x0, y0) = self.cell_xy(lo);
        let (x1, y1) = self.cell_xy(hi);
        if y0 == y1 && x1 == x0 + 1 {
            Some(y0 * (self.width - 1) + x0)
        } else if x0 == x1 && y1 == y0 + 1 {
            Some(self.n_x_facets() + y0 * self.width + x0)
        } else {
            None
        }
    }

    #[inline]
    pub fn is_interior(&self, f: FacetId) -> bool {
        self.interior[f]
    }

    pub fn interior_facets(&self) -> impl Iterator<Item = FacetId> + '_ {
        (0..self.n_facets()).filter(|&f| self.interior[f])
    }

    pub fn n_interior_facets(&self) -> usize {
        self.interior.iter().filter(|&&b| b).count()
    }

    /// Facets of a cell in the order left, right, down, up (`None` at the box edge).
    pub fn cell_facets(&self, c: CellId) -> [Option<FacetId>; 4] {
        let (x, y) = self.cell_xy(c);
        let w = self.width;
        let nx = self.n_x_facets();
        [
            (x > 0).then(|| y * (w - 1) + x - 1),
            (x + 1 < w).then(|| y * (w - 1) + x),
            (y > 0).then(|| nx + (y - 1) * w + x),
            (y + 1 < self.height).then(|| nx + y * w + x),
        ]
    }

    /// Interior facets of a cell together with the cell across each.
    pub fn links(&self, c: CellId) -> impl Iterator<Item = (FacetId, CellId)> + '_ {
        self.cell_facets(c).into_iter().flatten().filter(|&f| self.interior[f]).map(move |f| {
            let (a, b) = self.facet_cells(f);
            (f, if a == c { b } else { a })
        })
    }

    /// 4-neighbours inside the box (wire or not).
    pub fn neighbors4(&self, c: CellId) -> impl Iterator<Item = CellId> + '_ {
        self.cell_facets(c).into_iter().flatten().map(move |f| {
            let (a, b) = self.facet_cells(f);
            if a == c {
                b
            } else {
                a
            }
        })
    }

    pub fn facet_midpoint(&self, f: FacetId) -> Point {
        let (a, _) = self.facet_cells(f);
        let (x, y) = self.cell_xy(a);
        match self.facet_axis(f) {
            Axis::X => [(x as f64 + 1.0) * self.h, (y as f64 + 0.5) * self.h],
            Axis::Y => [(x as f64 + 0.5) * self.h, (y as f64 + 1.0) * self.h],
        }
    }

    /// Doubled integer coordinates of the facet midpoint.
    pub fn facet_midpoint2(&self, f: FacetId) -> (i64, i64) {
        let (a, _) = self.facet_cells(f);
        let (x, y) = self.cell_xy(a);
        let (x, y) = (x as i64, y as i64);
        match self.facet_axis(f) {
            Axis::X => (2 * x + 2, 2 * y + 1),
            Axis::Y => (2 * x + 1, 2 * y + 2),
        }
    }

    /// Facet with the given doubled midpoint coordinates, if it exists.
    pub fn facet_at2(&self, x2: i64, y2: i64) -> Option<FacetId> {
        let (w, h) = (self.width as i64, self.height as i64);
        if x2 % 2 == 0 && y2.rem_euclid(2) == 1 {
            let (x, y) = (x2 / 2 - 1, (y2 - 1) / 2);
            (x >= 0 && x < w - 1 && y >= 0 && y < h).then(|| (y * (w - 1) + x) as usize)
        } else if x2.rem_euclid(2) == 1 && y2 % 2 == 0 {
            let (x, y) = ((x2 - 1) / 2, y2 / 2 - 1);
            (x >= 0 && x < w && y >= 0 && y < h - 1)
                .then(|| self.n_x_facets() + (y * w + x) as usize)
        } else {
            None
        }
    }

    pub fn vertex(&self, vx: usize, vy: usize) -> VertexId {
        vy * (self.width + 1) + vx
    }

    pub fn vertex_xy(&self, v: VertexId) -> (usize, usize) {
        (v % (self.width + 1), v / (self.width + 1))
    }

    pub fn vertex_point(&self, v: VertexId) -> Point {
        let (x, y) = self.vertex_xy(v);
        [x as f64 * self.h, y as f64 * self.h]
    }

    /// Lattice endpoints of a facet (lower/left first).
    pub fn facet_vertices(&self, f: FacetId) -> (VertexId, VertexId) {
        let (a, _) = self.facet_cells(f);
        let (x, y) = self.cell_xy(a);
        match self.facet_axis(f) {
            Axis::X => (self.vertex(x + 1, y), self.vertex(x + 1, y + 1)),
            Axis::Y => (self.vertex(x, y + 1), self.vertex(x + 1, y + 1)),
        }
    }

    /// Facets (interior or not) incident to a lattice vertex.
    pub fn vertex_facets(&self, v: VertexId) -> impl Iterator<Item = FacetId> + '_ {
        let (vx, vy) = self.vertex_xy(v);
        let (vx, vy) = (vx as i64, vy as i64);
        // x-facets on the vertical line x = vx, y-facets on the horizontal line y = vy
        [
            self.facet_at2(2 * vx, 2 * vy - 1),
            self.facet_at2(2 * vx, 2 * vy + 1),
            self.facet_at2(2 * vx - 1, 2 * vy),
            self.facet_at2(2 * vx + 1, 2 * vy),
        ]
        .into_iter()
        .flatten()
    }

    /// Cells around a lattice vertex that lie inside the box.
    pub fn vertex_cells(&self, v: VertexId) -> impl Iterator<Item = CellId> + '_ {
        let (vx, vy) = self.vertex_xy(v);
        [(0usize, 0usize), (1, 0), (0, 1), (1, 1)].into_iter().filter_map(move |(dx, dy)| {
            let (x, y) = (vx + dx, vy + dy);
            (x >= 1 && y >= 1 && x <= self.width && y <= self.height).then(|| self.cell(x - 1, y - 1))
        })
    }

    /// A vertex touches the wire when it is on the box edge or a corner of a wire cell.
    pub fn vertex_on_wire(&self, v: VertexId) -> bool {
        let (vx, vy) = self.vertex_xy(v);
        vx == 0
            || vy == 0
            || vx == self.width
            || vy == self.height
            || self.vertex_cells(v).any(|c| self.wire_cells.contains(c))
    }

    pub fn empty_cells(&self) -> CellSet {
        CellSet::empty(self.n_cells())
    }

    pub fn empty_facets(&self) -> FacetSet {
        FacetSet::empty(self.n_facets())
    }

    /// Cell set restricted to free cells.
    pub fn cells_where(&self, mut pred: impl FnMut(CellId) -> bool) -> CellSet {
        CellSet::from_ids(self.n_cells(), (0..self.n_cells()).filter(|&c| self.is_omega(c) && pred(c)))
    }

    pub fn facets_where(&self, mut pred: impl FnMut(FacetId) -> bool) -> FacetSet {
        FacetSet::from_ids(self.n_facets(), self.interior_facets().filter(|&f| pred(f)))
    }

    pub fn check_cells(&self, s: &CellSet) -> Result<()> {
        if s.universe() != self.n_cells() || !s.is_subset(&self.omega_cells) {
            return Err(Error::Format("cell set is not a subset of the free cells".into()));
        }
        Ok(())
    }

    pub fn check_facets(&self, s: &FacetSet) -> Result<()> {
        if s.universe() != self.n_facets() {
            return Err(Error::Format("facet set has the wrong size".into()));
        }
        if let Some(f) = s.iter().find(|&f| !self.interior[f]) {
            return Err(Error::NonInteriorFacet(f));
        }
        Ok(())
    }

    pub fn volume(&self, s: &CellSet) -> f64 {
        s.count() as f64 * self.cell_area()
    }

    pub fn measure(&self, s: &FacetSet) -> f64 {
        s.count() as f64 * self.h
    }
}

/// Rasterize a scene by cell-centre inclusion.
pub fn build_domain(scene: &SceneConfig) -> Result<Domain> {
    scene.validate()?;
    let h = scene.resolution;
    let cells = |len: f64| -> Result<usize> {
        let n = len / h;
        let r = n.round();
        if (n - r).abs() > 1e-6 || r < 1.0 {
            return Err(Error::BadScene(format!("box side {len} is not a multiple of resolution {h}")));
        }
        Ok(r as usize)
    };
    let (w, ht) = (cells(scene.bbox.w)?, cells(scene.bbox.h)?);
    let mut wire = vec![false; w * ht];
    for y in 0..ht {
        for x in 0..w {
            let p = [(x as f64 + 0.5) * h, (y as f64 + 0.5) * h];
            wire[y * w + x] = scene.wire.iter().any(|prim| prim.contains(p));
        }
    }
    Domain::from_wire(w, ht, h, wire)
}

/// Interior facets with exactly one adjacent cell in `e`.
pub fn reduced_boundary(e: &CellSet, dom: &Domain) -> FacetSet {
    dom.facets_where(|f| {
        let (a, b) = dom.facet_cells(f);
        e.contains(a) != e.contains(b)
    })
}

pub fn facet_density_class(e: &CellSet, f: FacetId, dom: &Domain) -> Result<FacetDensityClass> {
    if f >= dom.n_facets() || !dom.is_interior(f) {
        return Err(Error::NonInteriorFacet(f));
    }
    Ok(density_class_unchecked(e, f, dom))
}

#[inline]
pub(crate) fn density_class_unchecked(e: &CellSet, f: FacetId, dom: &Domain) -> FacetDensityClass {
    let (a, b) = dom.facet_cells(f);
    match (e.contains(a), e.contains(b)) {
        (true, true) => FacetDensityClass::InteriorOfE,
        (false, false) => FacetDensityClass::ExteriorOfE,
        _ => FacetDensityClass::ReducedBoundary,
    }
}

/// Relative perimeter `P(E; region)` under the open-region convention: only
/// reduced-boundary facets with both cells inside `region` are counted.
pub fn perimeter(e: &CellSet, region: &CellSet, dom: &Domain) -> f64 {
    let n = dom
        .interior_facets()
        .filter(|&f| {
            let (a, b) = dom.facet_cells(f);
            region.contains(a) && region.contains(b) && e.contains(a) != e.contains(b)
        })
        .count();
    n as f64 * dom.h
}

/// A film `(K, E)` with `K = ∂*E ∪ K_extra`; `K_extra` is kept disjoint from `∂*E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilmPair {
    pub e: CellSet,
    pub k_extra: FacetSet,
}

impl FilmPair {
    pub fn empty(dom: &Domain) -> Self {
        FilmPair { e: dom.empty_cells(), k_extra: dom.empty_facets() }
    }

    /// Pair from `E` and extra facets; facets on `∂*E` are dropped from the extra part.
    pub fn from_parts(dom: &Domain, e: CellSet, k_extra: FacetSet) -> Result<Self> {
        dom.check_cells(&e)?;
        dom.check_facets(&k_extra)?;
        let rb = reduced_boundary(&e, dom);
        let k_extra = k_extra.difference(&rb);
        Ok(FilmPair { e, k_extra })
    }

    /// Pair from `E` and a full `K`, which must contain `∂*E`.
    pub fn from_k(dom: &Domain, e: CellSet, k: FacetSet) -> Result<Self> {
        dom.check_cells(&e)?;
        dom.check_facets(&k)?;
        let rb = reduced_boundary(&e, dom);
        if !rb.is_subset(&k) {
            return Err(Error::NotAFilmPair);
        }
        Ok(FilmPair { k_extra: k.difference(&rb), e })
    }

    pub fn k(&self, dom: &Domain) -> FacetSet {
        reduced_boundary(&self.e, dom).union(&self.k_extra)
    }

    #[inline]
    pub fn k_contains(&self, f: FacetId, dom: &Domain) -> bool {
        if self.k_extra.contains(f) {
            return true;
        }
        let (a, b) = dom.facet_cells(f);
        dom.is_interior(f) && self.e.contains(a) != self.e.contains(b)
    }

    pub fn is_normalized(&self, dom: &Domain) -> bool {
        self.k_extra.iter().all(|f| density_class_unchecked(&self.e, f, dom) != FacetDensityClass::InteriorOfE)
    }

    /// Drop extra facets with both sides in `E`.
    pub fn normalize(&mut self, dom: &Domain) {
        let inside: Vec<_> = self
            .k_extra
            .iter()
            .filter(|&f| density_class_unchecked(&self.e, f, dom) == FacetDensityClass::InteriorOfE)
            .collect();
        for f in inside {
            self.k_extra.remove(f);
        }
    }
}
