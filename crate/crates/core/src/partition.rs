//! Essential partitions induced by facet sets, UBEP and the essential
//! spanning part.
//!
//! Discretely, a facet set `S` essentially disconnects a cell set `U` when the
//! 4-neighbour graph of `U` with the edges dual to `S` removed is
//! disconnected; the induced essential partition is the set of connected
//! components. Every facet set is rectifiable here, so the distinction
//! between `S` and its rectifiable part never arises.

use std::collections::VecDeque;

use crate::grid::{CellId, CellSet, Domain, FacetSet};

pub const UNLABELED: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    /// Component label per cell of the box; `UNLABELED` outside the base set.
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl Partition {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    #[inline]
    pub fn label(&self, c: CellId) -> Option<u32> {
        let l = self.labels[c];
        (l != UNLABELED).then_some(l)
    }

    pub fn component(&self, label: u32) -> CellSet {
        CellSet::from_ids(
            self.labels.len(),
            self.labels.iter().enumerate().filter_map(|(c, &l)| (l == label).then_some(c)),
        )
    }

    pub fn components(&self) -> Vec<CellSet> {
        (0..self.count() as u32).map(|l| self.component(l)).collect()
    }
}

/// Connected components of `u` after cutting the facets of `s`, labelled in
/// order of their smallest cell index.
pub fn essential_partition(s: &FacetSet, u: &CellSet, dom: &Domain) -> Partition {
    let mut labels = vec![UNLABELED; dom.n_cells()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in u.iter() {
        if labels[start] != UNLABELED {
            continue;
        }
        let label = sizes.len() as u32;
        labels[start] = label;
        queue.push_back(start);
        let mut size = 0;
        while let Some(c) = queue.pop_front() {
            size += 1;
            for (f, n) in dom.links(c) {
                if u.contains(n) && labels[n] == UNLABELED && !s.contains(f) {
                    labels[n] = label;
                    queue.push_back(n);
                }
            }
        }
        sizes.push(size);
    }
    Partition { labels, sizes }
}

/// If `s` essentially disconnects `u`, a witness `{T1, T2}`: the first
/// component and the union of the others.
pub fn essentially_disconnects(s: &FacetSet, u: &CellSet, dom: &Domain) -> Option<(CellSet, CellSet)> {
    let p = essential_partition(s, u, dom);
    if p.count() < 2 {
        return None;
    }
    let t1 = p.component(0);
    let t2 = u.difference(&t1);
    Some((t1, t2))
}

/// Facets with both cells in `u` whose cells lie in different components.
pub fn ubep_of(p: &Partition, u: &CellSet, dom: &Domain) -> FacetSet {
    dom.facets_where(|f| {
        let (a, b) = dom.facet_cells(f);
        u.contains(a) && u.contains(b) && p.labels[a] != p.labels[b]
    })
}

pub fn ubep(s: &FacetSet, u: &CellSet, dom: &Domain) -> FacetSet {
    let p = essential_partition(s, u, dom);
    ubep_of(&p, u, dom)
}

/// Axis-aligned squares of side 2, 4, 8, ... cells at every position,
/// intersected with the free cells; empty intersections are skipped.
pub fn dyadic_covering(dom: &Domain) -> Vec<CellSet> {
    let mut out = Vec::new();
    let mut side = 2;
    while side <= dom.width.max(dom.height) {
        for y0 in 0..=dom.height.saturating_sub(side.min(dom.height)) {
            for x0 in 0..=dom.width.saturating_sub(side.min(dom.width)) {
                let sq = square(dom, x0, y0, side);
                if !sq.is_empty() {
                    out.push(sq);
                }
            }
        }
        side *= 2;
    }
    out
}

fn square(dom: &Domain, x0: usize, y0: usize, side: usize) -> CellSet {
    let mut s = dom.empty_cells();
    for y in y0..(y0 + side).min(dom.height) {
        for x in x0..(x0 + side).min(dom.width) {
            let c = dom.cell(x, y);
            if dom.is_omega(c) {
                s.insert(c);
            }
        }
    }
    s
}

/// Union of `ubep(s, Ω_k)` over a covering.
pub fn essential_spanning_part(s: &FacetSet, covering: &[CellSet], dom: &Domain) -> FacetSet {
    let mut out = dom.empty_facets();
    for region in covering {
        let touches = s.iter().any(|f| {
            let (a, b) = dom.facet_cells(f);
            region.contains(a) && region.contains(b)
        });
        if !touches {
            continue;
        }
        for f in ubep(s, region, dom).iter() {
            out.insert(f);
        }
    }
    out
}

/// `essential_spanning_part` over the default dyadic covering, visiting only
/// squares that contain a facet of `s`.
pub fn essential_spanning_part_dyadic(s: &FacetSet, dom: &Domain) -> FacetSet {
    let mut out = dom.empty_facets();
    let mut side = 2;
    let cells: Vec<(usize, usize)> = s
        .iter()
        .map(|f| dom.cell_xy(dom.facet_cells(f).0))
        .collect();
    while side <= dom.width.max(dom.height) {
        let mut seen = std::collections::BTreeSet::new();
        for &(fx, fy) in &cells {
            let xs = fx.saturating_sub(side)..=fx.min(dom.width.saturating_sub(side.min(dom.width)));
            for x0 in xs {
                let ys = fy.saturating_sub(side)..=fy.min(dom.height.saturating_sub(side.min(dom.height)));
                for y0 in ys {
                    if seen.insert((x0, y0)) {
                        let sq = square(dom, x0, y0, side);
                        for f in ubep(s, &sq, dom).iter() {
                            out.insert(f);
                        }
                    }
                }
            }
        }
        side *= 2;
    }
    out
}
