//! Mutable annealing state: a film pair with per-facet multiplicities,
//! incrementally maintained objective, and an undo log.

use crate::energy::{
    crofton_pair, crofton_pairs_touching_cell, crofton_pairs_touching_facet, crofton_stencil, isotropic_energy,
    CroftonDir,
};
use crate::grid::{CellId, Domain, FacetId, FilmPair};

use super::params::Objective;

#[derive(Clone, Copy, Debug)]
enum Undo {
    Cell(CellId, bool),
    Extra(FacetId, bool),
}

/// Swap-remove list with O(1) membership updates.
#[derive(Clone, Debug)]
pub(crate) struct IndexList {
    items: Vec<usize>,
    pos: Vec<u32>,
}

impl IndexList {
    fn new(n: usize) -> Self {
        IndexList { items: Vec::new(), pos: vec![u32::MAX; n] }
    }

    fn set(&mut self, id: usize, on: bool) {
        let present = self.pos[id] != u32::MAX;
        if on && !present {
            self.pos[id] = self.items.len() as u32;
            self.items.push(id);
        } else if !on && present {
            let i = self.pos[id] as usize;
            let last = *self.items.last().unwrap();
            self.items.swap_remove(i);
            if last != id {
                self.pos[last] = i as u32;
            }
            self.pos[id] = u32::MAX;
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn get(&self, i: usize) -> usize {
        self.items[i]
    }
}

#[derive(Clone, Debug)]
pub(crate) struct State<'a> {
    pub dom: &'a Domain,
    pub pair: FilmPair,
    /// 0 off the film, 1 on `∂*E`, 2 on the collapsed part.
    pub mult: Vec<u8>,
    pub objective: Objective,
    stencil: Vec<CroftonDir>,
    /// Running objective value (length units).
    pub energy: f64,
    /// Film facets and `∂*E` facets, for move sampling.
    pub film: IndexList,
    pub boundary: IndexList,
    log: Vec<Undo>,
}

impl<'a> State<'a> {
    pub fn new(dom: &'a Domain, pair: FilmPair, objective: Objective) -> Self {
        let nf = dom.n_facets();
        let mut st = State {
            dom,
            pair: FilmPair { e: dom.empty_cells(), k_extra: dom.empty_facets() },
            mult: vec![0; nf],
            objective,
            stencil: crofton_stencil(dom.h),
            energy: 0.0,
            film: IndexList::new(nf),
            boundary: IndexList::new(nf),
            log: Vec::new(),
        };
        for c in pair.e.iter() {
            st.set_e(c, true);
        }
        for f in pair.k_extra.iter() {
            st.set_extra(f, true);
        }
        st.log.clear();
        st.energy = st.recompute_energy();
        st
    }

    /// Objective from scratch.
    pub fn recompute_energy(&self) -> f64 {
        match self.objective {
            Objective::FacetCount => {
                let mut ids: Vec<usize> = (0..self.film.len()).map(|i| self.film.get(i)).collect();
                ids.sort_unstable();
                ids.into_iter().map(|f| self.mult[f] as f64 * self.dom.h).sum()
            }
            Objective::Isotropic => isotropic_energy(&self.pair, self.dom),
        }
    }

    pub fn resync(&mut self) {
        self.energy = self.recompute_energy();
    }

    /// Crofton pairs whose cost may change when `cells` or `facets` change.
    fn pairs_near(&self, cells: &[CellId], facets: &[FacetId]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut buf = Vec::new();
        for (k, d) in self.stencil.iter().enumerate() {
            buf.clear();
            for &c in cells {
                crofton_pairs_touching_cell(self.dom, c, d, &mut buf);
            }
            for &f in facets {
                crofton_pairs_touching_facet(self.dom, f, d, &mut buf);
            }
            out.extend(buf.iter().map(|&a| (a, k)));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn pair_sum(&self, pairs: &[(usize, usize)]) -> f64 {
        pairs
            .iter()
            .map(|&(a, k)| crofton_pair(self.dom, a, &self.stencil[k], |c| self.in_e(c), |f| self.mult[f] == 2))
            .sum()
    }

    /// Apply `change`, adding the resulting change of the Crofton objective.
    fn tracked(&mut self, cells: &[CellId], facets: &[FacetId], change: impl FnOnce(&mut Self)) {
        if self.objective == Objective::FacetCount {
            change(self);
            return;
        }
        let pairs = self.pairs_near(cells, facets);
        let before = self.pair_sum(&pairs);
        change(self);
        self.energy += self.pair_sum(&pairs) - before;
    }

    #[inline]
    pub fn in_k(&self, f: FacetId) -> bool {
        self.mult[f] > 0
    }

    #[inline]
    pub fn in_e(&self, c: CellId) -> bool {
        self.pair.e.contains(c)
    }

    #[inline]
    fn e_at(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.dom.width
            && (y as usize) < self.dom.height
            && self.in_e(self.dom.cell(x as usize, y as usize))
    }

    /// 2×2 blocks around `cells` where `E` touches itself only diagonally.
    /// Such corner contacts block loops but are seen by too few Crofton
    /// lines, so moves may not create them.
    pub fn checkerboards(&self, cells: &[CellId]) -> usize {
        let mut corners: Vec<(i64, i64)> = Vec::new();
        for &c in cells {
            let (x, y) = self.dom.cell_xy(c);
            let (x, y) = (x as i64, y as i64);
            corners.extend([(x - 1, y - 1), (x, y - 1), (x - 1, y), (x, y)]);
        }
        corners.sort_unstable();
        corners.dedup();
        corners
            .into_iter()
            .filter(|&(x, y)| {
                let (a, b, c, d) = (self.e_at(x, y), self.e_at(x + 1, y), self.e_at(x, y + 1), self.e_at(x + 1, y + 1));
                a == d && b == c && a != b
            })
            .count()
    }

    pub fn volume_cells(&self) -> usize {
        self.pair.e.count()
    }

    fn target_mult(&self, f: FacetId) -> u8 {
        let (a, b) = self.dom.facet_cells(f);
        match (self.in_e(a), self.in_e(b)) {
            (true, true) => 0,
            (false, false) => 2 * self.pair.k_extra.contains(f) as u8,
            _ => 1,
        }
    }

    /// Bring `mult[f]` in line with the pair (facet-count energy included).
    fn refresh(&mut self, f: FacetId) {
        let new = self.target_mult(f);
        let old = self.mult[f];
        if new == old {
            return;
        }
        if self.objective == Objective::FacetCount {
            self.energy += (new as f64 - old as f64) * self.dom.h;
        }
        self.mult[f] = new;
        self.film.set(f, new > 0);
        self.boundary.set(f, new == 1);
    }

    /// Put `c` in or out of `E`, keeping `K` unchanged as a set: facets that
    /// leave `∂*E` towards the exterior become collapsed sheets, facets that
    /// join `∂*E` drop their collapsed tag.
    pub fn set_e(&mut self, c: CellId, on: bool) {
        if self.in_e(c) == on {
            return;
        }
        let links: Vec<(FacetId, CellId)> = self.dom.links(c).collect();
        let facets: Vec<FacetId> = links.iter().map(|l| l.0).collect();
        self.log.push(Undo::Cell(c, !on));
        self.tracked(&[c], &facets, |st| {
            st.pair.e.set(c, on);
            for &(f, n) in &links {
                let n_in = st.in_e(n);
                if !on && !n_in {
                    st.set_extra_raw(f, true);
                } else if on && !n_in && st.pair.k_extra.contains(f) {
                    st.set_extra_raw(f, false);
                }
                st.refresh(f);
            }
        });
    }

    fn set_extra_raw(&mut self, f: FacetId, on: bool) {
        if self.pair.k_extra.contains(f) != on {
            self.log.push(Undo::Extra(f, !on));
            self.pair.k_extra.set(f, on);
        }
    }

    /// Toggle a collapsed sheet facet; only facets with both cells outside `E`.
    pub fn set_extra(&mut self, f: FacetId, on: bool) {
        let (a, b) = self.dom.facet_cells(f);
        debug_assert!(!self.in_e(a) && !self.in_e(b));
        self.tracked(&[], &[f], |st| {
            st.set_extra_raw(f, on);
            st.refresh(f);
        });
    }

    pub fn checkpoint(&self) -> usize {
        self.log.len()
    }

    /// Undo every change made since `mark`.
    pub fn rollback(&mut self, mark: usize) {
        while self.log.len() > mark {
            match self.log.pop().unwrap() {
                Undo::Cell(c, old) => {
                    let facets: Vec<FacetId> = self.dom.links(c).map(|l| l.0).collect();
                    self.tracked(&[c], &facets, |st| {
                        st.pair.e.set(c, old);
                        for &f in &facets {
                            st.refresh(f);
                        }
                    });
                }
                Undo::Extra(f, old) => self.tracked(&[], &[f], |st| {
                    st.pair.k_extra.set(f, old);
                    st.refresh(f);
                }),
            }
        }
        self.log.truncate(mark);
    }

    /// Forget the undo history (after an accepted move).
    pub fn commit(&mut self) {
        self.log.clear();
    }

    /// Facets whose removal from `K` happened since `mark`.
    pub fn opened_since(&self, mark: usize) -> Vec<FacetId> {
        let mut out: Vec<FacetId> = Vec::new();
        for u in &self.log[mark..] {
            if let Undo::Extra(f, true) = *u {
                if !self.in_k(f) && !out.contains(&f) {
                    out.push(f);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{energy_bk, isotropic_energy};
    use crate::grid::CellSet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn incremental_energy_matches_scratch() {
        let dom = Domain::open_box(24, 20, 0.1).unwrap();
        for objective in [Objective::FacetCount, Objective::Isotropic] {
            let mut st = State::new(&dom, FilmPair::empty(&dom), objective);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for step in 0..3000 {
                let mark = st.checkpoint();
                if rng.gen_bool(0.5) {
                    let c = rng.gen_range(0..dom.n_cells());
                    let on = !st.in_e(c);
                    st.set_e(c, on);
                } else {
                    let f = rng.gen_range(0..dom.n_facets());
                    if dom.is_interior(f) {
                        let (a, b) = dom.facet_cells(f);
                        if !st.in_e(a) && !st.in_e(b) {
                            let on = !st.pair.k_extra.contains(f);
                            st.set_extra(f, on);
                        }
                    }
                }
                if step % 3 == 0 {
                    let before = st.pair.clone();
                    st.rollback(mark);
                    let _ = before;
                }
                st.commit();
                assert!(st.pair.is_normalized(&dom));
                let scratch = match objective {
                    Objective::FacetCount => energy_bk(&st.pair, &dom.omega_cells, &dom).total,
                    Objective::Isotropic => isotropic_energy(&st.pair, &dom),
                };
                assert!((st.energy - scratch).abs() < 1e-9, "step {step}: {} vs {scratch}", st.energy);
            }
            let _ = CellSet::empty(1);
        }
    }

    #[test]
    fn rollback_restores_the_pair() {
        let dom = Domain::open_box(10, 10, 1.0).unwrap();
        let mut st = State::new(&dom, FilmPair::empty(&dom), Objective::Isotropic);
        st.set_e(44, true);
        st.commit();
        let snapshot = (st.pair.clone(), st.mult.clone(), st.energy);
        let mark = st.checkpoint();
        st.set_e(45, true);
        st.set_e(44, false);
        st.rollback(mark);
        assert_eq!(st.pair, snapshot.0);
        assert_eq!(st.mult, snapshot.1);
        assert!((st.energy - snapshot.2).abs() < 1e-12);
    }
}
