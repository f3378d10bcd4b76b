//! Spanning preservation under local moves.
//!
//! Adding facets to `K` or cells to `E` never breaks spanning. Opening a
//! facet `(a, b)` is safe when either
//! - `a` and `b` are already joined inside a small window by a path whose
//!   closing cycle has zero winding vector, or
//! - one side is a whole component inside the window with no winding cycles.
//!
//! Then every component's cycle lattice is unchanged. Anything else is
//! left undecided and the move is rejected; the global test is reserved for
//! prune sweeps.

use crate::grid::{CellId, Domain, FacetId};
use crate::spanning::HomologyChecker;

use super::state::State;

pub(crate) const WINDOW: i64 = 6;

pub(crate) struct Guard {
    pub homology: HomologyChecker,
    /// Whether `E` cells block loops.
    pub bulk: bool,
    dims: usize,
    stamp: Vec<u32>,
    epoch: u32,
    pot: Vec<i64>,
    queue: Vec<CellId>,
    step: Vec<i64>,
}

enum Probe {
    Reached(bool),
    Enclosed(bool),
    Escaped,
}

impl Guard {
    pub fn new(homology: HomologyChecker, bulk: bool, dom: &Domain) -> Self {
        let dims = homology.dims;
        Guard {
            homology,
            bulk,
            dims,
            stamp: vec![0; dom.n_cells()],
            epoch: 0,
            pot: vec![0; dom.n_cells() * dims.max(1)],
            queue: Vec::new(),
            step: vec![0; dims.max(1)],
        }
    }

    #[inline]
    fn passable(&self, st: &State, c: CellId) -> bool {
        st.dom.is_omega(c) && !(self.bulk && st.in_e(c))
    }

    /// Window BFS from `a` looking for `b`, with `pending` facets closed.
    fn probe(&mut self, st: &State, a: CellId, b: CellId, pending: &[FacetId]) -> Probe {
        let dom = st.dom;
        let m = self.dims;
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let ep = self.epoch;
        let (ax, ay) = dom.cell_xy(a);
        let (ax, ay) = (ax as i64, ay as i64);
        self.queue.clear();
        self.queue.push(a);
        self.stamp[a] = ep;
        for j in 0..m {
            self.pot[a * m + j] = 0;
        }
        let mut escaped = false;
        let mut trivial = true;
        let mut head = 0;
        while head < self.queue.len() {
            let c = self.queue[head];
            head += 1;
            for (f, n) in dom.links(c) {
                if st.in_k(f) || pending.contains(&f) || !self.passable(st, n) {
                    continue;
                }
                let (nx, ny) = dom.cell_xy(n);
                if (nx as i64 - ax).abs() > WINDOW || (ny as i64 - ay).abs() > WINDOW {
                    escaped = true;
                    continue;
                }
                let crosses = self.homology.crossing(dom, f, c, n, &mut self.step);
                if self.stamp[n] != ep {
                    self.stamp[n] = ep;
                    for j in 0..m {
                        let s = if crosses { self.step[j] } else { 0 };
                        self.pot[n * m + j] = self.pot[c * m + j] + s;
                    }
                    self.queue.push(n);
                } else {
                    for j in 0..m {
                        let s = if crosses { self.step[j] } else { 0 };
                        if self.pot[c * m + j] + s != self.pot[n * m + j] {
                            trivial = false;
                        }
                    }
                }
            }
        }
        if self.stamp[b] == ep {
            // closing cycle a → … → b → a through the opened facet
            let f = dom.facet_between(b, a).unwrap();
            let crosses = self.homology.crossing(dom, f, b, a, &mut self.step);
            let zero = (0..m).all(|j| self.pot[b * m + j] + if crosses { self.step[j] } else { 0 } == 0);
            Probe::Reached(zero)
        } else if escaped {
            Probe::Escaped
        } else {
            Probe::Enclosed(trivial)
        }
    }

    /// Whether opening `f` (with `pending` still closed) provably keeps
    /// every generator blocked.
    pub fn opening_is_safe(&mut self, st: &State, f: FacetId, pending: &[FacetId]) -> bool {
        let (a, b) = st.dom.facet_cells(f);
        if !self.passable(st, a) || !self.passable(st, b) {
            return true;
        }
        match self.probe(st, a, b, pending) {
            Probe::Reached(zero) => return zero,
            Probe::Enclosed(true) => return true,
            _ => {}
        }
        matches!(self.probe(st, b, a, pending), Probe::Enclosed(true))
    }

    /// Sequentially certify every facet opened since `mark`.
    pub fn move_is_safe(&mut self, st: &State, mark: usize) -> bool {
        let mut pending = st.opened_since(mark);
        while let Some(f) = pending.first().copied() {
            if !self.opening_is_safe(st, f, &pending) {
                return false;
            }
            pending.remove(0);
        }
        true
    }

    /// Exact global test on the current state.
    pub fn spans(&mut self, st: &State) -> bool {
        let bulk = self.bulk;
        let e = &st.pair.e;
        let mult = &st.mult;
        self.homology.spans(st.dom, |c| !(bulk && e.contains(c)), |f| mult[f] > 0)
    }
}
