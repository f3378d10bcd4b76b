//! Wet foams: chambers of fixed area separated by sheets, with liquid
//! collecting at the junctions. No spanning constraint applies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::energy_bk;
use crate::error::{Error, Result};
use crate::grid::{CellId, Domain, FilmPair};
use crate::partition::UNLABELED;

use super::anneal::{initial_liquid, MinimizeResult, TraceRow};
use super::mincut::{lambda_minimality_check, MinimalityReport};
use super::params::AnnealParams;
use super::state::State;

/// Label of liquid cells.
pub const LIQUID: u32 = u32::MAX - 1;

/// Balls sampled by the minimality check on the relaxed foam.
const CHECK_BALLS: usize = 50;

#[derive(Clone, Debug)]
pub struct FoamResult {
    pub result: MinimizeResult,
    /// Chamber index per cell, `LIQUID` for the liquid, `UNLABELED` on the wire.
    pub labels: Vec<u32>,
    /// Cells per chamber; held fixed by every move.
    pub volumes: Vec<usize>,
    pub minimality: MinimalityReport,
}

/// `cols × rows` equal rectangles covering the box, restricted to `Ω`.
pub fn foam_layout(dom: &Domain, cols: usize, rows: usize) -> Vec<u32> {
    let (cols, rows) = (cols.max(1), rows.max(1));
    (0..dom.n_cells())
        .map(|c| {
            if !dom.is_omega(c) {
                return UNLABELED;
            }
            let (x, y) = dom.cell_xy(c);
            let i = x * cols / dom.width;
            let j = y * rows / dom.height;
            (j * cols + i) as u32
        })
        .collect()
}

/// The film of a labelling: liquid is `E`, facets between different
/// chambers are sheets.
pub fn foam_pair(dom: &Domain, labels: &[u32]) -> FilmPair {
    let e = dom.cells_where(|c| labels[c] == LIQUID);
    let k_extra = dom.facets_where(|f| {
        let (a, b) = dom.facet_cells(f);
        dom.is_interior(f) && labels[a] != LIQUID && labels[b] != LIQUID && labels[a] != labels[b]
    });
    FilmPair { e, k_extra }
}

struct Foam<'a> {
    st: State<'a>,
    labels: Vec<u32>,
    rng: ChaCha8Rng,
}

impl<'a> Foam<'a> {
    fn relabel(&mut self, c: CellId, new: u32) {
        self.labels[c] = new;
        self.st.set_e(c, new == LIQUID);
        if new == LIQUID {
            return;
        }
        let links: Vec<_> = self.st.dom.links(c).collect();
        for (f, n) in links {
            if !self.st.dom.is_interior(f) || self.labels[n] == LIQUID {
                continue;
            }
            let sheet = self.labels[n] != new;
            if self.st.pair.k_extra.contains(f) != sheet {
                self.st.set_extra(f, sheet);
            }
        }
    }

    /// An interface facet `(a, b)` with `labels[a] = from`, `labels[b] = to`.
    fn interface(&mut self, from: u32, to: u32, avoid: CellId) -> Option<CellId> {
        let n = self.st.film.len();
        for _ in 0..64 {
            let f = self.st.film.get(self.rng.gen_range(0..n));
            let (a, b) = self.st.dom.facet_cells(f);
            for (x, y) in [(a, b), (b, a)] {
                if x != avoid && self.labels[x] == from && self.labels[y] == to {
                    return Some(x);
                }
            }
        }
        None
    }

    /// Move one cell across a random interface and one back elsewhere.
    fn step(&mut self, temp: f64) {
        let n = self.st.film.len();
        if n == 0 {
            return;
        }
        let f = self.st.film.get(self.rng.gen_range(0..n));
        let (mut a, mut b) = self.st.dom.facet_cells(f);
        if self.rng.gen_bool(0.5) {
            std::mem::swap(&mut a, &mut b);
        }
        let (la, lb) = (self.labels[a], self.labels[b]);
        if la == lb || la == UNLABELED || lb == UNLABELED {
            return;
        }
        let Some(c) = self.interface(lb, la, a) else { return };
        let before = self.st.energy;
        let corners = self.st.checkerboards(&[a, c]);
        let mark = self.st.checkpoint();
        self.relabel(a, lb);
        self.relabel(c, la);
        let delta = self.st.energy - before;
        let ok = self.st.checkerboards(&[a, c]) <= corners
            && (delta <= 0.0 || self.rng.gen::<f64>() < (-delta / temp).exp());
        if ok {
            self.st.commit();
        } else {
            self.st.rollback(mark);
            self.labels[a] = la;
            self.labels[c] = lb;
        }
    }
}

/// Relax a foam: chambers start from `chambers` (a labelling of `Ω`), a
/// liquid region of area `liquid` is carved out at the busiest junction,
/// and paired label swaps anneal the film with every chamber's area fixed.
pub fn foam_relax(
    dom: &Domain,
    chambers: &[u32],
    liquid: f64,
    lambda0: f64,
    r0: f64,
    p: &AnnealParams,
) -> Result<FoamResult> {
    p.validate()?;
    let available = dom.volume(&dom.omega_cells);
    if !(liquid >= 0.0) || liquid > available + 0.5 * dom.cell_area() || chambers.len() != dom.n_cells() {
        return Err(Error::VolumeInfeasible { requested: liquid, available });
    }
    let target = ((liquid / dom.cell_area()).round() as usize).min(dom.omega_cells.count());
    let mut labels: Vec<u32> = (0..dom.n_cells())
        .map(|c| if dom.is_omega(c) { chambers[c] } else { UNLABELED })
        .collect();
    if target > 0 {
        let dry = foam_pair(dom, &labels);
        for c in initial_liquid(&dry, dom, target) {
            labels[c] = LIQUID;
        }
    }
    let n_chambers = labels.iter().filter(|&&l| l < LIQUID).map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut volumes = vec![0usize; n_chambers];
    for &l in &labels {
        if l < LIQUID {
            volumes[l as usize] += 1;
        }
    }

    let mut foam = Foam {
        st: State::new(dom, foam_pair(dom, &labels), p.objective),
        labels,
        rng: ChaCha8Rng::seed_from_u64(p.seed),
    };
    let mut best = (foam.st.energy, foam.labels.clone());
    let mut trace = Vec::new();
    for (ti, &t) in p.temperatures().iter().enumerate() {
        let moves = ((p.moves_per_temperature * foam.st.film.len().max(1) as f64) as usize).max(200);
        for _ in 0..moves {
            foam.step(t * dom.h);
        }
        foam.st.resync();
        if foam.st.energy < best.0 {
            best = (foam.st.energy, foam.labels.clone());
        }
        trace.push(TraceRow { step: ti, temperature: t * dom.h, energy: foam.st.energy, volume_error: 0, best: best.0 });
    }
    let labels = best.1;
    let pair = foam_pair(dom, &labels);
    let minimality = lambda_minimality_check(&pair, dom, lambda0, r0, CHECK_BALLS, p.seed);
    let result = MinimizeResult {
        energy: energy_bk(&pair, &dom.omega_cells, dom),
        objective: best.0,
        trace,
        certificate: None,
        volume_error: pair.e.count() as i64 - target as i64,
        pair,
        seed: p.seed,
    };
    Ok(FoamResult { result, labels, volumes, minimality })
}
