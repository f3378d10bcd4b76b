use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{extract_chains, fit_and_check};
use crate::energy::{energy_bk, EnergyReport};
use crate::error::{Error, Result};
use crate::grid::{CellId, CellSet, Domain, FacetId, FilmPair};
use crate::spanning::{HomologyChecker, SpanningCertificate, SpanningClass, SpanningMode};

use super::guard::Guard;
use super::init::{steiner_film, wet_border};
use super::params::{AnnealParams, Objective};
use super::state::State;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub temperature: f64,
    pub energy: f64,
    pub volume_error: i64,
    /// Lowest objective seen so far at the target volume.
    pub best: f64,
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub pair: FilmPair,
    /// Exact discrete energy `2|K ∩ E⁽⁰⁾| + |∂*E|`.
    pub energy: EnergyReport,
    /// Value of the annealed objective.
    pub objective: f64,
    pub trace: Vec<TraceRow>,
    pub certificate: Option<SpanningCertificate>,
    /// `|E|` minus the target, in cells.
    pub volume_error: i64,
    pub seed: u64,
}

/// Facet offsets (doubled midpoint coordinates) proposed around a film facet.
const NEAR: [(i64, i64); 13] = [
    (0, 0),
    (2, 0),
    (-2, 0),
    (0, 2),
    (0, -2),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (2, 2),
    (2, -2),
    (-2, 2),
    (-2, -2),
];

pub(crate) struct Chain<'a> {
    pub st: State<'a>,
    guard: Guard,
    rng: ChaCha8Rng,
    target: Option<usize>,
    exact: bool,
    mu: f64,
}

impl<'a> Chain<'a> {
    fn penalty(&self) -> f64 {
        match self.target {
            Some(t) if !self.exact => self.mu * self.st.dom.h * (self.st.volume_cells() as f64 - t as f64).abs(),
            _ => 0.0,
        }
    }

    fn total(&self) -> f64 {
        self.st.energy + self.penalty()
    }

    fn near_facet(&mut self) -> Option<FacetId> {
        let n = self.st.film.len();
        if n == 0 {
            return None;
        }
        let g = self.st.film.get(self.rng.gen_range(0..n));
        let (dx, dy) = NEAR[self.rng.gen_range(0..NEAR.len())];
        let (x2, y2) = self.st.dom.facet_midpoint2(g);
        self.st.dom.facet_at2(x2 + dx, y2 + dy).filter(|&f| self.st.dom.is_interior(f))
    }

    fn exterior(&self, f: FacetId) -> bool {
        let (a, b) = self.st.dom.facet_cells(f);
        !self.st.in_e(a) && !self.st.in_e(b)
    }

    /// Remove `c` from `E`, then drop whichever of its new sheet facets
    /// can go without unblocking a generator.
    fn release(&mut self, c: CellId) {
        self.st.set_e(c, false);
        let links: Vec<(FacetId, CellId)> = self.st.dom.links(c).collect();
        for (f, n) in links {
            if self.st.in_e(n) || !self.st.pair.k_extra.contains(f) {
                continue;
            }
            let mark = self.st.checkpoint();
            self.st.set_extra(f, false);
            if !self.guard.opening_is_safe(&self.st, f, &[f]) {
                self.st.rollback(mark);
            }
        }
    }

    /// `c` alone, or `c` with a random 4-neighbour of the same phase.
    fn unit(&mut self, c: CellId, size: usize) -> Option<Vec<CellId>> {
        if size == 1 {
            return Some(vec![c]);
        }
        let side = self.st.in_e(c);
        let ns: Vec<CellId> = self.st.dom.links(c).map(|(_, n)| n).filter(|&n| self.st.in_e(n) == side).collect();
        if ns.is_empty() {
            return None;
        }
        Some(vec![c, ns[self.rng.gen_range(0..ns.len())]])
    }

    fn metropolis(&mut self, delta: f64, temp: f64) -> bool {
        delta <= 0.0 || self.rng.gen::<f64>() < (-delta / temp).exp()
    }

    /// One proposal; returns whether it was accepted.
    fn step(&mut self, temp: f64) -> bool {
        let before = self.total();
        let mark = self.st.checkpoint();
        let r: f64 = self.rng.gen();
        let bulk = self.target.is_some();
        let checked;
        if bulk && r < 0.4 {
            let nb = self.st.boundary.len();
            if nb == 0 {
                return false;
            }
            let b = self.st.boundary.get(self.rng.gen_range(0..nb));
            let (p, q) = self.st.dom.facet_cells(b);
            let (inside, outside) = if self.st.in_e(p) { (p, q) } else { (q, p) };
            let thick = self.st.objective == Objective::Isotropic;
            let size = if thick && self.rng.gen_bool(0.5) { 2 } else { 1 };
            let (grow, shrink) = if self.exact {
                let b2 = self.st.boundary.get(self.rng.gen_range(0..nb));
                let (p2, q2) = self.st.dom.facet_cells(b2);
                let inside2 = if self.st.in_e(p2) { p2 } else { q2 };
                match (self.unit(outside, size), self.unit(inside2, size)) {
                    (Some(g), Some(s)) => (g, s),
                    _ => return false,
                }
            } else if self.rng.gen_bool(0.5) {
                let Some(g) = self.unit(outside, size) else { return false };
                (g, Vec::new())
            } else {
                let Some(s) = self.unit(inside, size) else { return false };
                (Vec::new(), s)
            };
            let cells: Vec<CellId> = grow.iter().chain(&shrink).copied().collect();
            let before = if thick { self.st.checkerboards(&cells) } else { 0 };
            for &c in &grow {
                self.st.set_e(c, true);
            }
            for &c in &shrink {
                self.release(c);
            }
            if thick && self.st.checkerboards(&cells) > before {
                self.st.rollback(mark);
                return false;
            }
            checked = true;
        } else if r < 0.75 {
            let Some(f) = self.near_facet() else { return false };
            let (a, b) = self.st.dom.facet_cells(f);
            let c = if self.rng.gen_bool(0.5) { a } else { b };
            if self.st.in_e(c) {
                return false;
            }
            let links: Vec<(FacetId, CellId)> = self.st.dom.links(c).collect();
            for (g, n) in links {
                if !self.st.in_e(n) {
                    let on = !self.st.pair.k_extra.contains(g);
                    self.st.set_extra(g, on);
                }
            }
            checked = false;
        } else {
            let Some(f) = self.near_facet() else { return false };
            if !self.exterior(f) {
                return false;
            }
            let on = !self.st.pair.k_extra.contains(f);
            self.st.set_extra(f, on);
            checked = false;
        }
        let delta = self.total() - before;
        if !self.metropolis(delta, temp) || (!checked && !self.guard.move_is_safe(&self.st, mark)) {
            self.st.rollback(mark);
            return false;
        }
        self.st.commit();
        true
    }

    /// Cell where liquid is seeded when `E` is empty.
    fn seed_cell(&self) -> Option<CellId> {
        junction_point(&self.st.pair, self.st.dom).and_then(|p| nearest_free_cells(self.st.dom, p, 1).first().copied())
    }

    /// Greedily add or remove boundary cells until `|E|` hits the target.
    fn fix_volume(&mut self, target: usize) {
        while self.st.volume_cells() != target {
            let grow = self.st.volume_cells() < target;
            let mut cands: Vec<CellId> = (0..self.st.boundary.len())
                .map(|i| {
                    let (a, b) = self.st.dom.facet_cells(self.st.boundary.get(i));
                    match (self.st.in_e(a), grow) {
                        (true, true) | (false, false) => b,
                        _ => a,
                    }
                })
                .collect();
            cands.sort_unstable();
            cands.dedup();
            if cands.is_empty() {
                match self.seed_cell() {
                    Some(c) if grow => cands.push(c),
                    _ => return,
                }
            }
            let mut best: Option<(f64, CellId)> = None;
            for &c in &cands {
                let mark = self.st.checkpoint();
                let (e0, k0) = (self.st.energy, self.st.checkerboards(&[c]));
                if grow {
                    self.st.set_e(c, true);
                } else {
                    self.release(c);
                }
                // corner contacts only as a last resort
                let d = self.st.energy - e0 + if self.st.checkerboards(&[c]) > k0 { 1e3 } else { 0.0 };
                self.st.rollback(mark);
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, c));
                }
            }
            let (_, c) = best.unwrap();
            if grow {
                self.st.set_e(c, true);
            } else {
                self.release(c);
            }
            self.st.commit();
        }
    }

    /// Remove every sheet facet whose removal keeps all generators blocked,
    /// in increasing facet order.
    fn prune(&mut self) {
        let mut ids: Vec<FacetId> = self.st.pair.k_extra.iter().collect();
        ids.sort_unstable();
        for f in ids {
            let mark = self.st.checkpoint();
            self.st.set_extra(f, false);
            if self.guard.opening_is_safe(&self.st, f, &[f]) || self.guard.spans(&self.st) {
                self.st.commit();
            } else {
                self.st.rollback(mark);
            }
        }
        self.st.commit();
        self.st.resync();
    }

    /// Remember the current state if it is at the target volume and beats `best`.
    fn keep_best(&self, best: &mut Option<(f64, FilmPair)>) {
        if self.volume_error() == 0 && best.as_ref().map_or(true, |b| self.st.energy < b.0) {
            *best = Some((self.st.energy, self.st.pair.clone()));
        }
    }

    fn run(&mut self, p: &AnnealParams) -> Vec<TraceRow> {
        self.prune();
        let mut best = None;
        self.keep_best(&mut best);
        let temps = p.temperatures();
        let n_t = temps.len();
        let exact_from = match self.target {
            Some(_) if p.exact_swap => (2 * n_t) / 3,
            _ => n_t,
        };
        let h = self.st.dom.h;
        let mut trace = Vec::with_capacity(n_t);
        for (ti, &t) in temps.iter().enumerate() {
            if let Some(target) = self.target {
                if ti == exact_from {
                    self.fix_volume(target);
                    self.exact = true;
                }
                let frac = if exact_from > 1 { ti as f64 / (exact_from - 1) as f64 } else { 1.0 };
                self.mu = if p.penalty_initial > 0.0 {
                    p.penalty_initial * (p.penalty_final / p.penalty_initial).powf(frac.min(1.0))
                } else {
                    p.penalty_final * frac.min(1.0)
                };
            }
            let moves = ((p.moves_per_temperature * self.st.film.len().max(1) as f64) as usize).max(200);
            for _ in 0..moves {
                self.step(t * h);
            }
            self.st.resync();
            self.keep_best(&mut best);
            trace.push(TraceRow {
                step: ti,
                temperature: t * h,
                energy: self.st.energy,
                volume_error: self.volume_error(),
                best: best.as_ref().map_or(f64::INFINITY, |b| b.0),
            });
        }
        if let (Some(target), true) = (self.target, p.exact_swap) {
            self.fix_volume(target);
            self.st.resync();
        }
        self.keep_best(&mut best);
        if let Some((e, pair)) = best {
            if e < self.st.energy {
                self.st = State::new(self.st.dom, pair, p.objective);
            }
        }
        self.prune();
        trace
    }

    fn volume_error(&self) -> i64 {
        self.target.map_or(0, |t| self.st.volume_cells() as i64 - t as i64)
    }
}

/// Highest-degree lattice vertex of `K` (ties to the lowest id), as a point.
pub(crate) fn junction_point(pair: &FilmPair, dom: &Domain) -> Option<[f64; 2]> {
    let k = pair.k(dom);
    let mut best: Option<(usize, usize)> = None;
    for f in k.iter() {
        let (u, v) = dom.facet_vertices(f);
        for w in [u, v] {
            let deg = dom.vertex_facets(w).filter(|&g| k.contains(g)).count();
            if best.map_or(true, |(bd, bv)| deg > bd || (deg == bd && w < bv)) {
                best = Some((deg, w));
            }
        }
    }
    best.map(|(_, v)| dom.vertex_point(v))
}

/// The `n` free cells closest to `p` (ties broken by cell id).
pub(crate) fn nearest_free_cells(dom: &Domain, p: [f64; 2], n: usize) -> Vec<CellId> {
    let mut cells: Vec<(f64, CellId)> = dom
        .omega_cells
        .iter()
        .map(|c| {
            let q = dom.cell_center(c);
            ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2), c)
        })
        .collect();
    cells.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    cells.into_iter().take(n).map(|x| x.1).collect()
}

/// Liquid seeded at the busiest junction of the dry film: a Plateau border
/// fitted to the sheet directions when possible, otherwise a ball.
pub(crate) fn initial_liquid(dry: &FilmPair, dom: &Domain, target: usize) -> Vec<CellId> {
    let set = extract_chains(dry, dom);
    let fit = fit_and_check(&set);
    let busiest = fit.junctions.iter().filter(|j| j.chains.len() >= 3).max_by(|a, b| {
        a.chains.len().cmp(&b.chains.len()).then(b.node.cmp(&a.node))
    });
    if let Some(j) = busiest {
        if let Some(cells) = wet_border(dom, j.point, &j.directions, target) {
            return cells;
        }
    }
    let centre = junction_point(dry, dom).unwrap_or_else(|| dom.cell_center(dom.omega_cells.iter().next().unwrap()));
    nearest_free_cells(dom, centre, target)
}

fn target_cells(v: f64, dom: &Domain) -> Result<usize> {
    let available = dom.volume(&dom.omega_cells);
    if !(v >= 0.0) || v > available + 0.5 * dom.cell_area() {
        return Err(Error::VolumeInfeasible { requested: v, available });
    }
    Ok((v / dom.cell_area()).round() as usize)
}

fn finish(dom: &Domain, class: &SpanningClass, chain: &Chain, trace: Vec<TraceRow>, seed: u64) -> MinimizeResult {
    let pair = chain.st.pair.clone();
    let mode = if chain.target.is_some() { SpanningMode::Bulk } else { SpanningMode::Bd };
    MinimizeResult {
        energy: energy_bk(&pair, &dom.omega_cells, dom),
        objective: chain.st.energy,
        certificate: Some(class.certificate(&pair, mode, dom)),
        volume_error: chain.volume_error(),
        pair,
        trace,
        seed,
    }
}

/// Run `restarts` independent chains in parallel and keep the lowest
/// objective, ties going to the earlier seed.
fn best_of(results: Vec<MinimizeResult>) -> MinimizeResult {
    let mut best: Option<MinimizeResult> = None;
    for r in results {
        let better = match &best {
            None => true,
            Some(b) => r.objective < b.objective,
        };
        if better {
            best = Some(r);
        }
    }
    best.unwrap()
}

fn anneal(
    dom: &Domain,
    class: &SpanningClass,
    init: &FilmPair,
    hom: &HomologyChecker,
    target: Option<usize>,
    p: &AnnealParams,
) -> MinimizeResult {
    let runs: Vec<MinimizeResult> = (0..p.restarts as u64)
        .into_par_iter()
        .map(|i| {
            let seed = p.seed.wrapping_add(i);
            let mut chain = Chain {
                st: State::new(dom, init.clone(), p.objective),
                guard: Guard::new(hom.clone(), true, dom),
                rng: ChaCha8Rng::seed_from_u64(seed),
                target,
                exact: false,
                mu: p.penalty_initial,
            };
            let trace = chain.run(p);
            finish(dom, class, &chain, trace, seed)
        })
        .collect();
    best_of(runs)
}

fn initial_film(dom: &Domain, hom: &mut HomologyChecker) -> Result<FilmPair> {
    let k = steiner_film(dom, hom).ok_or(Error::NoInitialSpanning)?;
    FilmPair::from_parts(dom, dom.empty_cells(), k)
}

/// Approximate `ℓ_B`: anneal a spanning facet set with `E = ∅`.
pub fn minimize_plateau(dom: &Domain, class: &SpanningClass, p: &AnnealParams) -> Result<MinimizeResult> {
    p.validate()?;
    let mut hom = class.homology(dom)?;
    let init = initial_film(dom, &mut hom)?;
    Ok(anneal(dom, class, &init, &hom, None, p))
}

/// Approximate `Ψ_bk(v)`: anneal `(K, E)` with `|E| = v` and `K ∪ E` spanning.
pub fn minimize_bulk(dom: &Domain, class: &SpanningClass, v: f64, p: &AnnealParams) -> Result<MinimizeResult> {
    p.validate()?;
    let target = target_cells(v, dom)?;
    let mut hom = class.homology(dom)?;
    let dry = initial_film(dom, &mut hom)?;
    if target == 0 {
        return Ok(anneal(dom, class, &dry, &hom, None, p));
    }
    let e = CellSet::from_ids(dom.n_cells(), initial_liquid(&dry, dom, target));
    let mut init = FilmPair::from_parts(dom, e, dry.k_extra.clone())?;
    init.normalize(dom);
    Ok(anneal(dom, class, &init, &hom, Some(target), p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{corrected_energy, extract_chains};
    use crate::grid::build_domain;
    use crate::scene::SceneConfig;

    fn quick() -> AnnealParams {
        AnnealParams { t_final: 0.05, cooling: 0.7, moves_per_temperature: 5.0, ..AnnealParams::default() }
    }

    #[test]
    fn two_plate_film_is_the_gap_chord() {
        let scene = SceneConfig::two_plate(0.5, 1.0 / 32.0);
        let dom = build_domain(&scene).unwrap();
        let class = SpanningClass::from_scene(&scene, &dom).unwrap();
        let r = minimize_plateau(&dom, &class, &quick()).unwrap();
        assert!(r.certificate.is_some());
        let len = corrected_energy(&extract_chains(&r.pair, &dom)) / 2.0;
        assert!((len - 0.5).abs() < 0.03 * 0.5, "{len}");
    }

    #[test]
    fn bulk_run_hits_the_volume() {
        let scene = SceneConfig::triple_disk(3.0, 1.0, 0.15, 1.0 / 32.0);
        let dom = build_domain(&scene).unwrap();
        let class = SpanningClass::from_scene(&scene, &dom).unwrap();
        let r = minimize_bulk(&dom, &class, 0.02, &quick()).unwrap();
        assert_eq!(r.volume_error, 0);
        assert!(r.certificate.is_some());
        assert!(r.objective <= r.trace[0].energy + 1e-9);
    }
}
