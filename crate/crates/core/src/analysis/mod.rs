//! Geometry of discrete minimizers: chains, fits, Plateau-law checks and
//! refinement studies.

mod chains;
mod fit;

use serde::Serialize;

use crate::error::Result;
use crate::geom::{dist, signed_area, winding_number, Point};
use crate::grid::{Domain, FacetSet, FilmPair};
use crate::optimizer::{minimize_bulk, minimize_plateau, AnnealParams};
use crate::spanning::SpanningClass;

pub use chains::{
    corrected_energy, corrected_length, extract_chains, smoothed_points, ChainSet, EndKind, InterfaceChain,
    Multiplicity, Node,
};
pub use fit::{
    fit_and_check, fit_circle, junction_angles, ChainFit, FitReport, JunctionFit, Primitive, TransitionFit,
    MIN_FIT_POINTS,
};

/// Relative spread allowed between the curvatures of multiplicity-one chains.
pub const LAMBDA_SPREAD: f64 = 0.10;

#[derive(Clone, Debug, Serialize)]
pub struct NodeVariation {
    pub node: usize,
    /// Central first differences of the continuum energy for ±h moves in x and y.
    pub first_order: [f64; 2],
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ElReport {
    /// Mean signed curvature of multiplicity-one chains.
    pub lambda: Option<f64>,
    /// `(max − min) / |mean|` of those curvatures.
    pub lambda_spread: Option<f64>,
    /// Whether a single `λ` fits all of them (vacuous when there are none).
    pub single_lambda: bool,
    /// Largest `|κ|·L/2` over multiplicity-two chains; ≤ 1 means straight.
    pub straightness: f64,
    pub straight: bool,
    pub variations: Vec<NodeVariation>,
    pub stationary: bool,
}

/// Continuum model built from the fits: junction and transition nodes move,
/// other chain ends stay put; sheets are weight-2 segments, boundary chains
/// are arcs of the common radius `1/|λ|`.
struct Continuum {
    /// (a, b, weight, bulge sign): bulge 0 for a straight segment,
    /// ±1 for an arc bulging to the left/right of `a → b`.
    edges: Vec<(usize, usize, f64, f64)>,
    radius: f64,
    lambda: f64,
    /// Cycles of nodes bounding `E`.
    cycles: Vec<Vec<usize>>,
}

impl Continuum {
    fn arc(&self, p: Point, q: Point) -> (f64, f64) {
        let r = self.radius;
        let c = dist(p, q).min(2.0 * r);
        let theta = 2.0 * (c / (2.0 * r)).asin();
        (r * theta, 0.5 * r * r * (theta - theta.sin()))
    }

    fn lagrangian(&self, x: &[Point]) -> f64 {
        let mut energy = 0.0;
        for &(a, b, w, bulge) in &self.edges {
            energy += if bulge == 0.0 { w * dist(x[a], x[b]) } else { w * self.arc(x[a], x[b]).0 };
        }
        let mut volume = 0.0;
        for cyc in &self.cycles {
            let poly: Vec<Point> = cyc.iter().map(|&i| x[i]).collect();
            let mut v = signed_area(&poly).abs();
            for k in 0..cyc.len() {
                let (a, b) = (cyc[k], cyc[(k + 1) % cyc.len()]);
                let Some(&(ea, _, _, bulge)) =
                    self.edges.iter().find(|e| e.3 != 0.0 && ((e.0 == a && e.1 == b) || (e.0 == b && e.1 == a)))
                else {
                    continue;
                };
                // bulge point of the arc; arcs bulging into the polygon remove area
                let (p, q) = (x[a], x[b]);
                let m = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
                let t = [q[0] - p[0], q[1] - p[1]];
                let left = if ea == a { bulge } else { -bulge };
                let nrm = [-t[1] * left, t[0] * left];
                let probe = [m[0] + 1e-6 * nrm[0], m[1] + 1e-6 * nrm[1]];
                let seg = self.arc(p, q).1;
                v += if winding_number(&poly, probe) != 0 { -seg } else { seg };
            }
            volume += v;
        }
        energy - self.lambda * volume
    }
}

/// Stationarity of the fitted configuration plus single-`λ` and
/// straight-sheet checks.
pub fn euler_lagrange_check(set: &ChainSet, fit: &FitReport, h: f64) -> ElReport {
    let curv: Vec<f64> = fit
        .chains
        .iter()
        .filter(|c| c.multiplicity == Multiplicity::One)
        .filter_map(|c| c.curvature)
        .collect();
    let (lambda, spread) = if curv.is_empty() {
        (None, None)
    } else {
        let mean = curv.iter().sum::<f64>() / curv.len() as f64;
        let (lo, hi) = curv.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &k| (l.min(k), u.max(k)));
        (Some(mean), Some((hi - lo) / mean.abs()))
    };
    let single_lambda = spread.map_or(true, |s| s <= LAMBDA_SPREAD && curv.iter().all(|k| k.signum() == curv[0].signum()));

    let straightness = fit
        .chains
        .iter()
        .filter(|c| c.multiplicity == Multiplicity::Two)
        .filter_map(|c| c.curvature.map(|k| k * c.corrected_length / 2.0))
        .fold(0.0, f64::max);

    let variations = stationarity(set, fit, lambda.unwrap_or(0.0), h);
    ElReport {
        lambda,
        lambda_spread: spread,
        single_lambda,
        straightness,
        straight: straightness <= 1.0,
        stationary: variations.iter().all(|v| v.pass),
        variations,
    }
}

fn stationarity(set: &ChainSet, fit: &FitReport, lambda: f64, h: f64) -> Vec<NodeVariation> {
    let mut x: Vec<Point> = set.nodes.iter().map(|n| n.point).collect();
    let movable = |i: usize| matches!(set.nodes[i].kind, EndKind::Junction | EndKind::Transition);
    let mut edges = Vec::new();
    for (ci, c) in set.chains.iter().enumerate() {
        let Some([a, b]) = c.ends else { continue };
        if a == b || fit.chains[ci].primitive.is_none() {
            continue;
        }
        match c.multiplicity {
            Multiplicity::Two => edges.push((a, b, 2.0, 0.0)),
            Multiplicity::One => {
                let bulge = match fit.chains[ci].circle {
                    Some((center, _)) if lambda != 0.0 => {
                        let (p, q) = (x[a], x[b]);
                        let t = [q[0] - p[0], q[1] - p[1]];
                        let cside = t[0] * (center[1] - p[1]) - t[1] * (center[0] - p[0]);
                        // an arc bulges away from its centre
                        if cside > 0.0 {
                            -1.0
                        } else {
                            1.0
                        }
                    }
                    _ => 0.0,
                };
                edges.push((a, b, 1.0, bulge));
            }
        }
    }
    let cycles = boundary_cycles(set, &edges);
    let model = Continuum { edges, radius: if lambda != 0.0 { 1.0 / lambda.abs() } else { f64::INFINITY }, lambda, cycles };
    let mut out = Vec::new();
    for i in 0..x.len() {
        if !movable(i) || set.incident(i).is_empty() {
            continue;
        }
        let mut first = [0.0; 2];
        for (axis, f) in first.iter_mut().enumerate() {
            let orig = x[i];
            x[i][axis] = orig[axis] + h;
            let plus = model.lagrangian(&x);
            x[i][axis] = orig[axis] - h;
            let minus = model.lagrangian(&x);
            x[i] = orig;
            *f = (plus - minus) / 2.0;
        }
        let scale: f64 = model
            .edges
            .iter()
            .filter(|e| e.0 == i || e.1 == i)
            .map(|e| e.2 / dist(x[e.0], x[e.1]).max(h))
            .sum();
        let tolerance = 4.0 * h * h * scale;
        out.push(NodeVariation { node: i, first_order: first, tolerance, pass: first.iter().all(|f| f.abs() <= tolerance) });
    }
    out
}

/// Node cycles formed by arcs, each node having exactly two arc ends.
fn boundary_cycles(set: &ChainSet, edges: &[(usize, usize, f64, f64)]) -> Vec<Vec<usize>> {
    let arcs: Vec<(usize, usize)> = edges.iter().filter(|e| e.2 == 1.0).map(|e| (e.0, e.1)).collect();
    let mut used = vec![false; arcs.len()];
    let mut cycles = Vec::new();
    for s in 0..arcs.len() {
        if used[s] {
            continue;
        }
        used[s] = true;
        let start = arcs[s].0;
        let mut cyc = vec![start];
        let mut cur = arcs[s].1;
        let mut ok = true;
        while cur != start {
            cyc.push(cur);
            match (0..arcs.len()).find(|&j| !used[j] && (arcs[j].0 == cur || arcs[j].1 == cur)) {
                Some(j) => {
                    used[j] = true;
                    cur = if arcs[j].0 == cur { arcs[j].1 } else { arcs[j].0 };
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && cyc.len() >= 2 && cyc.iter().all(|&n| n < set.nodes.len()) {
            cycles.push(cyc);
        }
    }
    cycles
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub v: f64,
    pub psi: f64,
    pub two_ell: f64,
    pub gap: f64,
}

/// Corrected energy `Σ m·length` of a pair.
pub fn measured_energy(pair: &FilmPair, dom: &Domain) -> f64 {
    corrected_energy(&extract_chains(pair, dom))
}

/// `Ψ̂_bk(v)` against `2ℓ̂` for each volume, both measured by corrected chain length.
pub fn convergence_study(dom: &Domain, class: &SpanningClass, volumes: &[f64], p: &AnnealParams) -> Result<Vec<ConvergenceRow>> {
    let dry = minimize_plateau(dom, class, p)?;
    let two_ell = measured_energy(&dry.pair, dom);
    let mut rows = Vec::new();
    for &v in volumes {
        let psi = if v == 0.0 { two_ell } else { measured_energy(&minimize_bulk(dom, class, v, p)?.pair, dom) };
        rows.push(ConvergenceRow { v, psi, two_ell, gap: psi - two_ell });
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct WettingReport {
    pub junctions: Vec<Point>,
    pub distances: Vec<f64>,
    /// Largest junction-to-`E` distance; infinite when `E` is empty.
    pub max_distance: f64,
}

/// How far each junction of the dry film lies from the liquid.
pub fn wetting_report(pair: &FilmPair, dry: &FacetSet, dom: &Domain) -> WettingReport {
    let dry_pair = FilmPair { e: dom.empty_cells(), k_extra: dry.clone() };
    let set = extract_chains(&dry_pair, dom);
    let junctions: Vec<Point> = (0..set.nodes.len())
        .filter(|&i| set.nodes[i].kind == EndKind::Junction && !set.incident(i).is_empty())
        .map(|i| set.nodes[i].point)
        .collect();
    let half = dom.h / 2.0;
    let distances: Vec<f64> = junctions
        .iter()
        .map(|p| {
            pair.e
                .iter()
                .map(|c| {
                    let q = dom.cell_center(c);
                    let dx = ((p[0] - q[0]).abs() - half).max(0.0);
                    let dy = ((p[1] - q[1]).abs() - half).max(0.0);
                    dx.hypot(dy)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let max_distance = distances.iter().copied().fold(if junctions.is_empty() { 0.0 } else { f64::NEG_INFINITY }, f64::max);
    WettingReport { junctions, distances, max_distance }
}
