//! Relaxed film energies and the collapsed-sheet representation identity.
//!
//! All lengths are in box units: one facet weighs `h`.

use serde::Serialize;

use crate::grid::{density_class_unchecked, CellSet, Domain, FacetDensityClass, FacetId, FilmPair};
use crate::partition::{essential_partition, UNLABELED};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    /// Length of `∂*E` in the region.
    pub perimeter_term: f64,
    /// Length of the multiplicity-two part in the region.
    pub collapsed_term: f64,
    pub total: f64,
    pub region: String,
}

impl EnergyReport {
    fn new(perimeter_facets: usize, collapsed_facets: usize, region: &CellSet, dom: &Domain) -> Self {
        let p = perimeter_facets as f64 * dom.h;
        let c = collapsed_facets as f64 * dom.h;
        EnergyReport {
            perimeter_term: p,
            collapsed_term: c,
            total: p + 2.0 * c,
            region: format!("{} cells", region.count()),
        }
    }
}

/// Facets with both cells in `region`.
fn region_facets<'a>(region: &'a CellSet, dom: &'a Domain) -> impl Iterator<Item = FacetId> + 'a {
    dom.interior_facets().filter(move |&f| {
        let (a, b) = dom.facet_cells(f);
        region.contains(a) && region.contains(b)
    })
}

/// `2·|K ∩ E⁽⁰⁾| + |∂*E|` inside `region`.
pub fn energy_bk(pair: &FilmPair, region: &CellSet, dom: &Domain) -> EnergyReport {
    let (mut per, mut col) = (0, 0);
    for f in region_facets(region, dom) {
        match density_class_unchecked(&pair.e, f, dom) {
            FacetDensityClass::ReducedBoundary => per += 1,
            FacetDensityClass::ExteriorOfE if pair.k_extra.contains(f) => col += 1,
            _ => {}
        }
    }
    EnergyReport::new(per, col, region, dom)
}

/// `2·|K ∖ ∂*E| + |∂*E|` inside `region`.
pub fn energy_bd(pair: &FilmPair, region: &CellSet, dom: &Domain) -> EnergyReport {
    let (mut per, mut col) = (0, 0);
    for f in region_facets(region, dom) {
        match density_class_unchecked(&pair.e, f, dom) {
            FacetDensityClass::ReducedBoundary => per += 1,
            _ if pair.k_extra.contains(f) => col += 1,
            _ => {}
        }
    }
    EnergyReport::new(per, col, region, dom)
}

/// Breakdown of the representation identity on a region `U`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Representation {
    pub energy: f64,
    /// `Σ_i P(U_i; U)` over the components of `U ∖ E` cut by `K`.
    pub partition_perimeter: f64,
    /// `2·|(K ∖ K*) ∩ E⁽⁰⁾|` inside `U`.
    pub collapsed_residue: f64,
    pub components: usize,
    pub residual: f64,
}

/// Compare `energy_bk(pair, U)` with the partition-perimeter form
/// `Σ P(U_i; U) + 2|(K ∖ K*) ∩ E⁽⁰⁾ ∩ U|`; the residual is exactly zero.
pub fn representation(pair: &FilmPair, u: &CellSet, dom: &Domain) -> Representation {
    let k = pair.k(dom);
    let free = u.difference(&pair.e);
    let p = essential_partition(&k, &free, dom);
    let h = dom.h;
    let mut boundary_sides = 0usize;
    let mut k_star = dom.empty_facets();
    for f in region_facets(u, dom) {
        let (a, b) = dom.facet_cells(f);
        let (la, lb) = (p.labels[a], p.labels[b]);
        if la != lb {
            // each labelled side sees a boundary of its own component
            boundary_sides += (la != UNLABELED) as usize + (lb != UNLABELED) as usize;
            k_star.insert(f);
        }
    }
    let mut residue = 0usize;
    for f in region_facets(u, dom) {
        if k.contains(f) && !k_star.contains(f) && density_class_unchecked(&pair.e, f, dom) == FacetDensityClass::ExteriorOfE {
            residue += 1;
        }
    }
    let energy = energy_bk(pair, u, dom).total;
    let partition_perimeter = boundary_sides as f64 * h;
    let collapsed_residue = 2.0 * residue as f64 * h;
    Representation {
        energy,
        partition_perimeter,
        collapsed_residue,
        components: p.count(),
        residual: (energy - (partition_perimeter + collapsed_residue)).abs(),
    }
}

pub fn representation_check(pair: &FilmPair, u: &CellSet, dom: &Domain) -> f64 {
    representation(pair, u, dom).residual
}

/// Multiplicity of a facet in the energy: 1 on `∂*E`, 2 on the collapsed
/// part, 0 elsewhere.
pub fn multiplicity(pair: &FilmPair, f: FacetId, dom: &Domain) -> u8 {
    match density_class_unchecked(&pair.e, f, dom) {
        FacetDensityClass::ReducedBoundary => 1,
        FacetDensityClass::ExteriorOfE if pair.k_extra.contains(f) => 2,
        _ => 0,
    }
}

/// One Crofton direction: lattice step, length weight, the two cells the
/// centre-to-centre segment passes through on the way (if any), and the
/// cell paths along the segment used to count sheet crossings.
#[derive(Clone, Debug)]
pub(crate) struct CroftonDir {
    pub dx: i64,
    pub dy: i64,
    pub w: f64,
    pub mids: Option<[(i64, i64); 2]>,
    pub paths: Vec<Vec<(i64, i64)>>,
}

/// Cauchy–Crofton stencil: the 8 primitive lattice directions of
/// Chebyshev radius 2 (one per opposite pair) with their length weights.
/// A straight boundary of any orientation is measured within 1.5%.
pub(crate) fn crofton_stencil(h: f64) -> Vec<CroftonDir> {
    let mut dirs: Vec<(f64, i64, i64)> = Vec::new();
    for a in -2i64..=2 {
        for b in -2i64..=2 {
            let phi = (b as f64).atan2(a as f64);
            if (a, b) != (0, 0) && gcd(a.abs(), b.abs()) == 1 && (0.0..std::f64::consts::PI).contains(&phi) {
                dirs.push((phi, a, b));
            }
        }
    }
    dirs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let n = dirs.len();
    let pi = std::f64::consts::PI;
    (0..n)
        .map(|k| {
            let prev = if k == 0 { dirs[n - 1].0 - pi } else { dirs[k - 1].0 };
            let next = if k == n - 1 { dirs[0].0 + pi } else { dirs[k + 1].0 };
            let (_, a, b) = dirs[k];
            let len = ((a * a + b * b) as f64).sqrt();
            let mids = match (a.abs(), b.abs()) {
                (2, _) => Some([(a.signum(), 0), (a.signum(), b)]),
                (_, 2) => Some([(0, b.signum()), (a, b.signum())]),
                (1, 1) => Some([(a, 0), (0, b)]),
                _ => None,
            };
            let paths = match mids {
                // the diagonal segment passes through a lattice vertex: both ways round
                Some([m1, m2]) if a.abs() == 1 && b.abs() == 1 => vec![vec![(0, 0), m1, (a, b)], vec![(0, 0), m2, (a, b)]],
                Some([m1, m2]) => vec![vec![(0, 0), m1, m2, (a, b)]],
                None => vec![vec![(0, 0), (a, b)]],
            };
            CroftonDir { dx: a, dy: b, w: 0.25 * (next - prev) * h / len, mids, paths }
        })
        .collect()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Cell reached from `c` by the lattice step `(dx, dy)`, if it lies in `Ω`.
#[inline]
pub(crate) fn omega_step(dom: &Domain, c: usize, dx: i64, dy: i64) -> Option<usize> {
    let (x, y) = dom.cell_xy(c);
    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
    if nx < 0 || ny < 0 || nx >= dom.width as i64 || ny >= dom.height as i64 {
        return None;
    }
    let n = dom.cell(nx as usize, ny as usize);
    dom.is_omega(n).then_some(n)
}

/// Crofton cost of the stencil pair `(a, a + d)`.
///
/// The `E` part is `w` if `E` separates the ends, or `2w` if the ends agree
/// but the segment runs through a one-cell sliver of the other phase, which
/// the ends alone would miss. The sheet part is `2w` times the parity of
/// sheet facets crossed along the cell path of the segment: locally a sheet
/// separates its two sides, so this is the same estimate applied to them.
#[inline]
pub(crate) fn crofton_pair(
    dom: &Domain,
    a: usize,
    d: &CroftonDir,
    in_e: impl Fn(usize) -> bool,
    sheet: impl Fn(FacetId) -> bool,
) -> f64 {
    let Some(b) = omega_step(dom, a, d.dx, d.dy) else { return 0.0 };
    let (ea, eb) = (in_e(a), in_e(b));
    let mut cost = 0.0;
    if ea != eb {
        cost += d.w;
    } else if let Some([m1, m2]) = d.mids {
        let other = |m: (i64, i64)| omega_step(dom, a, m.0, m.1).map_or(false, |c| in_e(c) != ea);
        if other(m1) && other(m2) {
            cost += 2.0 * d.w;
        }
    }
    let mut odd = 0usize;
    for path in &d.paths {
        let mut parity = false;
        for step in path.windows(2) {
            let p = omega_step(dom, a, step[0].0, step[0].1);
            let q = omega_step(dom, a, step[1].0, step[1].1);
            if let (Some(p), Some(q)) = (p, q) {
                if dom.facet_between(p, q).map_or(false, &sheet) {
                    parity = !parity;
                }
            }
        }
        odd += parity as usize;
    }
    cost + 2.0 * d.w * odd as f64 / d.paths.len() as f64
}

/// Start cells of the stencil pairs whose `E` part depends on cell `c`.
pub(crate) fn crofton_pairs_touching_cell(dom: &Domain, c: usize, d: &CroftonDir, out: &mut Vec<usize>) {
    let mut offs = vec![(0, 0), (-d.dx, -d.dy)];
    if let Some([m1, m2]) = d.mids {
        offs.push((-m1.0, -m1.1));
        offs.push((-m2.0, -m2.1));
    }
    out.extend(offs.into_iter().filter_map(|(x, y)| omega_step(dom, c, x, y)));
}

/// Start cells of the stencil pairs whose cell path crosses facet `f`.
pub(crate) fn crofton_pairs_touching_facet(dom: &Domain, f: FacetId, d: &CroftonDir, out: &mut Vec<usize>) {
    let (c1, c2) = dom.facet_cells(f);
    let (x1, y1) = dom.cell_xy(c1);
    let (x2, y2) = dom.cell_xy(c2);
    let step = (x2 as i64 - x1 as i64, y2 as i64 - y1 as i64);
    for path in &d.paths {
        for s in path.windows(2) {
            let ds = (s[1].0 - s[0].0, s[1].1 - s[0].1);
            let from = if ds == step {
                c1
            } else if ds == (-step.0, -step.1) {
                c2
            } else {
                continue;
            };
            out.extend(omega_step(dom, from, -s[0].0, -s[0].1));
        }
    }
}

/// Crofton estimate of `2·|K ∩ E⁽⁰⁾| + |∂*E|`, a near-isotropic
/// alternative to the facet count used as an annealing objective.
pub fn isotropic_energy(pair: &FilmPair, dom: &Domain) -> f64 {
    let stencil = crofton_stencil(dom.h);
    let mut total = 0.0;
    for a in dom.omega_cells.iter() {
        for d in &stencil {
            total += crofton_pair(dom, a, d, |c| pair.e.contains(c), |f| multiplicity(pair, f, dom) == 2);
        }
    }
    total
}
