use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geom::{ClosedPolyline, Point};
use crate::grid::{CellId, CellSet, Domain, FacetId, FacetSet};

/// One transverse cut of a tube.
#[derive(Clone, Debug)]
pub struct Slice {
    /// Arclength of the core loop at which the cut sits.
    pub position: f64,
    pub facets: FacetSet,
}

/// A thickened embedded loop: body cells, transverse slices, and the
/// arclength coordinate that lifts the body to its infinite cyclic cover.
#[derive(Clone, Debug)]
pub struct Tube {
    pub id: String,
    pub core: ClosedPolyline,
    pub radius: f64,
    pub body: CellSet,
    /// Arclength of the closest core point, per box cell (`NaN` off the body).
    pub theta: Vec<f64>,
    pub slices: Vec<Slice>,
}

impl Tube {
    pub fn length(&self) -> f64 {
        self.core.length()
    }

    /// Signed lifted arclength change when stepping from `a` to `b`.
    #[inline]
    pub fn lifted_step(&self, a: CellId, b: CellId) -> f64 {
        let l = self.length();
        let mut d = self.theta[b] - self.theta[a];
        if d > 0.5 * l {
            d -= l;
        } else if d < -0.5 * l {
            d += l;
        }
        d
    }

    /// Deck-transformation index change when stepping from `a` to `b`.
    #[inline]
    pub fn winding_step(&self, a: CellId, b: CellId) -> i64 {
        let l = self.length();
        let d = self.theta[b] - self.theta[a];
        if d < -0.5 * l {
            1
        } else if d > 0.5 * l {
            -1
        } else {
            0
        }
    }

    /// Interior facets with both cells in the body.
    pub fn body_facets<'a>(&'a self, dom: &'a Domain) -> impl Iterator<Item = FacetId> + 'a {
        dom.interior_facets().filter(move |&f| {
            let (a, b) = dom.facet_cells(f);
            self.body.contains(a) && self.body.contains(b)
        })
    }
}

fn cyclic_distance(a: f64, b: f64, l: f64) -> f64 {
    let d = (a - b).rem_euclid(l);
    d.min(l - d)
}

/// Thicken a closed loop into a tube of the given radius.
pub fn build_tube(id: &str, vertices: &[Point], radius: f64, dom: &Domain) -> Result<Tube> {
    if vertices.len() < 3 || !(radius > 0.0) {
        return Err(Error::DegenerateTube("need three vertices and a positive radius".into()));
    }
    let core = ClosedPolyline::new(vertices.to_vec());
    let len = core.length();
    if !(len > 0.0) {
        return Err(Error::DegenerateTube("zero-length loop".into()));
    }
    let h = dom.h;
    let (bw, bh) = (dom.width as f64 * h, dom.height as f64 * h);

    // the loop itself must stay in the free region, away from the box edge
    let samples = ((len / (0.25 * h)).ceil() as usize).max(vertices.len());
    for k in 0..samples {
        let p = core.point_at(len * k as f64 / samples as f64);
        if p[0] < radius || p[1] < radius || p[0] > bw - radius || p[1] > bh - radius {
            return Err(Error::TubeTouchesWire);
        }
        match dom.locate(p) {
            Some(c) if dom.is_omega(c) => {}
            _ => return Err(Error::TubeTouchesWire),
        }
    }

    let (mut xmin, mut ymin, mut xmax, mut ymax) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for v in vertices {
        xmin = xmin.min(v[0]);
        ymin = ymin.min(v[1]);
        xmax = xmax.max(v[0]);
        ymax = ymax.max(v[1]);
    }
    let to_ix = |v: f64, n: usize| ((v / h).floor().max(0.0) as usize).min(n - 1);
    let (x0, x1) = (to_ix(xmin - radius, dom.width), to_ix(xmax + radius, dom.width));
    let (y0, y1) = (to_ix(ymin - radius, dom.height), to_ix(ymax + radius, dom.height));

    let mut body = dom.empty_cells();
    let mut theta = vec![f64::NAN; dom.n_cells()];
    let overlap_gap = std::f64::consts::PI * radius + 2.0 * h;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let c = dom.cell(x, y);
            let p = dom.cell_center(c);
            let (d, s) = core.project(p);
            if d > radius {
                continue;
            }
            if !dom.is_omega(c) {
                return Err(Error::TubeTouchesWire);
            }
            // a second, far-away stretch of the loop within reach means the
            // thickened loop is not embedded
            for i in 0..core.segments() {
                let (a, b) = core.segment(i);
                let t = crate::geom::segment_param(p, a, b);
                let q = crate::geom::lerp(a, b, t);
                if crate::geom::dist(p, q) <= radius {
                    let si = core.cum[i] + t * (core.cum[i + 1] - core.cum[i]);
                    if cyclic_distance(si, s, len) > overlap_gap {
                        return Err(Error::TubeSelfOverlap);
                    }
                }
            }
            body.insert(c);
            theta[c] = s;
        }
    }
    if body.is_empty() {
        return Err(Error::DegenerateTube("no cell centre within the tube radius".into()));
    }

    let mut tube = Tube { id: id.to_string(), core, radius, body, theta, slices: Vec::new() };

    for f in tube.body_facets(dom).collect::<Vec<_>>() {
        let (a, b) = dom.facet_cells(f);
        if tube.lifted_step(a, b).abs() > overlap_gap {
            return Err(Error::TubeSelfOverlap);
        }
    }
    check_cover(&tube, dom)?;
    tube.slices = build_slices(&tube, dom);
    if tube.slices.is_empty() {
        return Err(Error::DegenerateTube("no slice survived pruning".into()));
    }
    Ok(tube)
}

/// The body must be connected and its cyclic cover must carry a free
/// deck action, i.e. some body cycle winds exactly once.
fn check_cover(tube: &Tube, dom: &Domain) -> Result<()> {
    let start = tube.body.iter().next().unwrap();
    let mut lift = vec![i64::MIN; dom.n_cells()];
    let mut queue = VecDeque::from([start]);
    lift[start] = 0;
    let mut seen = 1;
    let mut windings = Vec::new();
    while let Some(c) = queue.pop_front() {
        for (_, n) in dom.links(c) {
            if !tube.body.contains(n) {
                continue;
            }
            let want = lift[c] + tube.winding_step(c, n);
            if lift[n] == i64::MIN {
                lift[n] = want;
                seen += 1;
                queue.push_back(n);
            } else if lift[n] != want {
                windings.push((want - lift[n]).abs());
            }
        }
    }
    if seen != tube.body.count() {
        return Err(Error::DegenerateTube("tube body is not connected".into()));
    }
    if windings.is_empty() {
        return Err(Error::DegenerateTube("no body cycle winds around the core".into()));
    }
    if windings.iter().any(|&w| w != 1) {
        return Err(Error::TubeSelfOverlap);
    }
    Ok(())
}

/// Candidate cuts at every core vertex (and subdivisions of long edges),
/// pruned greedily to pairwise disjointness.
fn build_slices(tube: &Tube, dom: &Domain) -> Vec<Slice> {
    let len = tube.length();
    let max_gap = 6.0 * dom.h;
    let mut positions = Vec::new();
    for i in 0..tube.core.segments() {
        let (s0, s1) = (tube.core.cum[i], tube.core.cum[i + 1]);
        let parts = ((s1 - s0) / max_gap).ceil().max(1.0) as usize;
        for k in 0..parts {
            positions.push(s0 + (s1 - s0) * k as f64 / parts as f64);
        }
    }
    positions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    positions.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut members: Vec<Vec<FacetId>> = vec![Vec::new(); positions.len()];
    for f in tube.body_facets(dom) {
        let (a, b) = dom.facet_cells(f);
        let ta = tube.theta[a];
        let tb = ta + tube.lifted_step(a, b);
        let (lo, hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
        if lo == hi {
            continue;
        }
        // positions s with lo < s + kL <= hi for some integer k
        let k_lo = ((lo - len) / len).floor() as i64;
        let k_hi = (hi / len).ceil() as i64;
        for k in k_lo..=k_hi {
            let shift = k as f64 * len;
            let from = lo - shift;
            let to = hi - shift;
            let start = positions.partition_point(|&p| p <= from);
            for (idx, &p) in positions.iter().enumerate().skip(start) {
                if p > to {
                    break;
                }
                members[idx].push(f);
            }
        }
    }

    let mut used = dom.empty_facets();
    let mut slices = Vec::new();
    for (idx, facets) in members.into_iter().enumerate() {
        if facets.is_empty() || facets.iter().any(|&f| used.contains(f)) {
            continue;
        }
        for &f in &facets {
            used.insert(f);
        }
        slices.push(Slice { position: positions[idx], facets: FacetSet::from_ids(dom.n_facets(), facets) });
    }
    slices
}
