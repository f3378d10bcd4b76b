//! Tubes, slices and the spanning checkers.
//!
//! Two independent tests decide whether a facet set blocks a tube:
//! the slice test (every uncut slice facet separates two components of the
//! body once the slice is added to the cut) and a cover oracle (no body
//! cycle avoiding the cut winds around the core). A global homology test on
//! the whole free region lives in [`homology`].

pub mod homology;
mod tube;

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{signed_area, Point};
use crate::grid::{CellId, CellSet, Domain, FacetSet, FilmPair};
use crate::partition::essential_partition;
use crate::scene::{Orientation, SceneConfig};

pub use homology::HomologyChecker;
pub use tube::{build_tube, Slice, Tube};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanningMode {
    /// `K ∪ E` must block.
    Bulk,
    /// `K` alone must block.
    Bd,
}

/// Index of the first slice whose uncut facets are not all essential
/// boundary, with `passable` cells forming the body that may be connected.
fn first_failing_slice(k: &FacetSet, e: Option<&CellSet>, tube: &Tube, dom: &Domain) -> Option<usize> {
    for (i, slice) in tube.slices.iter().enumerate() {
        let cut = k.union(&slice.facets);
        let p = essential_partition(&cut, &tube.body, dom);
        let bad = slice.facets.iter().any(|f| {
            if k.contains(f) {
                return false;
            }
            let (a, b) = dom.facet_cells(f);
            if let Some(e) = e {
                if e.contains(a) || e.contains(b) {
                    return false;
                }
            }
            p.labels[a] == p.labels[b]
        });
        if bad {
            return Some(i);
        }
    }
    None
}

/// Slice test with `E` ignored.
pub fn is_spanning_bd(k: &FacetSet, tube: &Tube, dom: &Domain) -> bool {
    first_failing_slice(k, None, tube, dom).is_none()
}

/// Slice test restricted to slice facets outside `E`.
pub fn is_spanning_bulk(k: &FacetSet, e: &CellSet, tube: &Tube, dom: &Domain) -> bool {
    first_failing_slice(k, Some(e), tube, dom).is_none()
}

/// A body cycle avoiding `E` and `K` that winds once around the core, if any.
pub fn winding_witness(k: &FacetSet, e: &CellSet, tube: &Tube, dom: &Domain) -> Option<Vec<CellId>> {
    let n = dom.n_cells();
    let mut lift = vec![i64::MIN; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for start in tube.body.iter() {
        if lift[start] != i64::MIN || e.contains(start) {
            continue;
        }
        lift[start] = 0;
        queue.push_back(start);
        while let Some(c) = queue.pop_front() {
            for (f, m) in dom.links(c) {
                if !tube.body.contains(m) || e.contains(m) || k.contains(f) {
                    continue;
                }
                let want = lift[c] + tube.winding_step(c, m);
                if lift[m] == i64::MIN {
                    lift[m] = want;
                    parent[m] = c;
                    queue.push_back(m);
                } else if lift[m] != want {
                    return Some(close_loop(&parent, c, m));
                }
            }
        }
    }
    None
}

/// Tree path c → root reversed, then m → root, joined at the common ancestor.
fn close_loop(parent: &[usize], c: CellId, m: CellId) -> Vec<CellId> {
    let up = |mut x: usize| {
        let mut v = vec![x];
        while parent[x] != usize::MAX {
            x = parent[x];
            v.push(x);
        }
        v
    };
    let (pc, pm) = (up(c), up(m));
    let on_m: std::collections::HashSet<usize> = pm.iter().copied().collect();
    let lca_i = pc.iter().position(|x| on_m.contains(x)).unwrap();
    let lca = pc[lca_i];
    let mut lp: Vec<usize> = pc[..=lca_i].to_vec();
    lp.reverse(); // lca .. c
    let lca_j = pm.iter().position(|&x| x == lca).unwrap();
    lp.extend_from_slice(&pm[..lca_j]); // m .. (child of lca)
    lp
}

/// True iff no body cycle avoiding `E` and `K` winds around the core.
pub fn winding_oracle(k: &FacetSet, e: &CellSet, tube: &Tube, dom: &Domain) -> bool {
    winding_witness(k, e, tube, dom).is_none()
}

#[derive(Clone, Debug)]
pub struct SpanningClass {
    pub loops: Vec<Vec<Point>>,
    pub tubes: Vec<Tube>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TubeVerdict {
    pub id: String,
    pub spanning: bool,
    pub failing_slice: Option<usize>,
    /// Cell-centre polyline of a loop that escapes the cut.
    pub witness: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanningCertificate {
    pub mode: SpanningMode,
    pub spanning: bool,
    pub tubes: Vec<TubeVerdict>,
}

impl SpanningClass {
    pub fn empty() -> Self {
        SpanningClass { loops: Vec::new(), tubes: Vec::new() }
    }

    pub fn from_scene(scene: &SceneConfig, dom: &Domain) -> Result<Self> {
        let mut class = SpanningClass::empty();
        for g in &scene.generator {
            let area = signed_area(&g.vertices);
            let declared = match g.orientation {
                Orientation::Ccw => 1.0,
                Orientation::Cw => -1.0,
            };
            if area * declared <= 0.0 {
                return Err(Error::BadScene(format!("generator {} orientation does not match its vertices", g.id)));
            }
            class.tubes.push(build_tube(&g.id, &g.vertices, g.tube_radius, dom)?);
            class.loops.push(g.vertices.clone());
        }
        Ok(class)
    }

    /// Global blocking test on the whole free region for these generators.
    pub fn homology(&self, dom: &Domain) -> Result<HomologyChecker> {
        HomologyChecker::new(dom, &self.loops)
    }

    pub fn certificate(&self, pair: &FilmPair, mode: SpanningMode, dom: &Domain) -> SpanningCertificate {
        let k = pair.k(dom);
        let none = dom.empty_cells();
        let e = match mode {
            SpanningMode::Bulk => &pair.e,
            SpanningMode::Bd => &none,
        };
        let tubes: Vec<TubeVerdict> = self
            .tubes
            .iter()
            .map(|t| {
                let failing_slice = first_failing_slice(&k, (mode == SpanningMode::Bulk).then_some(e), t, dom);
                let witness = failing_slice.and_then(|_| winding_witness(&k, e, t, dom)).map(|cells| {
                    cells.into_iter().map(|c| dom.cell_center(c)).collect()
                });
                TubeVerdict { id: t.id.clone(), spanning: failing_slice.is_none(), failing_slice, witness }
            })
            .collect();
        SpanningCertificate { mode, spanning: tubes.iter().all(|t| t.spanning), tubes }
    }
}

/// Conjunction of the per-tube slice tests.
pub fn is_spanning(pair: &FilmPair, class: &SpanningClass, mode: SpanningMode, dom: &Domain) -> bool {
    let k = pair.k(dom);
    class.tubes.iter().all(|t| match mode {
        SpanningMode::Bd => is_spanning_bd(&k, t, dom),
        SpanningMode::Bulk => is_spanning_bulk(&k, &pair.e, t, dom),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn disk_scene(h: f64) -> Domain {
        let n = (1.0 / h).round() as usize;
        let wire = (0..n * n)
            .map(|c| {
                let (x, y) = (c % n, c / n);
                let p = [(x as f64 + 0.5) * h - 0.5, (y as f64 + 0.5) * h - 0.5];
                p[0] * p[0] + p[1] * p[1] <= 0.1 * 0.1
            })
            .collect();
        Domain::from_wire(n, n, h, wire).unwrap()
    }

    fn circle(c: Point, r: f64, n: usize) -> Vec<Point> {
        (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [c[0] + r * t.cos(), c[1] + r * t.sin()]
            })
            .collect()
    }

    #[test]
    fn circle_tube_has_many_slices() {
        let dom = disk_scene(1.0 / 64.0);
        let t = build_tube("c", &circle([0.5, 0.5], 0.3, 64), 0.05, &dom).unwrap();
        assert!(t.slices.len() >= 8, "{} slices", t.slices.len());
        for (i, a) in t.slices.iter().enumerate() {
            for b in &t.slices[i + 1..] {
                assert!(a.facets.intersection(&b.facets).is_empty());
            }
        }
        assert!(t.body.intersection(&dom.wire_cells).is_empty());
    }

    #[test]
    fn loop_through_wire_is_rejected() {
        let dom = disk_scene(1.0 / 64.0);
        let err = build_tube("c", &circle([0.5, 0.5], 0.1, 64), 0.03, &dom).unwrap_err();
        assert!(matches!(err, Error::TubeTouchesWire));
    }

    #[test]
    fn figure_eight_is_rejected() {
        let dom = Domain::open_box(64, 64, 1.0 / 64.0).unwrap();
        let pts: Vec<Point> = (0..80)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 80.0;
                [0.5 + 0.3 * t.sin(), 0.5 + 0.3 * t.sin() * t.cos()]
            })
            .collect();
        let err = build_tube("8", &pts, 0.03, &dom).unwrap_err();
        assert!(matches!(err, Error::TubeSelfOverlap), "{err:?}");
    }

    #[test]
    fn radial_cut_blocks_and_gap_leaks() {
        let h = 1.0 / 64.0;
        let dom = disk_scene(h);
        let t = build_tube("c", &circle([0.5, 0.5], 0.3, 64), 0.05, &dom).unwrap();
        // horizontal cut to the right of the disk, from the wire to the box edge
        let y = 31;
        let full: Vec<_> = (0..64)
            .filter_map(|x| dom.facet_between(dom.cell(x, y), dom.cell(x, y + 1)))
            .filter(|&f| dom.is_interior(f))
            .filter(|&f| dom.facet_midpoint(f)[0] > 0.55)
            .collect();
        let k = FacetSet::from_ids(dom.n_facets(), full.iter().copied());
        let none = dom.empty_cells();
        assert!(is_spanning_bd(&k, &t, &dom));
        assert!(winding_oracle(&k, &none, &t, &dom));

        let gap = *full.iter().find(|&&f| (dom.facet_midpoint(f)[0] - 0.8).abs() < h).unwrap();
        let mut leaky = k.clone();
        leaky.remove(gap);
        assert!(!is_spanning_bd(&leaky, &t, &dom));
        let w = winding_witness(&leaky, &none, &t, &dom).unwrap();
        // the witness closes up and passes through the gap
        assert!(w.windows(2).all(|p| dom.facet_between(p[0], p[1]).is_some()));
        assert!(dom.facet_between(w[0], *w.last().unwrap()).is_some());
        let (ga, gb) = dom.facet_cells(gap);
        let through = w.windows(2).chain(std::iter::once(&[*w.last().unwrap(), w[0]][..])).any(|p| {
            (p[0] == ga && p[1] == gb) || (p[0] == gb && p[1] == ga)
        });
        assert!(through);

        assert!(!is_spanning_bd(&dom.empty_facets(), &t, &dom));
    }

    #[test]
    fn filling_band_blocks_without_cut() {
        let dom = disk_scene(1.0 / 64.0);
        let t = build_tube("c", &circle([0.5, 0.5], 0.3, 64), 0.05, &dom).unwrap();
        let band = dom.cells_where(|c| t.body.contains(c) && dom.cell_center(c)[0] > 0.75);
        let none = dom.empty_facets();
        assert!(winding_oracle(&none, &band, &t, &dom));
        let pair = FilmPair::from_parts(&dom, band.clone(), none.clone()).unwrap();
        let k = pair.k(&dom);
        assert!(is_spanning_bulk(&k, &band, &t, &dom));
        let class = SpanningClass { loops: vec![], tubes: vec![t] };
        assert!(is_spanning(&pair, &class, SpanningMode::Bulk, &dom));
        assert!(is_spanning(&FilmPair::empty(&dom), &SpanningClass::empty(), SpanningMode::Bd, &dom));
    }
}
