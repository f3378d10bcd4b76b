//! Initial spanning films from geodesic Steiner constructions.
//!
//! Terminals are the bounded wire components plus one "outer" terminal (the
//! box edge together with any wire touching it). Candidate films are unions
//! of shortest paths between terminal pairs and three-terminal Steiner
//! trees, tried in order of total length until one blocks every generator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::grid::{CellId, Domain, FacetId, FacetSet, VertexId};
use crate::spanning::HomologyChecker;

/// Lattice steps of the distance transform (all primitive vectors with
/// coordinates up to 3), giving a near-Euclidean path metric.
fn steps() -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for dx in -3i64..=3 {
        for dy in -3i64..=3 {
            if (dx, dy) != (0, 0) && gcd(dx.abs(), dy.abs()) == 1 {
                out.push((dx, dy));
            }
        }
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Terminal label per lattice vertex (`usize::MAX` for none) and the
/// number of terminals; terminal 0 is the outer one.
fn terminals(dom: &Domain) -> (Vec<usize>, usize) {
    let (w, h) = (dom.width, dom.height);
    let mut comp = vec![usize::MAX; dom.n_cells()];
    let mut n_comp = 1;
    for start in dom.wire_cells.iter() {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut members = vec![start];
        comp[start] = n_comp;
        let mut i = 0;
        let mut outer = false;
        while i < members.len() {
            let c = members[i];
            i += 1;
            let (x, y) = dom.cell_xy(c);
            outer |= x == 0 || y == 0 || x + 1 == w || y + 1 == h;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let n = dom.cell(nx as usize, ny as usize);
                    if dom.wire_cells.contains(n) && comp[n] == usize::MAX {
                        comp[n] = n_comp;
                        members.push(n);
                    }
                }
            }
        }
        if outer {
            for &c in &members {
                comp[c] = 0;
            }
        } else {
            n_comp += 1;
        }
    }
    let mut label = vec![usize::MAX; dom.n_vertices()];
    for v in 0..dom.n_vertices() {
        let (vx, vy) = dom.vertex_xy(v);
        if vx == 0 || vy == 0 || vx == w || vy == h {
            label[v] = 0;
            continue;
        }
        for c in dom.vertex_cells(v) {
            if dom.wire_cells.contains(c) {
                label[v] = comp[c];
            }
        }
    }
    (label, n_comp)
}

struct Geodesics<'a> {
    dom: &'a Domain,
    steps: Vec<(i64, i64)>,
    /// Vertex strictly inside the free region (all four cells free).
    open: Vec<bool>,
}

#[derive(PartialEq)]
struct Item(f64, VertexId);
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap().then(other.1.cmp(&self.1))
    }
}

impl<'a> Geodesics<'a> {
    fn new(dom: &'a Domain) -> Self {
        let open = (0..dom.n_vertices())
            .map(|v| {
                let (vx, vy) = dom.vertex_xy(v);
                vx > 0
                    && vy > 0
                    && vx < dom.width
                    && vy < dom.height
                    && dom.vertex_cells(v).all(|c| dom.is_omega(c))
            })
            .collect();
        Geodesics { dom, steps: steps(), open }
    }

    /// Straight segment between two vertices stays in the free region.
    fn clear(&self, p: (i64, i64), q: (i64, i64)) -> bool {
        let n = 4 * ((q.0 - p.0).abs().max((q.1 - p.1).abs())).max(1);
        for k in 1..n {
            let t = k as f64 / n as f64;
            let x = p.0 as f64 + t * (q.0 - p.0) as f64;
            let y = p.1 as f64 + t * (q.1 - p.1) as f64;
            // all cells touching the sample point must be free
            let (fx, fy) = (x.floor() as i64, y.floor() as i64);
            let xs = if x == fx as f64 { vec![fx - 1, fx] } else { vec![fx] };
            let ys = if y == fy as f64 { vec![fy - 1, fy] } else { vec![fy] };
            for &cx in &xs {
                for &cy in &ys {
                    if cx < 0 || cy < 0 || cx >= self.dom.width as i64 || cy >= self.dom.height as i64 {
                        return false;
                    }
                    if !self.dom.is_omega(self.dom.cell(cx as usize, cy as usize)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Multi-source Dijkstra from the vertices of one terminal.
    fn distances(&self, sources: &[VertexId]) -> (Vec<f64>, Vec<u32>) {
        let dom = self.dom;
        let nv = dom.n_vertices();
        let mut dist = vec![f64::INFINITY; nv];
        let mut prev = vec![u32::MAX; nv];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Item(0.0, s));
        }
        let (w, h) = (dom.width as i64, dom.height as i64);
        while let Some(Item(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            // only open vertices and sources propagate
            if !self.open[v] && d > 0.0 {
                continue;
            }
            let (vx, vy) = dom.vertex_xy(v);
            let p = (vx as i64, vy as i64);
            for &(dx, dy) in &self.steps {
                let q = (p.0 + dx, p.1 + dy);
                if q.0 < 0 || q.1 < 0 || q.0 > w || q.1 > h {
                    continue;
                }
                let u = dom.vertex(q.0 as usize, q.1 as usize);
                let nd = d + dom.h * ((dx * dx + dy * dy) as f64).sqrt();
                if nd < dist[u] && self.clear(p, q) {
                    dist[u] = nd;
                    prev[u] = v as u32;
                    heap.push(Item(nd, u));
                }
            }
        }
        (dist, prev)
    }

    fn path(&self, prev: &[u32], mut v: VertexId) -> Vec<VertexId> {
        let mut out = vec![v];
        while prev[v] != u32::MAX {
            v = prev[v] as usize;
            out.push(v);
        }
        out
    }

    /// Shortcut a vertex path to maximal straight segments.
    fn pull(&self, path: &[VertexId]) -> Vec<VertexId> {
        let xy = |v: VertexId| {
            let (x, y) = self.dom.vertex_xy(v);
            (x as i64, y as i64)
        };
        let mut out = vec![path[0]];
        let mut i = 0;
        while i + 1 < path.len() {
            let mut j = path.len() - 1;
            while j > i + 1 && !self.clear(xy(path[i]), xy(path[j])) {
                j -= 1;
            }
            out.push(path[j]);
            i = j;
        }
        out
    }

    /// Lattice-edge staircase along straight segments, as interior facets.
    fn rasterize(&self, corners: &[VertexId], out: &mut FacetSet) {
        let dom = self.dom;
        for pair in corners.windows(2) {
            let (x0, y0) = dom.vertex_xy(pair[0]);
            let (x1, y1) = dom.vertex_xy(pair[1]);
            let (dx, dy) = (x1 as i64 - x0 as i64, y1 as i64 - y0 as i64);
            let (sx, sy) = (dx.signum(), dy.signum());
            let (nx, ny) = (dx.abs(), dy.abs());
            let (mut i, mut j) = (0i64, 0i64);
            let (mut x, mut y) = (x0 as i64, y0 as i64);
            while i < nx || j < ny {
                let step_x = j >= ny || (i < nx && (2 * i + 1) * ny < (2 * j + 1) * nx);
                let f = if step_x {
                    let xe = if sx > 0 { x } else { x - 1 };
                    i += 1;
                    x += sx;
                    lattice_edge(dom, xe, y, true)
                } else {
                    let ye = if sy > 0 { y } else { y - 1 };
                    j += 1;
                    y += sy;
                    lattice_edge(dom, x, ye, false)
                };
                if let Some(f) = f {
                    out.insert(f);
                }
            }
        }
    }
}

/// Interior facet lying on the lattice edge from vertex `(x, y)` one step
/// along x (`horizontal`) or along y.
fn lattice_edge(dom: &Domain, x: i64, y: i64, horizontal: bool) -> Option<FacetId> {
    let (w, h) = (dom.width as i64, dom.height as i64);
    let (a, b) = if horizontal {
        if y <= 0 || y >= h || x < 0 || x >= w {
            return None;
        }
        (dom.cell(x as usize, (y - 1) as usize), dom.cell(x as usize, y as usize))
    } else {
        if x <= 0 || x >= w || y < 0 || y >= h {
            return None;
        }
        (dom.cell((x - 1) as usize, y as usize), dom.cell(x as usize, y as usize))
    };
    dom.facet_between(a, b).filter(|&f| dom.is_interior(f))
}

/// Half-width (in vertices) of the Steiner refinement search.
const REFINE: usize = 8;

struct Piece {
    facets: FacetSet,
    length: f64,
}

/// Cheapest union of at most three geodesic pieces that blocks all
/// generators, or the union of all pieces if no small union does.
pub(crate) fn steiner_film(dom: &Domain, homology: &mut HomologyChecker) -> Option<FacetSet> {
    let (label, n_term) = terminals(dom);
    if n_term < 2 {
        return None;
    }
    let geo = Geodesics::new(dom);
    let fields: Vec<(Vec<f64>, Vec<u32>)> = (0..n_term)
        .map(|t| {
            let src: Vec<VertexId> = (0..dom.n_vertices()).filter(|&v| label[v] == t).collect();
            geo.distances(&src)
        })
        .collect();

    let mut pieces: Vec<Piece> = Vec::new();
    let build = |branches: &[(usize, VertexId)]| {
        let mut facets = dom.empty_facets();
        let mut length = 0.0;
        for &(t, v) in branches {
            let corners = geo.pull(&geo.path(&fields[t].1, v));
            for c in corners.windows(2) {
                length += crate::geom::dist(dom.vertex_point(c[0]), dom.vertex_point(c[1]));
            }
            geo.rasterize(&corners, &mut facets);
        }
        Piece { facets, length }
    };
    // the lattice metric is slightly anisotropic; move the Steiner vertex to
    // the nearby vertex with the shortest pulled (Euclidean) branches
    let pulled_length = |t: usize, v: VertexId| -> f64 {
        let corners = geo.pull(&geo.path(&fields[t].1, v));
        corners.windows(2).map(|c| crate::geom::dist(dom.vertex_point(c[0]), dom.vertex_point(c[1]))).sum()
    };
    let refine = |ts: &[usize], v0: VertexId| -> VertexId {
        let (x0, y0) = dom.vertex_xy(v0);
        let mut best = (ts.iter().map(|&t| pulled_length(t, v0)).sum::<f64>(), v0);
        for y in y0.saturating_sub(REFINE)..=(y0 + REFINE).min(dom.height) {
            for x in x0.saturating_sub(REFINE)..=(x0 + REFINE).min(dom.width) {
                let v = dom.vertex(x, y);
                if !geo.open[v] || ts.iter().any(|&t| !fields[t].0[v].is_finite()) {
                    continue;
                }
                let len: f64 = ts.iter().map(|&t| pulled_length(t, v)).sum();
                if len < best.0 - 1e-12 || (len <= best.0 + 1e-12 && v < best.1) {
                    best = (len, v);
                }
            }
        }
        best.1
    };
    for i in 0..n_term {
        for j in i + 1..n_term {
            // closest vertex of terminal j to terminal i
            let best = (0..dom.n_vertices())
                .filter(|&v| label[v] == j)
                .min_by(|&a, &b| fields[i].0[a].partial_cmp(&fields[i].0[b]).unwrap().then(a.cmp(&b)));
            if let Some(v) = best.filter(|&v| fields[i].0[v].is_finite()) {
                pieces.push(build(&[(i, v)]));
            }
        }
    }
    for i in 0..n_term {
        for j in i + 1..n_term {
            for k in j + 1..n_term {
                let best = (0..dom.n_vertices())
                    .filter(|&v| geo.open[v])
                    .map(|v| (fields[i].0[v] + fields[j].0[v] + fields[k].0[v], v))
                    .filter(|p| p.0.is_finite())
                    .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                if let Some((_, v)) = best {
                    let v = refine(&[i, j, k], v);
                    pieces.push(build(&[(i, v), (j, v), (k, v)]));
                }
            }
        }
    }

    let mut combos: Vec<(f64, Vec<usize>)> = Vec::new();
    let n = pieces.len();
    for a in 0..n {
        combos.push((pieces[a].length, vec![a]));
        for b in a + 1..n {
            combos.push((pieces[a].length + pieces[b].length, vec![a, b]));
            if n <= 40 {
                for c in b + 1..n {
                    combos.push((pieces[a].length + pieces[b].length + pieces[c].length, vec![a, b, c]));
                }
            }
        }
    }
    combos.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
    let spans = |homology: &mut HomologyChecker, k: &FacetSet| homology.spans(dom, |_| true, |f| k.contains(f));
    for (_, ids) in &combos {
        let mut k = dom.empty_facets();
        for &i in ids {
            k = k.union(&pieces[i].facets);
        }
        if spans(homology, &k) {
            return Some(k);
        }
    }
    let mut all = dom.empty_facets();
    for p in &pieces {
        all = all.union(&p.facets);
    }
    spans(homology, &all).then_some(all)
}

/// The `target` free cells of a Plateau border at `junction`: a region
/// bounded by arcs of one radius, each tangent to two consecutive sheets
/// leaving in directions `dirs` (radians). The border family is homothetic
/// about the junction, so cells are taken in order of the scale at which
/// they enter. `None` when some gap between sheets is not below π.
pub(crate) fn wet_border(dom: &Domain, junction: [f64; 2], dirs: &[f64], target: usize) -> Option<Vec<CellId>> {
    use std::f64::consts::{PI, TAU};
    let mut d: Vec<f64> = dirs.iter().map(|a| a.rem_euclid(TAU)).collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = d.len();
    if k < 3 {
        return None;
    }
    let gaps: Vec<f64> = (0..k).map(|i| if i + 1 < k { d[i + 1] - d[i] } else { d[0] + TAU - d[i] }).collect();
    if gaps.iter().any(|&g| g >= PI - 1e-9) {
        return None;
    }
    // radial extent of the unit-radius border in direction theta
    let extent = |theta: f64| -> f64 {
        let th = theta.rem_euclid(TAU);
        let i = (0..k)
            .find(|&i| {
                let rel = (th - d[i]).rem_euclid(TAU);
                rel < gaps[i] || (rel == 0.0)
            })
            .unwrap_or(0);
        let bis = d[i] + gaps[i] / 2.0;
        let dc = 1.0 / (gaps[i] / 2.0).sin();
        let c = [dc * bis.cos(), dc * bis.sin()];
        let u = [th.cos(), th.sin()];
        let b = u[0] * c[0] + u[1] * c[1];
        let disc = b * b - (dc * dc - 1.0);
        if disc < 0.0 {
            // the ray passes the arc; only happens on the sheets themselves
            1.0 / (gaps[i] / 2.0).tan()
        } else {
            b - disc.sqrt()
        }
    };
    homothetic_cells(dom, junction, target, extent)
}

/// The `target` free cells that enter first as the star-shaped region
/// `{r ≤ s·extent(θ)}` about `centre` grows with `s`.
pub(crate) fn homothetic_cells(
    dom: &Domain,
    centre: [f64; 2],
    target: usize,
    extent: impl Fn(f64) -> f64,
) -> Option<Vec<CellId>> {
    let mut cells: Vec<(f64, CellId)> = dom
        .omega_cells
        .iter()
        .map(|c| {
            let p = dom.cell_center(c);
            let (dx, dy) = (p[0] - centre[0], p[1] - centre[1]);
            let r = dx.hypot(dy);
            let s = if r == 0.0 { 0.0 } else { r / extent(dy.atan2(dx)) };
            (s, c)
        })
        .collect();
    if cells.len() < target {
        return None;
    }
    cells.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    Some(cells.into_iter().take(target).map(|x| x.1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_domain;
    use crate::scene::SceneConfig;
    use crate::spanning::SpanningClass;

    #[test]
    fn two_plate_initial_film_is_the_gap_chord() {
        let scene = SceneConfig::two_plate(0.4, 1.0 / 32.0);
        let dom = build_domain(&scene).unwrap();
        let class = SpanningClass::from_scene(&scene, &dom).unwrap();
        let mut hom = class.homology(&dom).unwrap();
        let k = steiner_film(&dom, &mut hom).unwrap();
        let len = k.count() as f64 * dom.h;
        assert!((len - 0.4).abs() < 0.05, "{len}");
    }

    #[test]
    fn triple_disk_initial_film_is_a_tree() {
        let scene = SceneConfig::triple_disk(3.0, 1.0, 0.15, 1.0 / 32.0);
        let dom = build_domain(&scene).unwrap();
        let class = SpanningClass::from_scene(&scene, &dom).unwrap();
        let mut hom = class.homology(&dom).unwrap();
        let k = steiner_film(&dom, &mut hom).unwrap();
        // a staircase Y of Euclidean length ≈ 1.28 has facet count between 1.28 and 1.28·√2
        let len = k.count() as f64 * dom.h;
        assert!(len > 1.2 && len < 1.9, "{len}");
    }
}
