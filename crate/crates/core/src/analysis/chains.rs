//! Decomposition of `K` into simple chains of facets.

use serde::Serialize;

use crate::geom::{dist, Point};
use crate::grid::{density_class_unchecked, Domain, FacetDensityClass, FacetId, FilmPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplicity {
    /// Part of `∂*E`.
    One,
    /// Collapsed sheet in `E⁽⁰⁾`.
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EndKind {
    /// Three or more chains of one multiplicity meet.
    Junction,
    /// Multiplicity changes.
    Transition,
    Wire,
    Open,
}

/// Meeting point of chain ends; nearby lattice vertices are merged.
#[derive(Clone, Debug, Serialize)]
pub struct Node {
    pub point: Point,
    pub kind: EndKind,
    pub vertices: Vec<usize>,
    /// Facets of short connectors absorbed into the node, with their multiplicity (1 or 2).
    pub core: Vec<(FacetId, u8)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InterfaceChain {
    /// Facet midpoints in order.
    pub points: Vec<Point>,
    #[serde(skip)]
    pub facets: Vec<FacetId>,
    pub multiplicity: Multiplicity,
    pub closed: bool,
    /// Node indices of the two ends (absent for closed chains).
    pub ends: Option<[usize; 2]>,
    /// For multiplicity one: centre of the `E` cell beside each facet.
    #[serde(skip)]
    pub e_side: Vec<Point>,
    pub h: f64,
}

impl InterfaceChain {
    pub fn facet_length(&self) -> f64 {
        self.facets.len() as f64 * self.h
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainSet {
    pub chains: Vec<InterfaceChain>,
    pub nodes: Vec<Node>,
    pub h: f64,
}

impl ChainSet {
    /// Indices of chains ending at `node`, with which end (0 or 1) touches it.
    pub fn incident(&self, node: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, c) in self.chains.iter().enumerate() {
            if let Some(ends) = c.ends {
                for (j, &e) in ends.iter().enumerate() {
                    if e == node {
                        out.push((i, j));
                    }
                }
            }
        }
        out
    }

    pub fn count(&self, m: Multiplicity) -> usize {
        self.chains.iter().filter(|c| c.multiplicity == m).count()
    }

    /// Number of nodes of a kind that some chain ends at.
    pub fn nodes_of(&self, kind: EndKind) -> usize {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].kind == kind && !self.incident(i).is_empty()).count()
    }
}

/// Chains shorter than this between two junction-like nodes are treated as
/// part of a single discrete junction.
const ABSORB: usize = 3;

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Split `K` at junctions, wire contacts, open ends and multiplicity changes.
pub fn extract_chains(pair: &FilmPair, dom: &Domain) -> ChainSet {
    let k = pair.k(dom);
    let mult = |f: FacetId| match density_class_unchecked(&pair.e, f, dom) {
        FacetDensityClass::ReducedBoundary => Multiplicity::One,
        _ => Multiplicity::Two,
    };
    let incident = |v: usize| -> Vec<FacetId> { dom.vertex_facets(v).filter(|&f| k.contains(f)).collect() };
    let kind_of = |v: usize| -> Option<EndKind> {
        let inc = incident(v);
        let mixed = inc.iter().any(|&f| mult(f) != mult(inc[0]));
        if mixed {
            Some(EndKind::Transition)
        } else if dom.vertex_on_wire(v) {
            Some(EndKind::Wire)
        } else if inc.len() >= 3 {
            Some(EndKind::Junction)
        } else if inc.len() == 1 {
            Some(EndKind::Open)
        } else {
            None
        }
    };

    let mut ids: Vec<FacetId> = k.iter().collect();
    ids.sort_unstable();
    let mut seen = dom.empty_facets();
    struct Raw {
        facets: Vec<FacetId>,
        closed: bool,
        ends: [usize; 2],
    }
    let mut raw: Vec<Raw> = Vec::new();
    for &f0 in &ids {
        if seen.contains(f0) {
            continue;
        }
        seen.insert(f0);
        let (u0, v0) = dom.facet_vertices(f0);
        // walk forward from v0, then backward from u0
        let walk = |start: usize, from: FacetId, seen: &mut crate::grid::FacetSet| -> (Vec<FacetId>, usize, bool) {
            let mut out = Vec::new();
            let (mut v, mut prev) = (start, from);
            loop {
                if kind_of(v).is_some() {
                    return (out, v, false);
                }
                let next = incident(v).into_iter().find(|&g| g != prev).unwrap();
                if next == f0 {
                    return (out, v, true);
                }
                seen.insert(next);
                out.push(next);
                let (a, b) = dom.facet_vertices(next);
                v = if a == v { b } else { a };
                prev = next;
            }
        };
        let (fwd, end1, closed) = walk(v0, f0, &mut seen);
        if closed {
            let mut facets = vec![f0];
            facets.extend(fwd);
            raw.push(Raw { facets, closed: true, ends: [v0, v0] });
            continue;
        }
        let (bwd, end0, _) = walk(u0, f0, &mut seen);
        let mut facets: Vec<FacetId> = bwd.into_iter().rev().collect();
        facets.push(f0);
        facets.extend(fwd);
        raw.push(Raw { facets, closed: false, ends: [end0, end1] });
    }

    // merge junction-like vertices joined by very short chains
    let nv = dom.n_vertices();
    let mut parent: Vec<usize> = (0..nv).collect();
    let junctionish = |v: usize| matches!(kind_of(v), Some(EndKind::Junction) | Some(EndKind::Transition));
    let mut keep = vec![true; raw.len()];
    for (i, r) in raw.iter().enumerate() {
        if !r.closed && r.facets.len() <= ABSORB && junctionish(r.ends[0]) && junctionish(r.ends[1]) {
            keep[i] = false;
            let (a, b) = (find(&mut parent, r.ends[0]), find(&mut parent, r.ends[1]));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut node_of = std::collections::BTreeMap::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut node_for = |v: usize, parent: &mut Vec<usize>, nodes: &mut Vec<Node>| -> usize {
        let root = find(parent, v);
        let id = *node_of.entry(root).or_insert_with(|| {
            nodes.push(Node { point: [0.0, 0.0], kind: EndKind::Open, vertices: Vec::new(), core: Vec::new() });
            nodes.len() - 1
        });
        if !nodes[id].vertices.contains(&v) {
            nodes[id].vertices.push(v);
        }
        id
    };
    let mut chains = Vec::new();
    for (i, r) in raw.into_iter().enumerate() {
        let absorbed_vertices = if keep[i] { None } else { Some(r.ends) };
        if let Some(ends) = absorbed_vertices {
            let id = node_for(ends[0], &mut parent, &mut nodes);
            node_for(ends[1], &mut parent, &mut nodes);
            let core = r.facets.iter().map(|&f| (f, if mult(f) == Multiplicity::One { 1 } else { 2 }));
            nodes[id].core.extend(core);
            continue;
        }
        let m = mult(r.facets[0]);
        let points = r.facets.iter().map(|&f| dom.facet_midpoint(f)).collect();
        let e_side = if m == Multiplicity::One {
            r.facets
                .iter()
                .map(|&f| {
                    let (a, b) = dom.facet_cells(f);
                    dom.cell_center(if pair.e.contains(a) { a } else { b })
                })
                .collect()
        } else {
            Vec::new()
        };
        let ends = if r.closed {
            None
        } else {
            Some([node_for(r.ends[0], &mut parent, &mut nodes), node_for(r.ends[1], &mut parent, &mut nodes)])
        };
        chains.push(InterfaceChain { points, facets: r.facets, multiplicity: m, closed: r.closed, ends, e_side, h: dom.h });
    }
    for n in nodes.iter_mut() {
        let k = n.vertices.len() as f64;
        let (sx, sy) = n.vertices.iter().map(|&v| dom.vertex_point(v)).fold((0.0, 0.0), |s, p| (s.0 + p[0], s.1 + p[1]));
        n.point = [sx / k, sy / k];
        let kinds: Vec<EndKind> = n.vertices.iter().filter_map(|&v| kind_of(v)).collect();
        n.kind = if kinds.contains(&EndKind::Transition) {
            EndKind::Transition
        } else if kinds.contains(&EndKind::Junction) {
            EndKind::Junction
        } else if kinds.contains(&EndKind::Wire) {
            EndKind::Wire
        } else {
            EndKind::Open
        };
    }
    // a merged cluster that mixes multiplicities is a transition
    for id in 0..nodes.len() {
        let ms: Vec<Multiplicity> = chains
            .iter()
            .filter(|c| c.ends.map_or(false, |e| e.contains(&id)))
            .map(|c| c.multiplicity)
            .collect();
        if ms.contains(&Multiplicity::One) && ms.contains(&Multiplicity::Two) {
            nodes[id].kind = EndKind::Transition;
        }
    }
    ChainSet { chains, nodes, h: dom.h }
}

/// Principal axis of a point cloud: centroid, unit direction, RMS distance to the line.
pub(crate) fn pca_line(points: &[Point]) -> (Point, Point, f64) {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - cx, p[1] - cy);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let d = [theta.cos(), theta.sin()];
    let ss: f64 = points
        .iter()
        .map(|p| {
            let r = -(p[0] - cx) * d[1] + (p[1] - cy) * d[0];
            r * r
        })
        .sum();
    ([cx, cy], d, (ss / n).sqrt())
}

const SMOOTH: usize = 5;

/// Project each midpoint onto the least-squares line of its 5-point window.
pub fn smoothed_points(chain: &InterfaceChain) -> Vec<Point> {
    let pts = &chain.points;
    let n = pts.len();
    if n < 3 {
        return pts.clone();
    }
    let half = SMOOTH / 2;
    (0..n)
        .map(|i| {
            let window: Vec<Point> = if chain.closed && n >= SMOOTH {
                (0..SMOOTH).map(|j| pts[(i + n + j - half) % n]).collect()
            } else {
                let w = SMOOTH.min(n);
                let lo = i.saturating_sub(half).min(n - w);
                pts[lo..lo + w].to_vec()
            };
            let (c, d, _) = pca_line(&window);
            let t = (pts[i][0] - c[0]) * d[0] + (pts[i][1] - c[1]) * d[1];
            [c[0] + t * d[0], c[1] + t * d[1]]
        })
        .collect()
}

/// Arclength of the smoothed midpoint polyline; open chains get back the
/// half facet beyond each end midpoint.
pub fn corrected_length(chain: &InterfaceChain) -> f64 {
    let s = smoothed_points(chain);
    let mut len: f64 = s.windows(2).map(|w| dist(w[0], w[1])).sum();
    if chain.closed {
        len += dist(s[s.len() - 1], s[0]);
    } else {
        len += chain.h;
    }
    len
}

/// `Σ multiplicity · corrected length` over all chains, plus the facet
/// length of junction cores.
pub fn corrected_energy(set: &ChainSet) -> f64 {
    let chains: f64 = set
        .chains
        .iter()
        .map(|c| {
            let m = if c.multiplicity == Multiplicity::One { 1.0 } else { 2.0 };
            m * corrected_length(c)
        })
        .sum();
    let cores: f64 = set.nodes.iter().flat_map(|n| n.core.iter()).map(|&(_, m)| m as f64 * set.h).sum();
    chains + cores
}
