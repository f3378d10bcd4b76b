//! Local perimeter competitors and the (Λ, r₀)-minimality check.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{CellId, CellSet, Domain, FilmPair};
use crate::partition::essential_partition;

/// Balls with at most this many cells are solved by enumeration.
pub const EXHAUSTIVE_CELLS: usize = 20;

/// Perimeter of `v` seen from `ball`: facets between free cells with at
/// least one side in the ball. For sets agreeing outside the ball this
/// differs from the global perimeter by a constant.
pub fn local_perimeter(v: &CellSet, ball: &CellSet, dom: &Domain) -> f64 {
    let mut n = 0usize;
    for c in ball.iter() {
        for (_, m) in dom.links(c) {
            if !dom.is_omega(m) || v.contains(c) == v.contains(m) {
                continue;
            }
            // count each facet once
            if !ball.contains(m) || m > c {
                n += 1;
            }
        }
    }
    n as f64 * dom.h
}

/// `P(V; B) + Λ|U Δ V|`.
pub fn competitor_cost(u: &CellSet, v: &CellSet, ball: &CellSet, lambda: f64, dom: &Domain) -> f64 {
    let sym = ball.iter().filter(|&c| u.contains(c) != v.contains(c)).count();
    local_perimeter(v, ball, dom) + lambda * sym as f64 * dom.cell_area()
}

/// The set agreeing with `u` outside `ball` that minimizes
/// `P(V; B) + Λ|U Δ V|`. Ties keep cells of `u`.
pub fn local_min_cut(u: &CellSet, ball: &CellSet, lambda: f64, dom: &Domain) -> CellSet {
    let cells: Vec<CellId> = ball.iter().filter(|&c| dom.is_omega(c)).collect();
    if cells.is_empty() {
        return u.clone();
    }
    if cells.len() <= EXHAUSTIVE_CELLS {
        exhaustive(u, &cells, lambda, dom)
    } else {
        graph_cut(u, &cells, lambda, dom)
    }
}

fn exhaustive(u: &CellSet, cells: &[CellId], lambda: f64, dom: &Domain) -> CellSet {
    let index = |c: CellId| cells.iter().position(|&x| x == c);
    let start: u32 = cells.iter().enumerate().filter(|(_, &c)| u.contains(c)).map(|(i, _)| 1 << i).sum();
    // facets inside the ball, and per-cell cost of the fixed outside neighbours
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut out_in = vec![0usize; cells.len()];
    let mut out_out = vec![0usize; cells.len()];
    for (i, &c) in cells.iter().enumerate() {
        for (_, m) in dom.links(c) {
            if !dom.is_omega(m) {
                continue;
            }
            match index(m) {
                Some(j) if j > i => edges.push((i as u32, j as u32)),
                Some(_) => {}
                None if u.contains(m) => out_in[i] += 1,
                None => out_out[i] += 1,
            }
        }
    }
    let unary = lambda * dom.cell_area() / dom.h;
    // lowest cost, then fewest flips
    let mut best = (f64::INFINITY, u32::MAX, start);
    for mask in 0..1u32 << cells.len() {
        let mut cut = edges.iter().filter(|&&(i, j)| (mask >> i ^ mask >> j) & 1 == 1).count();
        for i in 0..cells.len() {
            cut += if mask >> i & 1 == 1 { out_out[i] } else { out_in[i] };
        }
        let flips = (mask ^ start).count_ones();
        let cost = cut as f64 + unary * flips as f64;
        if cost < best.0 - 1e-9 || (cost <= best.0 + 1e-9 && flips < best.1) {
            best = (cost, flips, mask);
        }
    }
    let mut v = u.clone();
    for (i, &c) in cells.iter().enumerate() {
        v.set(c, best.2 >> i & 1 == 1);
    }
    v
}

/// Source side = inside `V`.
fn graph_cut(u: &CellSet, cells: &[CellId], lambda: f64, dom: &Domain) -> CellSet {
    let n = cells.len();
    let (s, t) = (n, n + 1);
    let mut index = vec![usize::MAX; dom.n_cells()];
    for (i, &c) in cells.iter().enumerate() {
        index[c] = i;
    }
    let mut g = Dinic::new(n + 2);
    let unary = lambda * dom.cell_area();
    for (i, &c) in cells.iter().enumerate() {
        // cost of leaving V on the sink side / joining it on the source side
        let (mut out_cost, mut in_cost) = if u.contains(c) { (unary, 0.0) } else { (0.0, unary) };
        for (_, m) in dom.links(c) {
            if !dom.is_omega(m) {
                continue;
            }
            let j = index[m];
            if j == usize::MAX {
                if u.contains(m) {
                    out_cost += dom.h;
                } else {
                    in_cost += dom.h;
                }
            } else if j > i {
                g.add_edge(i, j, dom.h, dom.h);
            }
        }
        // ties stay with U
        if u.contains(c) {
            in_cost -= 1e-9 * dom.h;
        } else {
            out_cost -= 1e-9 * dom.h;
        }
        let base = in_cost.min(out_cost);
        g.add_edge(s, i, out_cost - base, 0.0);
        g.add_edge(i, t, in_cost - base, 0.0);
    }
    g.max_flow(s, t);
    let source_side = g.reachable(s);
    let mut v = u.clone();
    for (i, &c) in cells.iter().enumerate() {
        v.set(c, source_side[i]);
    }
    v
}

struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    level: Vec<i32>,
    it: Vec<usize>,
}

const EPS: f64 = 1e-12;

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic { head: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new(), level: vec![0; n], it: vec![0; n] }
    }

    fn add_edge(&mut self, a: usize, b: usize, c_ab: f64, c_ba: f64) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c_ab.max(0.0));
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(c_ba.max(0.0));
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(a) = q.pop_front() {
            for &e in &self.head[a] {
                let b = self.to[e];
                if self.cap[e] > EPS && self.level[b] < 0 {
                    self.level[b] = self.level[a] + 1;
                    q.push_back(b);
                }
            }
        }
    }

    fn dfs(&mut self, a: usize, t: usize, f: f64) -> f64 {
        if a == t {
            return f;
        }
        while self.it[a] < self.head[a].len() {
            let e = self.head[a][self.it[a]];
            let b = self.to[e];
            if self.cap[e] > EPS && self.level[b] == self.level[a] + 1 {
                let d = self.dfs(b, t, f.min(self.cap[e]));
                if d > EPS {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            self.it[a] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return flow;
            }
            self.it.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= EPS {
                    break;
                }
                flow += f;
            }
        }
    }

    fn reachable(&mut self, s: usize) -> Vec<bool> {
        self.bfs(s);
        self.level.iter().map(|&l| l >= 0).collect()
    }
}

/// Free cells whose centres lie within `r` of the centre of `c`.
pub fn ball_cells(dom: &Domain, c: CellId, r: f64) -> CellSet {
    let [cx, cy] = dom.cell_center(c);
    let k = (r / dom.h).ceil() as i64 + 1;
    let (x0, y0) = dom.cell_xy(c);
    let mut ball = dom.empty_cells();
    for dy in -k..=k {
        for dx in -k..=k {
            let (x, y) = (x0 as i64 + dx, y0 as i64 + dy);
            if x < 0 || y < 0 || x >= dom.width as i64 || y >= dom.height as i64 {
                continue;
            }
            let m = dom.cell(x as usize, y as usize);
            let [mx, my] = dom.cell_center(m);
            if dom.is_omega(m) && (mx - cx).hypot(my - cy) < r {
                ball.insert(m);
            }
        }
    }
    ball
}

/// Smallest Λ with `P(U; B) ≤ P(V; B) + Λ|U Δ V|` for every competitor,
/// by Dinkelbach iteration on the local cut.
pub fn smallest_lambda(u: &CellSet, ball: &CellSet, dom: &Domain) -> f64 {
    let pu = local_perimeter(u, ball, dom);
    let mut lambda = 0.0;
    for _ in 0..64 {
        let v = local_min_cut(u, ball, lambda, dom);
        let gain = pu - local_perimeter(&v, ball, dom);
        let sym = ball.iter().filter(|&c| u.contains(c) != v.contains(c)).count();
        if sym == 0 || gain - lambda * sym as f64 * dom.cell_area() <= 1e-9 * dom.h {
            return lambda;
        }
        lambda = gain / (sym as f64 * dom.cell_area());
    }
    lambda
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub lambda: f64,
    pub r0: f64,
    pub balls: usize,
    /// Balls containing a chamber interface.
    pub nonvacuous: usize,
    /// min over balls and chambers of `P(V; B) + Λ|UΔV| − P(U; B)`; 0 when vacuous.
    pub worst_margin: f64,
    /// Smallest Λ for which every sampled ball passes.
    pub smallest_passing_lambda: f64,
    pub passed: bool,
}

/// Cells of `ball` whose free neighbours all lie in `ball`; competitors may
/// only differ from `U` there.
pub fn ball_core(ball: &CellSet, dom: &Domain) -> CellSet {
    dom.cells_where(|c| ball.contains(c) && dom.neighbors4(c).all(|m| !dom.is_omega(m) || ball.contains(m)))
}

/// Samples `samples` balls of radius in `[h, r0)` centred on cells next to
/// the film. Each component `U` of the ball minus `K ∪ E` is compared with
/// its local min-cut competitor supported in the ball's interior.
pub fn lambda_minimality_check(
    pair: &FilmPair,
    dom: &Domain,
    lambda: f64,
    r0: f64,
    samples: usize,
    seed: u64,
) -> MinimalityReport {
    let k = pair.k(dom);
    let mut centres: Vec<CellId> = Vec::new();
    for f in k.iter() {
        let (a, b) = dom.facet_cells(f);
        centres.extend([a, b]);
    }
    centres.sort_unstable();
    centres.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = MinimalityReport {
        lambda,
        r0,
        balls: samples,
        nonvacuous: 0,
        worst_margin: 0.0,
        smallest_passing_lambda: 0.0,
        passed: true,
    };
    if centres.is_empty() || r0 <= dom.h {
        return report;
    }
    for _ in 0..samples {
        let c = centres[rng.gen_range(0..centres.len())];
        let r = rng.gen_range(dom.h..r0);
        let ball = ball_cells(dom, c, r);
        let core = ball_core(&ball, dom);
        let parts = essential_partition(&k, &ball.difference(&pair.e), dom);
        let mut touched = false;
        for u in parts.components() {
            let pu = local_perimeter(&u, &core, dom);
            if pu == 0.0 {
                continue;
            }
            touched = true;
            let v = local_min_cut(&u, &core, lambda, dom);
            let margin = competitor_cost(&u, &v, &core, lambda, dom) - pu;
            report.worst_margin = report.worst_margin.min(margin);
            report.smallest_passing_lambda = report.smallest_passing_lambda.max(smallest_lambda(&u, &core, dom));
        }
        report.nonvacuous += touched as usize;
    }
    report.passed = report.worst_margin >= -1e-9 * dom.h;
    report
}
