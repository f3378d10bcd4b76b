//! Line and circle fits of chains, transition tangency and junction angles.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Point;

use super::chains::{corrected_length, pca_line, ChainSet, EndKind, InterfaceChain, Multiplicity};

/// Chains with fewer midpoints are left unfit.
pub const MIN_FIT_POINTS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Primitive {
    Segment { centroid: Point, direction: Point },
    Arc { center: Point, radius: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainFit {
    pub chain: usize,
    pub multiplicity: Multiplicity,
    pub points: usize,
    pub corrected_length: f64,
    pub primitive: Option<Primitive>,
    /// Signed for multiplicity one (positive when bending towards `E`),
    /// unsigned for multiplicity two.
    pub curvature: Option<f64>,
    pub rms: Option<f64>,
    /// Best circle, kept even when the segment is the better primitive.
    pub circle: Option<(Point, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionFit {
    pub node: usize,
    pub point: Point,
    /// Largest angle between the sheet and an incident arc, in radians.
    pub mismatch: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JunctionFit {
    pub node: usize,
    pub point: Point,
    pub chains: Vec<usize>,
    /// Outgoing tangent directions (radians), one per chain.
    pub directions: Vec<f64>,
    /// Angles between angularly consecutive tangents, in radians.
    pub angles: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub chains: Vec<ChainFit>,
    pub transitions: Vec<TransitionFit>,
    pub junctions: Vec<JunctionFit>,
}

/// Least-squares circle: algebraic fit refined by Gauss–Newton on the
/// geometric residuals. Returns centre, radius and RMS residual.
pub fn fit_circle(points: &[Point]) -> Option<(Point, f64, f64)> {
    let n = points.len();
    if n < 3 {
        return None;
    }
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n as f64;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n as f64;
    let q: Vec<Point> = points.iter().map(|p| [p[0] - cx, p[1] - cy]).collect();
    let scale = q.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let q: Vec<Point> = q.iter().map(|p| [p[0] / scale, p[1] / scale]).collect();
    // x² + y² + D x + E y + F = 0
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for p in &q {
        let row = [p[0], p[1], 1.0];
        let rhs = -(p[0] * p[0] + p[1] * p[1]);
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
            b[i] += row[i] * rhs;
        }
    }
    let s = solve3(a, b)?;
    let (mut ux, mut uy) = (-s[0] / 2.0, -s[1] / 2.0);
    let r2 = ux * ux + uy * uy - s[2];
    if !(r2 > 0.0) {
        return None;
    }
    let mut r = r2.sqrt();
    for _ in 0..50 {
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for p in &q {
            let d = (p[0] - ux).hypot(p[1] - uy);
            if d == 0.0 {
                return None;
            }
            let res = d - r;
            let g = [-(p[0] - ux) / d, -(p[1] - uy) / d, -1.0];
            for i in 0..3 {
                for j in 0..3 {
                    jtj[i][j] += g[i] * g[j];
                }
                jtr[i] -= g[i] * res;
            }
        }
        let Some(step) = solve3(jtj, jtr) else { break };
        ux += step[0];
        uy += step[1];
        r += step[2];
        if step.iter().map(|s| s.abs()).fold(0.0, f64::max) < 1e-13 {
            break;
        }
    }
    if !(r.is_finite() && r > 0.0) || r > 1e6 {
        return None;
    }
    let ss: f64 = q.iter().map(|p| ((p[0] - ux).hypot(p[1] - uy) - r).powi(2)).sum();
    Some(([cx + ux * scale, cy + uy * scale], r * scale, (ss / n as f64).sqrt() * scale))
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    let norm = a.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    if d.abs() <= 1e-14 * norm.powi(3) {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = b[i];
        }
        *o = det(&m) / d;
    }
    Some(out)
}

fn fit_chain(i: usize, c: &InterfaceChain) -> ChainFit {
    let mut out = ChainFit {
        chain: i,
        multiplicity: c.multiplicity,
        points: c.points.len(),
        corrected_length: corrected_length(c),
        primitive: None,
        curvature: None,
        rms: None,
        circle: None,
    };
    if c.points.len() < MIN_FIT_POINTS {
        return out;
    }
    let (centroid, direction, line_rms) = pca_line(&c.points);
    // the ends of an open boundary chain run into one-cell-wide wedges
    let trimmed: &[Point] = if c.multiplicity == Multiplicity::One && !c.closed {
        let cut = (c.points.len() / 6).max(1);
        if c.points.len() - 2 * cut >= MIN_FIT_POINTS {
            &c.points[cut..c.points.len() - cut]
        } else {
            &c.points
        }
    } else {
        &c.points
    };
    let circle = fit_circle(trimmed);
    out.circle = circle.map(|(center, r, _)| (center, r));
    // nearly flat arcs are reported as segments
    let flat = |r: f64| line_rms <= 2.0 * c.h && r > c.facet_length();
    match c.multiplicity {
        Multiplicity::Two => {
            out.primitive = Some(Primitive::Segment { centroid, direction });
            out.rms = Some(line_rms);
            out.curvature = Some(circle.map_or(0.0, |(_, r, _)| 1.0 / r));
        }
        Multiplicity::One => match circle {
            Some((center, radius, rms)) => {
                // which side of the curve is E, relative to the centre
                let vote: f64 = c
                    .points
                    .iter()
                    .zip(&c.e_side)
                    .map(|(p, e)| {
                        let to_c = [center[0] - p[0], center[1] - p[1]];
                        let to_e = [e[0] - p[0], e[1] - p[1]];
                        (to_c[0] * to_e[0] + to_c[1] * to_e[1]).signum()
                    })
                    .sum();
                let sign = if vote >= 0.0 { 1.0 } else { -1.0 };
                if flat(radius) {
                    out.primitive = Some(Primitive::Segment { centroid, direction });
                    out.rms = Some(line_rms);
                } else {
                    out.primitive = Some(Primitive::Arc { center, radius });
                    out.rms = Some(rms);
                }
                out.curvature = Some(sign / radius);
            }
            None => {
                out.primitive = Some(Primitive::Segment { centroid, direction });
                out.rms = Some(line_rms);
                out.curvature = Some(0.0);
            }
        },
    }
    out
}

/// Points of chain `c` ordered away from end `end`.
fn from_end(c: &InterfaceChain, end: usize) -> Vec<Point> {
    if end == 0 {
        c.points.clone()
    } else {
        c.points.iter().rev().copied().collect()
    }
}

fn unit(v: Point) -> Point {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

fn angle_between(a: Point, b: Point) -> f64 {
    (a[0] * b[0] + a[1] * b[1]).clamp(-1.0, 1.0).acos()
}

/// Outgoing tangent at a node from a line fit over the first half of the
/// chain (at most 40 points).
fn line_tangent(pts: &[Point], node: Point) -> Point {
    let take = (pts.len() / 2).clamp(MIN_FIT_POINTS.min(pts.len()), 40);
    let (_, d, _) = pca_line(&pts[..take]);
    let far = pts[take - 1];
    if d[0] * (far[0] - node[0]) + d[1] * (far[1] - node[1]) >= 0.0 {
        d
    } else {
        [-d[0], -d[1]]
    }
}

/// Outgoing tangent of a fitted arc at the point nearest `node`.
fn arc_tangent(center: Point, pts: &[Point], node: Point) -> Point {
    let r = unit([node[0] - center[0], node[1] - center[1]]);
    let t = [-r[1], r[0]];
    let probe = pts[pts.len() / 4];
    if t[0] * (probe[0] - node[0]) + t[1] * (probe[1] - node[1]) >= 0.0 {
        t
    } else {
        [-t[0], -t[1]]
    }
}

/// Fit every chain, then measure tangency at transitions and the angles at
/// junctions.
pub fn fit_and_check(set: &ChainSet) -> FitReport {
    let chains: Vec<ChainFit> = set.chains.iter().enumerate().map(|(i, c)| fit_chain(i, c)).collect();
    let mut transitions = Vec::new();
    let mut junctions = Vec::new();
    for (id, node) in set.nodes.iter().enumerate() {
        let inc = set.incident(id);
        if inc.is_empty() {
            continue;
        }
        match node.kind {
            EndKind::Transition => {
                let sheets: Vec<Point> = inc
                    .iter()
                    .filter(|&&(ci, _)| set.chains[ci].multiplicity == Multiplicity::Two && chains[ci].primitive.is_some())
                    .map(|&(ci, end)| line_tangent(&from_end(&set.chains[ci], end), node.point))
                    .collect();
                let arcs: Vec<Point> = inc
                    .iter()
                    .filter(|&&(ci, _)| set.chains[ci].multiplicity == Multiplicity::One && chains[ci].primitive.is_some())
                    .map(|&(ci, end)| {
                        let pts = from_end(&set.chains[ci], end);
                        match chains[ci].circle {
                            Some((center, _)) => arc_tangent(center, &pts, node.point),
                            None => line_tangent(&pts, node.point),
                        }
                    })
                    .collect();
                let mismatch = (!sheets.is_empty() && !arcs.is_empty()).then(|| {
                    let mut worst: f64 = 0.0;
                    for s in &sheets {
                        for a in &arcs {
                            // the arc continues the sheet through the node
                            worst = worst.max(angle_between(*s, [-a[0], -a[1]]));
                        }
                    }
                    worst
                });
                transitions.push(TransitionFit { node: id, point: node.point, mismatch });
            }
            EndKind::Junction => {
                let mut dirs: Vec<(f64, usize)> = inc
                    .iter()
                    .filter(|&&(ci, _)| set.chains[ci].points.len() >= 2)
                    .map(|&(ci, end)| {
                        let d = line_tangent(&from_end(&set.chains[ci], end), node.point);
                        (d[1].atan2(d[0]), ci)
                    })
                    .collect();
                dirs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let k = dirs.len();
                let angles = (0..k)
                    .map(|i| {
                        let next = if i + 1 < k { dirs[i + 1].0 } else { dirs[0].0 + std::f64::consts::TAU };
                        next - dirs[i].0
                    })
                    .collect();
                junctions.push(JunctionFit {
                    node: id,
                    point: node.point,
                    chains: dirs.iter().map(|d| d.1).collect(),
                    directions: dirs.iter().map(|d| d.0).collect(),
                    angles,
                });
            }
            _ => {}
        }
    }
    FitReport { chains, transitions, junctions }
}

/// Angles (radians) at the first junction with exactly three chains.
pub fn junction_angles(fit: &FitReport) -> Result<Vec<f64>> {
    fit.junctions.iter().find(|j| j.chains.len() == 3).map(|j| j.angles.clone()).ok_or(Error::NoJunction)
}
