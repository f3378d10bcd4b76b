//! Small planar geometry helpers shared by rasterization, tubes and analysis.

pub type Point = [f64; 2];

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Closest point parameter `t` in [0, 1] on segment `a`-`b`.
pub fn segment_param(p: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return 0.0;
    }
    (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
}

pub fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    dist(p, lerp(a, b, segment_param(p, a, b)))
}

/// Signed area of a closed polygon (positive when counter-clockwise).
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        * 0.5
}

/// Winding number of a closed polygon around `p` (p must not lie on it).
pub fn winding_number(poly: &[Point], p: Point) -> i64 {
    let n = poly.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = [poly[i][0] - p[0], poly[i][1] - p[1]];
        let b = [poly[(i + 1) % n][0] - p[0], poly[(i + 1) % n][1] - p[1]];
        total += (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
    }
    (total / std::f64::consts::TAU).round() as i64
}

/// Closed polyline with cumulative arclength.
#[derive(Clone, Debug)]
pub struct ClosedPolyline {
    pub vertices: Vec<Point>,
    /// `cum[i]` is the arclength at vertex `i`; `cum[n]` is the total length.
    pub cum: Vec<f64>,
}

impl ClosedPolyline {
    pub fn new(vertices: Vec<Point>) -> Self {
        let n = vertices.len();
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        for i in 0..n {
            let l = dist(vertices[i], vertices[(i + 1) % n]);
            cum.push(cum[i] + l);
        }
        ClosedPolyline { vertices, cum }
    }

    pub fn length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    pub fn segments(&self) -> usize {
        self.vertices.len()
    }

    pub fn segment(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    /// Distance to the polyline and arclength of the closest point.
    pub fn project(&self, p: Point) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..self.segments() {
            let (a, b) = self.segment(i);
            let t = segment_param(p, a, b);
            let d = dist(p, lerp(a, b, t));
            if d < best.0 {
                best = (d, self.cum[i] + t * (self.cum[i + 1] - self.cum[i]));
            }
        }
        best
    }

    pub fn point_at(&self, s: f64) -> Point {
        let l = self.length();
        let s = s.rem_euclid(l);
        let i = match self.cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.segments() - 1),
            Err(i) => i - 1,
        };
        let (a, b) = self.segment(i);
        let seg = self.cum[i + 1] - self.cum[i];
        if seg == 0.0 {
            a
        } else {
            lerp(a, b, (s - self.cum[i]) / seg)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_winding_and_area() {
        let sq = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!((signed_area(&sq) - 1.0).abs() < 1e-12);
        assert_eq!(winding_number(&sq, [0.5, 0.5]), 1);
        assert_eq!(winding_number(&sq, [1.5, 0.5]), 0);
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert_eq!(winding_number(&rev, [0.5, 0.5]), -1);
    }

    #[test]
    fn projection_on_square() {
        let pl = ClosedPolyline::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert!((pl.length() - 4.0).abs() < 1e-12);
        let (d, s) = pl.project([0.5, -0.2]);
        assert!((d - 0.2).abs() < 1e-12 && (s - 0.5).abs() < 1e-12);
        let p = pl.point_at(2.5);
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-12);
    }
}
