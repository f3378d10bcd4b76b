//! Scene documents: box, resolution, wire primitives, spanning generators and
//! the problem block. Scenes are TOML; unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::AnnealParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub w: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WirePrimitive {
    Disk { cx: f64, cy: f64, r: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Capsule { ax: f64, ay: f64, bx: f64, by: f64, r: f64 },
}

impl WirePrimitive {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            WirePrimitive::Disk { cx, cy, r } => {
                let (dx, dy) = (p[0] - cx, p[1] - cy);
                dx * dx + dy * dy <= r * r
            }
            WirePrimitive::Rect { x0, y0, x1, y1 } => {
                p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1
            }
            WirePrimitive::Capsule { ax, ay, bx, by, r } => {
                crate::geom::point_segment_distance(p, [ax, ay], [bx, by]) <= r
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            WirePrimitive::Disk { cx, cy, r } => cx.is_finite() && cy.is_finite() && r > 0.0,
            WirePrimitive::Rect { x0, y0, x1, y1 } => {
                x0.is_finite() && y0.is_finite() && x1 > x0 && y1 > y0
            }
            WirePrimitive::Capsule { ax, ay, bx, by, r } => {
                ax.is_finite() && ay.is_finite() && bx.is_finite() && by.is_finite() && r > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::BadScene(format!("malformed wire primitive {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Ccw,
    Cw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub id: String,
    pub vertices: Vec<[f64; 2]>,
    pub orientation: Orientation,
    pub tube_radius: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemMode {
    #[default]
    Plateau,
    Bulk,
    Foam,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default)]
    pub mode: ProblemMode,
    /// Enclosed liquid area for `bulk`.
    #[serde(default)]
    pub volume: Option<f64>,
    /// Foam chamber layout `[columns, rows]` of equal rectangles.
    #[serde(default)]
    pub chambers: Option<[usize; 2]>,
    /// Foam liquid area.
    #[serde(default)]
    pub liquid: Option<f64>,
    #[serde(default)]
    pub lambda0: Option<f64>,
    #[serde(default)]
    pub r0: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(rename = "box")]
    pub bbox: BoxSpec,
    pub resolution: f64,
    #[serde(default)]
    pub wire: Vec<WirePrimitive>,
    #[serde(default)]
    pub generator: Vec<GeneratorSpec>,
    #[serde(default)]
    pub problem: ProblemSpec,
    #[serde(default)]
    pub optimizer: AnnealParams,
    #[serde(default)]
    pub output: Option<String>,
}

impl SceneConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let scene: SceneConfig =
            toml::from_str(text).map_err(|e| Error::BadScene(e.message().to_string()))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scene serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let BoxSpec { w, h } = self.bbox;
        if !(w > 0.0 && h > 0.0 && self.resolution > 0.0) {
            return Err(Error::BadScene("box and resolution must be positive".into()));
        }
        for prim in &self.wire {
            prim.validate()?;
        }
        for g in &self.generator {
            if g.vertices.len() < 3 {
                return Err(Error::BadScene(format!("generator {} needs 3+ vertices", g.id)));
            }
            if !(g.tube_radius > 0.0) {
                return Err(Error::BadScene(format!("generator {} tube radius", g.id)));
            }
        }
        if let Some(v) = self.problem.volume {
            if !(v >= 0.0) {
                return Err(Error::BadScene("volume must be non-negative".into()));
            }
        }
        Ok(())
    }

    /// Three disks of radius `r` on an equilateral triangle of side `d`, with one
    /// generator loop around each pair. The triangle's centroid sits at the
    /// middle of a `side`-square box.
    pub fn triple_disk(side: f64, d: f64, r: f64, h: f64) -> Self {
        let c = [side / 2.0, side / 2.0];
        let rho = d / 3f64.sqrt();
        let centers: Vec<[f64; 2]> = (0..3)
            .map(|i| {
                let a = std::f64::consts::FRAC_PI_2 + i as f64 * 2.0 * std::f64::consts::PI / 3.0;
                [c[0] + rho * a.cos(), c[1] + rho * a.sin()]
            })
            .collect();
        let wire = centers
            .iter()
            .map(|p| WirePrimitive::Disk { cx: p[0], cy: p[1], r })
            .collect();
        let gap = 0.5 * (d - 2.0 * r);
        let mut generator = Vec::new();
        for (i, j) in [(0usize, 1usize), (1, 2), (2, 0)] {
            let (a, b) = (centers[i], centers[j]);
            generator.push(GeneratorSpec {
                id: format!("g{i}{j}"),
                vertices: stadium(a, b, r + gap.min(0.25 * d), 48),
                orientation: Orientation::Ccw,
                tube_radius: (0.35 * gap).min(0.05),
            });
        }
        SceneConfig {
            bbox: BoxSpec { w: side, h: side },
            resolution: h,
            wire,
            generator,
            problem: ProblemSpec::default(),
            optimizer: AnnealParams::default(),
            output: None,
        }
    }

    /// Two horizontal bars separated by a vertical gap `g`, one generator
    /// threading the gap around the upper bar.
    pub fn two_plate(g: f64, h: f64) -> Self {
        let (w, ht) = (2.5, 2.0);
        let len = 1.0;
        let thick = 0.1;
        let x0 = 0.5 * (w - len);
        let y_mid = 0.5 * ht;
        let lower = WirePrimitive::Rect { x0, y0: y_mid - 0.5 * g - thick, x1: x0 + len, y1: y_mid - 0.5 * g };
        let upper = WirePrimitive::Rect { x0, y0: y_mid + 0.5 * g, x1: x0 + len, y1: y_mid + 0.5 * g + thick };
        let pad = 0.5 * g;
        let loop_r = 0.25 * g;
        let cy = y_mid + 0.5 * g + 0.5 * thick;
        let vertices = stadium([x0, cy], [x0 + len, cy], 0.5 * thick + pad, 48);
        SceneConfig {
            bbox: BoxSpec { w, h: ht },
            resolution: h,
            wire: vec![lower, upper],
            generator: vec![GeneratorSpec {
                id: "gap".into(),
                vertices,
                orientation: Orientation::Ccw,
                tube_radius: loop_r.min(0.05),
            }],
            problem: ProblemSpec::default(),
            optimizer: AnnealParams::default(),
            output: None,
        }
    }
}

/// Counter-clockwise stadium (capsule outline) around segment `a`-`b` at
/// distance `r`, with `n` vertices per half circle.
pub fn stadium(a: [f64; 2], b: [f64; 2], r: f64, n: usize) -> Vec<[f64; 2]> {
    let dir = [b[0] - a[0], b[1] - a[1]];
    let base = dir[1].atan2(dir[0]);
    let mut pts = Vec::with_capacity(2 * n + 2);
    // around b from -90 to +90 relative to the axis, then around a
    for (c, start) in [(b, base - std::f64::consts::FRAC_PI_2), (a, base + std::f64::consts::FRAC_PI_2)] {
        for k in 0..=n {
            let t = start + std::f64::consts::PI * k as f64 / n as f64;
            pts.push([c[0] + r * t.cos(), c[1] + r * t.sin()]);
        }
    }
    pts
}
