//! Artifacts: the pair bitmap, CSV traces, SVG renders and run manifests.
//!
//! Pair bitmap layout (little-endian):
//!
//! | bytes | field                                   |
//! |-------|-----------------------------------------|
//! | 4     | magic `CPFP`                            |
//! | 2     | version (1)                             |
//! | 4     | box width in cells                      |
//! | 4     | box height in cells                     |
//! | 8     | spacing `h` (f64)                       |
//! | ..    | `E`, one bit per cell, row-major        |
//! | ..    | `K`, one bit per facet: x-facets then y-facets, each row-major |
//!
//! Bits are packed LSB-first; each bit block is padded to a whole byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{FitReport, Primitive};
use crate::error::{Error, Result};
use crate::grid::{CellSet, Domain, FacetSet, FilmPair};
use crate::optimizer::TraceRow;

pub const MAGIC: &[u8; 4] = b"CPFP";
pub const VERSION: u16 = 1;

fn pack(bits: &[bool], out: &mut Vec<u8>) {
    for chunk in bits.chunks(8) {
        out.push(chunk.iter().enumerate().map(|(i, &b)| (b as u8) << i).sum());
    }
}

fn unpack(bytes: &[u8], n: usize) -> Vec<bool> {
    (0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect()
}

/// Serialize `(E, K)`.
pub fn encode_pair(pair: &FilmPair, dom: &Domain) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(dom.width as u32).to_le_bytes());
    out.extend_from_slice(&(dom.height as u32).to_le_bytes());
    out.extend_from_slice(&dom.h.to_le_bytes());
    pack(pair.e.bits(), &mut out);
    pack(pair.k(dom).bits(), &mut out);
    out
}

/// Parse a pair bitmap written for a box of the same shape as `dom`.
pub fn decode_pair(bytes: &[u8], dom: &Domain) -> Result<FilmPair> {
    let bad = |m: &str| Error::Format(m.to_string());
    if bytes.len() < 22 || &bytes[..4] != MAGIC {
        return Err(bad("not a pair bitmap"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let w = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let ht = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
    let h = f64::from_le_bytes(bytes[14..22].try_into().unwrap());
    if w != dom.width || ht != dom.height || (h - dom.h).abs() > 1e-12 * dom.h {
        return Err(bad("bitmap box does not match the scene"));
    }
    let (nc, nf) = (dom.n_cells(), dom.n_facets());
    let (bc, bf) = (nc.div_ceil(8), nf.div_ceil(8));
    if bytes.len() != 22 + bc + bf {
        return Err(bad("truncated or oversized bitmap"));
    }
    let e = CellSet::from_bits(unpack(&bytes[22..22 + bc], nc));
    let k = FacetSet::from_bits(unpack(&bytes[22 + bc..], nf));
    FilmPair::from_k(dom, e, k)
}

pub fn write_pair(path: &Path, pair: &FilmPair, dom: &Domain) -> Result<()> {
    std::fs::write(path, encode_pair(pair, dom))?;
    Ok(())
}

pub fn read_pair(path: &Path, dom: &Domain) -> Result<FilmPair> {
    decode_pair(&std::fs::read(path)?, dom)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Rows as CSV with a header taken from the field names.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn trace_csv(trace: &[TraceRow]) -> Result<String> {
    to_csv(trace)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// sha256 of the canonical scene TOML.
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    /// Wall-clock seconds per stage. Not covered by the checksums.
    pub timings: BTreeMap<String, f64>,
    /// sha256 of each written file, by file name.
    pub checksums: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(config_toml: &str, seed: u64) -> Self {
        RunManifest {
            config_hash: sha256_hex(config_toml.as_bytes()),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            ..Default::default()
        }
    }

    /// Write `bytes` into `dir/name` and record its checksum.
    pub fn write(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(dir.join(name), bytes)?;
        self.checksums.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }
}

const SVG_PX: f64 = 512.0;

/// `E` filled, multiplicity-one facets thin, multiplicity-two facets bold,
/// the wire grey; fitted arcs, segments and transition points overlaid.
pub fn render_svg(pair: &FilmPair, dom: &Domain, fit: Option<&FitReport>) -> String {
    let s = SVG_PX / (dom.width.max(dom.height) as f64 * dom.h);
    let (wpx, hpx) = (dom.width as f64 * dom.h * s, dom.height as f64 * dom.h * s);
    // y grows upwards in the box
    let px = |p: [f64; 2]| (p[0] * s, hpx - p[1] * s);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{wpx:.0}" height="{hpx:.0}" viewBox="0 0 {wpx:.3} {hpx:.3}">"#
    );
    let _ = writeln!(out, r#"<rect width="{wpx:.3}" height="{hpx:.3}" fill="white"/>"#);
    let cell = dom.h * s;
    for (cls, set) in [("wire", &dom.wire_cells), ("liquid", &pair.e)] {
        let fill = if cls == "wire" { "#bbbbbb" } else { "#9ecae1" };
        let _ = writeln!(out, r#"<g class="{cls}" fill="{fill}">"#);
        for c in set.iter() {
            let [x, y] = dom.cell_center(c);
            let (cx, cy) = px([x - 0.5 * dom.h, y + 0.5 * dom.h]);
            let _ = writeln!(out, r#"<rect x="{cx:.3}" y="{cy:.3}" width="{cell:.3}" height="{cell:.3}"/>"#);
        }
        let _ = writeln!(out, "</g>");
    }
    let k = pair.k(dom);
    for (cls, width, bold) in [("mult1", 1.0, false), ("mult2", 3.0, true)] {
        let _ = writeln!(out, r#"<g class="{cls}" stroke="black" stroke-width="{width}" stroke-linecap="square">"#);
        for f in k.iter() {
            if pair.k_extra.contains(f) != bold {
                continue;
            }
            let (u, v) = dom.facet_vertices(f);
            let ((x1, y1), (x2, y2)) = (px(dom.vertex_point(u)), px(dom.vertex_point(v)));
            let _ = writeln!(out, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#);
        }
        let _ = writeln!(out, "</g>");
    }
    if let Some(fit) = fit {
        let _ = writeln!(out, r#"<g class="fits" fill="none" stroke="crimson" stroke-width="1" stroke-dasharray="4 3">"#);
        for c in &fit.chains {
            match c.primitive {
                Some(Primitive::Arc { center, radius }) => {
                    let (cx, cy) = px(center);
                    let _ = writeln!(out, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{:.3}"/>"#, radius * s);
                }
                Some(Primitive::Segment { centroid, direction }) => {
                    let half = 0.5 * c.corrected_length;
                    let a = px([centroid[0] - half * direction[0], centroid[1] - half * direction[1]]);
                    let b = px([centroid[0] + half * direction[0], centroid[1] + half * direction[1]]);
                    let _ = writeln!(out, r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#, a.0, a.1, b.0, b.1);
                }
                None => {}
            }
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(out, r#"<g class="transitions" fill="crimson">"#);
        for t in &fit.transitions {
            let (x, y) = px(t.point);
            let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="4"/>"#);
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}
