//! Tabular and mesh output. Floats are written with 17 significant digits.

use std::fmt::Write as _;

use crate::algebra::{HermitianOperator, OperatorTuple};
use crate::error::{Error, Result};
use crate::oracle::hull::PointCloudHull;
use crate::scale::ExtremeCloud;

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A header plus string rows, ready for a CSV writer.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Stable identifier of a projection: its rank and a hash of its entries
/// rounded to 1e-6.
pub fn projection_id(p: &HermitianOperator) -> String {
    let rank: f64 = p.blocks().iter().map(|b| b.trace().re).sum();
    // FNV-1a over the rounded entries
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in p.blocks() {
        for z in b.iter() {
            for v in [z.re, z.im] {
                let q = (v * 1e6).round() as i64;
                for byte in q.to_le_bytes() {
                    h ^= byte as u64;
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
        }
    }
    format!("r{}-{h:016x}", rank.round() as i64)
}

pub fn extremes_table(tuple: &OperatorTuple, cloud: &ExtremeCloud) -> Table {
    let mut header: Vec<String> = (0..=tuple.n()).map(|i| format!("x{i}")).collect();
    header.push("projection".into());
    let rows = cloud
        .points
        .iter()
        .map(|e| {
            let mut row: Vec<String> = e.point.coords().iter().map(|&v| fmt_f64(v)).collect();
            row.push(projection_id(&e.projection));
            row
        })
        .collect();
    Table { header, rows }
}

/// Wavefront OBJ with `v` and `f` records only (1-based indices).
pub fn hull_obj(hull: &PointCloudHull) -> Result<String> {
    let tris = hull
        .triangles()
        .ok_or_else(|| Error::Invariant("OBJ export needs a three-dimensional hull".into()))?;
    let mut out = String::new();
    let verts = hull.vertex_indices();
    for &i in verts {
        let p = &hull.points()[i];
        let c: Vec<String> = p.coords().iter().map(|&v| fmt_f64(v)).collect();
        writeln!(out, "v {}", c.join(" ")).unwrap();
    }
    for t in tris {
        let idx: Vec<usize> = t
            .iter()
            .map(|&pi| verts.iter().position(|&v| v == pi).expect("triangle vertex is a hull vertex") + 1)
            .collect();
        writeln!(out, "f {} {} {}", idx[0], idx[1], idx[2]).unwrap();
    }
    Ok(out)
}
