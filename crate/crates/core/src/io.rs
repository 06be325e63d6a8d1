//! Plain-text artifact writers: CSV maps and matrices, PGM images, JSON.
//!
//! All writers emit `f64` values with Rust's shortest round-trip formatting,
//! so identical inputs give byte-identical files.

use std::io::{self, Write};

use serde::Serialize;

use crate::forward::MsrMatrix;
use crate::imaging::ImagingMap;
use crate::spectral::SingularSystem;

/// `x,y,value` header followed by one row per grid point, row-major.
pub fn write_map_csv<W: Write>(map: &ImagingMap, mut out: W) -> io::Result<()> {
    writeln!(out, "x,y,value")?;
    for (p, v) in map.grid.points().zip(&map.values) {
        writeln!(out, "{},{},{}", p.x, p.y, v)?;
    }
    Ok(())
}

/// Plain (P2) PGM. Values in `[0, 1]` map linearly to `0..=255`; the top
/// image row is the largest `y`.
pub fn write_map_pgm<W: Write>(map: &ImagingMap, mut out: W) -> io::Result<()> {
    let g = &map.grid;
    writeln!(out, "P2")?;
    writeln!(out, "# linear grayscale: value 0 -> 0, value 1 -> 255; top row is y_max")?;
    writeln!(out, "{} {}", g.nx, g.ny)?;
    writeln!(out, "255")?;
    for iy in (0..g.ny).rev() {
        let row: Vec<String> = (0..g.nx).map(|ix| gray_level(map.at(ix, iy)).to_string()).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn gray_level(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// One row per matrix row: `re,im` pairs joined by commas, no header.
pub fn write_msr_csv<W: Write>(msr: &MsrMatrix, mut out: W) -> io::Result<()> {
    for row in msr.rows() {
        let cells: Vec<String> = row.iter().map(|z| format!("{},{}", z.re, z.im)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// `index,sigma` rows, index starting at 1.
pub fn write_singular_values_csv<W: Write>(sys: &SingularSystem, mut out: W) -> io::Result<()> {
    writeln!(out, "index,sigma")?;
    for (i, s) in sys.singular_values().iter().enumerate() {
        writeln!(out, "{},{}", i + 1, s)?;
    }
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
}
