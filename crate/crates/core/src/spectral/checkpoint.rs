//! Binary checkpoints: one line of compact JSON header terminated by `\n`,
//! followed by little-endian `f64` pairs `(re, im)`.
//!
//! Coefficients are written component-major; within a component the
//! wavevectors run lexicographically over `{-M/2+1, …, M/2-1}³` with `k_x`
//! slowest and `k_z` fastest.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::SpectralVelocity;
use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::output::ser_f17;

pub const FORMAT_TAG: &str = "tamed-ns-checkpoint";
pub const NORMALIZATION_TAG: &str = "u_hat(k) = (2pi)^-3 * integral u(x) exp(-i k.x) dx";
pub const ORDER_TAG: &str = "component-major; k lexicographic over [-M/2+1, M/2-1]^3, kx slowest";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub version: u32,
    pub grid_size: usize,
    #[serde(serialize_with = "ser_f17")]
    pub time: f64,
    #[serde(serialize_with = "ser_f17")]
    pub nu: f64,
    pub taming_enabled: bool,
    #[serde(serialize_with = "ser_f17")]
    pub taming_n: f64,
    pub step: u64,
    #[serde(serialize_with = "ser_f17")]
    pub dt: f64,
    pub normalization: String,
    pub order: String,
    /// Total number of complex values that follow the header.
    pub count: usize,
}

impl CheckpointHeader {
    pub fn new(grid: GridSpec, time: f64, nu: f64, taming: Option<f64>, step: u64, dt: f64) -> Self {
        let side = grid.size() - 1;
        Self {
            format: FORMAT_TAG.to_string(),
            version: 1,
            grid_size: grid.size(),
            time,
            nu,
            taming_enabled: taming.is_some(),
            taming_n: taming.unwrap_or(0.0),
            step,
            dt,
            normalization: NORMALIZATION_TAG.to_string(),
            order: ORDER_TAG.to_string(),
            count: 3 * side * side * side,
        }
    }
}

fn kmax(grid: GridSpec) -> i64 {
    grid.size() as i64 / 2 - 1
}

pub fn write_checkpoint<W: Write>(mut w: W, header: &CheckpointHeader, u: &SpectralVelocity) -> Result<()> {
    let grid = u.grid();
    if header.grid_size != grid.size() {
        return Err(Error::GridMismatch {
            expected: header.grid_size,
            found: grid.size(),
        });
    }
    let line = serde_json::to_string(header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    let km = kmax(grid);
    let mut buf = Vec::with_capacity(header.count * 16);
    for j in 0..3 {
        let c = u.component(j);
        for kx in -km..=km {
            for ky in -km..=km {
                for kz in -km..=km {
                    let v = c[grid.index_of([kx, ky, kz]).unwrap()];
                    buf.extend_from_slice(&v.re.to_le_bytes());
                    buf.extend_from_slice(&v.im.to_le_bytes());
                }
            }
        }
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: BufRead>(mut r: R) -> Result<(CheckpointHeader, SpectralVelocity)> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: CheckpointHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Format(format!("bad header: {e}")))?;
    if header.format != FORMAT_TAG {
        return Err(Error::Format(format!("unexpected format tag {:?}", header.format)));
    }
    if header.normalization != NORMALIZATION_TAG {
        return Err(Error::Format("unsupported normalization".into()));
    }
    let grid = GridSpec::new(header.grid_size).map_err(|e| Error::Format(e.to_string()))?;
    let side = grid.size() - 1;
    if header.count != 3 * side * side * side {
        return Err(Error::Format(format!("count {} inconsistent with grid", header.count)));
    }
    let mut bytes = vec![0u8; header.count * 16];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Format(format!("truncated payload: {e}")))?;
    let mut u = SpectralVelocity::zeros(grid);
    let km = kmax(grid);
    let mut chunks = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()));
    for j in 0..3 {
        let c = u.component_mut(j);
        for kx in -km..=km {
            for ky in -km..=km {
                for kz in -km..=km {
                    let re = chunks.next().unwrap();
                    let im = chunks.next().unwrap();
                    c[grid.index_of([kx, ky, kz]).unwrap()] = Complex64::new(re, im);
                }
            }
        }
    }
    Ok((header, u))
}
