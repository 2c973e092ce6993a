//! Three-dimensional complex FFTs built from cached one-dimensional plans.
//!
//! Forward transforms are normalized by `M⁻³` so that
//! `û(k) = (2π)⁻³ ∫ u(x) e^{-ik·x} dx`; inverse transforms are unnormalized.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::grid::GridSpec;

type Plan = Arc<dyn Fft<f64>>;

fn plan(m: usize, direction: FftDirection) -> Plan {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let forward = matches!(direction, FftDirection::Forward);
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((m, forward))
        .or_insert_with(|| FftPlanner::new().plan_fft(m, direction))
        .clone()
}

fn transform(data: &mut [Complex64], m: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), m * m * m);
    let fft = plan(m, direction);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    // contiguous axis
    fft.process_with_scratch(data, &mut scratch);

    let mut buf = vec![Complex64::default(); m * m];
    // middle axis, slab by slab
    for slab in data.chunks_exact_mut(m * m) {
        for j in 0..m {
            for l in 0..m {
                buf[l * m + j] = slab[j * m + l];
            }
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for j in 0..m {
            for l in 0..m {
                slab[j * m + l] = buf[l * m + j];
            }
        }
    }

    // slowest axis, one (i, l) plane per j
    for j in 0..m {
        for i in 0..m {
            let row = (i * m + j) * m;
            for l in 0..m {
                buf[l * m + i] = data[row + l];
            }
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for i in 0..m {
            let row = (i * m + j) * m;
            for l in 0..m {
                data[row + l] = buf[l * m + i];
            }
        }
    }
}

/// In-place normalized forward transform.
pub fn forward(grid: GridSpec, data: &mut [Complex64]) {
    let m = grid.size();
    transform(data, m, FftDirection::Forward);
    let norm = 1.0 / grid.len() as f64;
    for c in data.iter_mut() {
        *c *= norm;
    }
}

/// In-place unnormalized inverse transform.
pub fn inverse(grid: GridSpec, data: &mut [Complex64]) {
    transform(data, grid.size(), FftDirection::Inverse);
}

/// Forward transform of two real fields with a single complex FFT.
///
/// The outputs are exactly Hermitian and carry zero Nyquist modes.
pub fn forward_real_pair(grid: GridSpec, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
    forward(grid, &mut z);
    let mut ah = vec![Complex64::default(); z.len()];
    let mut bh = vec![Complex64::default(); z.len()];
    grid.for_each_mode(|idx, _, nyq| {
        if nyq {
            return;
        }
        let zk = z[idx];
        let zm = z[grid.mirror_index(idx)].conj();
        ah[idx] = (zk + zm) * 0.5;
        // (zk - zm) / 2i
        let d = (zk - zm) * 0.5;
        bh[idx] = Complex64::new(d.im, -d.re);
    });
    (ah, bh)
}

/// Forward transform of a single real field (exactly Hermitian output).
pub fn forward_real(grid: GridSpec, a: &[f64]) -> Vec<Complex64> {
    let zeros = vec![0.0; a.len()];
    forward_real_pair(grid, a, &zeros).0
}

/// Inverse transform of two Hermitian coefficient sets with one complex FFT.
pub fn inverse_real_pair(grid: GridSpec, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let mut z: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| x + i * y).collect();
    inverse(grid, &mut z);
    z.into_iter().map(|c| (c.re, c.im)).unzip()
}

/// Inverse transform of one Hermitian coefficient set.
pub fn inverse_real(grid: GridSpec, a: &[Complex64]) -> Vec<f64> {
    let mut z = a.to_vec();
    inverse(grid, &mut z);
    z.into_iter().map(|c| c.re).collect()
}

/// Inverse transform of an arbitrary number of Hermitian coefficient sets,
/// two per complex FFT.
pub fn inverse_real_many(grid: GridSpec, fields: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        match pair {
            [a, b] => {
                let (x, y) = inverse_real_pair(grid, a, b);
                out.push(x);
                out.push(y);
            }
            [a] => out.push(inverse_real(grid, a)),
            _ => unreachable!(),
        }
    }
    out
}
