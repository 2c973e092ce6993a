use std::f64::consts::PI;

use num_complex::Complex64;

use super::field::SpectralVelocity;

/// Volume of the periodic box, `(2π)³`.
#[inline]
pub fn box_volume() -> f64 {
    (2.0 * PI).powi(3)
}

/// Order of a Sobolev norm `‖·‖_{H^m}`, `m ∈ {0, 1, 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SobolevOrder {
    H0,
    H1,
    H2,
}

impl SobolevOrder {
    fn exponent(self) -> i32 {
        match self {
            SobolevOrder::H0 => 0,
            SobolevOrder::H1 => 1,
            SobolevOrder::H2 => 2,
        }
    }
}

impl TryFrom<u32> for SobolevOrder {
    type Error = crate::Error;

    fn try_from(m: u32) -> crate::Result<Self> {
        match m {
            0 => Ok(Self::H0),
            1 => Ok(Self::H1),
            2 => Ok(Self::H2),
            _ => Err(crate::Error::Domain(format!("Sobolev order {m} not supported (0..=2)"))),
        }
    }
}

/// Leray projection onto divergence-free fields:
/// `P̂(k)v = v − k (k·v)/|k|²` for `k ≠ 0`, identity on the mean mode.
pub fn leray_project(v: &SpectralVelocity) -> SpectralVelocity {
    let mut out = v.clone();
    leray_project_in_place(&mut out);
    out
}

pub fn leray_project_in_place(v: &mut SpectralVelocity) {
    let grid = v.grid();
    let comps = v.components_mut_raw();
    grid.for_each_mode(|idx, k, nyq| {
        if nyq {
            for c in comps.iter_mut() {
                c[idx] = Complex64::default();
            }
            return;
        }
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        if k2 == 0.0 {
            return;
        }
        let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
        let kv = comps[0][idx] * kf[0] + comps[1][idx] * kf[1] + comps[2][idx] * kf[2];
        let s = kv / k2;
        for (j, c) in comps.iter_mut().enumerate() {
            c[idx] -= s * kf[j];
        }
    });
    v.set_divfree(true);
}

/// Two-thirds truncation: zero every mode with some `|k_i|` above the dealias bound.
pub fn dealias(v: &SpectralVelocity) -> SpectralVelocity {
    let mut out = v.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(v: &mut SpectralVelocity) {
    let grid = v.grid();
    let flag = v.is_divfree();
    let comps = v.components_mut_raw();
    grid.for_each_mode(|idx, k, nyq| {
        if nyq || !grid.retains(k) {
            for c in comps.iter_mut() {
                c[idx] = Complex64::default();
            }
        }
    });
    v.set_divfree(flag);
}

/// Weighted sum `(2π)³ Σ_{j,k} w(|k|²) |û_j(k)|²`.
fn weighted_norm_sq<W: Fn(f64) -> f64>(v: &SpectralVelocity, weight: W) -> f64 {
    let comps = v.components();
    let mut s = 0.0;
    v.grid().for_each_mode(|idx, k, _| {
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        let e = comps[0][idx].norm_sqr() + comps[1][idx].norm_sqr() + comps[2][idx].norm_sqr();
        if e != 0.0 {
            s += weight(k2) * e;
        }
    });
    box_volume() * s
}

/// `‖v‖²_{H^m} = (2π)³ Σ (1+|k|²)^m |v̂(k)|²`.
pub fn sobolev_norm_sq(v: &SpectralVelocity, order: SobolevOrder) -> f64 {
    let m = order.exponent();
    weighted_norm_sq(v, |k2| (1.0 + k2).powi(m))
}

/// `‖∇v‖²_{L²} = (2π)³ Σ |k|² |v̂(k)|²`.
pub fn gradient_norm_sq(v: &SpectralVelocity) -> f64 {
    weighted_norm_sq(v, |k2| k2)
}

/// `‖Δv‖²_{L²} = (2π)³ Σ |k|⁴ |v̂(k)|²`.
pub fn laplacian_norm_sq(v: &SpectralVelocity) -> f64 {
    weighted_norm_sq(v, |k2| k2 * k2)
}

/// Maximum of `|v(x)|` over the physical grid points.
///
/// This samples the field; the true supremum over the torus may be larger
/// between grid points.
pub fn sup_norm(v: &SpectralVelocity) -> f64 {
    sup_norm_physical(&v.to_physical())
}

pub fn sup_norm_physical(u: &super::PhysicalVector) -> f64 {
    let mut m = 0.0_f64;
    for idx in 0..u[0].len() {
        m = m.max(u[0][idx] * u[0][idx] + u[1][idx] * u[1][idx] + u[2][idx] * u[2][idx]);
    }
    m.sqrt()
}

/// Spectral partial derivative `∂_axis` of coefficient array `c`.
pub(crate) fn derivative(grid: super::GridSpec, c: &[Complex64], axis: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); c.len()];
    grid.for_each_mode(|idx, k, nyq| {
        if !nyq {
            out[idx] = c[idx] * Complex64::new(0.0, k[axis] as f64);
        }
    });
    out
}
