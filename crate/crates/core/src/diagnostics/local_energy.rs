use std::f64::consts::PI;

use super::Snapshot;
use crate::dynamics::{nonlinear_fields, recover_pressure, Forcing};
use crate::error::{Error, Result};
use crate::spectral::{box_volume, fft, GridSpec};
use crate::taming::TamingProfile;

/// Smooth nonnegative test function `ψ((t−t₀)/τ) ψ(|x−x₀|/R)` with
/// `ψ(s) = (1−s²)⁴` on `[−1, 1]`, zero outside. Distances use the nearest
/// periodic image, so `R < π` keeps the support inside one chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpFunction {
    pub center: [f64; 3],
    pub t_center: f64,
    pub radius: f64,
    pub t_radius: f64,
}

fn psi(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - s * s).powi(4)
    }
}

fn psi_prime(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        -8.0 * s * (1.0 - s * s).powi(3)
    }
}

fn wrap(d: f64) -> f64 {
    let mut d = d.rem_euclid(2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    }
    d
}

/// Spatial factor with its gradient and Laplacian at one point.
struct SpatialBump {
    value: f64,
    grad: [f64; 3],
    lap: f64,
}

impl BumpFunction {
    pub fn new(center: [f64; 3], t_center: f64, radius: f64, t_radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < PI) {
            return Err(Error::config(format!("bump radius must lie in (0, π), got {radius}")));
        }
        if !(t_radius > 0.0) {
            return Err(Error::config(format!("bump time radius must be positive, got {t_radius}")));
        }
        Ok(Self {
            center,
            t_center,
            radius,
            t_radius,
        })
    }

    pub fn time_factor(&self, t: f64) -> f64 {
        psi((t - self.t_center) / self.t_radius)
    }

    pub fn time_factor_dt(&self, t: f64) -> f64 {
        psi_prime((t - self.t_center) / self.t_radius) / self.t_radius
    }

    fn spatial(&self, x: [f64; 3]) -> SpatialBump {
        let d = [
            wrap(x[0] - self.center[0]),
            wrap(x[1] - self.center[1]),
            wrap(x[2] - self.center[2]),
        ];
        let r2 = self.radius * self.radius;
        let s2 = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / r2;
        if s2 >= 1.0 {
            return SpatialBump {
                value: 0.0,
                grad: [0.0; 3],
                lap: 0.0,
            };
        }
        let q = 1.0 - s2;
        let c = -8.0 * q.powi(3) / r2;
        SpatialBump {
            value: q.powi(4),
            grad: [c * d[0], c * d[1], c * d[2]],
            lap: -24.0 / r2 * q * q * (1.0 - 3.0 * s2),
        }
    }

    /// `φ(t, x)`.
    pub fn value(&self, t: f64, x: [f64; 3]) -> f64 {
        self.time_factor(t) * self.spatial(x).value
    }

    /// `(∂ₜφ, ∇φ, Δφ)` at `(t, x)`.
    pub fn derivatives(&self, t: f64, x: [f64; 3]) -> (f64, [f64; 3], f64) {
        let sp = self.spatial(x);
        let a = self.time_factor(t);
        (
            self.time_factor_dt(t) * sp.value,
            [a * sp.grad[0], a * sp.grad[1], a * sp.grad[2]],
            a * sp.lap,
        )
    }
}

/// Both sides of the localized energy identity.
///
/// `lhs = ∬ 2ν|∇u|²φ + 2g_N(|u|²)|u|²φ`,
/// `rhs = ∬ |u|²(∂ₜφ + νΔφ) + 2(u·f)φ + (|u|² − 2p) u·∇φ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalEnergyReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / max(|lhs|, |rhs|)`, zero when both sides vanish.
    pub residual: f64,
}

/// Per-snapshot spatial integrals `(lhs, rhs)` at time `t`.
fn slice_integrals(
    s: &Snapshot,
    profile: &TamingProfile,
    forcing: &Forcing,
    bump: &BumpFunction,
) -> (f64, f64) {
    let grid: GridSpec = s.u.grid();
    let nu = profile.nu();
    let fields = nonlinear_fields(&s.u, profile);
    let p = recover_pressure(&s.u, profile).to_physical();
    let c = s.u.components();
    let mut grads = Vec::with_capacity(9);
    for j in 0..3 {
        for axis in 0..3 {
            grads.push(crate::spectral::derivative(grid, &c[j], axis));
        }
    }
    let refs: Vec<&[num_complex::Complex64]> = grads.iter().map(|v| v.as_slice()).collect();
    let grads = fft::inverse_real_many(grid, &refs);
    let f = if forcing.is_zero() {
        None
    } else {
        Some(forcing.at(s.t).to_physical())
    };
    let v = &fields.velocity;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    grid.for_each_point(|idx, x| {
        let (dt_phi, grad_phi, lap_phi) = bump.derivatives(s.t, x);
        let phi = bump.value(s.t, x);
        if phi == 0.0 && dt_phi == 0.0 && lap_phi == 0.0 {
            return;
        }
        let grad_sq: f64 = grads.iter().map(|g| g[idx] * g[idx]).sum();
        let r = fields.speed_sq[idx];
        lhs += 2.0 * nu * grad_sq * phi + 2.0 * fields.taming_factor[idx] * r * phi;
        let u_dot_grad = v[0][idx] * grad_phi[0] + v[1][idx] * grad_phi[1] + v[2][idx] * grad_phi[2];
        let mut term = r * (dt_phi + nu * lap_phi) + (r - 2.0 * p[idx]) * u_dot_grad;
        if let Some(f) = &f {
            term += 2.0 * (v[0][idx] * f[0][idx] + v[1][idx] * f[1][idx] + v[2][idx] * f[2][idx]) * phi;
        }
        rhs += term;
    });
    let w = box_volume() / grid.len() as f64;
    (lhs * w, rhs * w)
}

/// Evaluate the localized energy identity on a run's snapshots.
///
/// Space integrals are grid sums, time integrals trapezoid sums over the
/// snapshot times; `φ` and its derivatives are evaluated analytically.
pub fn local_energy_identity(
    snapshots: &[Snapshot],
    profile: &TamingProfile,
    forcing: &Forcing,
    bump: &BumpFunction,
) -> Result<LocalEnergyReport> {
    let (first, last) = match (snapshots.first(), snapshots.last()) {
        (Some(a), Some(b)) if snapshots.len() >= 3 => (a.t, b.t),
        _ => return Err(Error::config("local energy identity needs at least three snapshots")),
    };
    if !(bump.t_center - bump.t_radius > first && bump.t_center + bump.t_radius < last) {
        return Err(Error::config(format!(
            "bump time support [{}, {}] must lie strictly inside ({first}, {last})",
            bump.t_center - bump.t_radius,
            bump.t_center + bump.t_radius
        )));
    }
    let mut slices = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        if bump.time_factor(s.t) == 0.0 && bump.time_factor_dt(s.t) == 0.0 {
            slices.push((s.t, 0.0, 0.0));
        } else {
            s.u.grid().check_same(&forcing.grid())?;
            let (l, r) = slice_integrals(s, profile, forcing, bump);
            slices.push((s.t, l, r));
        }
    }
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for w in slices.windows(2) {
        let h = 0.5 * (w[1].0 - w[0].0);
        lhs += h * (w[0].1 + w[1].1);
        rhs += h * (w[0].2 + w[1].2);
    }
    let scale = lhs.abs().max(rhs.abs());
    Ok(LocalEnergyReport {
        lhs,
        rhs,
        residual: if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 },
    })
}
