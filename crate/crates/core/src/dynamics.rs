//! Right-hand side of the tamed equation in spectral form and pressure recovery.
//!
//! Nonlinear products are formed pseudo-spectrally: derivatives in Fourier
//! space, products on the physical grid, back-transform, two-thirds
//! truncation and Leray projection.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{
    box_volume, derivative, fft, GridSpec, PhysicalVector, ScalarSpectralField, SpectralVelocity,
};
use crate::taming::TamingProfile;

/// Time dependence of the forcing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ForcingKind {
    Zero,
    Steady,
    /// `cos(ω t)` modulation.
    Periodic { omega: f64 },
}

/// One forcing mode: coefficient `amplitude` of component `component`
/// (0-based) at wavevector `k`; the conjugate mode at `-k` is implied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForcingMode {
    pub k: [i64; 3],
    pub component: usize,
    pub amplitude: Complex64,
}

/// External force `f(t) = amplitude · τ(t) · P[pattern]`.
#[derive(Clone, Debug)]
pub struct Forcing {
    kind: ForcingKind,
    amplitude: f64,
    modes: Vec<ForcingMode>,
    pattern: SpectralVelocity,
    pattern_norm: f64,
}

impl Forcing {
    pub fn zero(grid: GridSpec) -> Self {
        Self {
            kind: ForcingKind::Zero,
            amplitude: 0.0,
            modes: Vec::new(),
            pattern: SpectralVelocity::zeros(grid),
            pattern_norm: 0.0,
        }
    }

    /// Assemble, dealias-check and project a forcing pattern.
    pub fn new(grid: GridSpec, kind: ForcingKind, amplitude: f64, modes: Vec<ForcingMode>) -> Result<Self> {
        if matches!(kind, ForcingKind::Zero) {
            return Ok(Self::zero(grid));
        }
        if !amplitude.is_finite() {
            return Err(Error::config("forcing.amplitude must be finite"));
        }
        if let ForcingKind::Periodic { omega } = kind {
            if !(omega.is_finite() && omega > 0.0) {
                return Err(Error::config("forcing.frequency must be positive for periodic forcing"));
            }
        }
        let mut pattern = SpectralVelocity::zeros(grid);
        for m in &modes {
            if m.k == [0, 0, 0] {
                return Err(Error::config("forcing.modes: the mean mode k = (0,0,0) is not allowed"));
            }
            if !grid.retains(m.k) {
                return Err(Error::config(format!(
                    "forcing.modes: wavevector {:?} outside the dealiased band |k_i| <= {}",
                    m.k,
                    grid.dealias_bound()
                )));
            }
            if m.component > 2 {
                return Err(Error::config("forcing.modes: component must be 1, 2 or 3"));
            }
            let neg = [-m.k[0], -m.k[1], -m.k[2]];
            let c = pattern.coeff(m.component, m.k);
            pattern.set_coeff(m.component, m.k, c + m.amplitude);
            let c = pattern.coeff(m.component, neg);
            pattern.set_coeff(m.component, neg, c + m.amplitude.conj());
        }
        crate::spectral::leray_project_in_place(&mut pattern);
        let pattern_norm = pattern.inner_l2(&pattern)?.sqrt();
        Ok(Self {
            kind,
            amplitude,
            modes,
            pattern,
            pattern_norm,
        })
    }

    pub fn kind(&self) -> ForcingKind {
        self.kind
    }

    pub fn modes(&self) -> &[ForcingMode] {
        &self.modes
    }

    pub fn grid(&self) -> GridSpec {
        self.pattern.grid()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ForcingKind::Zero) || self.amplitude == 0.0 || self.pattern_norm == 0.0
    }

    fn time_factor(&self, t: f64) -> f64 {
        match self.kind {
            ForcingKind::Zero => 0.0,
            ForcingKind::Steady => self.amplitude,
            ForcingKind::Periodic { omega } => self.amplitude * (omega * t).cos(),
        }
    }

    fn time_factor_derivative(&self, t: f64) -> f64 {
        match self.kind {
            ForcingKind::Periodic { omega } => -self.amplitude * omega * (omega * t).sin(),
            _ => 0.0,
        }
    }

    /// Projected spatial pattern with unit time factor.
    pub fn pattern(&self) -> &SpectralVelocity {
        &self.pattern
    }

    pub fn at(&self, t: f64) -> SpectralVelocity {
        self.pattern.scaled(self.time_factor(t))
    }

    /// Analytic time derivative `∂ₜ f(t)`.
    pub fn time_derivative_at(&self, t: f64) -> SpectralVelocity {
        self.pattern.scaled(self.time_factor_derivative(t))
    }

    /// `⟨f(t), u⟩_{L²}`.
    pub fn power(&self, u: &SpectralVelocity, t: f64) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        Ok(self.time_factor(t) * self.pattern.inner_l2(u)?)
    }

    /// `‖f(t)‖_{H⁰}`.
    pub fn norm(&self, t: f64) -> f64 {
        self.time_factor(t).abs() * self.pattern_norm
    }

    /// `∫₀ᵗ ‖f(s)‖_{H⁰} ds`, in closed form.
    pub fn norm_integral(&self, t: f64) -> f64 {
        let base = self.amplitude.abs() * self.pattern_norm;
        match self.kind {
            ForcingKind::Zero => 0.0,
            ForcingKind::Steady => base * t,
            ForcingKind::Periodic { omega } => {
                // ∫₀^x |cos| over whole half-periods plus the remainder
                let x = omega * t;
                let n = (x / std::f64::consts::PI).floor();
                let rem = x - n * std::f64::consts::PI;
                let partial = if rem <= std::f64::consts::FRAC_PI_2 {
                    rem.sin()
                } else {
                    2.0 - rem.sin()
                };
                base * (2.0 * n + partial) / omega
            }
        }
    }

    /// `∫₀ᵗ ‖∂ₛ f(s)‖²_{H⁰} ds`, in closed form.
    pub fn time_derivative_norm_sq_integral(&self, t: f64) -> f64 {
        match self.kind {
            ForcingKind::Periodic { omega } => {
                let base = (self.amplitude * self.pattern_norm * omega).powi(2);
                base * (0.5 * t - (2.0 * omega * t).sin() / (4.0 * omega))
            }
            _ => 0.0,
        }
    }

    /// `∫₀ᵗ ‖f(s)‖²_{H⁰} ds`, in closed form.
    pub fn norm_sq_integral(&self, t: f64) -> f64 {
        let base = (self.amplitude * self.pattern_norm).powi(2);
        match self.kind {
            ForcingKind::Zero => 0.0,
            ForcingKind::Steady => base * t,
            ForcingKind::Periodic { omega } => base * (0.5 * t + (2.0 * omega * t).sin() / (4.0 * omega)),
        }
    }
}

/// Physical-space fields shared by the nonlinear terms.
pub struct NonlinearFields {
    pub velocity: PhysicalVector,
    pub speed_sq: Vec<f64>,
    /// `g_N(|u|²)` at every grid point.
    pub taming_factor: Vec<f64>,
    /// `(u·∇)u` on the grid.
    pub convective: PhysicalVector,
    /// `g_N(|u|²) u` on the grid.
    pub taming: PhysicalVector,
    /// True when `g_N(|u|²)` vanishes at every grid point.
    pub taming_inactive: bool,
}

impl NonlinearFields {
    /// `(2π)³ · mean(g_N(|u|²) |u|²)`.
    pub fn taming_dissipation(&self) -> f64 {
        if self.taming_inactive {
            return 0.0;
        }
        let s: f64 = self
            .taming_factor
            .iter()
            .zip(&self.speed_sq)
            .map(|(g, r)| g * r)
            .sum();
        box_volume() * s / self.speed_sq.len() as f64
    }
}

/// Evaluate `u`, `|u|²`, `(u·∇)u` and `g_N(|u|²)u` on the physical grid.
pub fn nonlinear_fields(u: &SpectralVelocity, profile: &TamingProfile) -> NonlinearFields {
    let grid = u.grid();
    let n = grid.len();
    let c = u.components();
    let mut spectral: Vec<Vec<Complex64>> = Vec::with_capacity(12);
    for j in 0..3 {
        spectral.push(c[j].clone());
    }
    for j in 0..3 {
        for axis in 0..3 {
            spectral.push(derivative(grid, &c[j], axis));
        }
    }
    let refs: Vec<&[Complex64]> = spectral.iter().map(|v| v.as_slice()).collect();
    let mut phys = fft::inverse_real_many(grid, &refs).into_iter();
    let velocity: PhysicalVector = [phys.next().unwrap(), phys.next().unwrap(), phys.next().unwrap()];
    let grads: Vec<Vec<f64>> = phys.collect();

    let mut convective: PhysicalVector = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for j in 0..3 {
        let (d0, d1, d2) = (&grads[3 * j], &grads[3 * j + 1], &grads[3 * j + 2]);
        let out = &mut convective[j];
        for idx in 0..n {
            out[idx] = velocity[0][idx] * d0[idx] + velocity[1][idx] * d1[idx] + velocity[2][idx] * d2[idx];
        }
    }

    let speed_sq: Vec<f64> = (0..n)
        .map(|i| velocity[0][i] * velocity[0][i] + velocity[1][i] * velocity[1][i] + velocity[2][i] * velocity[2][i])
        .collect();
    let taming_factor = profile.eval_g_field(&speed_sq);
    let taming_inactive = taming_factor.iter().all(|&g| g == 0.0);
    let taming: PhysicalVector = if taming_inactive {
        [vec![0.0; n], vec![0.0; n], vec![0.0; n]]
    } else {
        let mul = |j: usize| -> Vec<f64> { (0..n).map(|i| taming_factor[i] * velocity[j][i]).collect() };
        [mul(0), mul(1), mul(2)]
    };

    NonlinearFields {
        velocity,
        speed_sq,
        taming_factor,
        convective,
        taming,
        taming_inactive,
    }
}

/// Dealias and project raw coefficient arrays in a single pass.
fn truncate_and_project(grid: GridSpec, comps: [Vec<Complex64>; 3]) -> SpectralVelocity {
    let mut v = SpectralVelocity::from_coefficients(grid, comps);
    crate::spectral::dealias_in_place(&mut v);
    crate::spectral::leray_project_in_place(&mut v);
    v
}

fn forward_vector(grid: GridSpec, w: &PhysicalVector) -> [Vec<Complex64>; 3] {
    let (a, b) = fft::forward_real_pair(grid, &w[0], &w[1]);
    let c = fft::forward_real(grid, &w[2]);
    [a, b, c]
}

/// `P D[(u·∇)u]`, with `D` the two-thirds truncation.
pub fn convective_term(u: &SpectralVelocity) -> SpectralVelocity {
    let fields = nonlinear_fields(u, &TamingProfile::disabled(1.0));
    truncate_and_project(u.grid(), forward_vector(u.grid(), &fields.convective))
}

/// `P D[g_N(|u|²) u]`; exactly zero when `g_N(|u|²)` vanishes on the grid.
pub fn taming_term(u: &SpectralVelocity, profile: &TamingProfile) -> SpectralVelocity {
    let fields = nonlinear_fields(u, profile);
    if fields.taming_inactive {
        return SpectralVelocity::zeros(u.grid());
    }
    truncate_and_project(u.grid(), forward_vector(u.grid(), &fields.taming))
}

/// Explicit parts of the right-hand side.
///
/// The tendency is `∂ₜû = −ν|k|²û − convective − taming + forcing`; the
/// diffusion multiplier is applied by the integrator.
#[derive(Clone, Debug)]
pub struct RhsBreakdown {
    pub convective: SpectralVelocity,
    pub taming: SpectralVelocity,
    pub forcing: SpectralVelocity,
    /// `(2π)³ mean(g_N(|u|²)|u|²)` of the input state.
    pub taming_dissipation: f64,
}

impl RhsBreakdown {
    /// `−convective − taming + forcing`.
    pub fn explicit_sum(&self) -> SpectralVelocity {
        let mut out = self.forcing.clone();
        out.axpy(-1.0, &self.convective).expect("same grid");
        out.axpy(-1.0, &self.taming).expect("same grid");
        out
    }
}

pub fn rhs(u: &SpectralVelocity, t: f64, profile: &TamingProfile, f: &Forcing) -> Result<RhsBreakdown> {
    u.grid().check_same(&f.grid())?;
    let grid = u.grid();
    let fields = nonlinear_fields(u, profile);
    let convective = truncate_and_project(grid, forward_vector(grid, &fields.convective));
    let taming = if fields.taming_inactive {
        SpectralVelocity::zeros(grid)
    } else {
        truncate_and_project(grid, forward_vector(grid, &fields.taming))
    };
    Ok(RhsBreakdown {
        convective,
        taming,
        forcing: f.at(t),
        taming_dissipation: fields.taming_dissipation(),
    })
}

/// `−P D[(u·∇)u + g_N(|u|²)u] + f(t)` in one pass, with paired transforms.
/// Also returns the taming dissipation of `u`.
pub(crate) fn explicit_tendency(
    u: &SpectralVelocity,
    t: f64,
    profile: &TamingProfile,
    f: &Forcing,
) -> (SpectralVelocity, f64, f64) {
    let grid = u.grid();
    let fields = nonlinear_fields(u, profile);
    let n = grid.len();
    let w: PhysicalVector = if fields.taming_inactive {
        [
            fields.convective[0].iter().map(|x| -x).collect(),
            fields.convective[1].iter().map(|x| -x).collect(),
            fields.convective[2].iter().map(|x| -x).collect(),
        ]
    } else {
        let sum = |j: usize| -> Vec<f64> {
            (0..n).map(|i| -(fields.convective[j][i] + fields.taming[j][i])).collect()
        };
        [sum(0), sum(1), sum(2)]
    };
    let mut out = truncate_and_project(grid, forward_vector(grid, &w));
    if !f.is_zero() {
        out.axpy(f.time_factor(t), &f.pattern).expect("same grid");
        out.set_divfree(true);
    }
    let sup_sq = fields.speed_sq.iter().fold(0.0_f64, |m, &x| m.max(x));
    (out, fields.taming_dissipation(), sup_sq.sqrt())
}

/// Grid supremum of `|u|` and taming dissipation, from a single inverse transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeedProbe {
    pub sup_u: f64,
    pub taming_dissipation: f64,
}

pub fn speed_probe(u: &SpectralVelocity, profile: &TamingProfile) -> SpeedProbe {
    let v = u.to_physical();
    let n = u.grid().len();
    let mut sup_sq = 0.0_f64;
    let mut diss = 0.0;
    for i in 0..n {
        let r = v[0][i] * v[0][i] + v[1][i] * v[1][i] + v[2][i] * v[2][i];
        sup_sq = sup_sq.max(r);
        let g = profile.g_unchecked(r);
        if g != 0.0 {
            diss += g * r;
        }
    }
    SpeedProbe {
        sup_u: sup_sq.sqrt(),
        taming_dissipation: box_volume() * diss / n as f64,
    }
}

/// Pressure from `Δp = div((u·∇)u + g_N(|u|²)u)` with zero mean.
///
/// Uses the sign convention `∂ₜu = νΔu − (u·∇)u + ∇p − g_N u + f`; the
/// nonlinear terms enter undealiased, so `−|k|² p̂ = i k·ŵ` holds mode by mode.
pub fn recover_pressure(u: &SpectralVelocity, profile: &TamingProfile) -> ScalarSpectralField {
    let grid = u.grid();
    let fields = nonlinear_fields(u, profile);
    let n = grid.len();
    let w: PhysicalVector = if fields.taming_inactive {
        fields.convective
    } else {
        let sum = |j: usize| -> Vec<f64> { (0..n).map(|i| fields.convective[j][i] + fields.taming[j][i]).collect() };
        [sum(0), sum(1), sum(2)]
    };
    let wh = forward_vector(grid, &w);
    let mut p = vec![Complex64::default(); n];
    grid.for_each_mode(|idx, k, nyq| {
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        if nyq || k2 == 0.0 {
            return;
        }
        let kw = wh[0][idx] * k[0] as f64 + wh[1][idx] * k[1] as f64 + wh[2][idx] * k[2] as f64;
        // p̂ = −i (k·ŵ)/|k|²
        p[idx] = Complex64::new(kw.im, -kw.re) / k2;
    });
    ScalarSpectralField::from_coefficients(grid, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{sup_norm, SpectralVelocity};

    fn grid(m: usize) -> GridSpec {
        GridSpec::new(m).unwrap()
    }

    #[test]
    fn zero_state_gives_zero_rhs() {
        let g = grid(16);
        let u = SpectralVelocity::zeros(g);
        let p = TamingProfile::new(1.0, 1.0).unwrap();
        let r = rhs(&u, 0.0, &p, &Forcing::zero(g)).unwrap();
        assert_eq!(r.convective.max_abs_coeff(), 0.0);
        assert_eq!(r.taming.max_abs_coeff(), 0.0);
        assert_eq!(r.forcing.max_abs_coeff(), 0.0);
        assert_eq!(recover_pressure(&u, &p).max_abs_coeff(), 0.0);
    }

    #[test]
    fn shear_flow_has_no_advection_or_pressure() {
        let g = grid(16);
        let u = SpectralVelocity::from_fn(g, |[_, y, _]| [y.sin(), 0.0, 0.0]);
        assert!(convective_term(&u).max_abs_coeff() < 1e-16);
        let p = TamingProfile::new(4.0, 1.0).unwrap();
        assert_eq!(taming_term(&u, &p).max_abs_coeff(), 0.0);
        assert!(recover_pressure(&u, &p).max_abs_coeff() < 1e-16);
    }

    #[test]
    fn constant_field_taming_on_linear_branch() {
        let g = grid(8);
        // |c|² = N + 2 = 3 with N = 1, ν = 1  =>  g = 1.5
        let c = [1.0, 1.0, 1.0];
        let u = SpectralVelocity::from_fn(g, |_| c);
        let p = TamingProfile::new(1.0, 1.0).unwrap();
        let fields = nonlinear_fields(&u, &p);
        for j in 0..3 {
            for v in &fields.taming[j] {
                assert!((v - 1.5 * c[j]).abs() < 1e-14);
            }
        }
        let t = taming_term(&u, &p);
        for j in 0..3 {
            assert!((t.coeff(j, [0, 0, 0]).re - 1.5 * c[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn below_threshold_taming_is_exactly_zero() {
        let g = grid(16);
        let u = SpectralVelocity::from_fn(g, |[x, y, z]| {
            [0.5 * x.sin() * y.cos() * z.cos(), -0.5 * x.cos() * y.sin() * z.cos(), 0.0]
        });
        assert!(sup_norm(&u).powi(2) < 1.0);
        let p = TamingProfile::new(1.0, 1.0).unwrap();
        let t = taming_term(&u, &p);
        assert_eq!(t.max_abs_coeff(), 0.0);
    }

    #[test]
    fn forcing_validation() {
        let g = grid(16);
        let mode = |k| ForcingMode {
            k,
            component: 0,
            amplitude: Complex64::new(0.0, -0.5),
        };
        assert!(Forcing::new(g, ForcingKind::Steady, 1.0, vec![mode([6, 0, 0])]).is_err());
        assert!(Forcing::new(g, ForcingKind::Steady, 1.0, vec![mode([0, 0, 0])]).is_err());
        let f = Forcing::new(g, ForcingKind::Steady, 1.0, vec![mode([0, 1, 0])]).unwrap();
        let expect = SpectralVelocity::from_fn(g, |[_, y, _]| [y.sin(), 0.0, 0.0]);
        assert!(f.at(0.3).distance_sq(&expect).unwrap() < 1e-26);
    }

    #[test]
    fn periodic_forcing_integrals_match_quadrature() {
        let g = grid(16);
        let f = Forcing::new(
            g,
            ForcingKind::Periodic { omega: 3.0 },
            0.7,
            vec![ForcingMode {
                k: [1, 0, 0],
                component: 1,
                amplitude: Complex64::new(0.25, 0.1),
            }],
        )
        .unwrap();
        let t = 2.3;
        let n = 200_000;
        let h = t / n as f64;
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let s = (i as f64 + 0.5) * h;
            a += f.norm(s) * h;
            let d = f.time_derivative_at(s);
            b += d.inner_l2(&d).unwrap() * h;
            c += f.norm(s).powi(2) * h;
        }
        assert!((a - f.norm_integral(t)).abs() < 1e-8);
        assert!((b - f.time_derivative_norm_sq_integral(t)).abs() < 1e-7);
        assert!((c - f.norm_sq_integral(t)).abs() < 1e-8);
    }
}
