//! Per-sample diagnostics, run summaries and the verification routines.

mod bounds;
mod budget;
mod compare;
mod local_energy;

pub use bounds::{
    activation_measure, agmon_ratio, l2_non_increasing, verify_h1_growth, verify_h2_growth,
    verify_l2_bound, GrowthEntry, GrowthReport, L2BoundReport,
};
pub use budget::{energy_budget_residual, energy_budget_residual_sampled, BudgetResidual};
pub use compare::{compare_runs, Region};
pub use local_energy::{local_energy_identity, BumpFunction, LocalEnergyReport};

use serde::Serialize;

use crate::dynamics::{speed_probe, Forcing};
use crate::error::Result;
use crate::output::{fmt17, ser_f17, ser_opt_f17};
use crate::spectral::{gradient_norm_sq, laplacian_norm_sq, sobolev_norm_sq, SobolevOrder, SpectralVelocity};
use crate::taming::TamingProfile;

/// Header of `timeseries.csv`.
pub const TIMESERIES_HEADER: &str =
    "t,h0sq,h1sq,h2sq,grad_sq,sup_u,taming_dissipation,forcing_power,activation";

/// Diagnostics of one state `u(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsSample {
    pub t: f64,
    pub h0sq: f64,
    pub h1sq: f64,
    pub h2sq: f64,
    pub grad_sq: f64,
    /// `‖Δu‖²_{L²}`.
    pub lap_sq: f64,
    pub sup_u: f64,
    /// `(2π)³ mean(g_N(|u|²)|u|²)`.
    pub taming_dissipation: f64,
    /// `⟨f(t), u(t)⟩_{L²}`.
    pub forcing_power: f64,
    /// `sup|u|² ≥ N`.
    pub activation: bool,
    /// `∫₀ᵗ (ν‖∇u‖² + taming dissipation) ds`, accumulated at step resolution.
    pub dissipation_integral: f64,
    /// `∫₀ᵗ ⟨f, u⟩ ds`, accumulated at step resolution.
    pub forcing_work: f64,
    /// `max_k |k·û(k)| / max_k |û(k)|`.
    pub divergence_ratio: f64,
}

impl DiagnosticsSample {
    /// Measure a state. Time integrals are left at zero for the caller to fill.
    pub fn measure(u: &SpectralVelocity, t: f64, profile: &TamingProfile, forcing: &Forcing) -> Result<Self> {
        let probe = speed_probe(u, profile);
        Ok(Self {
            t,
            h0sq: sobolev_norm_sq(u, SobolevOrder::H0),
            h1sq: sobolev_norm_sq(u, SobolevOrder::H1),
            h2sq: sobolev_norm_sq(u, SobolevOrder::H2),
            grad_sq: gradient_norm_sq(u),
            lap_sq: laplacian_norm_sq(u),
            sup_u: probe.sup_u,
            taming_dissipation: probe.taming_dissipation,
            forcing_power: forcing.power(u, t)?,
            activation: probe.sup_u * probe.sup_u >= profile.activation_level(),
            dissipation_integral: 0.0,
            forcing_work: 0.0,
            divergence_ratio: u.divergence_ratio(),
        })
    }

    /// One `timeseries.csv` row (no trailing newline).
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            fmt17(self.t),
            fmt17(self.h0sq),
            fmt17(self.h1sq),
            fmt17(self.h2sq),
            fmt17(self.grad_sq),
            fmt17(self.sup_u),
            fmt17(self.taming_dissipation),
            fmt17(self.forcing_power),
            u8::from(self.activation)
        )
    }
}

/// Full `timeseries.csv` contents.
pub fn timeseries_csv(samples: &[DiagnosticsSample]) -> String {
    let mut out = String::with_capacity(256 * (samples.len() + 1));
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for s in samples {
        out.push_str(&s.csv_row());
        out.push('\n');
    }
    out
}

/// A stored velocity state at a sample time.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub u: SpectralVelocity,
}

/// Point at which a run left the resolvable regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlowUpRecord {
    #[serde(serialize_with = "ser_f17")]
    pub t: f64,
    #[serde(serialize_with = "ser_f17")]
    pub sup_u: f64,
}

/// Aggregated quantities of one run; serialized as `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    /// Identifies grid, physics (except `N`), horizon, scenario and forcing.
    pub scenario_tag: String,
    pub grid_size: usize,
    #[serde(serialize_with = "ser_f17")]
    pub nu: f64,
    pub taming_enabled: bool,
    #[serde(serialize_with = "ser_opt_f17")]
    pub taming_n: Option<f64>,
    #[serde(serialize_with = "ser_f17")]
    pub t_end: f64,
    pub sample_count: usize,
    #[serde(serialize_with = "ser_f17")]
    pub energy_residual_max: f64,
    pub energy_residual_absolute: bool,
    #[serde(serialize_with = "ser_f17")]
    pub activation_measure: f64,
    #[serde(serialize_with = "ser_opt_f17")]
    pub first_activation_time: Option<f64>,
    #[serde(serialize_with = "ser_f17")]
    pub h0sq_initial: f64,
    #[serde(serialize_with = "ser_f17")]
    pub sup_h0sq: f64,
    #[serde(serialize_with = "ser_f17")]
    pub int_h1sq: f64,
    #[serde(serialize_with = "ser_f17")]
    pub sup_h1sq: f64,
    #[serde(serialize_with = "ser_f17")]
    pub int_h2sq: f64,
    #[serde(serialize_with = "ser_f17")]
    pub sup_h2sq: f64,
    #[serde(serialize_with = "ser_opt_f17")]
    pub agmon_ratio_max: Option<f64>,
    #[serde(serialize_with = "ser_f17")]
    pub max_divergence_ratio: f64,
    #[serde(serialize_with = "ser_f17")]
    pub forcing_norm_integral: f64,
    #[serde(serialize_with = "ser_f17")]
    pub forcing_norm_sq_integral: f64,
    #[serde(serialize_with = "ser_f17")]
    pub forcing_derivative_norm_sq_integral: f64,
    pub l2_bound_holds: bool,
    #[serde(serialize_with = "ser_f17")]
    pub l2_bound_worst_slack: f64,
    pub divergence_free: bool,
    pub blow_up: Option<BlowUpRecord>,
}

/// Divergence tolerance for every sampled state.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-12;

/// Relative slack for the L² bound checks.
pub const L2_SLACK: f64 = 1e-7;

fn trapezoid<F: Fn(&DiagnosticsSample) -> f64>(samples: &[DiagnosticsSample], f: F) -> f64 {
    samples
        .windows(2)
        .fold(0.0, |acc, w| acc + 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1])))
}

impl RunSummary {
    pub fn from_samples(
        samples: &[DiagnosticsSample],
        scenario_tag: String,
        grid_size: usize,
        profile: &TamingProfile,
        forcing: &Forcing,
        blow_up: Option<BlowUpRecord>,
    ) -> Self {
        let t_end = samples.last().map_or(0.0, |s| s.t);
        let (energy_residual_max, energy_residual_absolute) = match energy_budget_residual(samples) {
            Ok(r) => (r.value, r.absolute),
            Err(_) => (0.0, true),
        };
        let sup = |f: fn(&DiagnosticsSample) -> f64| samples.iter().map(f).fold(0.0_f64, f64::max);
        let l2 = verify_l2_bound(samples, &|t| forcing.norm_integral(t));
        let level = profile.activation_level();
        let activation = if level.is_finite() && level > 0.0 {
            activation_measure(samples, level)
        } else {
            0.0
        };
        let max_div = sup(|s| s.divergence_ratio);
        Self {
            scenario_tag,
            grid_size,
            nu: profile.nu(),
            taming_enabled: profile.is_enabled(),
            taming_n: profile.is_enabled().then(|| profile.level()),
            t_end,
            sample_count: samples.len(),
            energy_residual_max,
            energy_residual_absolute,
            activation_measure: activation,
            first_activation_time: samples.iter().find(|s| s.activation).map(|s| s.t),
            h0sq_initial: samples.first().map_or(0.0, |s| s.h0sq),
            sup_h0sq: sup(|s| s.h0sq),
            int_h1sq: trapezoid(samples, |s| s.h1sq),
            sup_h1sq: sup(|s| s.h1sq),
            int_h2sq: trapezoid(samples, |s| s.h2sq),
            sup_h2sq: sup(|s| s.h2sq),
            agmon_ratio_max: agmon_ratio(samples),
            max_divergence_ratio: max_div,
            forcing_norm_integral: forcing.norm_integral(t_end),
            forcing_norm_sq_integral: forcing.norm_sq_integral(t_end),
            forcing_derivative_norm_sq_integral: forcing.time_derivative_norm_sq_integral(t_end),
            l2_bound_holds: l2.holds,
            l2_bound_worst_slack: l2.worst_slack,
            divergence_free: max_div <= DIVERGENCE_TOLERANCE,
            blow_up,
        }
    }

    /// `sup_t ‖u‖²_{H¹} + ∫₀ᵀ ‖u‖²_{H²}`.
    pub fn h1_envelope_lhs(&self) -> f64 {
        self.sup_h1sq + self.int_h2sq
    }

    /// `sup_t ‖u‖²_{H⁰} + ∫₀ᵀ ‖u‖²_{H¹}`.
    pub fn h0_envelope_lhs(&self) -> f64 {
        self.sup_h0sq + self.int_h1sq
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use std::f64::consts::PI;

    #[test]
    fn shear_sample_values() {
        let g = GridSpec::new(16).unwrap();
        let u = SpectralVelocity::from_fn(g, |[_, y, _]| [2.0 * y.sin(), 0.0, 0.0]);
        let p = TamingProfile::new(1.0, 1.0).unwrap();
        let s = DiagnosticsSample::measure(&u, 0.0, &p, &Forcing::zero(g)).unwrap();
        let m = 4.0 * 4.0 * PI.powi(3);
        assert!((s.h0sq - m).abs() < 1e-10);
        assert!((s.grad_sq - m).abs() < 1e-10);
        assert!(s.h0sq <= s.h1sq && s.h1sq <= s.h2sq);
        assert!((s.sup_u - 2.0).abs() < 1e-13);
        assert!(s.activation);
        // g(4) = 2.5 on the linear branch; mean of g(4 sin²y)·4 sin²y over the box
        assert!(s.taming_dissipation > 0.0);
    }

    #[test]
    fn csv_layout() {
        let s = DiagnosticsSample {
            t: 0.5,
            h0sq: 1.0,
            h1sq: 2.0,
            h2sq: 3.0,
            grad_sq: 1.0,
            lap_sq: 1.0,
            sup_u: 0.25,
            taming_dissipation: 0.0,
            forcing_power: -0.0,
            activation: false,
            dissipation_integral: 0.0,
            forcing_work: 0.0,
            divergence_ratio: 0.0,
        };
        let csv = timeseries_csv(&[s]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), TIMESERIES_HEADER);
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 9);
        assert_eq!(row[0].parse::<f64>().unwrap(), 0.5);
        assert_eq!(row[8], "0");
    }
}
