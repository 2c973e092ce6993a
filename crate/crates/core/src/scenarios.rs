//! Initial data and forcing patterns.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{Forcing, ForcingKind, ForcingMode};
use crate::error::{Error, Result};
use crate::spectral::{
    dealias_in_place, leray_project_in_place, sobolev_norm_sq, GridSpec, SobolevOrder, SpectralVelocity,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    TaylorGreen,
    ShearMode,
    RandomSpectrum,
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "taylor_green" => Ok(Self::TaylorGreen),
            "shear_mode" => Ok(Self::ShearMode),
            "random_spectrum" => Ok(Self::RandomSpectrum),
            other => Err(Error::config(format!("scenario.name: unknown scenario {other:?}"))),
        }
    }
}

/// Initial condition recipe.
///
/// For `random_spectrum` the amplitude is the requested `‖u₀‖_{H⁰}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub name: ScenarioKind,
    pub amplitude: f64,
    pub k0: u32,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: ScenarioKind::TaylorGreen,
            amplitude: 1.0,
            k0: 3,
            seed: 0,
        }
    }
}

impl Scenario {
    pub fn taylor_green(amplitude: f64) -> Self {
        Self {
            name: ScenarioKind::TaylorGreen,
            amplitude,
            ..Self::default()
        }
    }

    pub fn shear_mode(amplitude: f64) -> Self {
        Self {
            name: ScenarioKind::ShearMode,
            amplitude,
            ..Self::default()
        }
    }

    pub fn random_spectrum(h0_norm: f64, k0: u32, seed: u64) -> Self {
        Self {
            name: ScenarioKind::RandomSpectrum,
            amplitude: h0_norm,
            k0,
            seed,
        }
    }
}

fn finalize(mut u: SpectralVelocity) -> SpectralVelocity {
    dealias_in_place(&mut u);
    u.set_coeff(0, [0, 0, 0], Complex64::default());
    u.set_coeff(1, [0, 0, 0], Complex64::default());
    u.set_coeff(2, [0, 0, 0], Complex64::default());
    leray_project_in_place(&mut u);
    u
}

/// Build `u₀` for a scenario: real, divergence-free, dealiased, zero mean.
pub fn make_initial(scenario: &Scenario, grid: GridSpec) -> Result<SpectralVelocity> {
    let a = scenario.amplitude;
    if !a.is_finite() {
        return Err(Error::config("scenario.amplitude must be finite"));
    }
    match scenario.name {
        ScenarioKind::TaylorGreen => Ok(finalize(SpectralVelocity::from_fn(grid, |[x, y, z]| {
            [a * x.sin() * y.cos() * z.cos(), -a * x.cos() * y.sin() * z.cos(), 0.0]
        }))),
        ScenarioKind::ShearMode => Ok(finalize(SpectralVelocity::from_fn(grid, |[_, y, _]| {
            [a * y.sin(), 0.0, 0.0]
        }))),
        ScenarioKind::RandomSpectrum => random_spectrum(grid, a, scenario.k0, scenario.seed),
    }
}

fn random_spectrum(grid: GridSpec, h0_norm: f64, k0: u32, seed: u64) -> Result<SpectralVelocity> {
    if k0 == 0 {
        return Err(Error::config("scenario.k0 must be a positive integer"));
    }
    if h0_norm < 0.0 {
        return Err(Error::config("scenario.amplitude (requested H0 norm) must be >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k0 = k0 as f64;
    let mut raw = SpectralVelocity::zeros(grid);
    grid.for_each_mode(|idx, k, nyq| {
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        // draw for every mode so the stream does not depend on the band
        let draws: [f64; 6] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        if nyq || k2 == 0.0 || !grid.retains(k) {
            return;
        }
        // shell spectrum E(k) = k⁴ exp(−2k²/k₀²) spread over the shell area 4πk²
        let energy = k2 * k2 * (-2.0 * k2 / (k0 * k0)).exp();
        let amp = (energy / (4.0 * PI * k2)).sqrt();
        for j in 0..3 {
            raw.component_mut(j)[idx] = Complex64::new(draws[2 * j], draws[2 * j + 1]) * amp;
        }
    });
    raw.enforce_hermitian();
    let mut u = finalize(raw);
    let norm = sobolev_norm_sq(&u, SobolevOrder::H0).sqrt();
    if norm == 0.0 {
        return Ok(u);
    }
    u = u.scaled(h0_norm / norm);
    u.set_divfree(true);
    Ok(u)
}

/// One configured forcing mode (`component` is 1-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingModeSpec {
    pub k: [i64; 3],
    pub component: usize,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingKindSpec {
    Zero,
    Steady,
    Periodic,
}

/// `forcing.*` configuration section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForcingSpec {
    pub kind: ForcingKindSpec,
    pub amplitude: f64,
    /// Angular frequency ω of `cos(ωt)` for periodic forcing.
    pub frequency: f64,
    pub modes: Vec<ForcingModeSpec>,
}

impl Default for ForcingSpec {
    fn default() -> Self {
        Self {
            kind: ForcingKindSpec::Zero,
            amplitude: 1.0,
            frequency: 1.0,
            modes: Vec::new(),
        }
    }
}

pub fn make_forcing(spec: &ForcingSpec, grid: GridSpec) -> Result<Forcing> {
    let kind = match spec.kind {
        ForcingKindSpec::Zero => return Ok(Forcing::zero(grid)),
        ForcingKindSpec::Steady => ForcingKind::Steady,
        ForcingKindSpec::Periodic => ForcingKind::Periodic { omega: spec.frequency },
    };
    let modes = spec
        .modes
        .iter()
        .map(|m| {
            if !(1..=3).contains(&m.component) {
                return Err(Error::config(format!(
                    "forcing.modes: component must be 1, 2 or 3, got {}",
                    m.component
                )));
            }
            Ok(ForcingMode {
                k: m.k,
                component: m.component - 1,
                amplitude: Complex64::new(m.re, m.im),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Forcing::new(grid, kind, spec.amplitude, modes)
}
