//! Integrating-factor RK4 time stepping and the single-run driver.

use crate::config::SimConfig;
use crate::diagnostics::{BlowUpRecord, DiagnosticsSample, RunSummary, Snapshot};
use crate::dynamics::{explicit_tendency, Forcing};
use crate::error::{Error, Result};
use crate::scenarios::{make_forcing, make_initial};
use crate::spectral::{dealias_in_place, gradient_norm_sq, leray_project_in_place, GridSpec, SpectralVelocity};
use crate::taming::TamingProfile;

/// A point on the discrete trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeState {
    pub t: f64,
    pub u: SpectralVelocity,
    pub step: u64,
    /// Size of the step that produced this state (0 before the first step).
    pub dt: f64,
}

impl TimeState {
    pub fn initial(u: SpectralVelocity) -> Self {
        Self {
            t: 0.0,
            u,
            step: 0,
            dt: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepPolicy {
    pub cfl: f64,
    pub dt_max: f64,
    pub dt_min: f64,
    pub sample_interval: f64,
}

impl StepPolicy {
    pub fn from_config(cfg: &SimConfig) -> Self {
        Self {
            cfl: cfg.time.cfl,
            dt_max: cfg.time.dt_max,
            dt_min: cfg.time.dt_min,
            sample_interval: cfg.time.sample_interval,
        }
    }

    /// `min(dt_max, cfl·Δx/(sup|u| + 10⁻¹²))`.
    pub fn admissible_dt(&self, grid: GridSpec, sup_u: f64) -> f64 {
        self.dt_max.min(self.cfl * grid.dx() / (sup_u + 1e-12))
    }
}

/// Explicit tendency at a state: `−P D[(u·∇)u + g u] + f`, with the taming
/// dissipation and grid supremum of the same state.
struct Stage {
    tendency: SpectralVelocity,
    taming_dissipation: f64,
    sup_u: f64,
}

/// Time stepper for `∂ₜû = −ν|k|²û + N(û, t)`.
///
/// The state is carried in the integrating-factor variable `e^{ν|k|²t}û`, so
/// diffusion is exact per mode and RK4 handles only the nonlinear terms.
pub struct Integrator {
    profile: TamingProfile,
    forcing: Forcing,
    k2: Vec<f64>,
}

impl Integrator {
    pub fn new(profile: TamingProfile, forcing: Forcing) -> Self {
        let grid = forcing.grid();
        let mut k2 = vec![0.0; grid.len()];
        grid.for_each_mode(|idx, k, _| {
            k2[idx] = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        });
        Self { profile, forcing, k2 }
    }

    pub fn profile(&self) -> &TamingProfile {
        &self.profile
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    fn stage(&self, u: &SpectralVelocity, t: f64) -> Stage {
        let (tendency, taming_dissipation, sup_u) = explicit_tendency(u, t, &self.profile, &self.forcing);
        Stage {
            tendency,
            taming_dissipation,
            sup_u,
        }
    }

    fn decay(&self, dt: f64) -> Vec<f64> {
        let nu = self.profile.nu();
        self.k2.iter().map(|&k2| (-nu * k2 * dt).exp()).collect()
    }

    /// One RK4 step from `u` at `t` given the first stage.
    fn advance(&self, u: &SpectralVelocity, t: f64, dt: f64, k1: &SpectralVelocity) -> SpectralVelocity {
        let e = self.decay(dt);
        let e2 = self.decay(0.5 * dt);
        let lin = |x: &SpectralVelocity, m: &[f64]| {
            let mut y = x.clone();
            y.apply_multiplier(m);
            y
        };

        let mut a = u.clone();
        a.axpy(0.5 * dt, k1).expect("same grid");
        a.apply_multiplier(&e2);
        let k2 = self.stage(&a, t + 0.5 * dt).tendency;

        let mut b = lin(u, &e2);
        b.axpy(0.5 * dt, &k2).expect("same grid");
        let k3 = self.stage(&b, t + 0.5 * dt).tendency;

        let mut c = lin(u, &e);
        c.axpy(dt, &lin(&k3, &e2)).expect("same grid");
        let k4 = self.stage(&c, t + dt).tendency;

        let mut mid = k2;
        mid.axpy(1.0, &k3).expect("same grid");
        mid.apply_multiplier(&e2);
        let mut out = lin(u, &e);
        out.axpy(dt / 6.0, &lin(k1, &e)).expect("same grid");
        out.axpy(dt / 3.0, &mid).expect("same grid");
        out.axpy(dt / 6.0, &k4).expect("same grid");
        dealias_in_place(&mut out);
        leray_project_in_place(&mut out);
        out
    }

    /// Advance by a prescribed step size.
    pub fn step_with_dt(&self, state: &TimeState, dt: f64) -> TimeState {
        let k1 = self.stage(&state.u, state.t);
        TimeState {
            t: state.t + dt,
            u: self.advance(&state.u, state.t, dt, &k1.tendency),
            step: state.step + 1,
            dt,
        }
    }

    /// Advance by the admissible step of `policy`.
    pub fn step(&self, state: &TimeState, policy: &StepPolicy) -> Result<TimeState> {
        let k1 = self.stage(&state.u, state.t);
        let dt = policy.admissible_dt(state.u.grid(), k1.sup_u);
        if !(dt >= policy.dt_min) {
            return Err(Error::BlowUp {
                t: state.t,
                sup_u: k1.sup_u,
                dt,
            });
        }
        Ok(TimeState {
            t: state.t + dt,
            u: self.advance(&state.u, state.t, dt, &k1.tendency),
            step: state.step + 1,
            dt,
        })
    }

    /// Advance to exactly `target`, splitting the interval into equal steps no
    /// larger than the admissible step. Step-level trapezoid sums of
    /// `ν‖∇u‖² + D` and `⟨f, u⟩` are added to `integrals`.
    fn advance_to(
        &self,
        state: &mut TimeState,
        target: f64,
        policy: &StepPolicy,
        current: &mut Option<Stage>,
        integrals: &mut [f64; 2],
    ) -> Result<()> {
        let nu = self.profile.nu();
        let rates = |u: &SpectralVelocity, t: f64, s: &Stage| -> Result<[f64; 2]> {
            Ok([
                nu * gradient_norm_sq(u) + s.taming_dissipation,
                self.forcing.power(u, t)?,
            ])
        };
        while state.t < target {
            let k1 = match current.take() {
                Some(s) => s,
                None => self.stage(&state.u, state.t),
            };
            let allowed = policy.admissible_dt(state.u.grid(), k1.sup_u);
            if !(allowed >= policy.dt_min) || !k1.sup_u.is_finite() {
                return Err(Error::BlowUp {
                    t: state.t,
                    sup_u: k1.sup_u,
                    dt: allowed,
                });
            }
            let remaining = target - state.t;
            let n = (remaining / allowed * (1.0 - 1e-12)).ceil().max(1.0);
            let dt = remaining / n;
            let last = n == 1.0;
            let before = rates(&state.u, state.t, &k1)?;
            let u = self.advance(&state.u, state.t, dt, &k1.tendency);
            let t = if last { target } else { state.t + dt };
            let next = self.stage(&u, t);
            let after = rates(&u, t, &next)?;
            for i in 0..2 {
                integrals[i] += 0.5 * dt * (before[i] + after[i]);
            }
            *state = TimeState {
                t,
                u,
                step: state.step + 1,
                dt,
            };
            *current = Some(next);
        }
        Ok(())
    }
}

/// Sample times `0 = t₀ < … < t_n = t_end` spaced by the sample interval, with
/// a shortened final interval when `t_end` is not a multiple of it.
pub fn sample_times(t_end: f64, interval: f64) -> Vec<f64> {
    if t_end <= 0.0 {
        return vec![0.0];
    }
    let r = t_end / interval;
    let n = if (r - r.round()).abs() < 1e-9 * r.max(1.0) {
        r.round() as usize
    } else {
        r.ceil() as usize
    };
    (0..=n)
        .map(|i| if i == n { t_end } else { i as f64 * interval })
        .collect()
}

/// Identifies everything about a run except the taming level, so sweeps can
/// check that their members differ only in `N`.
pub fn scenario_tag(cfg: &SimConfig) -> String {
    let s = &cfg.scenario;
    format!(
        "{:?} a={} k0={} seed={} | M={} nu={} T={} dt_max={} cfl={} sample={} | forcing={:?} amp={} freq={} modes={:?}",
        s.name,
        s.amplitude,
        s.k0,
        s.seed,
        cfg.grid.size,
        cfg.physics.nu,
        cfg.time.t_end,
        cfg.time.dt_max,
        cfg.time.cfl,
        cfg.time.sample_interval,
        cfg.forcing.kind,
        cfg.forcing.amplitude,
        cfg.forcing.frequency,
        cfg.forcing.modes
    )
}

/// Hooks and options for [`run_with`].
#[derive(Default)]
pub struct RunOptions<'a> {
    /// Keep the state at every sample time.
    pub keep_snapshots: bool,
    /// Store snapshots embedded in this grid instead of the run's own.
    pub snapshot_grid: Option<GridSpec>,
    /// Start from this state instead of the configured initial condition.
    pub resume: Option<TimeState>,
    /// Called with `(sample index, state)` every `output.checkpoint_stride` samples.
    pub on_checkpoint: Option<&'a mut dyn FnMut(usize, &TimeState) -> Result<()>>,
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunOutputs {
    pub samples: Vec<DiagnosticsSample>,
    pub summary: RunSummary,
    pub final_state: TimeState,
    pub snapshots: Vec<Snapshot>,
    pub blow_up: Option<BlowUpRecord>,
}

pub fn run(cfg: &SimConfig) -> Result<RunOutputs> {
    run_with(cfg, RunOptions::default())
}

/// Integrate the configured run from `t = 0` (or the resume state) to
/// `time.t_end`, sampling diagnostics on the sample grid.
///
/// A blow-up stops the run; the outputs then hold every sample up to the
/// failure and a [`BlowUpRecord`].
pub fn run_with(cfg: &SimConfig, mut opts: RunOptions<'_>) -> Result<RunOutputs> {
    cfg.validate()?;
    let grid = cfg.grid_spec();
    let profile = cfg.taming_profile()?;
    let forcing = make_forcing(&cfg.forcing, grid)?;
    let integrator = Integrator::new(profile, forcing.clone());
    let policy = StepPolicy::from_config(cfg);

    let mut state = match opts.resume.take() {
        Some(s) => {
            s.u.grid().check_same(&grid)?;
            if s.t > cfg.time.t_end {
                return Err(Error::config(format!(
                    "resume time {} lies beyond time.t_end = {}",
                    s.t, cfg.time.t_end
                )));
            }
            s
        }
        None => TimeState::initial(make_initial(&cfg.scenario, grid)?),
    };
    let start = state.t;
    let times: Vec<f64> = {
        let all = sample_times(cfg.time.t_end, cfg.time.sample_interval);
        let mut v = vec![start];
        v.extend(all.into_iter().filter(|&t| t > start + 1e-12 * cfg.time.sample_interval));
        v
    };

    let mut samples = Vec::with_capacity(times.len());
    let mut snapshots = Vec::new();
    let mut integrals = [0.0; 2];
    let mut current = None;
    let mut blow_up = None;
    let stride = cfg.output.checkpoint_stride;
    for (i, &target) in times.iter().enumerate() {
        if i > 0 {
            if let Err(e) = integrator.advance_to(&mut state, target, &policy, &mut current, &mut integrals) {
                match e {
                    Error::BlowUp { t, sup_u, .. } => {
                        blow_up = Some(BlowUpRecord { t, sup_u });
                        break;
                    }
                    other => return Err(other),
                }
            }
        }
        let mut s = DiagnosticsSample::measure(&state.u, state.t, &profile, &forcing)?;
        s.dissipation_integral = integrals[0];
        s.forcing_work = integrals[1];
        samples.push(s);
        if opts.keep_snapshots {
            let u = match opts.snapshot_grid {
                Some(g) if g != grid => state.u.resampled(g),
                _ => state.u.clone(),
            };
            snapshots.push(Snapshot { t: state.t, u });
        }
        if stride > 0 && i > 0 && i % stride == 0 {
            if let Some(cb) = opts.on_checkpoint.as_mut() {
                cb(i, &state)?;
            }
        }
    }

    let summary = RunSummary::from_samples(&samples, scenario_tag(cfg), grid.size(), &profile, &forcing, blow_up);
    Ok(RunOutputs {
        samples,
        summary,
        final_state: state,
        snapshots,
        blow_up,
    })
}
