use std::f64::consts::PI;

use tamed_ns::config::SimConfig;
use tamed_ns::diagnostics::{
    agmon_ratio, compare_runs, energy_budget_residual, energy_budget_residual_sampled, local_energy_identity,
    verify_h1_growth, verify_h2_growth, verify_l2_bound, BumpFunction, DiagnosticsSample, Region, Snapshot,
};
use tamed_ns::dynamics::Forcing;
use tamed_ns::integrator::{run, run_with, RunOptions, RunOutputs};
use tamed_ns::scenarios::make_forcing;
use tamed_ns::spectral::{GridSpec, SpectralVelocity};
use tamed_ns::taming::TamingProfile;

fn run_text(text: &str, snapshots: bool) -> RunOutputs {
    let c = SimConfig::parse(text, &[]).unwrap();
    run_with(&c, RunOptions { keep_snapshots: snapshots, ..Default::default() }).unwrap()
}

#[test]
fn agmon_ratio_of_shear_mode() {
    let g = GridSpec::new(16).unwrap();
    let a = 2.5;
    let u = SpectralVelocity::from_fn(g, |[_, y, _]| [a * y.sin(), 0.0, 0.0]);
    let s = DiagnosticsSample::measure(&u, 0.0, &TamingProfile::new(100.0, 1.0).unwrap(), &Forcing::zero(g)).unwrap();
    let r = agmon_ratio(&[s]).unwrap();
    assert!((r - 1.0 / (4.0 * PI.powi(3))).abs() < 1e-13);
    let z = DiagnosticsSample::measure(&SpectralVelocity::zeros(g), 0.0, &TamingProfile::disabled(1.0), &Forcing::zero(g)).unwrap();
    assert_eq!(agmon_ratio(&[z]), None);
}

#[test]
fn energy_budget_on_exact_shear() {
    let out = run_text("grid.size=16\nscenario.name='shear_mode'\ntime.t_end=1.0\ntime.dt_max=1e-3\ntime.sample_interval=1e-2", false);
    let r = energy_budget_residual(&out.samples).unwrap();
    assert!(!r.absolute && r.value <= 1e-6, "{}", r.value);
    // sample-level quadrature is much coarser
    let coarse = energy_budget_residual_sampled(&out.samples, 1.0).unwrap();
    assert!(coarse.value > r.value);
}

#[test]
fn zero_state_budget_is_absolute() {
    let out = run_text("grid.size=8\nscenario.amplitude=0.0\ntime.t_end=0.05", true);
    let r = energy_budget_residual(&out.samples).unwrap();
    assert!(r.absolute);
    assert_eq!(r.value, 0.0);
    let bump = BumpFunction::new([1.0; 3], 0.025, 0.5, 0.015).unwrap();
    let g = GridSpec::new(8).unwrap();
    let rep = local_energy_identity(&out.snapshots, &TamingProfile::new(1.0, 1.0).unwrap(), &Forcing::zero(g), &bump).unwrap();
    assert_eq!((rep.lhs, rep.rhs, rep.residual), (0.0, 0.0, 0.0));
}

#[test]
fn budget_residual_quadrature_order() {
    let res = |dt: f64| {
        let out = run_text(
            &format!("grid.size=16\nscenario.amplitude=1.0\ntime.t_end=0.5\ntime.dt_max={dt}\ntime.sample_interval={dt}"),
            false,
        );
        energy_budget_residual(&out.samples).unwrap().value
    };
    let (a, b) = (res(1e-2), res(5e-3));
    assert!(a / b >= 3.0, "{a} {b}");
}

#[test]
fn l2_bound_with_steady_forcing() {
    let text = "grid.size=16\nscenario.amplitude=1.0\ntime.t_end=0.5\n\
                forcing.kind='steady'\nforcing.amplitude=3.0\nforcing.modes=[{k=[0,1,0], component=1, re=0.0, im=-0.5}]";
    let out = run_text(text, false);
    assert!(out.summary.l2_bound_holds);
    assert!(out.summary.l2_bound_worst_slack >= 0.0);
    let c = SimConfig::parse(text, &[]).unwrap();
    let f = make_forcing(&c.forcing, c.grid_spec()).unwrap();
    let u0 = out.samples[0].h0sq.sqrt();
    for s in &out.samples[1..] {
        assert!(s.h0sq.sqrt() < u0 + f.norm_integral(s.t), "t={}", s.t);
    }
    // a scaled series violates it
    let mut bad = out.samples.clone();
    let last = bad.len() - 1;
    bad[last].h0sq *= 100.0;
    assert!(!verify_l2_bound(&bad, &|t| f.norm_integral(t)).holds);
}

#[test]
fn growth_checks_on_inactive_scenario() {
    let summaries: Vec<_> = [4.0, 8.0, 16.0]
        .iter()
        .map(|n| run_text(&format!("grid.size=16\nscenario.amplitude=1.0\ntime.t_end=0.1\ntaming.N={n}"), false).summary)
        .collect();
    let h1 = verify_h1_growth(&summaries).unwrap();
    assert!(h1.bounded);
    assert!(h1.entries.windows(2).all(|w| w[1].ratio < w[0].ratio));
    assert!(h1.entries.windows(2).all(|w| w[1].lhs == w[0].lhs));
    let h2 = verify_h2_growth(&summaries).unwrap();
    assert!(h2.bounded);
    assert!(h2.entries.windows(2).all(|w| w[1].lhs == w[0].lhs));

    assert!(verify_h1_growth(&summaries[..1]).is_err());
    assert!(verify_h2_growth(&[]).is_err());
    let mut mixed = summaries.clone();
    mixed[1] = run_text("grid.size=16\nscenario.amplitude=1.5\ntime.t_end=0.1\ntaming.N=8.0", false).summary;
    assert!(verify_h1_growth(&mixed).is_err());
}

#[test]
fn tamed_and_untamed_coincide_when_inactive() {
    let base = "grid.size=16\nscenario.amplitude=0.5\ntime.t_end=0.3\ntaming.N=1.0\n";
    let a = run_text(base, true);
    let b = run_text(&format!("{base}taming.enabled=false"), true);
    assert_eq!(a.summary.activation_measure, 0.0);
    assert!(compare_runs(&a.snapshots, &b.snapshots, Region::Full).unwrap() <= 1e-10);
    assert_eq!(compare_runs(&a.snapshots, &a.snapshots, Region::Full).unwrap(), 0.0);
    let sub = Region::SubBox { lo: [0.0, 0.0, 0.0], hi: [PI, PI, PI] };
    assert!(compare_runs(&a.snapshots, &b.snapshots, sub).unwrap() <= 1e-10);
    let c = run_text("grid.size=8\nscenario.amplitude=0.5\ntime.t_end=0.3", true);
    assert!(compare_runs(&a.snapshots, &c.snapshots, Region::Full).is_err());
}

#[test]
fn local_energy_identity_on_shear_and_bad_support() {
    let out = run_text("grid.size=32\nscenario.name='shear_mode'\ntime.t_end=0.6\ntime.dt_max=2e-3\ntime.sample_interval=1e-2", true);
    let g = GridSpec::new(32).unwrap();
    let p = TamingProfile::new(100.0, 1.0).unwrap();
    let bump = BumpFunction::new([2.0, 1.0, 4.0], 0.3, 2.5, 0.2).unwrap();
    let rep = local_energy_identity(&out.snapshots, &p, &Forcing::zero(g), &bump).unwrap();
    assert!(rep.residual <= 1e-3, "{rep:?}");
    let touching = BumpFunction::new([2.0, 1.0, 4.0], 0.2, 2.5, 0.2).unwrap();
    assert!(local_energy_identity(&out.snapshots, &p, &Forcing::zero(g), &touching).is_err());
    let late = BumpFunction::new([2.0, 1.0, 4.0], 0.5, 2.5, 0.1).unwrap();
    assert!(local_energy_identity(&out.snapshots, &p, &Forcing::zero(g), &late).is_err());
}

#[test]
fn local_energy_identity_with_forcing_and_taming() {
    let text = "grid.size=32\nscenario.amplitude=2.0\ntaming.N=1.0\ntime.t_end=0.3\ntime.sample_interval=5e-3\ntime.dt_max=5e-3\n\
                forcing.kind='periodic'\nforcing.amplitude=4.0\nforcing.frequency=5.0\nforcing.modes=[{k=[1,1,0], component=3, re=1.0, im=0.0}]";
    let out = run_text(text, true);
    let c = SimConfig::parse(text, &[]).unwrap();
    let f = make_forcing(&c.forcing, c.grid_spec()).unwrap();
    let bump = BumpFunction::new([1.0, 2.0, 3.0], 0.15, 2.0, 0.12).unwrap();
    let rep = local_energy_identity(&out.snapshots, &c.taming_profile().unwrap(), &f, &bump).unwrap();
    assert!(rep.residual <= 1e-2, "{rep:?}");
}

#[test]
fn activation_measure_decreases_across_levels() {
    let lam: Vec<f64> = [1.0, 4.0, 16.0]
        .iter()
        .map(|n| {
            run(&SimConfig::parse(&format!("grid.size=16\nscenario.amplitude=5.0\ntime.t_end=0.3\ntaming.N={n}"), &[]).unwrap())
                .unwrap()
                .summary
                .activation_measure
        })
        .collect();
    assert!(lam.windows(2).all(|w| w[1] <= w[0] + 0.01), "{lam:?}");
    assert!(lam.iter().all(|&l| (0.0..=0.3 + 1e-12).contains(&l)), "{lam:?}");
    let none = run(&SimConfig::parse("grid.size=16\nscenario.amplitude=1.0\ntime.t_end=0.1\ntaming.N=30", &[]).unwrap()).unwrap();
    assert_eq!(none.summary.activation_measure, 0.0);
}

#[test]
fn snapshot_comparison_requires_matching_times() {
    let g = GridSpec::new(8).unwrap();
    let a = vec![Snapshot { t: 0.0, u: SpectralVelocity::zeros(g) }, Snapshot { t: 0.1, u: SpectralVelocity::zeros(g) }];
    let mut b = a.clone();
    b[1].t = 0.2;
    assert!(compare_runs(&a, &b, Region::Full).is_err());
}
