use tamed_ns::dynamics::{convective_term, nonlinear_fields, recover_pressure, rhs, taming_term, Forcing, ForcingKind, ForcingMode};
use tamed_ns::scenarios::{make_initial, Scenario};
use tamed_ns::spectral::{box_volume, gradient_norm_sq, sobolev_norm_sq, GridSpec, SobolevOrder, SpectralVelocity};
use tamed_ns::taming::TamingProfile;

fn tg(a: f64, x: [f64; 3]) -> [f64; 3] {
    let [x, y, z] = x;
    [a * x.sin() * y.cos() * z.cos(), -a * x.cos() * y.sin() * z.cos(), 0.0]
}

#[test]
fn convective_term_matches_fourth_order_differences() {
    let m = 64;
    let g = GridSpec::new(m).unwrap();
    let a = 1.3;
    let u = SpectralVelocity::from_fn(g, |x| tg(a, x));
    let spectral = convective_term(&u).to_physical();

    // (u·∇)u from 4th-order central differences of the sampled field, then projected
    let h = g.dx();
    let idx = |i: usize, j: usize, l: usize| (i % m * m + j % m) * m + l % m;
    let phys = u.to_physical();
    let mut w: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; g.len()]);
    let d = |f: &[f64], i: usize, j: usize, l: usize, axis: usize| {
        let shift = |s: isize| {
            let mut p = [i as isize, j as isize, l as isize];
            p[axis] += s;
            let q = p.map(|v| v.rem_euclid(m as isize) as usize);
            f[idx(q[0], q[1], q[2])]
        };
        (-shift(2) + 8.0 * shift(1) - 8.0 * shift(-1) + shift(-2)) / (12.0 * h)
    };
    for i in 0..m {
        for j in 0..m {
            for l in 0..m {
                let q = idx(i, j, l);
                for c in 0..3 {
                    w[c][q] = (0..3).map(|ax| phys[ax][q] * d(&phys[c], i, j, l, ax)).sum();
                }
            }
        }
    }
    let mut fd = SpectralVelocity::from_physical(g, &w);
    tamed_ns::spectral::dealias_in_place(&mut fd);
    tamed_ns::spectral::leray_project_in_place(&mut fd);
    let fd = fd.to_physical();
    let scale = spectral.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs()));
    let err = (0..3)
        .flat_map(|c| spectral[c].iter().zip(&fd[c]).map(|(a, b)| (a - b).abs()))
        .fold(0.0_f64, f64::max);
    assert!(err <= 1e-4 * scale, "relative error {}", err / scale);
}

#[test]
fn convective_energy_neutral() {
    for seed in 0..5 {
        let g = GridSpec::new(24).unwrap();
        let u = make_initial(&Scenario::random_spectrum(3.0, 3, seed), g).unwrap();
        let c = convective_term(&u);
        let s = c.inner_l2(&u).unwrap();
        assert!(s.abs() <= 1e-8 * sobolev_norm_sq(&u, SobolevOrder::H1).powf(1.5), "{s}");
        assert!(c.divergence_ratio() <= 1e-12);
    }
}

#[test]
fn taming_dissipativity_and_pointwise_oracle() {
    let g = GridSpec::new(24).unwrap();
    let profile = TamingProfile::new(0.5, 1.0).unwrap();
    let u = make_initial(&Scenario::random_spectrum(6.0, 3, 9), g).unwrap();
    let fields = nonlinear_fields(&u, &profile);
    assert!(!fields.taming_inactive);
    let phys = u.to_physical();
    for i in 0..g.len() {
        let r = phys[0][i].powi(2) + phys[1][i].powi(2) + phys[2][i].powi(2);
        let gr = profile.eval_g(r).unwrap();
        for c in 0..3 {
            assert!((fields.taming[c][i] - gr * phys[c][i]).abs() <= 1e-10 * (1.0 + gr * phys[c][i].abs()));
        }
    }
    let t = taming_term(&u, &profile);
    assert!(t.divergence_ratio() <= 1e-12);
    let d = fields.taming_dissipation();
    let mean: f64 = (0..g.len()).map(|i| fields.taming_factor[i] * fields.speed_sq[i]).sum::<f64>() / g.len() as f64;
    assert!((d - box_volume() * mean).abs() <= 1e-12 * d);
    // the returned term enters the tendency with a minus sign
    let s = t.inner_l2(&u).unwrap();
    assert!(s > 0.0 && (s - d).abs() <= 1e-8 * d, "{s} vs {d}");
}

#[test]
fn taming_vanishes_below_level_and_scales_constants() {
    let g = GridSpec::new(16).unwrap();
    let u = SpectralVelocity::from_fn(g, |x| tg(1.0, x));
    assert_eq!(taming_term(&u, &TamingProfile::new(1.0, 1.0).unwrap()).max_abs_coeff(), 0.0);
    // constant field with |c|² = N + 2 → g = 1.5, mean mode preserved by the projector
    let c = [1.0, 1.0, 1.0];
    let u = SpectralVelocity::from_fn(g, |_| c);
    let t = taming_term(&u, &TamingProfile::new(1.0, 1.0).unwrap());
    for j in 0..3 {
        assert!((t.coeff(j, [0, 0, 0]).re - 1.5 * c[j]).abs() < 1e-14);
    }
}

#[test]
fn energy_consistency_on_taylor_green() {
    let g = GridSpec::new(32).unwrap();
    let profile = TamingProfile::new(2.0, 1.0).unwrap();
    let u = make_initial(&Scenario::taylor_green(3.0), g).unwrap();
    let f = Forcing::new(
        g,
        ForcingKind::Steady,
        0.7,
        vec![ForcingMode { k: [0, 1, 0], component: 0, amplitude: num_complex::Complex64::new(0.0, -0.5) }],
    )
    .unwrap();
    let parts = rhs(&u, 0.0, &profile, &f).unwrap();
    let explicit = parts.explicit_sum();
    // d/dt ½‖u‖² = −ν‖∇u‖² − D + ⟨f, u⟩
    let lhs = explicit.inner_l2(&u).unwrap() - gradient_norm_sq(&u);
    let expected = -gradient_norm_sq(&u) - parts.taming_dissipation + f.power(&u, 0.0).unwrap();
    assert!((lhs - expected).abs() <= 1e-8 * expected.abs(), "{lhs} vs {expected}");
    assert!(parts.taming_dissipation > 0.0);
    for part in [&parts.convective, &parts.taming, &parts.forcing] {
        assert!(part.divergence_ratio() <= 1e-12);
    }
}

#[test]
fn disabled_profile_gives_classical_rhs() {
    let g = GridSpec::new(16).unwrap();
    let u = make_initial(&Scenario::taylor_green(50.0), g).unwrap();
    let parts = rhs(&u, 0.0, &TamingProfile::disabled(1.0), &Forcing::zero(g)).unwrap();
    assert_eq!(parts.taming.max_abs_coeff(), 0.0);
    assert_eq!(parts.taming_dissipation, 0.0);
    assert!(parts.convective.max_abs_coeff() > 0.0);
}

#[test]
fn rhs_grid_mismatch_is_rejected() {
    let u = SpectralVelocity::zeros(GridSpec::new(16).unwrap());
    let f = Forcing::zero(GridSpec::new(8).unwrap());
    assert!(rhs(&u, 0.0, &TamingProfile::disabled(1.0), &f).is_err());
}

#[test]
fn taylor_green_pressure_closed_form() {
    // classical form (u·∇)u = −∇q with q = (a²/16)(cos 2x + cos 2y)(cos 2z + 2);
    // the solver's pressure enters as ∂ₜu = … + ∇p, so p = −q
    let g = GridSpec::new(16).unwrap();
    let a = 1.7;
    let u = SpectralVelocity::from_fn(g, |x| tg(a, x));
    let p = recover_pressure(&u, &TamingProfile::new(100.0, 1.0).unwrap()).to_physical();
    let mut worst = 0.0_f64;
    g.for_each_point(|idx, [x, y, z]| {
        let q = a * a / 16.0 * ((2.0 * x).cos() + (2.0 * y).cos()) * ((2.0 * z).cos() + 2.0);
        worst = worst.max((p[idx] + q).abs());
    });
    assert!(worst < 1e-13, "{worst}");
}
