use std::fs;

use tamed_ns::config::SimConfig;
use tamed_ns::diagnostics::TIMESERIES_HEADER;
use tamed_ns::experiment::{resume_experiment_in, run_experiment_in, ExitStatus};

fn cfg(text: &str) -> SimConfig {
    SimConfig::parse(text, &[]).unwrap()
}

fn json(path: &std::path::Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SUMMARY_FIELDS: [&str; 27] = [
    "scenario_tag", "grid_size", "nu", "taming_enabled", "taming_n", "t_end", "sample_count", "energy_residual_max",
    "energy_residual_absolute", "activation_measure", "first_activation_time", "h0sq_initial", "sup_h0sq", "int_h1sq",
    "sup_h1sq", "int_h2sq", "sup_h2sq", "agmon_ratio_max", "max_divergence_ratio", "forcing_norm_integral",
    "forcing_norm_sq_integral", "forcing_derivative_norm_sq_integral", "l2_bound_holds", "l2_bound_worst_slack",
    "divergence_free", "blow_up", "scenario_tag",
];

#[test]
fn single_run_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("grid.size=16\ntime.t_end=0.1\noutput.checkpoint_stride=4");
    let r = run_experiment_in(&c, dir.path()).unwrap();
    assert_eq!(r.status, ExitStatus::Success);
    let run = dir.path().join("run");
    let csv = fs::read_to_string(run.join("timeseries.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), TIMESERIES_HEADER);
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 11);
    for row in &rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 9);
        for c in &cols[..8] {
            let mantissa = c.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17, "{c}");
        }
    }
    let summary = json(&run.join("summary.json"));
    let obj = summary.as_object().unwrap();
    for f in SUMMARY_FIELDS {
        assert!(obj.contains_key(f), "missing {f}");
    }
    assert_eq!(obj.len(), SUMMARY_FIELDS.len() - 1);
    let cks: Vec<_> = fs::read_dir(run.join("checkpoints")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(cks.len(), 2);
}

#[test]
fn taming_sweep_report() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("grid.size=16\nscenario.amplitude=5.0\ntime.t_end=0.2\nexperiment.kind='sweep_taming'\nexperiment.N_list=[1.0,2.0,4.0,8.0]\nexperiment.workers=2");
    let r = run_experiment_in(&c, dir.path()).unwrap();
    assert_eq!(r.status, ExitStatus::Success, "{:?}", r.failures);
    let s = json(&dir.path().join("sweep.json"));
    assert_eq!(s["kind"], "sweep_taming");
    assert_eq!(s["runs"].as_array().unwrap().len(), 4);
    assert_eq!(s["activation_non_increasing"], true);
    assert_eq!(s["h1_growth"]["bounded"], true);
    assert_eq!(s["h2_growth"]["entries"].as_array().unwrap().len(), 4);
    assert_eq!(s["distances"].as_array().unwrap().len(), 6);
    for n in ["N_1", "N_2", "N_4", "N_8"] {
        assert!(dir.path().join(n).join("summary.json").exists());
    }
}

#[test]
fn resolution_sweep_differences_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("scenario.name='random_spectrum'\nscenario.amplitude=1.0\nscenario.k0=2\ntime.t_end=0.1\nexperiment.kind='sweep_resolution'\nexperiment.M_list=[8,16,32]");
    let r = run_experiment_in(&c, dir.path()).unwrap();
    assert_eq!(r.status, ExitStatus::Success);
    let s = json(&dir.path().join("sweep.json"));
    assert_eq!(s["grid_sizes"], serde_json::json!([8, 16, 32]));
    assert_eq!(s["pairs"].as_array().unwrap().len(), 2);
    assert_eq!(s["differences_decreasing"], true, "{s}");
}

#[test]
fn compare_report_on_inactive_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("grid.size=16\nscenario.amplitude=0.1\ntaming.N=1.0\ntime.t_end=0.2\nexperiment.kind='compare'\nexperiment.subbox_lo=[0.0,0.0,0.0]\nexperiment.subbox_hi=[3.0,3.0,3.0]");
    let r = run_experiment_in(&c, dir.path()).unwrap();
    assert_eq!(r.status, ExitStatus::Success);
    let s = json(&dir.path().join("sweep.json"));
    assert!(s["distance_sq_full"].as_f64().unwrap() <= 1e-10);
    assert!(s["distance_sq_subbox"].as_f64().unwrap() <= 1e-10);
    assert_eq!(s["coincidence_expected"], true);
    assert_eq!(s["coincidence_holds"], true);
}

#[test]
fn blow_up_status_and_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("grid.size=16\ntaming.enabled=false\nscenario.amplitude=30.0\ntime.t_end=1.0\ntime.dt_min=1e-2\ntime.dt_max=2e-2");
    let r = run_experiment_in(&c, dir.path()).unwrap();
    assert_eq!(r.status, ExitStatus::BlowUp);
    assert_eq!(r.status.code(), 3);
    let s = json(&dir.path().join("run").join("summary.json"));
    assert!(s["blow_up"]["t"].is_number());
}

#[test]
fn resume_from_written_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("grid.size=16\nscenario.amplitude=2.0\ntime.t_end=0.1\noutput.checkpoint_stride=5");
    run_experiment_in(&c, dir.path()).unwrap();
    let ck = dir.path().join("run/checkpoints/checkpoint_000005.bin");
    let r = resume_experiment_in(&c, &ck, dir.path()).unwrap();
    assert_eq!(r.status, ExitStatus::Success);
    let full = fs::read_to_string(dir.path().join("run/timeseries.csv")).unwrap();
    let resumed = fs::read_to_string(dir.path().join("resumed/timeseries.csv")).unwrap();
    let tail = |s: &str, n: usize| s.lines().rev().take(n).map(|l| l.split(',').take(6).collect::<Vec<_>>().join(",")).collect::<Vec<_>>();
    assert_eq!(tail(&full, 6), tail(&resumed, 6));
    let other = cfg("grid.size=32\ntime.t_end=0.1");
    assert!(resume_experiment_in(&other, &ck, dir.path()).is_err());
}
