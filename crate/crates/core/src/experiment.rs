//! Experiment orchestration: runs, sweeps, comparisons and their artifacts.
//!
//! Layout under the output root:
//!
//! ```text
//! <root>/<label>/timeseries.csv
//! <root>/<label>/summary.json
//! <root>/<label>/checkpoints/checkpoint_<sample>.bin
//! <root>/sweep.json            (sweeps and comparisons)
//! ```

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentKind, RunDescriptor, SimConfig};
use crate::diagnostics::{
    compare_runs, timeseries_csv, verify_h1_growth, verify_h2_growth, BlowUpRecord, GrowthReport, Region,
    RunSummary, Snapshot,
};
use crate::error::{Error, Result};
use crate::integrator::{run_with, RunOptions, RunOutputs, TimeState};
use crate::output::{ser_f17, ser_opt_f17};
use crate::spectral::checkpoint::{read_checkpoint, write_checkpoint, CheckpointHeader};
use crate::spectral::GridSpec;

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_ROOT_ENV: &str = "TAMED_NS_OUTPUT_ROOT";

/// Distance below which tamed and untamed runs count as coincident.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-9;

/// Process exit status of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Success,
    ConfigError,
    BlowUp,
    CheckFailure,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::ConfigError => 2,
            ExitStatus::BlowUp => 3,
            ExitStatus::CheckFailure => 4,
        }
    }

    /// Status for an error that aborted an experiment.
    pub fn from_error(e: &Error) -> Self {
        match e {
            Error::BlowUp { .. } => ExitStatus::BlowUp,
            Error::Check(_) => ExitStatus::CheckFailure,
            _ => ExitStatus::ConfigError,
        }
    }
}

/// Output root: the environment override if set, else `output.dir`.
pub fn output_root(cfg: &SimConfig) -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| cfg.output.dir.clone())
}

/// Outcome of [`run_experiment`].
#[derive(Debug)]
pub struct ExperimentReport {
    pub status: ExitStatus,
    pub root: PathBuf,
    /// Human-readable reasons for a non-zero status.
    pub failures: Vec<String>,
    pub summaries: Vec<(String, RunSummary)>,
}

struct Finished {
    label: String,
    config: SimConfig,
    outputs: RunOutputs,
}

fn write_run(dir: &Path, outputs: &RunOutputs) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("timeseries.csv"), timeseries_csv(&outputs.samples))?;
    let mut json = outputs.summary.to_json();
    json.push('\n');
    fs::write(dir.join("summary.json"), json)?;
    Ok(())
}

fn write_state(path: &Path, cfg: &SimConfig, state: &TimeState) -> Result<()> {
    let header = CheckpointHeader::new(
        state.u.grid(),
        state.t,
        cfg.physics.nu,
        cfg.taming.enabled.then_some(cfg.taming.level),
        state.step,
        state.dt,
    );
    let w = BufWriter::new(fs::File::create(path)?);
    write_checkpoint(w, &header, &state.u)
}

fn execute(desc: &RunDescriptor, root: &Path, opts_template: RunTemplate) -> Result<Finished> {
    let dir = root.join(&desc.label);
    let ck_dir = dir.join("checkpoints");
    let cfg = &desc.config;
    let mut on_ck = |i: usize, s: &TimeState| -> Result<()> {
        fs::create_dir_all(&ck_dir)?;
        write_state(&ck_dir.join(format!("checkpoint_{i:06}.bin")), cfg, s)
    };
    let opts = RunOptions {
        keep_snapshots: opts_template.keep_snapshots,
        snapshot_grid: opts_template.snapshot_grid,
        resume: opts_template.resume,
        on_checkpoint: Some(&mut on_ck),
    };
    let outputs = run_with(cfg, opts)?;
    write_run(&dir, &outputs)?;
    Ok(Finished {
        label: desc.label.clone(),
        config: desc.config.clone(),
        outputs,
    })
}

#[derive(Clone, Default)]
struct RunTemplate {
    keep_snapshots: bool,
    snapshot_grid: Option<GridSpec>,
    resume: Option<TimeState>,
}

fn run_all(descs: Vec<(RunDescriptor, RunTemplate)>, root: &Path, workers: usize) -> Result<Vec<Finished>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        descs
            .into_par_iter()
            .map(|(d, t)| execute(&d, root, t))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .collect()
}

/// Run the configured experiment under the output root (see [`output_root`]).
pub fn run_experiment(cfg: &SimConfig) -> Result<ExperimentReport> {
    run_experiment_in(cfg, &output_root(cfg))
}

/// Run the configured experiment, writing artifacts under `root`.
pub fn run_experiment_in(cfg: &SimConfig, root: &Path) -> Result<ExperimentReport> {
    cfg.validate()?;
    fs::create_dir_all(root)?;
    let descs = cfg.run_descriptors();
    let kind = cfg.experiment.kind;
    let templates: Vec<RunTemplate> = match kind {
        ExperimentKind::Single => vec![RunTemplate::default()],
        ExperimentKind::SweepTaming | ExperimentKind::Compare => descs
            .iter()
            .map(|_| RunTemplate {
                keep_snapshots: true,
                ..Default::default()
            })
            .collect(),
        ExperimentKind::SweepResolution => {
            let m = &cfg.experiment.m_list;
            (0..m.len())
                .map(|i| RunTemplate {
                    keep_snapshots: true,
                    snapshot_grid: if i + 1 == m.len() && i > 0 {
                        Some(GridSpec::new(m[i - 1]).expect("validated"))
                    } else {
                        None
                    },
                    resume: None,
                })
                .collect()
        }
    };
    let finished = run_all(descs.into_iter().zip(templates).collect(), root, cfg.experiment.workers)?;

    let mut failures = Vec::new();
    let mut blow_up = false;
    for f in &finished {
        let s = &f.outputs.summary;
        if let Some(b) = &s.blow_up {
            blow_up = true;
            failures.push(format!("{}: blow-up at t = {} (sup|u| = {})", f.label, b.t, b.sup_u));
        }
        if !s.divergence_free {
            failures.push(format!(
                "{}: divergence ratio {} exceeds tolerance",
                f.label, s.max_divergence_ratio
            ));
        }
        if !s.l2_bound_holds {
            failures.push(format!("{}: L2 bound violated (slack {})", f.label, s.l2_bound_worst_slack));
        }
    }

    let sweep = match kind {
        ExperimentKind::Single => None,
        ExperimentKind::SweepTaming => Some(taming_sweep_report(&finished, &mut failures)?),
        ExperimentKind::SweepResolution => Some(resolution_sweep_report(&finished)?),
        ExperimentKind::Compare => Some(compare_report(cfg, &finished, &mut failures)?),
    };
    if let Some(json) = sweep {
        fs::write(root.join("sweep.json"), json + "\n")?;
    }

    let status = if blow_up {
        ExitStatus::BlowUp
    } else if !failures.is_empty() {
        ExitStatus::CheckFailure
    } else {
        ExitStatus::Success
    };
    Ok(ExperimentReport {
        status,
        root: root.to_path_buf(),
        failures,
        summaries: finished
            .into_iter()
            .map(|f| (f.label, f.outputs.summary))
            .collect(),
    })
}

/// Continue a single run from a checkpoint; artifacts go to `<root>/resumed`.
pub fn resume_experiment_in(cfg: &SimConfig, checkpoint: &Path, root: &Path) -> Result<ExperimentReport> {
    cfg.validate()?;
    let file = fs::File::open(checkpoint)
        .map_err(|e| Error::config(format!("cannot open checkpoint {}: {e}", checkpoint.display())))?;
    let (header, u) = read_checkpoint(std::io::BufReader::new(file))?;
    if header.grid_size != cfg.grid.size {
        return Err(Error::GridMismatch {
            expected: cfg.grid.size,
            found: header.grid_size,
        });
    }
    if header.nu != cfg.physics.nu {
        return Err(Error::config(format!(
            "checkpoint nu = {} differs from physics.nu = {}",
            header.nu, cfg.physics.nu
        )));
    }
    let mut single = cfg.clone();
    single.experiment.kind = ExperimentKind::Single;
    let desc = RunDescriptor {
        label: "resumed".into(),
        config: single,
    };
    let template = RunTemplate {
        resume: Some(TimeState {
            t: header.time,
            u,
            step: header.step,
            dt: header.dt,
        }),
        ..Default::default()
    };
    fs::create_dir_all(root)?;
    let f = execute(&desc, root, template)?;
    let mut failures = Vec::new();
    if let Some(b) = &f.outputs.blow_up {
        failures.push(format!("blow-up at t = {} (sup|u| = {})", b.t, b.sup_u));
    }
    Ok(ExperimentReport {
        status: if f.outputs.blow_up.is_some() {
            ExitStatus::BlowUp
        } else {
            ExitStatus::Success
        },
        root: root.to_path_buf(),
        failures,
        summaries: vec![(f.label, f.outputs.summary)],
    })
}

pub fn resume_experiment(cfg: &SimConfig, checkpoint: &Path) -> Result<ExperimentReport> {
    resume_experiment_in(cfg, checkpoint, &output_root(cfg))
}

#[derive(Serialize)]
struct TamingRow {
    label: String,
    #[serde(rename = "N", serialize_with = "ser_f17")]
    level: f64,
    #[serde(serialize_with = "ser_f17")]
    activation_measure: f64,
    #[serde(serialize_with = "ser_opt_f17")]
    first_activation_time: Option<f64>,
    #[serde(serialize_with = "ser_f17")]
    sup_h0sq: f64,
    #[serde(serialize_with = "ser_f17")]
    int_h1sq: f64,
    #[serde(serialize_with = "ser_f17")]
    sup_h1sq: f64,
    #[serde(serialize_with = "ser_f17")]
    int_h2sq: f64,
    #[serde(serialize_with = "ser_f17")]
    sup_h2sq: f64,
    #[serde(serialize_with = "ser_f17")]
    energy_residual_max: f64,
    blow_up: Option<BlowUpRecord>,
}

#[derive(Serialize)]
struct PairDistance {
    a: String,
    b: String,
    #[serde(serialize_with = "ser_f17")]
    distance_sq: f64,
}

#[derive(Serialize)]
struct TamingSweep {
    kind: &'static str,
    runs: Vec<TamingRow>,
    /// Sample interval used as slack in the monotonicity check.
    #[serde(serialize_with = "ser_f17")]
    activation_slack: f64,
    activation_non_increasing: bool,
    h1_growth: GrowthReport,
    h2_growth: GrowthReport,
    distances: Vec<PairDistance>,
}

fn completed_snapshots(f: &Finished) -> Option<&[Snapshot]> {
    f.outputs.blow_up.is_none().then_some(f.outputs.snapshots.as_slice())
}

fn pair_distances(finished: &[Finished]) -> Result<Vec<PairDistance>> {
    let mut out = Vec::new();
    for i in 0..finished.len() {
        for j in i + 1..finished.len() {
            let (a, b) = (&finished[i], &finished[j]);
            if let (Some(sa), Some(sb)) = (completed_snapshots(a), completed_snapshots(b)) {
                out.push(PairDistance {
                    a: a.label.clone(),
                    b: b.label.clone(),
                    distance_sq: compare_runs(sa, sb, Region::Full)?,
                });
            }
        }
    }
    Ok(out)
}

/// Non-increasing across the sweep, allowing each step to rise by `slack`.
pub fn non_increasing_with_slack(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

fn taming_sweep_report(finished: &[Finished], failures: &mut Vec<String>) -> Result<String> {
    let summaries: Vec<RunSummary> = finished.iter().map(|f| f.outputs.summary.clone()).collect();
    let h1 = verify_h1_growth(&summaries)?;
    let h2 = verify_h2_growth(&summaries)?;
    if !h1.bounded {
        failures.push(format!("H1 growth ratio {} exceeds bound", h1.max_ratio));
    }
    if !h2.bounded {
        failures.push(format!("H2 growth ratio {} exceeds bound", h2.max_ratio));
    }
    let slack = finished[0].config.time.sample_interval;
    let measures: Vec<f64> = summaries.iter().map(|s| s.activation_measure).collect();
    let report = TamingSweep {
        kind: "sweep_taming",
        runs: finished
            .iter()
            .map(|f| {
                let s = &f.outputs.summary;
                TamingRow {
                    label: f.label.clone(),
                    level: f.config.taming.level,
                    activation_measure: s.activation_measure,
                    first_activation_time: s.first_activation_time,
                    sup_h0sq: s.sup_h0sq,
                    int_h1sq: s.int_h1sq,
                    sup_h1sq: s.sup_h1sq,
                    int_h2sq: s.int_h2sq,
                    sup_h2sq: s.sup_h2sq,
                    energy_residual_max: s.energy_residual_max,
                    blow_up: s.blow_up,
                }
            })
            .collect(),
        activation_slack: slack,
        activation_non_increasing: non_increasing_with_slack(&measures, slack),
        h1_growth: h1,
        h2_growth: h2,
        distances: pair_distances(finished)?,
    };
    Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
}

#[derive(Serialize)]
struct ResolutionPair {
    coarse: usize,
    fine: usize,
    /// `∫₀ᵀ‖u_coarse − u_fine‖²` with the fine run truncated to the coarse grid.
    #[serde(serialize_with = "ser_opt_f17")]
    distance_sq: Option<f64>,
    /// `‖u_coarse(T) − u_fine(T)‖` on the coarse grid.
    #[serde(serialize_with = "ser_opt_f17")]
    final_distance: Option<f64>,
}

#[derive(Serialize)]
struct ResolutionSweep {
    kind: &'static str,
    grid_sizes: Vec<usize>,
    pairs: Vec<ResolutionPair>,
    differences_decreasing: bool,
    #[serde(serialize_with = "crate::output::ser_vec_f17")]
    energy_residuals: Vec<f64>,
}

fn resolution_sweep_report(finished: &[Finished]) -> Result<String> {
    let mut pairs = Vec::new();
    for w in finished.windows(2) {
        let (c, f) = (&w[0], &w[1]);
        let coarse = c.outputs.final_state.u.grid();
        let (distance_sq, final_distance) = match (completed_snapshots(c), completed_snapshots(f)) {
            (Some(sc), Some(sf)) => {
                let sf: Vec<Snapshot> = sf
                    .iter()
                    .map(|s| Snapshot {
                        t: s.t,
                        u: s.u.resampled(coarse),
                    })
                    .collect();
                let d = compare_runs(sc, &sf, Region::Full)?;
                let fin = sc
                    .last()
                    .unwrap()
                    .u
                    .distance_sq(&sf.last().unwrap().u)?
                    .sqrt();
                (Some(d), Some(fin))
            }
            _ => (None, None),
        };
        pairs.push(ResolutionPair {
            coarse: coarse.size(),
            fine: f.outputs.summary.grid_size,
            distance_sq,
            final_distance,
        });
    }
    let d: Vec<Option<f64>> = pairs.iter().map(|p| p.distance_sq).collect();
    let differences_decreasing = d.iter().all(Option::is_some) && d.windows(2).all(|w| w[1] < w[0]);
    let report = ResolutionSweep {
        kind: "sweep_resolution",
        grid_sizes: finished.iter().map(|f| f.outputs.summary.grid_size).collect(),
        pairs,
        differences_decreasing,
        energy_residuals: finished.iter().map(|f| f.outputs.summary.energy_residual_max).collect(),
    };
    Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
}

#[derive(Serialize)]
struct CompareReport {
    kind: &'static str,
    #[serde(serialize_with = "ser_f17")]
    tamed_activation_measure: f64,
    #[serde(serialize_with = "ser_f17")]
    tamed_max_taming_dissipation: f64,
    #[serde(serialize_with = "ser_opt_f17")]
    distance_sq_full: Option<f64>,
    #[serde(serialize_with = "ser_opt_f17")]
    distance_sq_subbox: Option<f64>,
    /// Taming never switched on, so the runs must coincide.
    coincidence_expected: bool,
    coincidence_holds: Option<bool>,
}

fn compare_report(cfg: &SimConfig, finished: &[Finished], failures: &mut Vec<String>) -> Result<String> {
    let (tamed, untamed) = (&finished[0], &finished[1]);
    let max_diss = tamed
        .outputs
        .samples
        .iter()
        .map(|s| s.taming_dissipation)
        .fold(0.0_f64, f64::max);
    let (full, sub) = match (completed_snapshots(tamed), completed_snapshots(untamed)) {
        (Some(a), Some(b)) => {
            let full = compare_runs(a, b, Region::Full)?;
            let sub = match (cfg.experiment.subbox_lo, cfg.experiment.subbox_hi) {
                (Some(lo), Some(hi)) => Some(compare_runs(a, b, Region::SubBox { lo, hi })?),
                _ => None,
            };
            (Some(full), sub)
        }
        _ => (None, None),
    };
    let expected = tamed.outputs.summary.activation_measure == 0.0 && max_diss == 0.0;
    let holds = full.map(|d| d <= COINCIDENCE_TOLERANCE);
    if expected && holds == Some(false) {
        failures.push(format!(
            "tamed and untamed runs differ by {} although taming never activated",
            full.unwrap()
        ));
    }
    let report = CompareReport {
        kind: "compare",
        tamed_activation_measure: tamed.outputs.summary.activation_measure,
        tamed_max_taming_dissipation: max_diss,
        distance_sq_full: full,
        distance_sq_subbox: sub,
        coincidence_expected: expected,
        coincidence_holds: holds,
    };
    Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
}
