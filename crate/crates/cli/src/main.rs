//! Command-line front end: single runs, sweeps, comparisons, resume and a
//! standalone dump of the taming function.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tamed_ns::config::{ExperimentKind, SimConfig};
use tamed_ns::experiment::{
    output_root, resume_experiment_in, run_experiment_in, ExitStatus, ExperimentReport,
};
use tamed_ns::output::fmt17;
use tamed_ns::taming::TamingProfile;
use tamed_ns::Error;

#[derive(Parser)]
#[command(name = "tamed-ns", version, about = "Tamed 3D Navier-Stokes on the periodic torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Configuration file (TOML key-value syntax); defaults apply when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a key, e.g. `--set taming.N=4`. Repeatable; overrides win over the file.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Single run (or the experiment kind named in the config).
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Continue from a checkpoint instead of the initial condition.
        #[arg(long, value_name = "CHECKPOINT")]
        resume: Option<PathBuf>,
    },
    /// Runs over `experiment.N_list`.
    SweepTaming {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Runs over `experiment.M_list`.
    SweepResolution {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Tamed and untamed runs of the same scenario.
    Compare {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Continue a run from a checkpoint file.
    Resume {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(value_name = "CHECKPOINT")]
        checkpoint: PathBuf,
    },
    /// Tabulate g_N, g_N' and g_N(r) − (r − N − 1/2)/ν as CSV and check the
    /// branch contract on the samples.
    CheckGn {
        #[arg(short = 'N', long = "level", default_value_t = 1.0)]
        level: f64,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        /// Largest r in the table (default N + 3).
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Write the table here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn load(args: &ConfigArgs, kind: Option<ExperimentKind>) -> tamed_ns::Result<SimConfig> {
    let mut overrides = SimConfig::split_overrides(&args.overrides)?;
    if let Some(k) = kind {
        let name = match k {
            ExperimentKind::Single => "single",
            ExperimentKind::SweepTaming => "sweep_taming",
            ExperimentKind::SweepResolution => "sweep_resolution",
            ExperimentKind::Compare => "compare",
        };
        overrides.push(("experiment.kind".into(), format!("'{name}'")));
    }
    match &args.config {
        Some(p) => SimConfig::from_file(p, &overrides),
        None => SimConfig::parse("", &overrides),
    }
}

fn report(r: &ExperimentReport) -> ExitCode {
    for (label, s) in &r.summaries {
        eprintln!(
            "{label}: M={} T={} samples={} energy residual {:.3e} activation {:.4}",
            s.grid_size, s.t_end, s.sample_count, s.energy_residual_max, s.activation_measure
        );
    }
    for f in &r.failures {
        eprintln!("failure: {f}");
    }
    eprintln!("artifacts in {}", r.root.display());
    ExitCode::from(r.status.code() as u8)
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    let code = match e {
        Error::Io(_) => 1,
        other => ExitStatus::from_error(other).code(),
    };
    ExitCode::from(code as u8)
}

fn experiment(args: &ConfigArgs, kind: Option<ExperimentKind>) -> tamed_ns::Result<ExperimentReport> {
    let cfg = load(args, kind)?;
    run_experiment_in(&cfg, &output_root(&cfg))
}

fn resume(args: &ConfigArgs, checkpoint: &Path) -> tamed_ns::Result<ExperimentReport> {
    let cfg = load(args, Some(ExperimentKind::Single))?;
    resume_experiment_in(&cfg, checkpoint, &output_root(&cfg))
}

fn check_gn(level: f64, nu: f64, r_max: Option<f64>, samples: usize, output: Option<&Path>) -> tamed_ns::Result<bool> {
    let p = TamingProfile::new(level, nu)?;
    let r_max = r_max.unwrap_or(level + 3.0);
    if !(r_max > 0.0) || samples < 2 {
        return Err(Error::Config("check-gn needs r_max > 0 and at least 2 samples".into()));
    }
    let mut out = String::from("r,g,g_prime,slack\n");
    let mut ok = true;
    for i in 0..samples {
        let r = r_max * i as f64 / (samples - 1) as f64;
        let g = p.eval_g(r)?;
        let gp = p.eval_g_prime(r)?;
        let slack = g - (r - level - 0.5) / nu;
        ok &= g >= 0.0 && (0.0..=1.0 / nu).contains(&gp) && slack >= -1e-10;
        if r <= level {
            ok &= g == 0.0;
        }
        if r >= level + 1.0 {
            ok &= slack.abs() <= 1e-12 * (1.0 + r / nu);
        }
        out.push_str(&format!("{},{},{},{}\n", fmt17(r), fmt17(g), fmt17(gp), fmt17(slack)));
    }
    match output {
        Some(path) => std::fs::write(path, out)?,
        None => std::io::stdout().lock().write_all(out.as_bytes())?,
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { cfg, resume: Some(ck) } => resume(cfg, ck),
        Command::Run { cfg, resume: None } => experiment(cfg, None),
        Command::SweepTaming { cfg } => experiment(cfg, Some(ExperimentKind::SweepTaming)),
        Command::SweepResolution { cfg } => experiment(cfg, Some(ExperimentKind::SweepResolution)),
        Command::Compare { cfg } => experiment(cfg, Some(ExperimentKind::Compare)),
        Command::Resume { cfg, checkpoint } => resume(cfg, checkpoint),
        Command::CheckGn {
            level,
            nu,
            r_max,
            samples,
            output,
        } => {
            return match check_gn(*level, *nu, *r_max, *samples, output.as_deref()) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => {
                    eprintln!("g_N contract violated on the sampled range");
                    ExitCode::from(ExitStatus::CheckFailure.code() as u8)
                }
                Err(e) => fail(&e),
            };
        }
    };
    match result {
        Ok(r) => report(&r),
        Err(e) => fail(&e),
    }
}
