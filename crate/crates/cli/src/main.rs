use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use osdrb::experiment::{self, oracle, ExperimentConfig, Scale};
use osdrb::Error;

#[derive(Parser)]
#[command(name = "osdrb", version, about = "Orthosymplectic dynamical reduced basis experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full-order reference, dynamical and global methods and write CSV artifacts.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Time per-step basis updates against the full dimension.
    BenchScaling {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Parse the config and check its invariants.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Dense brute-force cross-checks (cayley, dcay, bch, exp, retraction, inverse-tangent or all).
    Oracle {
        suite: String,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for per-parameter evaluations.
    #[arg(long)]
    threads: Option<usize>,
    /// Reduced-resolution preset.
    #[arg(long, conflicts_with = "paper")]
    desk: bool,
    /// Full-resolution preset.
    #[arg(long)]
    paper: bool,
}

impl Common {
    fn scale(&self) -> Option<Scale> {
        match (self.desk, self.paper) {
            (true, _) => Some(Scale::Desk),
            (_, true) => Some(Scale::Paper),
            _ => None,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Io(_) => 1,
        _ => 3,
    }
}

fn load(path: &PathBuf, common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(scale) = common.scale() {
        cfg.apply_scale(scale);
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig, common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn set_threads(common: &Common) -> Result<(), Error> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, common } => {
            set_threads(&common)?;
            let cfg = load(&config, &common)?;
            let out = out_dir(&cfg, &common);
            let summary = experiment::run_experiment(&cfg)?;
            experiment::write_artifacts(&cfg, &summary, &out)?;
            println!("{:<22} {:>4} {:>12} {:>14}", "method", "2k", "runtime [s]", "error at T");
            for r in &summary.errors {
                println!("{:<22} {:>4} {:>12.3} {:>14.6e}", r.method, r.two_k, r.runtime_seconds, r.frobenius_error_at_t);
            }
            println!("max manifold defect {:.3e} (gate {})", summary.max_manifold_defect, if summary.manifold_gate_passed { "passed" } else { "FAILED" });
            println!("artifacts written to {}", out.display());
            if !summary.manifold_gate_passed {
                return Err(Error::Model(format!(
                    "manifold defect {:.3e} exceeds gate {:.1e}",
                    summary.max_manifold_defect, cfg.tolerance.manifold_gate
                )));
            }
            Ok(())
        }
        Command::BenchScaling { config, common } => {
            set_threads(&common)?;
            let cfg = load(&config, &common)?;
            let out = out_dir(&cfg, &common);
            let result = experiment::run_scaling_bench(&cfg)?;
            std::fs::create_dir_all(&out)?;
            experiment::write_scaling(&result, &out)?;
            println!("{:>6} {:<10} {:>14} {:>14}", "m", "method", "median [ns]", "iqr [ns]");
            for r in &result.rows {
                println!("{:>6} {:<10} {:>14.0} {:>14.0}", r.m, r.method, r.median_ns, r.iqr_ns);
            }
            for (name, slope) in &result.slopes {
                println!("{name}: log-log slope {slope:.3}");
            }
            Ok(())
        }
        Command::Validate { config, common } => {
            let cfg = load(&config, &common)?;
            let model = cfg.build_model()?;
            println!(
                "ok: {} with p = {}, sizes {:?}, dt = {}, T = {}",
                model.descriptor(),
                cfg.parameter_grid()?.len(),
                cfg.reduction.sizes,
                cfg.time.dt,
                cfg.time.final_time
            );
            Ok(())
        }
        Command::Oracle { suite, instances, common } => {
            set_threads(&common)?;
            let seed = common.seed.unwrap_or(42);
            let outcomes = oracle::run_suites(&suite, instances, seed)?;
            println!("{:<16} {:>9} {:>14} {:>10} {:>6}", "suite", "instances", "max rel err", "tol", "");
            for o in &outcomes {
                println!("{:<16} {:>9} {:>14.3e} {:>10.0e} {:>6}", o.suite, o.instances, o.max_rel_error, o.tol, if o.pass { "PASS" } else { "FAIL" });
            }
            if let Some(out) = &common.out {
                experiment::write_json(&out.join("oracle.json"), &outcomes)?;
            }
            if outcomes.iter().all(|o| o.pass) {
                Ok(())
            } else {
                Err(Error::Model("oracle mismatch".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
