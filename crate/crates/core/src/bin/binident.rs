use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use binident::commands;
use binident::config::{load_config, Experiment, ExperimentConfig};
use binident::error::{Error, Result};

#[derive(Parser)]
#[command(name = "binident", version, about = "Binary-observation identification under privacy noise and tampering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML, or JSON config echo)
    #[arg(long)]
    config: PathBuf,
    /// Number of seeded trials (overrides run.trials)
    #[arg(long)]
    seeds: Option<usize>,
    /// Base seed (overrides run.seed)
    #[arg(long, env = "BINIDENT_SEED")]
    seed: Option<u64>,
    /// Worker threads, 0 = all cores (overrides run.jobs)
    #[arg(long)]
    jobs: Option<usize>,
    /// Number of updates K (overrides algorithm.steps)
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Noise level for an (epsilon, delta) budget at a given sensitivity
    Calibrate {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        sensitivity: f64,
    },
    /// Empirical vs analytic mean of the received bit
    CheckChannel {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        gap: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, env = "BINIDENT_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Single-center identification
    Identify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Networked identification
    Distributed {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean-square convergence rate fit
    Rate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        k_lo: Option<u64>,
        #[arg(long)]
        k_hi: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Resolved {
    exp: Experiment,
    trials: usize,
    seed: u64,
    jobs: usize,
}

fn resolve(args: &RunArgs) -> Result<Resolved> {
    let mut cfg: ExperimentConfig = load_config(&args.config)?;
    if let Some(k) = args.steps {
        cfg.algorithm.steps = k;
    }
    if let Some(b) = args.beta {
        cfg.algorithm.beta = b;
    }
    if let Some(p) = args.p {
        cfg.channel.p = p;
    }
    if let Some(q) = args.q {
        cfg.channel.q = q;
    }
    if let Some(t) = args.seeds {
        cfg.run.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.run.seed = s;
    }
    if let Some(j) = args.jobs {
        cfg.run.jobs = j;
    }
    let exp = Experiment::from_config(&cfg)?;
    Ok(Resolved {
        trials: cfg.run.trials,
        seed: cfg.run.seed,
        jobs: cfg.run.jobs,
        exp,
    })
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::Serialize(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Calibrate {
            epsilon,
            delta,
            sensitivity,
        } => print_json(&commands::calibrate(epsilon, delta, sensitivity)?),
        Command::CheckChannel {
            p,
            q,
            sigma,
            gap,
            samples,
            seed,
        } => print_json(&commands::check_channel(p, q, sigma, gap, samples, seed)?),
        Command::Identify { run, out } => {
            let r = resolve(&run)?;
            let o = commands::identify(&r.exp, r.trials, r.seed, r.jobs, &out)?;
            eprintln!(
                "{} trials, mean final err_sq {:.3e}, wrote {} files to {}",
                r.trials,
                o.summary.mean_final_error,
                o.files.len(),
                out.display()
            );
            Ok(())
        }
        Command::Distributed { run, out } => {
            let r = resolve(&run)?;
            let o = commands::distributed(&r.exp, r.trials, r.seed, r.jobs, &out)?;
            eprintln!(
                "{} trials, lambda2 {:.6}, network mean final err_sq {:.3e}, wrote {} files to {}",
                r.trials,
                o.summary.lambda2,
                o.summary.network_mean_final_error,
                o.files.len(),
                out.display()
            );
            Ok(())
        }
        Command::Rate { run, k_lo, k_hi, out } => {
            let r = resolve(&run)?;
            let lo = k_lo.unwrap_or(r.exp.config.run.k_lo);
            let hi = k_hi.unwrap_or_else(|| r.exp.k_hi());
            let o = commands::rate(&r.exp, r.trials, r.seed, r.jobs, lo, hi, Some(&out))?;
            print_json(&o.report)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({
                "error": e.category(),
                "categories": e.categories(),
                "message": e.to_string(),
            });
            eprintln!("{body}");
            ExitCode::from(match e {
                Error::Validation(_) | Error::Parse { .. } => 2,
                _ => 1,
            })
        }
    }
}
