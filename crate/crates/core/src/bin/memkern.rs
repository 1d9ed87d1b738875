use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use memkern::config::RunConfig;
use memkern::harness::{
    configure_threads, export_moments, import_moments_run, render_convergence, render_stability,
    run_convergence_study, run_oracle, run_pipeline, run_stability_sweep, write_atomically,
};
use memkern::Error;

#[derive(Parser)]
#[command(
    name = "memkern",
    version,
    about = "Stabilized memory-kernel hierarchy runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's `output` or `./out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the oracle switch from the config.
    #[arg(long, value_enum)]
    oracle: Option<Toggle>,
    /// Accepted for interface stability; runs are deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: model, moments, hierarchy, projection, kernel, GQME, spectra.
    Run(Common),
    /// Unstable-mode census over truncation orders.
    SweepStability {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40")]
        sweep_n: Vec<usize>,
    },
    /// Kernel error at `t*` over truncation orders against the oracle.
    SweepConvergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "4,8,12,16")]
        sweep_n: Vec<usize>,
        #[arg(long, default_value_t = 5.0)]
        t_star: f64,
    },
    /// Exact kernel and correlation for the configured model.
    Oracle(Common),
    /// Write the model's moments as CSV.
    ExportMoments(Common),
    /// Run the downstream chain from a moments CSV.
    ImportMoments {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        moments: PathBuf,
    },
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), Error> {
    let mut cfg = RunConfig::load(&common.config)?;
    match common.oracle {
        Some(Toggle::On) => cfg.oracle.enabled = true,
        Some(Toggle::Off) => cfg.oracle.enabled = false,
        None => {}
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(common) => {
            let (cfg, out) = load(&common)?;
            let m = run_pipeline(&cfg, &out)?;
            println!(
                "wrote {} artifacts to {} (unstable modes removed: {}, max Re after projection: {:.3e})",
                m.artifacts.len(),
                out.display(),
                m.stability.n_unstable,
                m.stability.post_max_re
            );
        }
        Command::SweepStability { common, sweep_n } => {
            let (cfg, out) = load(&common)?;
            let rows = run_stability_sweep(&cfg, &sweep_n)?;
            for r in &rows {
                println!(
                    "N={:>3} unstable={:>3} maxRe={:>12.4e} minRe={:>12.4e} post={:>11.3e}",
                    r.order,
                    r.n_unstable,
                    r.max_re_unstable.unwrap_or(f64::NAN),
                    r.min_re_unstable.unwrap_or(f64::NAN),
                    r.post_max_re
                );
            }
            let bytes = render_stability(&rows, &cfg.hash())?;
            write_atomically(&out, &[("stability_sweep.csv".into(), bytes)])?;
        }
        Command::SweepConvergence {
            common,
            sweep_n,
            t_star,
        } => {
            let (cfg, out) = load(&common)?;
            let rows = run_convergence_study(&cfg, &sweep_n, t_star, None)?;
            for r in &rows {
                println!("N={:>3} K1(t*)={:.6e} err={:.3e}", r.order, r.k1, r.error);
            }
            let bytes = render_convergence(&rows, &cfg.hash())?;
            write_atomically(&out, &[("convergence.csv".into(), bytes)])?;
        }
        Command::Oracle(common) => {
            let (cfg, out) = load(&common)?;
            for p in run_oracle(&cfg, &out)? {
                println!("{}", p.display());
            }
        }
        Command::ExportMoments(common) => {
            let (cfg, out) = load(&common)?;
            let target = if out.extension().is_some() {
                out
            } else {
                out.join("moments.csv")
            };
            println!("{}", export_moments(&cfg, &target)?.display());
        }
        Command::ImportMoments { common, moments } => {
            let (cfg, out) = load(&common)?;
            let m = import_moments_run(&cfg, &moments, &out)?;
            println!("wrote {} artifacts to {}", m.artifacts.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
