//! Command-line front end: exact OT solves, rate experiments, stability
//! checks, barycenters, independence tests and kernel diagnostics, driven by
//! JSON configs. All outputs are deterministic given the config seeds; exit
//! code 2 signals an acceptance-threshold failure for CI use.

mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::*;
use otmap::apps::{indep_test, plugin_barycenter, IndepConfig};
use otmap::baryproj::stability_report;
use otmap::experiments::run_rate_experiment;
use otmap::seeding::derive;
use otmap::smoothing::hermite_kernel;
use otmap::{solve_ot, w2_squared};

#[derive(Parser)]
#[command(name = "otmap", version, about = "Optimal transport map estimation toolkit")]
struct Cli {
    /// Thread count (affects wall time only, never results)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for data files
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the OT problem between two point-cloud CSV files
    Solve {
        source: PathBuf,
        target: PathBuf,
        /// Treat the last column as weights
        #[arg(long)]
        weighted: bool,
    },
    /// Run a rate experiment from a JSON config
    Rates {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the stability inequality on seeded instances
    Stability {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Plug-in barycenter of two point clouds
    Barycenter {
        #[arg(long)]
        config: PathBuf,
    },
    /// Independence test on paired samples
    Indep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the quadrature moment table of the order-(2s+2) kernel
    KernelCheck {
        #[arg(long, default_value_t = 1)]
        s: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: could not set thread count: {e}");
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output dir {}", cli.out.display()))?;
    match cli.command {
        Command::Solve { source, target, weighted } => {
            let flag = if weighted { Some(true) } else { None };
            let src = io::read_point_cloud(&source, flag)?;
            let tgt = io::read_point_cloud(&target, flag)?;
            let plan = solve_ot(&src, &tgt)?;
            println!("cost {}", plan.cost);
            io::write_plan_csv(&cli.out.join("plan.csv"), &plan)?;
            io::write_potentials_csv(&cli.out.join("potentials.csv"), &plan)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Rates { config, seed } => {
            let cfg: RatesConfig = load_config(&config, RATES_SCHEMA)?;
            let problem = cfg.problem.build()?;
            let seed = seed.unwrap_or(cfg.seed);
            let report = run_rate_experiment(
                &cfg.estimator,
                &problem,
                &cfg.n_grid,
                cfg.reps,
                seed,
                &cfg.params(),
            )?;
            let mut csv = Vec::new();
            report.write_csv(&mut csv)?;
            std::fs::write(cli.out.join("rates.csv"), csv)?;
            let summary = report.summary_json();
            std::fs::write(
                cli.out.join("rates_summary.json"),
                serde_json::to_string_pretty(&summary)?,
            )?;
            println!(
                "fitted slope {:?} (theoretical exponent {:?})",
                report.fitted_slope, report.theoretical_exponent
            );
            if let (Some(tol), Some(slope), Some(expo)) =
                (cfg.slope_tolerance, report.fitted_slope, report.theoretical_exponent)
            {
                if (slope + expo).abs() > tol {
                    println!("slope {slope:.4} misses -{expo:.4} by more than {tol:.4}");
                    return Ok(ExitCode::from(2));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Stability { config, seed } => {
            let cfg: StabilityConfig = load_config(&config, STABILITY_SCHEMA)?;
            let seed = seed.unwrap_or(cfg.seed);
            let problems: Vec<_> =
                cfg.problems.iter().map(|p| p.build()).collect::<otmap::Result<_>>()?;
            let mut held = 0usize;
            for k in 0..cfg.instances {
                let problem = &problems[k % problems.len()];
                let (m, n) = cfg.sizes[k % cfg.sizes.len()];
                let (src, tgt) = problem.sample_pair(m, n, derive(seed, k as u64))?;
                let rep = stability_report(&src, &tgt, problem)?;
                if rep.holds {
                    held += 1;
                } else {
                    println!(
                        "instance {k}: violated (lhs {} vs rhs {})",
                        rep.lhs,
                        rep.rhs_max_term + rep.rhs_phi_term
                    );
                }
            }
            println!("{held}/{} hold", cfg.instances);
            Ok(if held == cfg.instances { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Barycenter { config } => {
            let cfg: BarycenterConfig = load_config(&config, BARYCENTER_SCHEMA)?;
            let src = io::read_point_cloud(&cfg.source, None)?;
            let tgt = io::read_point_cloud(&cfg.target, None)?;
            let bary = plugin_barycenter(&src, &tgt)?;
            io::write_atoms_csv(&cli.out.join("barycenter.csv"), &bary.atoms, &bary.weights)?;
            let bm = bary.to_measure()?;
            println!(
                "barycenter written; W2^2 to source {}, to target {}",
                w2_squared(&bm, &src)?,
                w2_squared(&bm, &tgt)?
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Indep { config, seed } => {
            let cfg: IndepCliConfig = load_config(&config, INDEP_SCHEMA)?;
            let xs = io::read_point_cloud(&cfg.x, None)?;
            let ys = io::read_point_cloud(&cfg.y, None)?;
            let test_cfg = IndepConfig {
                alpha: cfg.alpha,
                null_draws: cfg.null_draws,
                null_seed: cfg.null_seed,
                cache_dir: std::env::var_os("OTMAP_CACHE_DIR").map(PathBuf::from),
            };
            let result = indep_test(
                xs.points(),
                ys.points(),
                &test_cfg,
                seed.unwrap_or(cfg.null_seed ^ 0x7465_7374),
            )?;
            let json = serde_json::to_string_pretty(&result)?;
            std::fs::write(cli.out.join("indep_result.json"), &json)?;
            println!("{json}");
            Ok(ExitCode::SUCCESS)
        }
        Command::KernelCheck { s } => {
            let kernel = hermite_kernel(s)?;
            println!(
                "order {} kernel, support radius {}",
                kernel.order(),
                kernel.support_radius()
            );
            println!("j,moment");
            let mut ok = true;
            for j in 0..=2 * s + 1 {
                let m = kernel.moment(j);
                println!("{j},{m:e}");
                let target = if j == 0 { 1.0 } else { 0.0 };
                if (m - target).abs() >= 1e-6 {
                    ok = false;
                }
            }
            println!("abs_moment_{},{:e}", 2 * s + 2, kernel.abs_moment(2 * s + 2));
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
    }
}
