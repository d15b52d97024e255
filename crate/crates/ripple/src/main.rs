//! Command-line driver: noise snapshots, linear and fixed-point solves,
//! norm estimation and the configured studies.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use ripple::experiments::{run_study, StudyConfig};
use ripple::fixed_point::{solve_fixed_point, FixedPointConfig};
use ripple::noise::{sample_white_noise, NoiseSample};
use ripple::norms::{
    default_t_grid, holder_neg_mollifier, holder_neg_semigroup, holder_pos, PairPlan,
};
use ripple::operators::RippleState;
use ripple::spectral::{
    read_snapshot, write_snapshot, MaskSpec, SpectralField, TorusGrid,
};

#[derive(Parser)]
#[command(name = "ripple", version, about = "Pseudospectral toolkit for the magnetization-ripple equation")]
struct Cli {
    /// Study configuration file (TOML); required by `study`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base RNG seed for noise sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Force sequential reductions; outputs are bit-identical either way.
    #[arg(long, global = true, default_value_t = false)]
    strict_reduction: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 128)]
    n1: usize,
    #[arg(long, default_value_t = 128)]
    n2: usize,
}

#[derive(Args)]
struct MaskArg {
    /// Mollifier mask: gaussian | quartic.
    #[arg(long, default_value = "gaussian")]
    mask: String,
}

#[derive(Subcommand)]
enum Command {
    /// Sample periodic white noise and write a RIPL snapshot.
    SampleNoise {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Solve L v = P xi for a sampled or loaded realization.
    SolveLinear {
        #[command(flatten)]
        grid: GridArgs,
        /// Read xi from a snapshot instead of sampling.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Compute the off-line product F^l = P(v_l d2 R v_l).
    OfflineProduct {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Mollification scale in (0, 1].
        #[arg(long, default_value_t = 0.0625)]
        ell: f64,
        #[command(flatten)]
        mask: MaskArg,
    },
    /// Run the Picard iteration and write w, u and an NDJSON report.
    FixedPoint {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-3)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0625)]
        ell: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 400)]
        max_iter: usize,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[command(flatten)]
        mask: MaskArg,
    },
    /// Run a configured study; exit code 2 if a tolerance fails.
    Study,
    /// Estimate a Hoelder norm of a snapshot field.
    Norm {
        #[arg(long)]
        input: PathBuf,
        /// Estimator variant: pos | neg | mollifier.
        #[arg(long, default_value = "pos")]
        variant: String,
        #[arg(long, allow_negative_numbers = true)]
        exponent: f64,
        /// Sampled pairs for the positive estimator on large grids.
        #[arg(long, default_value_t = 100_000)]
        pairs: usize,
        #[command(flatten)]
        mask: MaskArg,
    },
}

fn mask_of(name: &str) -> anyhow::Result<MaskSpec> {
    match name {
        "gaussian" => Ok(MaskSpec::gaussian()),
        "quartic" => Ok(MaskSpec::quartic()),
        other => bail!("unknown mask '{other}' (expected gaussian or quartic)"),
    }
}

fn load_or_sample(
    input: &Option<PathBuf>,
    grid: &GridArgs,
    seed: u64,
) -> anyhow::Result<NoiseSample> {
    match input {
        Some(path) => {
            let field = read_snapshot(path).with_context(|| format!("reading {path:?}"))?;
            Ok(NoiseSample::from_field(field, seed))
        }
        None => {
            let grid = TorusGrid::new(grid.n1, grid.n2)?;
            Ok(sample_white_noise(grid, seed))
        }
    }
}

fn save(field: &SpectralField, dir: &Path, name: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let hash = write_snapshot(field, &path)?;
    println!("wrote {} (sha256 {hash})", path.display());
    Ok(path)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("building worker pool")?;
    }
    match &cli.command {
        Command::SampleNoise { grid } => {
            let xi = load_or_sample(&None, grid, cli.seed)?;
            save(xi.field(), &cli.out, &format!("xi_seed{}.ripl", cli.seed))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::SolveLinear { grid, input } => {
            let xi = load_or_sample(input, grid, cli.seed)?;
            let v = ripple::operators::solve_linear(&xi);
            let res = ripple::operators::linear_residual(&v, &xi);
            println!("linear residual (spectral sup) = {res:.3e}");
            save(&v, &cli.out, &format!("v_seed{}.ripl", cli.seed))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::OfflineProduct {
            grid,
            input,
            ell,
            mask,
        } => {
            let xi = load_or_sample(input, grid, cli.seed)?;
            let state = RippleState::assemble(xi, 0.0, *ell, &mask_of(&mask.mask)?)?;
            save(
                &state.f_ell,
                &cli.out,
                &format!("F_ell{}_seed{}.ripl", ell, cli.seed),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::FixedPoint {
            grid,
            input,
            sigma,
            ell,
            tol,
            max_iter,
            epsilon,
            mask,
        } => {
            let mask = mask_of(&mask.mask)?;
            let xi = load_or_sample(input, grid, cli.seed)?;
            let state = RippleState::assemble(xi.clone(), *sigma, *ell, &mask)?;
            let cfg = FixedPointConfig {
                sigma: *sigma,
                ell: *ell,
                tol: *tol,
                max_iter: *max_iter,
                epsilon: *epsilon,
                compute_proxies: true,
            };
            let report = solve_fixed_point(&state.f_ell, &state.v_ell, &cfg)?;
            println!(
                "converged = {}, iterations = {}, EL residual = {:.3e}",
                report.converged, report.iterations, report.el_residual
            );
            save(&report.w, &cli.out, &format!("w_seed{}.ripl", cli.seed))?;
            save(&report.u, &cli.out, &format!("u_seed{}.ripl", cli.seed))?;
            let record = report.record(&cfg);
            let path = cli.out.join(format!("fixed_point_seed{}.ndjson", cli.seed));
            ripple::experiments::output::write_ndjson(&path, &[record])?;
            println!("wrote {}", path.display());
            if report.converged {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        Command::Study => {
            let path = cli
                .config
                .as_ref()
                .context("`study` needs --config pointing at a TOML file")?;
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {path:?}"))?;
            let cfg = StudyConfig::from_toml(&text)?;
            let outcome = run_study(&cfg, cli.strict_reduction)?;
            let dir = cfg.output.dir.clone().unwrap_or_else(|| cli.out.clone());
            let files = outcome.write(&dir)?;
            for line in outcome.summary_lines() {
                println!("{line}");
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            if outcome.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        Command::Norm {
            input,
            variant,
            exponent,
            pairs,
            mask,
        } => {
            let field = read_snapshot(input)?;
            let grid = field.grid();
            let plan = if grid.n1() <= 32 && grid.n2() <= 32 {
                PairPlan::Exhaustive
            } else {
                PairPlan::Stratified {
                    pairs: *pairs,
                    seed: cli.seed,
                }
            };
            let est = match variant.as_str() {
                "pos" => holder_pos(&field, *exponent, plan)?,
                "neg" => holder_neg_semigroup(&field, *exponent, &default_t_grid(grid))?,
                "mollifier" => holder_neg_mollifier(
                    &field,
                    *exponent,
                    &ripple::experiments::dyadic(0, 8),
                    &mask_of(&mask.mask)?,
                )?,
                other => bail!("unknown variant '{other}' (pos | neg | mollifier)"),
            };
            let bytes = std::fs::read(input)?;
            let row = serde_json::json!({
                "variant": est.variant,
                "exponent": est.exponent,
                "value": est.value,
                "field_id": ripple::spectral::content_hash(&bytes),
                "metadata": est.metadata,
            });
            println!("{row}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
