//! Command-line front end: argument parsing, dispatch and output formatting.

pub mod figures;
pub mod specs;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use personick_core::output::fmt_sig;
use personick_core::search::{SweepConfig, CONJECTURE_TOLERANCE};
use personick_core::{
    bounds, conditional_means, conjecture_check, nbar_grid, pnr_mse, sweep, BoundsReport, Error,
    FisherValue, MmseOptions, PersonickSolver, PriorPdf,
};
use serde_json::Value;

use crate::figures::{write_figures, write_sweep_csv, FiguresConfig};
use crate::specs::{parse_prior, StateSpec, MAX_PHOTONS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ILL_POSED: i32 = 3;

/// Environment variable capping the worker threads used by sweeps.
pub const THREADS_ENV: &str = "PERSONICK_THREADS";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(Error::IllPosed { .. }) => EXIT_ILL_POSED,
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "personick", version, about = "Bayesian loss estimation with Fock-basis probes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FisherField {
    JeInv,
    Jd,
    Jp,
    Jb,
    JdInv,
    JbInv,
}

#[derive(Debug, clap::Args)]
pub struct ProbeArgs {
    /// Probe state: fock:<n>, inbetween:<nbar> or amps:<c0,c1,...>.
    #[arg(long)]
    pub state: String,
    /// Prior: twopoint:<q,tau0,tau1>, beta:<a,b>, delta:<tau0> or file:<path>.
    #[arg(long)]
    pub prior: String,
    /// Largest photon number kept in the Fock basis.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Initial Gauss nodes for continuous priors.
    #[arg(long, default_value_t = personick_core::prior::DEFAULT_ORDER)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum mean square error, its lower bound and the optimal estimates.
    Mmse(ProbeArgs),
    /// Trace lower bound on the MMSE and the commutator that controls its tightness.
    Bound(ProbeArgs),
    /// Error of photon counting with the Bayes estimator.
    Pnr(ProbeArgs),
    /// Fisher-type Bayesian quantities for a Fock state.
    Fisher {
        /// Photon number of the Fock probe.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        prior: String,
        /// Print only this quantity.
        #[arg(long, value_enum)]
        field: Option<FisherField>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// MSE of random and in-between states over a grid of mean photon numbers.
    Sweep {
        #[arg(long)]
        prior: String,
        #[arg(long, default_value_t = personick_core::search::DEFAULT_CUTOFF)]
        cutoff: usize,
        /// Random states per grid point.
        #[arg(long, default_value_t = personick_core::search::DEFAULT_COUNT)]
        count: usize,
        /// Grid points per unit of mean photon number.
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = personick_core::prior::DEFAULT_ORDER)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerates every figure dataset into one directory.
    Figures {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = personick_core::search::DEFAULT_CUTOFF)]
        cutoff: usize,
        #[arg(long, default_value_t = personick_core::search::DEFAULT_COUNT)]
        count: usize,
        #[arg(long, default_value_t = personick_core::prior::DEFAULT_ORDER)]
        order: usize,
    },
}

/// Rounds every number in `value` to 12 significant digits.
fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| !n.is_i64() && !n.is_u64()) {
                if let Some(r) = fmt_sig(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("serializable output");
    round_json(&mut v);
    serde_json::to_string_pretty(&v).expect("json value prints")
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt_sig).collect::<Vec<_>>().join(",")
}

fn solver(prior: &PriorPdf, order: usize) -> Result<PersonickSolver, CliError> {
    if order == 0 {
        return Err(CliError::Config("--order must be at least 1".into()));
    }
    let options = MmseOptions {
        order,
        ..MmseOptions::default()
    };
    Ok(PersonickSolver::new(prior, options)?)
}

fn fisher_field(report: &BoundsReport, field: FisherField) -> FisherValue {
    match field {
        FisherField::JeInv => report.je_inv,
        FisherField::Jd => report.jd,
        FisherField::Jp => report.jp,
        FisherField::Jb => report.jb,
        FisherField::JdInv => report.jd_inv,
        FisherField::JbInv => report.jb_inv,
    }
}

fn probe(args: &ProbeArgs) -> Result<(personick_core::PureState, PriorPdf), CliError> {
    let spec: StateSpec = args.state.parse()?;
    let state = spec.build(args.cutoff)?;
    Ok((state, parse_prior(&args.prior)?))
}

/// Size the global pool from the environment. Safe to call more than once.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV}='{raw}' is not a positive integer")))?;
    // An already-initialized pool keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Executes one command, writing human output to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Mmse(args) => {
            let (state, prior) = probe(&args)?;
            let report = solver(&prior, args.order)?.mmse(&state)?;
            let text = match args.format {
                Format::Json => to_json(&report),
                _ => format!(
                    "mmse {}\nlower_bound {}\ncommutator {}\nb_eigenvalues {}\n",
                    fmt_sig(report.mmse),
                    fmt_sig(report.lower_bound),
                    fmt_sig(report.commutator_g01),
                    join(report.b_eigenvalues())
                ),
            };
            emit(&args.out, &text, stdout)
        }
        Command::Bound(args) => {
            let (state, prior) = probe(&args)?;
            let report = solver(&prior, args.order)?.mmse(&state)?;
            let gap = report.mmse - report.lower_bound;
            let text = match args.format {
                Format::Json => to_json(&serde_json::json!({
                    "lower_bound": report.lower_bound,
                    "mmse": report.mmse,
                    "gap": gap,
                    "commutator": report.commutator_g01,
                })),
                _ => format!(
                    "lower_bound {}\nmmse {}\ngap {}\ncommutator {}\n",
                    fmt_sig(report.lower_bound),
                    fmt_sig(report.mmse),
                    fmt_sig(gap),
                    fmt_sig(report.commutator_g01)
                ),
            };
            emit(&args.out, &text, stdout)
        }
        Command::Pnr(args) => {
            let (state, prior) = probe(&args)?;
            let mse = pnr_mse(&state, &prior)?;
            let means = conditional_means(&state, &prior)?;
            let text = match args.format {
                Format::Json => to_json(&serde_json::json!({
                    "pnr_mse": mse,
                    "estimates": means.pi,
                    "outcome_probabilities": means.marginal,
                })),
                _ => format!(
                    "pnr_mse {}\nestimates {}\noutcome_probabilities {}\n",
                    fmt_sig(mse),
                    join(means.pi),
                    join(means.marginal)
                ),
            };
            emit(&args.out, &text, stdout)
        }
        Command::Fisher {
            n,
            prior,
            field,
            format,
            out,
        } => {
            if n > MAX_PHOTONS {
                return Err(CliError::Config(format!("--n {n} exceeds {MAX_PHOTONS}")));
            }
            let prior = parse_prior(&prior)?;
            let report = bounds(n, &prior);
            let text = match (field, format) {
                (Some(f), Format::Json) => to_json(&fisher_field(&report, f)) + "\n",
                (Some(f), _) => format!("{}\n", fisher_field(&report, f)),
                (None, Format::Json) => to_json(&report),
                (None, _) => format!(
                    "n {}\nje_inv {}\njd {}\njp {}\njb {}\njd_inv {}\njb_inv {}\n",
                    n, report.je_inv, report.jd, report.jp, report.jb, report.jd_inv, report.jb_inv
                ),
            };
            emit(&out, &text, stdout)
        }
        Command::Sweep {
            prior,
            cutoff,
            count,
            steps,
            seed,
            order,
            format,
            out,
        } => {
            configure_threads()?;
            let prior = parse_prior(&prior)?;
            let config = SweepConfig {
                cutoff,
                count,
                seed,
                options: MmseOptions {
                    order,
                    ..MmseOptions::default()
                },
            };
            if steps == 0 || order == 0 {
                return Err(CliError::Config("--steps and --order must be at least 1".into()));
            }
            let result = sweep(&prior, &nbar_grid(cutoff, steps), &config)?;
            let report = conjecture_check(&result, CONJECTURE_TOLERANCE);
            match (format, &out) {
                (Format::Json, _) => emit(&out, &(to_json(&result) + "\n"), stdout)?,
                (_, Some(path)) => write_sweep_csv(path, &result)?,
                (_, None) => {
                    result.write_csv(&mut *stdout)?;
                }
            }
            if out.is_some() {
                writeln!(
                    stdout,
                    "checked {} samples; {} below the in-between curve by more than {}",
                    report.samples_checked,
                    report.violators.len(),
                    fmt_sig(report.tolerance)
                )
                .map_err(|e| CliError::Io(e.to_string()))?;
            }
            Ok(())
        }
        Command::Figures {
            out,
            seed,
            cutoff,
            count,
            order,
        } => {
            configure_threads()?;
            if order == 0 {
                return Err(CliError::Config("--order must be at least 1".into()));
            }
            let config = FiguresConfig {
                sweep: SweepConfig {
                    cutoff,
                    count,
                    seed,
                    options: MmseOptions {
                        order,
                        ..MmseOptions::default()
                    },
                },
                ..FiguresConfig::default()
            };
            let output = write_figures(&out, &config)?;
            let mut log = String::new();
            for path in &output.files {
                log += &format!("wrote {}\n", path.display());
            }
            for (stem, report) in &output.conjecture {
                log += &format!(
                    "{stem}: {} samples, {} violators, max fock deviation {}\n",
                    report.samples_checked,
                    report.violators.len(),
                    fmt_sig(report.fock_deviation)
                );
                for v in &report.violators {
                    log += &format!(
                        "  violator nbar={} seed={} index={} mse={} in_between={}\n",
                        fmt_sig(v.nbar),
                        v.seed,
                        v.index,
                        fmt_sig(v.mse),
                        fmt_sig(v.in_between)
                    );
                }
            }
            for (n, below) in &output.jb_ordering {
                log += &format!("fig4 n={n}: mmse {} 1/J_B\n", if *below { "<" } else { ">=" });
            }
            stdout.write_all(log.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
