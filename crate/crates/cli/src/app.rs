//! Argument parsing, config resolution, and dispatch.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::commands::*;
use crate::error::CliError;
use crate::report::{write_report, Outcome};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HGIBBS_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "hgibbs",
    version,
    about = "Spectral experiments for Gibbs measures of the harmonic-potential NLS"
)]
#[command(arg_required_else_help = true, propagate_version = true)]
pub struct Cli {
    /// TOML document with experiment parameters; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output directory (default: $HGIBBS_OUT_DIR, else the working directory).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Skip the CSV plot data.
    #[arg(long, global = true)]
    pub no_csv: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Orthonormality, Mehler kernel, L^q scaling, and the pointwise envelope.
    BasisCheck(BasisCheck),
    /// Decay of multilinear eigenfunction integrals.
    KappaDecay(KappaDecay),
    /// Sobolev statistics of free-field samples.
    SampleStats(SampleStats),
    /// Large-deviation tails of a Sobolev norm.
    Tails(Tails),
    /// Second moment of a Gaussian chaos sum and the pairing count.
    Chaos(Chaos),
    /// Build a weighted Gibbs ensemble and check density convergence.
    GibbsBuild(GibbsBuild),
    /// Gibbs invariance under the truncated flow, with a uniform-weight control.
    Invariance(Invariance),
    /// Energy monotonicity of the lens-transformed flow.
    Monotonicity(Monotonicity),
    /// Lens conjugation of the propagators and the flow cross-check.
    LensCheck(LensCheck),
    /// Settling of the harmonic-side flow toward the lens endpoint.
    Scattering(Scattering),
    /// Localized partial sums at and below the critical regularity.
    #[command(name = "appendix-divergence")]
    LocalizedDivergence(LocalizedDivergence),
}

/// Parse `argv`, run the experiment, write its report; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match try_run(argv) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(CliError::Usage(e)) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn try_run<I, T>(argv: I) -> Result<bool, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = Cli::command().try_get_matches_from(argv)?;
    let cli = Cli::from_arg_matches(&matches)?;
    let (name, sub) = matches.subcommand().expect("a subcommand is required");
    let file = match &cli.config {
        Some(path) => load_config(path)?,
        None => toml::Table::new(),
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let ctx = Context {
        name,
        out: &out,
        emit_csv: !cli.no_csv,
    };
    match name {
        "basis-check" => execute::<BasisCheck>(sub, &file, &ctx),
        "kappa-decay" => execute::<KappaDecay>(sub, &file, &ctx),
        "sample-stats" => execute::<SampleStats>(sub, &file, &ctx),
        "tails" => execute::<Tails>(sub, &file, &ctx),
        "chaos" => execute::<Chaos>(sub, &file, &ctx),
        "gibbs-build" => execute::<GibbsBuild>(sub, &file, &ctx),
        "invariance" => execute::<Invariance>(sub, &file, &ctx),
        "monotonicity" => execute::<Monotonicity>(sub, &file, &ctx),
        "lens-check" => execute::<LensCheck>(sub, &file, &ctx),
        "scattering" => execute::<Scattering>(sub, &file, &ctx),
        "appendix-divergence" => execute::<LocalizedDivergence>(sub, &file, &ctx),
        other => unreachable!("clap accepted unknown subcommand {other}"),
    }
}

pub struct Context<'a> {
    pub name: &'a str,
    pub out: &'a Path,
    pub emit_csv: bool,
}

/// An experiment whose parameters come from flags and a config document.
pub trait Experiment: FromArgMatches + Serialize + DeserializeOwned {
    fn run(&self, ctx: &Context) -> Result<Outcome, CliError>;
}

fn execute<E: Experiment>(
    sub: &ArgMatches,
    file: &toml::Table,
    ctx: &Context,
) -> Result<bool, CliError> {
    let params: E = resolve(sub, file)?;
    let start = Instant::now();
    let outcome = params.run(ctx)?;
    let path = write_report(ctx.out, ctx.name, &params, &outcome, ctx.emit_csv)?;
    for claim in &outcome.claims {
        let tag = match claim.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "FIT ",
        };
        println!("{tag} {} = {}", claim.name, claim.value);
    }
    let passed = outcome.passed();
    println!(
        "{} {} ({:.1} s) -> {}",
        if passed { "PASS" } else { "FAIL" },
        ctx.name,
        start.elapsed().as_secs_f64(),
        path.display()
    );
    Ok(passed)
}

fn load_config(path: &Path) -> Result<toml::Table, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text.parse::<toml::Table>()?)
}

/// Layer clap defaults, then the config document, then explicit flags.
///
/// Parameter structs have no optional fields, so every valid key appears in the
/// serialized flag table; anything else in the document is rejected by
/// `deny_unknown_fields`.
pub fn resolve<P: FromArgMatches + Serialize + DeserializeOwned>(
    sub: &ArgMatches,
    file: &toml::Table,
) -> Result<P, CliError> {
    let parsed = P::from_arg_matches(sub)?;
    let mut table = toml::Table::try_from(&parsed)?;
    for (key, value) in file {
        let explicit =
            table.contains_key(key) && sub.value_source(key) == Some(ValueSource::CommandLine);
        if !explicit {
            table.insert(key.clone(), value.clone());
        }
    }
    Ok(toml::Value::Table(table).try_into()?)
}
