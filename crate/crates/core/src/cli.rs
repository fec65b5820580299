//! The `fockmaj` command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 truncation budget exceeded. `FOCKMAJ_THREADS` caps the worker pool.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::amplitudes::{b_table_oracle, b_table_recurrence};
use crate::channels::{apply_diag, apply_full, ChannelKind, ChannelSpec, Truncation};
use crate::error::{Error, Result};
use crate::fock::{passive_decompose, DensityMatrix, EnvironmentSpec, FockDistribution};
use crate::majorization::{
    construct_transfer_matrix, fock_margin, majorization_margin, monotone_functional_gap,
    MonotoneFunctionFamily, DEFAULT_TOL,
};
use crate::verify::{
    confirm_counterexample, counterexample_search, delta_ladder, duality_suite, gamma_passivity,
    preservation_suite, Counterexample, CounterexampleConfig, DualityConfig, PreservationConfig,
    VerificationReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TRUNCATION: i32 = 3;

const DEFAULT_ETA_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Parser, Debug)]
#[command(
    name = "fockmaj",
    version,
    about = "Fock-majorization and passive-environment bosonic channels"
)]
struct Cli {
    /// JSON file with default values for the numeric flags.
    #[arg(long, global = true)]
    defaults: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply a channel to a state.
    #[command(subcommand)]
    Channel(ChannelCmd),
    /// Export coefficient tables.
    #[command(subcommand)]
    Amplitudes(AmplitudesCmd),
    /// Compare two distributions.
    #[command(subcommand)]
    Majorize(MajorizeCmd),
    /// Decompose a passive distribution.
    #[command(subcommand)]
    Decompose(DecomposeCmd),
    /// Run a verification suite.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand, Debug)]
enum ChannelCmd {
    Apply {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Evaluate the full density-matrix action.
        #[arg(long)]
        full: bool,
    },
}

#[derive(Subcommand, Debug)]
enum AmplitudesCmd {
    Table {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        max_i: usize,
        #[arg(long)]
        max_k: usize,
        /// Use the block-exponential route instead of the recurrence.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct PairArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, value_parser = parse_tol)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum MajorizeCmd {
    /// Print both majorization verdicts for `a` against `b`.
    Check {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Build the transfer matrix `L` with `L a = b`.
    #[command(name = "construct-L")]
    ConstructL {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the monotone-function gaps.
    FunctionalTest {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum DecomposeCmd {
    Passive {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long, value_parser = parse_tol)]
    tol: Option<f64>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Transmittances; defaults to 0.1, 0.2, ..., 0.9.
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
    /// Sets the largest i, K and n at once.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    max_i: Option<usize>,
    #[arg(long)]
    max_k: Option<usize>,
    #[arg(long)]
    max_n: Option<usize>,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    Ladder(GridArgs),
    Passivity(GridArgs),
    Preservation {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        report: ReportArgs,
    },
    Duality {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        env: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        report: ReportArgs,
    },
    Counterexample {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        probes: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = parse_tol)]
        tol: Option<f64>,
        /// Search passive pairs only; finding one is then a failure.
        #[arg(long)]
        passive_only: bool,
        /// Re-verify a stored instance instead of searching.
        #[arg(long)]
        confirm: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Bs,
    Tms,
}

#[derive(Args, Debug)]
struct ChannelArgs {
    #[arg(long, value_enum, default_value = "bs")]
    kind: Kind,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    gain: Option<f64>,
    /// `vacuum`, `thermal:<n>`, `projector:<K>`, `projector-raw:<K>` or `file:<path>`.
    #[arg(long)]
    env: Option<String>,
    #[arg(long)]
    max_photons: Option<usize>,
    #[arg(long)]
    tail_tol: Option<f64>,
    #[arg(long)]
    env_tail_tol: Option<f64>,
}

/// Values from `--defaults`; explicit flags take precedence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Defaults {
    pub env: Option<String>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub dim: Option<usize>,
    pub max_photons: Option<usize>,
    pub tail_tol: Option<f64>,
    pub env_tail_tol: Option<f64>,
}

impl Defaults {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    let defaults = match cli.defaults.as_deref().map(Defaults::load).transpose() {
        Ok(d) => d.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: defaults file: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(t) = defaults.tol.filter(|t| t.is_nan() || *t < 0.0) {
        eprintln!("error: defaults file: tol must be non-negative, got {t}");
        return EXIT_USAGE;
    }
    match run(cli.command, &defaults) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::TruncationBudget { .. } => EXIT_TRUNCATION,
        Error::Precondition(_) | Error::NotPassive { .. } => EXIT_FAILED,
        _ => EXIT_USAGE,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("FOCKMAJ_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "FOCKMAJ_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    // A pool may already exist when dispatch runs more than once in a process.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn run(command: Command, d: &Defaults) -> Result<i32> {
    match command {
        Command::Channel(ChannelCmd::Apply {
            channel,
            input,
            out,
            full,
        }) => {
            let ch = channel.build(d)?;
            if full {
                let rho = load_density_matrix(&input)?;
                let res = apply_full(&ch, &rho)?;
                eprintln!("tail mass {:e}", res.tail_mass);
                emit(out.as_deref(), &res.state)?;
            } else {
                let dist = load_distribution(&input)?;
                let res = apply_diag(&ch, &dist)?;
                eprintln!(
                    "trace {:.17} + tail {:e} (expected {:.17})",
                    res.dist.total_mass(),
                    res.tail_mass,
                    res.expected_trace
                );
                emit(out.as_deref(), &res.dist)?;
            }
            Ok(EXIT_OK)
        }
        Command::Amplitudes(AmplitudesCmd::Table {
            eta,
            max_i,
            max_k,
            oracle,
            out,
        }) => {
            let table = if oracle {
                b_table_oracle(eta, max_i, max_k)?
            } else {
                b_table_recurrence(eta, max_i, max_k)?
            };
            let mut entries = IndexMap::new();
            for i in 0..=max_i {
                for k in 0..=max_k {
                    entries.insert(format!("{i},{k}"), table.row(i, k).to_vec());
                }
            }
            let doc = serde_json::json!({
                "eta": eta,
                "max_i": max_i,
                "max_k": max_k,
                "entries": entries,
            });
            emit(out.as_deref(), &doc)?;
            Ok(EXIT_OK)
        }
        Command::Majorize(cmd) => majorize(cmd, d),
        Command::Decompose(DecomposeCmd::Passive { input, out }) => {
            let dist = load_distribution(&input)?;
            let parts: Vec<_> = passive_decompose(&dist)?
                .into_iter()
                .map(|(cutoff, weight)| serde_json::json!({"cutoff": cutoff, "weight": weight}))
                .collect();
            emit(out.as_deref(), &parts)?;
            Ok(EXIT_OK)
        }
        Command::Verify(cmd) => verify(cmd, d),
    }
}

fn majorize(cmd: MajorizeCmd, d: &Defaults) -> Result<i32> {
    match cmd {
        MajorizeCmd::Check { pair } => {
            let (a, b, tol) = pair.load(d)?;
            let (fm, fat) = fock_margin(a.probs(), b.probs());
            println!(
                "fock_majorizes: {} (margin {fm:e} at n = {fat})",
                fm >= -tol
            );
            let (ma, mb) = (a.total_mass(), b.total_mass());
            if (ma - mb).abs() > tol {
                println!("majorizes: undefined (total mass {ma} vs {mb})");
            } else {
                let (m, at) = majorization_margin(a.probs(), b.probs());
                println!("majorizes: {} (margin {m:e} at k = {})", m >= -tol, at + 1);
            }
            Ok(EXIT_OK)
        }
        MajorizeCmd::ConstructL { pair, out } => {
            let (a, b, _) = pair.load(d)?;
            let l = construct_transfer_matrix(&a, &b)?;
            let image = l.apply(a.probs())?;
            let err = image
                .iter()
                .zip(b.padded(image.len()))
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            eprintln!("max |L a - b| = {err:e}");
            emit(out.as_deref(), &l)?;
            Ok(EXIT_OK)
        }
        MajorizeCmd::FunctionalTest { pair, csv } => {
            let (a, b, tol) = pair.load(d)?;
            let dim = a.dim().max(b.dim());
            let mut rows = Vec::new();
            for family in [
                MonotoneFunctionFamily::standard(dim),
                MonotoneFunctionFamily::steps(dim),
            ] {
                for f in &family.members {
                    rows.push((
                        family.name.clone(),
                        f.name(),
                        monotone_functional_gap(&a, &b, f),
                    ));
                }
            }
            for (family, name, gap) in &rows {
                println!("{family:<10} {name:<32} {gap:>14.6e}");
            }
            if let Some(path) = csv {
                let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
                w.write_record(["family", "function", "gap"])
                    .map_err(csv_error)?;
                for (family, name, gap) in &rows {
                    w.write_record([family.as_str(), name.as_str(), &format!("{gap:e}")])
                        .map_err(csv_error)?;
                }
                w.flush()?;
            }
            let worst = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
            Ok(if worst >= -tol { EXIT_OK } else { EXIT_FAILED })
        }
    }
}

fn verify(cmd: VerifyCmd, d: &Defaults) -> Result<i32> {
    match cmd {
        VerifyCmd::Ladder(grid) => grid.run(d, "delta_ladder", delta_ladder),
        VerifyCmd::Passivity(grid) => grid.run(d, "gamma_passivity", gamma_passivity),
        VerifyCmd::Preservation {
            channel,
            dim,
            samples,
            seed,
            report,
        } => {
            let ch = channel.build(d)?;
            let base = PreservationConfig::default();
            let cfg = PreservationConfig {
                samples: samples.or(d.samples).unwrap_or(base.samples),
                seed: seed.or(d.seed).unwrap_or(base.seed),
                dim: dim.or(d.dim).unwrap_or(base.dim),
                tol: report.tol.or(d.tol).unwrap_or(base.tol),
            };
            report.finish(preservation_suite(&ch, &cfg)?)
        }
        VerifyCmd::Duality {
            eta,
            env,
            dim,
            samples,
            seed,
            report,
        } => {
            let env = parse_env(env.as_deref().or(d.env.as_deref()).unwrap_or("vacuum"))?;
            let base = DualityConfig::default();
            let cfg = DualityConfig {
                samples: samples.or(d.samples).unwrap_or(base.samples),
                seed: seed.or(d.seed).unwrap_or(base.seed),
                dim: dim.or(d.dim).unwrap_or(base.dim),
                tol: report.tol.or(d.tol).unwrap_or(base.tol),
            };
            report.finish(duality_suite(eta, &env, &cfg)?)
        }
        VerifyCmd::Counterexample {
            channel,
            dim,
            probes,
            seed,
            tol,
            passive_only,
            confirm,
            out,
        } => {
            let ch = channel.build(d)?;
            let base = CounterexampleConfig::default();
            let cfg = CounterexampleConfig {
                grid_dim: dim.or(d.dim).unwrap_or(base.grid_dim),
                random_probes: probes.or(d.samples).unwrap_or(base.random_probes),
                seed: seed.or(d.seed).unwrap_or(base.seed),
                passive_only,
                tol: tol.or(d.tol).unwrap_or(base.tol),
            };
            if let Some(path) = confirm {
                let cx: Counterexample = serde_json::from_str(&fs::read_to_string(path)?)?;
                let ok = confirm_counterexample(&ch, &cx, cfg.tol)?;
                println!(
                    "stored counterexample {}",
                    if ok { "confirmed" } else { "NOT confirmed" }
                );
                return Ok(if ok { EXIT_OK } else { EXIT_FAILED });
            }
            let found = counterexample_search(&ch, &cfg)?;
            match &found {
                Some(cx) => println!(
                    "counterexample: r = {:?}, s = {:?}, output margin {:e} at k = {}",
                    cx.r,
                    cx.s,
                    cx.output_margin,
                    cx.violated_index + 1
                ),
                None => println!("no counterexample found"),
            }
            if let Some(path) = out {
                write_json(&path, &found)?;
            }
            Ok(if passive_only && found.is_some() {
                EXIT_FAILED
            } else {
                EXIT_OK
            })
        }
    }
}

impl ChannelArgs {
    fn build(&self, d: &Defaults) -> Result<ChannelSpec> {
        let kind = match self.kind {
            Kind::Bs => ChannelKind::BeamSplitter {
                eta: self.eta.ok_or_else(|| missing("--eta", "bs"))?,
            },
            Kind::Tms => ChannelKind::TwoModeSqueezer {
                gain: self.gain.ok_or_else(|| missing("--gain", "tms"))?,
            },
        };
        let env = parse_env(self.env.as_deref().or(d.env.as_deref()).unwrap_or("vacuum"))?;
        let base = Truncation::default();
        let truncation = Truncation {
            max_photons: self.max_photons.or(d.max_photons),
            tail_tol: self.tail_tol.or(d.tail_tol).unwrap_or(base.tail_tol),
            env_tail_tol: self
                .env_tail_tol
                .or(d.env_tail_tol)
                .unwrap_or(base.env_tail_tol),
        };
        let spec = ChannelSpec::new(kind, env)?.with_truncation(truncation);
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_tol(s: &str) -> std::result::Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t >= 0.0 {
        Ok(t)
    } else {
        Err(format!("tolerance must be non-negative, got {s}"))
    }
}

fn missing(flag: &str, kind: &str) -> Error {
    Error::InvalidParameter(format!("{flag} is required for --kind {kind}"))
}

impl PairArgs {
    fn load(&self, d: &Defaults) -> Result<(FockDistribution, FockDistribution, f64)> {
        Ok((
            load_distribution(&self.a)?,
            load_distribution(&self.b)?,
            self.tol.or(d.tol).unwrap_or(DEFAULT_TOL),
        ))
    }
}

impl GridArgs {
    fn run(
        &self,
        d: &Defaults,
        suite: &str,
        f: fn(f64, usize, usize, usize) -> Result<VerificationReport>,
    ) -> Result<i32> {
        let dim = self.dim.or(d.dim).unwrap_or(10);
        let etas = if self.eta.is_empty() {
            DEFAULT_ETA_GRID.to_vec()
        } else {
            self.eta.clone()
        };
        let (mi, mk, mn) = (
            self.max_i.unwrap_or(dim),
            self.max_k.unwrap_or(dim),
            self.max_n.unwrap_or(dim),
        );
        let mut combined: Option<VerificationReport> = None;
        for &eta in &etas {
            let rep = f(eta, mi, mk, mn)?;
            match &mut combined {
                Some(c) => c.absorb(&rep),
                None => combined = Some(rep),
            }
        }
        let mut rep = combined.ok_or_else(|| Error::InvalidParameter("empty eta grid".into()))?;
        rep.suite = suite.to_string();
        rep.grid = serde_json::json!({"eta": etas, "max_i": mi, "max_k": mk, "max_n": mn});
        let tol = self.report.tol.or(d.tol);
        self.report.finish_with(rep, tol)
    }
}

impl ReportArgs {
    fn finish(&self, rep: VerificationReport) -> Result<i32> {
        self.finish_with(rep, None)
    }

    fn finish_with(&self, rep: VerificationReport, tol: Option<f64>) -> Result<i32> {
        let rep = match tol {
            Some(t) => rep.with_tolerance(t),
            None => rep,
        };
        print!("{}", rep.summary());
        if let Some(path) = &self.report {
            write_json(path, &rep)?;
        }
        if let Some(path) = &self.csv {
            rep.write_csv(fs::File::create(path)?)?;
        }
        Ok(if rep.passed { EXIT_OK } else { EXIT_FAILED })
    }
}

/// Parses an environment flag, resolving `file:<path>` to a JSON environment or distribution.
pub fn parse_env(s: &str) -> Result<EnvironmentSpec> {
    match s.strip_prefix("file:") {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            match serde_json::from_str::<EnvironmentSpec>(&text) {
                Ok(env) => {
                    env.validate()?;
                    Ok(env)
                }
                Err(_) => EnvironmentSpec::explicit(serde_json::from_str(&text)?),
            }
        }
        None => EnvironmentSpec::from_str(s),
    }
}

/// Reads a distribution, or the populations of a density matrix.
pub fn load_distribution(path: &Path) -> Result<FockDistribution> {
    let text = fs::read_to_string(path)?;
    match serde_json::from_str::<FockDistribution>(&text) {
        Ok(d) => Ok(d),
        Err(first) => match serde_json::from_str::<DensityMatrix>(&text) {
            Ok(rho) => rho.populations(),
            Err(_) => Err(first.into()),
        },
    }
}

/// Reads a density matrix, or the diagonal state of a distribution.
pub fn load_density_matrix(path: &Path) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path)?;
    match serde_json::from_str::<DensityMatrix>(&text) {
        Ok(rho) => Ok(rho),
        Err(first) => match serde_json::from_str::<FockDistribution>(&text) {
            Ok(d) => DensityMatrix::from_distribution(&d),
            Err(_) => Err(first.into()),
        },
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
