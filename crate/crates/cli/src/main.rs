//! `datum` command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use datum_core::baselines::{from_uflp, to_uflp, UflpFormat, UflpInstance};
use datum_core::experiment::{self, Algorithm, RunRecord, SolveConfig};
use datum_core::model::split_by_provider;
use datum_core::rational::parse_decimal;
use datum_core::scenario::{self, Knob, ScenarioParams};
use datum_core::{io, DatumConfig, Error, ExhaustiveBudget};

#[derive(Parser)]
#[command(name = "datum", version, about = "Cost optimization for geo-distributed data markets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic case-study instance.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Solve an instance file with one algorithm.
    Solve {
        instance: PathBuf,
        /// datum, single-dc, optcost, optband (alias minband) or nearestdc.
        #[arg(long, short)]
        algorithm: String,
        /// Where to write the plan JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Record wall-clock time in the printed record.
        #[arg(long)]
        timing: bool,
    },
    /// Run several algorithms over generated instances and emit CSV.
    Compare {
        /// Seeds as a list and/or half-open ranges, e.g. `0..20` or `1,4,9`.
        #[arg(long, default_value = "0..20")]
        seeds: String,
        #[arg(long, default_value = "datum,optcost,optband,nearestdc")]
        algorithms: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Sweep one cost-ratio target over an evenly spaced grid.
    Sweep {
        #[arg(long, value_parser = parse_knob)]
        knob: Knob,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        #[arg(long, default_value = "0..20")]
        seeds: String,
        #[arg(long, default_value = "datum,optband")]
        algorithms: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Convert between market instances and UFLP instances.
    Convert(ConvertArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("direction").required(true).args(["to_uflp", "from_uflp"])))]
struct ConvertArgs {
    /// Market instance to convert; required with `--to-uflp`.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Write the UFLP form of one provider's subproblem here.
    #[arg(long, requires = "instance")]
    to_uflp: Option<PathBuf>,
    /// Read a UFLP instance and emit the equivalent market instance.
    #[arg(long)]
    from_uflp: Option<PathBuf>,
    /// Provider id to convert; may be omitted for single-provider instances.
    #[arg(long)]
    provider: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Dense)]
    format: Format,
    /// Output for `--from-uflp`; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dense,
    Sparse,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, default_value_t = 10)]
    data_centers: usize,
    #[arg(long, default_value_t = 20)]
    providers: usize,
    #[arg(long, default_value_t = 100)]
    clients: usize,
    #[arg(long, default_value_t = 8)]
    levels: usize,
    /// Mean providers demanded per client; half the providers by default.
    #[arg(long)]
    avg_providers: Option<f64>,
    #[arg(long, default_value_t = 30.0)]
    zipf_shape: f64,
    #[arg(long, default_value_t = 10.0)]
    pareto_mean: f64,
    #[arg(long, default_value_t = 2.0)]
    pareto_shape: f64,
    /// Transfer cost per gigameter before calibration.
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    /// Target log10 of bandwidth over purchasing cost.
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    ratio_bf: f64,
    /// Target log10 of execution over operation plus purchasing cost.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    ratio_ie: f64,
}

impl ScenarioArgs {
    fn params(&self, seed: u64, max_replicas: usize) -> ScenarioParams {
        ScenarioParams {
            seed,
            num_data_centers: self.data_centers,
            num_providers: self.providers,
            num_clients: self.clients,
            levels_per_provider: self.levels,
            avg_providers_per_client: self.avg_providers,
            zipf_shape: self.zipf_shape,
            pareto_mean: self.pareto_mean,
            pareto_shape: self.pareto_shape,
            rate_per_gigameter: self.rate,
            ratio_band_to_fee: self.ratio_bf,
            ratio_internal_to_external: self.ratio_ie,
            max_replicas,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Largest replica set Datum considers per provider.
    #[arg(long, default_value_t = 2)]
    max_replicas: usize,
    /// Weight on the replica-count term, as a decimal.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    mu1: String,
    /// Decay rate on the replica-count term.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu2: f64,
}

impl SolverArgs {
    fn config(&self) -> Result<SolveConfig, Failure> {
        let mu1 = parse_decimal(&self.mu1).map_err(|e| Failure::input(format!("--mu1: {e}")))?;
        Ok(SolveConfig {
            datum: DatumConfig { max_replicas: self.max_replicas, mu1, mu2: self.mu2, ..DatumConfig::default() },
            budget: ExhaustiveBudget::from_env()?,
        })
    }
}

fn parse_knob(s: &str) -> Result<Knob, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::OversizeInstance { .. } => 3,
            Error::UnknownAlgorithm(_) => 4,
            Error::InvalidInstance(_)
            | Error::UnsatisfiableDemand { .. }
            | Error::DimensionMismatch(_)
            | Error::Parse(_)
            | Error::InvalidParams(_)
            | Error::InvalidRatioTargets(_)
            | Error::NotSingleDataCenter(_)
            | Error::LevelDependentExecCost
            | Error::LevelDependentCosts
            | Error::MissingBulkFees(_)
            | Error::CatalogTooLarge { .. } => 2,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure { code: 1, message: format!("{}: {e}", p.display()) }),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure { code: 1, message: e.to_string() }),
    }
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

/// Comma separated seeds and half-open `a..b` ranges.
fn parse_seeds(spec: &str) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::input(format!("invalid seed list {spec:?}"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad())?;
                let b: u64 = b.trim().parse().map_err(|_| bad())?;
                out.extend(a..b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate { seed, out, scenario } => {
            let instance = scenario::generate(&scenario.params(seed, 2))?;
            write(out.as_deref(), &with_newline(io::instance_to_json(&instance)))
        }
        Command::Solve { instance, algorithm, out, solver, timing } => {
            let algorithm: Algorithm = algorithm.parse()?;
            let config = solver.config()?;
            let instance = io::load_instance(&read(&instance)?)?;
            let start = Instant::now();
            let (plan, cost) = experiment::solve(&instance, algorithm, &config)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            if let Some(path) = out.as_deref() {
                write(Some(path), &with_newline(io::plan_to_json(&instance, &plan, Some(&cost))))?;
            }
            let record = RunRecord {
                seed: None,
                algorithm: algorithm.name().to_string(),
                config: config.echo(),
                cost: Some(cost),
                runtime_ms: timing.then_some(elapsed),
                fingerprint: io::fingerprint(&instance),
                error: None,
            };
            let line = serde_json::to_string(&record).map_err(|e| Failure { code: 1, message: e.to_string() })?;
            println!("{line}");
            Ok(())
        }
        Command::Compare { seeds, algorithms, out, timing, scenario, solver } => {
            let seeds = parse_seeds(&seeds)?;
            let algorithms = experiment::parse_algorithms(&algorithms)?;
            let config = solver.config()?;
            let base = scenario.params(0, config.datum.max_replicas);
            let records = experiment::compare(&base, &seeds, &algorithms, &config, timing)?;
            write(out.as_deref(), &experiment::compare_csv(&records))?;
            eprint!("{}", with_newline(experiment::summary(&records)));
            Ok(())
        }
        Command::Sweep { knob, from, to, steps, seeds, algorithms, out, timing, scenario, solver } => {
            let seeds = parse_seeds(&seeds)?;
            let algorithms = experiment::parse_algorithms(&algorithms)?;
            let config = solver.config()?;
            let base = scenario.params(0, config.datum.max_replicas);
            let records = experiment::sweep(&base, knob, from, to, steps, &seeds, &algorithms, &config, timing)?;
            write(out.as_deref(), &experiment::sweep_csv(&records))
        }
        Command::Convert(args) => convert(args),
    }
}

fn convert(args: ConvertArgs) -> Result<(), Failure> {
    if let Some(path) = &args.from_uflp {
        let value: serde_json::Value =
            serde_json::from_str(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let instance = from_uflp(&UflpInstance::from_json(&value)?)?;
        return write(args.out.as_deref(), &with_newline(io::instance_to_json(&instance)));
    }
    let (Some(instance), Some(target)) = (&args.instance, &args.to_uflp) else {
        return Err(Failure::input("--to-uflp needs --instance"));
    };
    let instance = io::load_instance(&read(instance)?)?;
    let subs = split_by_provider(&instance)?;
    let sub = match &args.provider {
        Some(id) => {
            subs.iter().find(|s| &s.provider_id == id).ok_or_else(|| Failure::input(format!("no provider {id:?}")))?
        }
        None if subs.len() == 1 => &subs[0],
        None => return Err(Failure::input("instance has several providers; pass --provider")),
    };
    let format = match args.format {
        Format::Dense => UflpFormat::Dense,
        Format::Sparse => UflpFormat::Sparse,
    };
    let value = to_uflp(sub)?.to_json(format);
    let text = serde_json::to_string_pretty(&value).map_err(|e| Failure { code: 1, message: e.to_string() })?;
    write(Some(target), &with_newline(text))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
