use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nppr::io::{
    emit_cox_fit, emit_grid_rows, emit_ppr_fit, emit_report, emit_results_json, parse_grid, read_dataset_csv,
    write_dataset_csv, write_series, AnalysisReport, OutputFormat, Series, REFERENCE_GRID_JSON,
};
use nppr::parametric::{cox_two_group_at_level, fit_ppr_at_level};
use nppr::sim::{simulate_dataset, Scenario};
use nppr::study::{run_grid, summarize_grid, StudyConfig, PPR_EXCLUSION_THRESHOLD};
use nppr::{analyze_with, BootstrapConfig, Error, VarianceScale};

/// Non-parametric proportional-risk analysis of two-group time-to-event data.
///
/// Input datasets are CSV files with columns `time,status,group`
/// (status 1 = event, 0 = censored; group 1 = treatment, 0 = control).
#[derive(Parser)]
#[command(name = "nppr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// NPPR estimate with risk-difference curve and optional bootstrap interval.
    Fit(FitArgs),
    /// Parametric exponentiated-uniform proportional-risk fit.
    PprFit(ParametricArgs),
    /// Two-group Cox proportional-hazards fit.
    Cox(ParametricArgs),
    /// Simulate datasets from a scenario file.
    Simulate(SimulateArgs),
    /// Monte-Carlo study over a scenario grid.
    Study(StudyArgs),
    /// Data series for plotting (CSV).
    Plotdata(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => OutputFormat::Table,
            Format::Csv => OutputFormat::Delimited,
            Format::Json => OutputFormat::Structured,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scale {
    /// Var(S) / F^2 with Greenwood's Var(S).
    Survival,
    /// Greenwood variance of log S in place of Var(S).
    LogSurvival,
}

impl From<Scale> for VarianceScale {
    fn from(s: Scale) -> Self {
        match s {
            Scale::Survival => VarianceScale::Survival,
            Scale::LogSurvival => VarianceScale::LogSurvival,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesArg {
    Cdf,
    #[value(name = "beta_t")]
    BetaT,
    Weights,
    Nnt,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    /// Number of bootstrap resamples; 0 skips the interval.
    #[arg(long, default_value_t = 0)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Scale::Survival)]
    variance_scale: Scale,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct ParametricArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario JSON (a single scenario or a grid).
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 1)]
    reps: u64,
    /// Overrides the scenario seed; scenario `i` of a grid gets `seed + i`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StudyArgs {
    /// Scenario grid JSON; the bundled 90-cell reference grid when omitted.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Also estimate bootstrap coverage (slow).
    #[arg(long)]
    coverage: bool,
    /// Bootstrap resamples per replicate for coverage.
    #[arg(long, default_value_t = 500)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Overrides scenario seeds; scenario `i` gets `seed + i`.
    #[arg(long)]
    seed: Option<u64>,
    /// Skip the parametric PPR fits.
    #[arg(long)]
    no_ppr: bool,
    #[arg(long, default_value_t = PPR_EXCLUSION_THRESHOLD)]
    ppr_threshold: f64,
    #[arg(long, value_enum, default_value_t = Scale::Survival)]
    variance_scale: Scale,
    /// `json` writes full per-scenario results.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    series: SeriesArg,
    #[arg(long, value_enum, default_value_t = Scale::Survival)]
    variance_scale: Scale,
}

enum Failure {
    Lib(Error),
    NotConverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Estimation(_) | Error::Bootstrap { .. } => 3,
        _ => 2,
    }
}

fn reseed(scenarios: &mut [Scenario], seed: Option<u64>) {
    if let Some(base) = seed {
        for (i, s) in scenarios.iter_mut().enumerate() {
            s.seed = base.wrapping_add(i as u64);
        }
    }
}

fn fit(args: FitArgs, out: &mut impl Write) -> Result<(), Failure> {
    let data = read_dataset_csv(&args.data)?;
    let boot = (args.bootstrap > 0).then(|| BootstrapConfig::new(args.bootstrap, args.level, args.seed));
    let report = AnalysisReport::compute(&data, args.variance_scale.into(), boot.as_ref())?;
    emit_report(&report, args.format.into(), out)?;
    Ok(())
}

fn ppr_fit(args: ParametricArgs, out: &mut impl Write) -> Result<(), Failure> {
    let data = read_dataset_csv(&args.data)?;
    let fit = fit_ppr_at_level(&data, args.level);
    emit_ppr_fit(&fit, args.format.into(), out)?;
    if !fit.converged {
        return Err(Failure::NotConverged(fit.reason.unwrap_or_else(|| "PPR fit did not converge".into())));
    }
    Ok(())
}

fn cox(args: ParametricArgs, out: &mut impl Write) -> Result<(), Failure> {
    let data = read_dataset_csv(&args.data)?;
    let fit = cox_two_group_at_level(&data, args.level);
    emit_cox_fit(&fit, args.format.into(), out)?;
    if !fit.converged {
        return Err(Failure::NotConverged("Cox fit did not converge".into()));
    }
    Ok(())
}

fn simulate(args: SimulateArgs, out: &mut impl Write) -> Result<(), Failure> {
    let mut scenarios = parse_grid(&fs::read_to_string(&args.scenario)?)?;
    reseed(&mut scenarios, args.seed);
    let nested = scenarios.len() > 1;
    for (i, scenario) in scenarios.iter().enumerate() {
        let scenario = scenario.calibrated()?;
        let dir = if nested { args.out.join(format!("scenario_{i:03}")) } else { args.out.clone() };
        fs::create_dir_all(&dir)?;
        nppr::io::write_grid(std::slice::from_ref(&scenario), File::create(dir.join("scenario.json"))?)?;
        for r in 0..args.reps {
            let data = simulate_dataset(&scenario, r)?;
            let path = dir.join(format!("replicate_{r:04}.csv"));
            write_dataset_csv(&data, BufWriter::new(File::create(&path)?))?;
        }
        writeln!(out, "{}: {} datasets, censoring bound {}", dir.display(), args.reps, scenario.censor_cmax.unwrap_or(f64::NAN))?;
    }
    Ok(())
}

fn study(args: StudyArgs, out: &mut impl Write) -> Result<(), Failure> {
    let text = match &args.grid {
        Some(path) => fs::read_to_string(path)?,
        None => REFERENCE_GRID_JSON.to_string(),
    };
    let mut scenarios = parse_grid(&text)?;
    reseed(&mut scenarios, args.seed);
    let config = StudyConfig {
        n_reps: args.reps,
        with_coverage: args.coverage,
        bootstrap: BootstrapConfig::new(args.bootstrap, args.level, 0),
        with_ppr: !args.no_ppr,
        ppr_exclusion_threshold: args.ppr_threshold,
        variance_scale: args.variance_scale.into(),
    };
    let results = run_grid(&scenarios, &config)?;
    match args.format {
        Format::Json => emit_results_json(&results, out)?,
        f => emit_grid_rows(&summarize_grid(&results), f.into(), out)?,
    }
    Ok(())
}

fn plotdata(args: PlotArgs, out: &mut impl Write) -> Result<(), Failure> {
    let data = read_dataset_csv(&args.data)?;
    let analysis = analyze_with(&data, args.variance_scale.into()).map_err(Error::from)?;
    let series = match args.series {
        SeriesArg::Cdf => Series::Cdf,
        SeriesArg::BetaT => Series::BetaT,
        SeriesArg::Weights => Series::Weights,
        SeriesArg::Nnt => Series::Nnt,
    };
    write_series(&analysis, series, out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = match cli.command {
        Command::Fit(a) => fit(a, &mut out),
        Command::PprFit(a) => ppr_fit(a, &mut out),
        Command::Cox(a) => cox(a, &mut out),
        Command::Simulate(a) => simulate(a, &mut out),
        Command::Study(a) => study(a, &mut out),
        Command::Plotdata(a) => plotdata(a, &mut out),
    };
    out.flush()?;
    result
}

fn describe(path: &Path) -> String {
    path.display().to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let input = match &cli.command {
        Command::Fit(a) => Some(describe(&a.data)),
        Command::PprFit(a) | Command::Cox(a) => Some(describe(&a.data)),
        Command::Plotdata(a) => Some(describe(&a.data)),
        Command::Simulate(a) => Some(describe(&a.scenario)),
        Command::Study(a) => a.grid.as_deref().map(describe),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(Error::Io(e))) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            match input {
                Some(path) => eprintln!("error: {path}: {e}"),
                None => eprintln!("error: {e}"),
            }
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::NotConverged(reason)) => {
            eprintln!("warning: {reason}");
            ExitCode::from(4)
        }
    }
}
