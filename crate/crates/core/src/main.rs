use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gainstat::cohort::ZScope;
use gainstat::inference::VarianceModel;
use gainstat::pipeline::{emit_gains, emit_plot_data, emit_report, ingest, run_analysis, AnalysisOptions, Format, Scale};
use gainstat::simulate::{generate_cohort, CohortSpec, Marginal};
use gainstat::{Error, Result};

/// Individual gain analysis of pre/post score tables.
#[derive(Debug, Parser)]
#[command(name = "gainstat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full report: summaries, mean gains, extremes, quadrants, groups, fits, comparison.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Also write plot-data files to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// With --out, also render SVG files.
        #[arg(long)]
        svg: bool,
    },
    /// Per-student gain table.
    Gains {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Plot-data files only.
    Plots {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
    },
    /// Synthetic score table in the standard input format.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Delimited table with columns student_id, cohort, initial, final.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = ScaleArg::Percent)]
    scale: ScaleArg,
    /// Field delimiter: a single character, or "tab".
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
}

#[derive(Debug, Args)]
struct AnalysisArgs {
    /// Histogram bins (default: Freedman–Diaconis).
    #[arg(long)]
    bins: Option<usize>,
    /// KDE bandwidth (default: Silverman).
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    z_threshold: f64,
    /// Cohort pair to compare, as A,B.
    #[arg(long, value_parser = parse_pair)]
    compare: Option<(String, String)>,
    #[arg(long, value_enum, default_value_t = ZScopeArg::Within)]
    z_scope: ZScopeArg,
    /// Confidence level of the mean-difference interval.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Use the pooled-variance t-test instead of Welch.
    #[arg(long)]
    pooled: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Records per cohort.
    #[arg(long)]
    n: usize,
    /// Cohort label; repeat for several cohorts.
    #[arg(long = "cohort", default_value = "S")]
    cohorts: Vec<String>,
    /// uniform:LOW,HIGH or normal:MEAN,SD on the unit scale.
    #[arg(long, default_value = "uniform:0,0.95", value_parser = parse_marginal)]
    initial: Marginal,
    /// uniform:LOW,HIGH or normal:MEAN,SD.
    #[arg(long, default_value = "normal:0.5,0.2", value_parser = parse_marginal)]
    gain: Marginal,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ScaleArg::Percent)]
    scale: ScaleArg,
    /// Output file (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScaleArg {
    Percent,
    Unit,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ZScopeArg {
    Within,
    Combined,
}

fn parse_delimiter(s: &str) -> std::result::Result<u8, String> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be a single ASCII character or \"tab\", got {s:?}")),
    }
}

fn parse_pair(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once(',') {
        Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => Ok((a.trim().to_string(), b.trim().to_string())),
        _ => Err(format!("expected two cohort labels as A,B, got {s:?}")),
    }
}

fn parse_marginal(s: &str) -> std::result::Result<Marginal, String> {
    let err = || format!("expected uniform:LOW,HIGH or normal:MEAN,SD, got {s:?}");
    let (kind, params) = s.split_once(':').ok_or_else(err)?;
    let (a, b) = params.split_once(',').ok_or_else(err)?;
    let a: f64 = a.trim().parse().map_err(|_| err())?;
    let b: f64 = b.trim().parse().map_err(|_| err())?;
    match kind {
        "uniform" => Ok(Marginal::Uniform { low: a, high: b }),
        "normal" => Ok(Marginal::Normal { mean: a, sd: b }),
        _ => Err(err()),
    }
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Scale {
        match s {
            ScaleArg::Percent => Scale::Percent,
            ScaleArg::Unit => Scale::Unit,
        }
    }
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Text => Format::Text,
        }
    }
}

impl AnalysisArgs {
    fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            bins: self.bins,
            bandwidth: self.bandwidth,
            z_threshold: self.z_threshold,
            compare: self.compare.clone(),
            z_scope: match self.z_scope {
                ZScopeArg::Within => ZScope::WithinCohort,
                ZScopeArg::Combined => ZScope::Combined,
            },
            level: self.level,
            variance_model: if self.pooled { VarianceModel::Pooled } else { VarianceModel::Welch },
            ..AnalysisOptions::default()
        }
    }
}

fn write_stdout(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source })
}

fn load(input: &InputArgs, analysis: &AnalysisArgs) -> Result<gainstat::pipeline::AnalysisReport> {
    let dataset = ingest(&input.input, input.scale.into(), input.delimiter)?;
    for w in &dataset.warnings {
        eprintln!("warning: {}: {w}", dataset.source);
    }
    run_analysis(&dataset, &analysis.options())
}

fn write_plots(report: &gainstat::pipeline::AnalysisReport, out: &Path, svg: bool) -> Result<()> {
    for path in emit_plot_data(report, out, svg)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let scale: Scale = args.scale.into();
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut push = |row: [String; 4]| w.write_record(&row).expect("in-memory write");
    push(["student_id".into(), "cohort".into(), "initial".into(), "final".into()]);
    for (k, cohort) in args.cohorts.iter().enumerate() {
        let spec = CohortSpec {
            cohort: cohort.clone(),
            n: args.n,
            initial: args.initial,
            gain: args.gain,
            rho: args.rho,
            seed: args.seed.wrapping_add(k as u64),
        };
        for r in generate_cohort(&spec)? {
            let value = |v: f64| match scale {
                Scale::Unit => v.to_string(),
                Scale::Percent => (v * 100.0).to_string(),
            };
            push([r.student_id.clone(), r.cohort.clone(), value(r.initial.get()), value(r.final_score.get())]);
        }
    }
    let bytes = w.into_inner().expect("in-memory flush");
    match &args.output {
        Some(path) => std::fs::write(path, bytes).map_err(|source| Error::Io { path: path.clone(), source }),
        None => write_stdout(&bytes),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { input, analysis, format, out, svg } => {
            let report = load(&input, &analysis)?;
            write_stdout(&emit_report(&report, format.into()))?;
            if let Some(dir) = out {
                write_plots(&report, &dir, svg)?;
            }
            Ok(())
        }
        Command::Gains { input, analysis, format } => {
            let report = load(&input, &analysis)?;
            write_stdout(&emit_gains(&report, format.into()))
        }
        Command::Plots { input, analysis, out, svg } => {
            let report = load(&input, &analysis)?;
            write_plots(&report, &out, svg)
        }
        Command::Simulate(args) => simulate(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
