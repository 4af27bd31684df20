//! Command-line driver for marsim.
//!
//! `marsim run` estimates reliability for one scenario, `marsim sweep` varies
//! one parameter (optionally crossed with a second that splits the results
//! into series) and writes CSV plus an SVG chart, and `marsim validate`
//! checks a config file without simulating.

pub mod error;
pub mod plot;
pub mod sweep;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use marsim_core::{monte_carlo, run_episode_with, EpisodeSetup, ReliabilityReport, ScenarioConfig};

pub use error::{CliError, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME};
pub use plot::{emit_plot, PlotStyle};
pub use sweep::{format_number, load_config, run_sweep, to_csv, Series, SeriesSpec, SweepRow, SweepSpec, CSV_HEADER};

#[derive(Debug, Parser)]
#[command(name = "marsim", version, about = "Mobile-agent service discovery reliability over MANETs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate reliability for one scenario.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the first episode's per-step edge lists to snapshots.txt.
        #[arg(long)]
        dump_snapshots: bool,
    },
    /// Sweep one parameter and write CSV plus an SVG chart.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Parameter to sweep; overrides `sweep.parameter`.
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated values; overrides `sweep.values`.
        #[arg(long)]
        values: Option<String>,
    },
    /// Parse and check a config file, then print it in full.
    Validate {
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario file of `key = value` lines. Defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Base seed; overrides `seed` from the config.
    #[arg(long, value_name = "INT")]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for episodes; defaults to the number of CPUs.
    #[arg(long, value_name = "INT", value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
}

fn read_config(path: Option<&Path>) -> Result<(ScenarioConfig, Option<SweepSpec>), CliError> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    load_config(&text)
}

fn with_pool<T: Send>(jobs: Option<u16>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j as usize);
    }
    let pool = builder.build().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(pool.install(f))
}

fn summary(report: &ReliabilityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "episodes     {}", report.q);
    let _ = writeln!(s, "mean_lambda  {}", format_number(report.mean_lambda));
    let _ = writeln!(s, "std_lambda   {}", format_number(report.std_lambda));
    let _ = writeln!(s, "r_service    {}", format_number(report.mean_r_service));
    let _ = writeln!(s, "mean_m       {}", format_number(report.mean_final_m));
    s
}

fn episodes_csv(report: &ReliabilityReport) -> String {
    let mut s = String::from("episode,seed,lambda,r_service,final_m,steps,kills,agents\n");
    for (q, e) in report.per_episode.iter().enumerate() {
        let _ = writeln!(
            s,
            "{q},{},{},{},{},{},{},{}",
            e.seed,
            format_number(e.lambda_t),
            format_number(e.r_service_observer),
            e.final_m,
            e.step_count,
            e.kills,
            e.agents_total
        );
    }
    s
}

fn dump_snapshots(cfg: &ScenarioConfig, path: &Path) -> Result<(), CliError> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    let mut io_err = None;
    run_episode_with(cfg, cfg.seed, &EpisodeSetup::default(), |s| {
        if io_err.is_none() {
            io_err = s.write_edge_list(&mut out).err();
        }
    })?;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    out.flush()?;
    Ok(())
}

pub fn cmd_run(common: &CommonArgs, dump: bool) -> Result<String, CliError> {
    let (mut cfg, _) = read_config(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let report = with_pool(common.jobs, || monte_carlo(&cfg, cfg.seed))??;
    fs::create_dir_all(&common.out)?;
    let row = SweepRow::from_report("run", &report);
    fs::write(common.out.join("run.csv"), to_csv(&[row]))?;
    fs::write(common.out.join("episodes.csv"), episodes_csv(&report))?;
    if dump {
        dump_snapshots(&cfg, &common.out.join("snapshots.txt"))?;
    }
    Ok(summary(&report))
}

/// Per-series CSV name: `lfp.csv` becomes `lfp_RWMM.csv` for series `RWMM`.
fn series_path(base: &Path, label: &str) -> PathBuf {
    if label.is_empty() {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let safe: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect();
    base.with_file_name(format!("{stem}_{safe}.csv"))
}

pub fn cmd_sweep(common: &CommonArgs, param: Option<&str>, values: Option<&str>) -> Result<String, CliError> {
    let (mut cfg, spec) = read_config(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let mut spec = match (spec, param) {
        (Some(mut s), Some(p)) => {
            // a default output name follows the parameter; an explicit one stays
            if s.output_path == sweep::default_output(&s.parameter) {
                s.output_path = sweep::default_output(p);
            }
            s.parameter = p.to_string();
            s
        }
        (Some(s), None) => s,
        (None, Some(p)) => SweepSpec::new(p, &[]),
        (None, None) => return Err(CliError::Config("no sweep parameter: set sweep.parameter or --param".into())),
    };
    if let Some(v) = values {
        spec.values = v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    }
    spec.validate()?;

    let series = with_pool(common.jobs, || run_sweep(&cfg, &spec))??;
    let csv_base = common.out.join(&spec.output_path);
    if let Some(dir) = csv_base.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut listing = String::new();
    for s in &series {
        let path = series_path(&csv_base, &s.label);
        fs::write(&path, to_csv(&s.rows))?;
        let _ = writeln!(listing, "wrote {}", path.display());
    }
    let mut style = PlotStyle::for_parameter(&spec.parameter);
    if let Some(t) = &spec.title {
        style.title = t.clone();
    }
    let svg = csv_base.with_extension("svg");
    emit_plot(&series, &style, &svg)?;
    let _ = writeln!(listing, "wrote {}", svg.display());
    Ok(listing)
}

pub fn cmd_validate(config: Option<&Path>) -> Result<String, CliError> {
    let (cfg, spec) = read_config(config)?;
    let mut out = cfg.to_config_string();
    if let Some(s) = spec {
        let _ = writeln!(out, "sweep.parameter = {}", s.parameter);
        let _ = writeln!(out, "sweep.values = {}", s.values.join(", "));
        let _ = writeln!(out, "sweep.output = {}", s.output_path.display());
        if let Some(series) = s.series {
            let _ = writeln!(out, "sweep.series = {}", series.parameter);
            let _ = writeln!(out, "sweep.series_values = {}", series.values.join(", "));
        }
        if let Some(t) = s.title {
            let _ = writeln!(out, "sweep.title = {t}");
        }
    }
    Ok(out)
}

pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Run { common, dump_snapshots } => cmd_run(common, *dump_snapshots),
        Command::Sweep { common, param, values } => cmd_sweep(common, param.as_deref(), values.as_deref()),
        Command::Validate { config } => cmd_validate(config.as_deref()),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status. Results go to stdout, diagnostics to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("marsim: {e}");
            e.exit_code()
        }
    }
}
