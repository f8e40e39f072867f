use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::config::ExperimentConfig;
use super::experiment::{replicate_stream, run_experiment};
use super::report::ExperimentReport;
use crate::distributions::InterArrivalLaw;
use crate::error::{Error, Result};
use crate::kac_stroock::{evaluate_grid, uniform_grid, KacProcessParams, PathEvaluation};
use crate::renewal::simulate_path_capped;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "renewal-ks", version, about = "Renewal Kac-Stroock process simulator and convergence checker")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Experiment config (JSON)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Inter-arrival law as a tagged JSON record
    #[arg(long)]
    pub law: Option<String>,
    /// Scale index; comma-separated list for `converge`
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u64>>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Grid size G (grid is i/G, i = 0..=G)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Output directory; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one path of X_n, W_n, R_n on the grid
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Replicate index whose stream drives the path
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        /// Also write the raw renewal path (k, U_k, S_k) to this CSV file
        #[arg(long)]
        arrivals: Option<PathBuf>,
    },
    /// Full diagnostic sweep over n_values
    Converge {
        #[command(flatten)]
        common: Common,
        /// Exit 1 if any diagnostic assertion fails
        #[arg(long = "assert")]
        assert: bool,
    },
    /// Classical exponential(1) case with C forced to 1
    PoissonCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Render a JSON report as a table
    Report {
        /// Report JSON file
        input: PathBuf,
    },
}

fn default_config() -> ExperimentConfig {
    ExperimentConfig::default_for(InterArrivalLaw::exponential(1.0).expect("valid law"))
}

fn resolve_config(common: &Common, base: ExperimentConfig) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => base,
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(law) = &common.law {
        cfg.law = serde_json::from_str(law).map_err(|e| Error::Config(format!("--law: {e}")))?;
    }
    if let Some(n) = &common.n {
        cfg.n_values = n.clone();
    }
    if let Some(m) = common.replicates {
        cfg.replicates = m;
    }
    if let Some(g) = common.grid {
        cfg.grid = g;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(dir: Option<&Path>, file: &str, body: &str) -> Result<()> {
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(file), body)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulationDump<'a> {
    law: &'a InterArrivalLaw,
    params: KacProcessParams,
    seed: u64,
    stream_path: Vec<u64>,
    rng_algorithm: &'static str,
    evaluation: &'a PathEvaluation,
}

fn simulate(common: &Common, replicate: u64, arrivals: Option<&Path>) -> Result<()> {
    let mut base = default_config();
    base.n_values = vec![100];
    let cfg = resolve_config(common, base)?;
    let n = cfg.n_values[0];
    let params = match cfg.kac_constant {
        Some(c) => KacProcessParams::new(n, c)?,
        None => KacProcessParams::for_law(&cfg.law, n)?,
    };
    let stream = replicate_stream(cfg.seed, n, replicate);
    let mut path_stream = stream.child(0);
    let path = simulate_path_capped(&cfg.law, n as f64, &mut path_stream, cfg.max_events)?;
    let eval = evaluate_grid(&path, &params, &uniform_grid(cfg.grid))?;
    if let Some(file) = arrivals {
        let mut buf = Vec::new();
        path.write_csv(&mut buf)?;
        fs::write(file, buf)?;
    }
    let dir = cfg.output_dir.as_deref();
    match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            eval.write_csv(&mut buf)?;
            emit(dir, "path.csv", &String::from_utf8_lossy(&buf))
        }
        Format::Json => {
            let dump = SimulationDump {
                law: &cfg.law,
                params,
                seed: cfg.seed,
                stream_path: path_stream.path().to_vec(),
                rng_algorithm: path_stream.algorithm(),
                evaluation: &eval,
            };
            let body = serde_json::to_string_pretty(&dump).map_err(|e| Error::Io(e.to_string()))?;
            emit(dir, "path.json", &(body + "\n"))
        }
    }
}

fn write_report(report: &ExperimentReport, common: &Common) -> Result<()> {
    let json = report.to_json()? + "\n";
    match (report.config.output_dir.as_deref(), common.format) {
        (Some(dir), _) => {
            emit(Some(dir), "report.json", &json)?;
            print!("{}", report.render_table());
            Ok(())
        }
        (None, Some(Format::Json)) => emit(None, "", &json),
        (None, _) => {
            print!("{}", report.render_table());
            Ok(())
        }
    }
}

fn converge(common: &Common, assert: bool) -> Result<i32> {
    let cfg = resolve_config(common, default_config())?;
    let report = run_experiment(&cfg)?;
    write_report(&report, common)?;
    if assert && !report.all_assertions_pass() {
        return Ok(EXIT_ASSERTION);
    }
    Ok(EXIT_OK)
}

fn poisson_check(common: &Common) -> Result<i32> {
    if common.law.is_some() {
        return Err(Error::Config("poisson-check always uses exponential(rate=1)".into()));
    }
    let law = InterArrivalLaw::exponential(1.0)?;
    let derived = law.kac_constant()?;
    let mut base = ExperimentConfig::default_for(law);
    base.n_values = vec![1000];
    base.replicates = 1000;
    let mut cfg = resolve_config(common, base)?;
    cfg.law = InterArrivalLaw::exponential(1.0)?;
    cfg.kac_constant = Some(1.0);
    println!("kac_constant(exponential(rate=1)) = {derived:?}");
    let matches = derived == 1.0;
    println!("[{}] derived constant equals the classical prefactor 1", if matches { "PASS" } else { "FAIL" });
    let report = run_experiment(&cfg)?;
    write_report(&report, common)?;
    Ok(if matches && report.all_assertions_pass() { EXIT_OK } else { EXIT_ASSERTION })
}

fn render(input: &Path) -> Result<()> {
    let text = fs::read_to_string(input).map_err(|e| Error::Config(format!("{}: {e}", input.display())))?;
    let report = ExperimentReport::from_json(&text)?;
    print!("{}", report.render_table());
    Ok(())
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Simulate { common, replicate, arrivals } => {
            simulate(common, *replicate, arrivals.as_deref()).map(|_| EXIT_OK)
        }
        Command::Converge { common, assert } => converge(common, *assert),
        Command::PoissonCheck { common } => poisson_check(common),
        Command::Report { input } => render(input).map(|_| EXIT_OK),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
