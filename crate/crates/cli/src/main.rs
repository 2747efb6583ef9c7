use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use harvest_core::sweep::{
    emit_plot_script, evaluate_point, run_sweep, write_csv, write_output, Cache, OutputFormat, Preset, RunOptions,
    SweepOutput, SweepSpec, SweepTolerances, Variable,
};

#[derive(Parser)]
#[command(
    name = "harvest",
    version,
    about = "Mutual-information harvesting outside a BTZ black hole"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a JSON file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Write here instead of the path named in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a single parameter point and print it as JSON.
    Point {
        #[arg(long = "l", default_value_t = 10.0)]
        ads_length: f64,
        #[arg(long)]
        mass: f64,
        #[arg(long = "dA")]
        d_a: f64,
        #[arg(long = "dAB")]
        d_ab: f64,
        #[arg(long)]
        gap: f64,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        zeta: i32,
        #[command(flatten)]
        common: Common,
    },
    /// Reproduce a figure grid: CSV, manifest and gnuplot script.
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Relative quadrature tolerance.
    #[arg(long)]
    tol_rel: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    tol_abs: Option<f64>,
    /// Largest image index.
    #[arg(long)]
    n_max: Option<u32>,
    /// Use a straight contour at Im z = eta instead of the saddle path.
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Neither read nor write the point cache.
    #[arg(long)]
    no_cache: bool,
}

impl Common {
    fn apply(&self, tol: &mut SweepTolerances) {
        if let Some(v) = self.tol_rel {
            tol.rel = v;
        }
        if let Some(v) = self.tol_abs {
            tol.abs = v;
        }
        if let Some(v) = self.n_max {
            tol.n_max = v;
        }
        if self.eta.is_some() {
            tol.eta = self.eta;
        }
    }

    fn options(&self) -> Result<RunOptions> {
        let cache = if self.no_cache {
            None
        } else {
            match Cache::default_dir() {
                Some(dir) => Some(Cache::open(&dir).with_context(|| format!("opening cache {}", dir.display()))?),
                None => None,
            }
        };
        Ok(RunOptions { jobs: self.jobs, cache })
    }
}

fn report(output: &SweepOutput) {
    let failures = output.manifest.failures;
    log::info!(
        "{} rows, {} failed, cache {} hits / {} misses",
        output.rows.len(),
        failures,
        output.cache.hits,
        output.cache.misses
    );
    for row in output.rows.iter().filter(|r| !r.is_ok()).take(5) {
        log::warn!("point failed: {}", row.status);
    }
}

fn sweep(config: &Path, out: Option<PathBuf>, common: &Common) -> Result<()> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let mut spec = SweepSpec::from_json(&text)?;
    common.apply(&mut spec.tolerances);
    let output = run_sweep(&spec, &common.options()?)?;
    report(&output);
    let format = spec.output.as_ref().map(|o| o.format).unwrap_or_default();
    match out.or_else(|| spec.output.as_ref().map(|o| o.path.clone())) {
        Some(path) => {
            write_output(&output, &path, format)?;
            println!("{}", path.display());
        }
        None => {
            let stdout = io::stdout().lock();
            match format {
                OutputFormat::Csv => write_csv(&output.rows, stdout)?,
                OutputFormat::Json => harvest_core::sweep::write_json(&output.rows, stdout)?,
            }
        }
    }
    Ok(())
}

fn preset(name: &str, out: &Path, common: &Common) -> Result<()> {
    let preset: Preset = name.parse()?;
    let mut spec = preset.spec();
    common.apply(&mut spec.tolerances);
    let output = run_sweep(&spec, &common.options()?)?;
    report(&output);
    let csv_name = format!("{preset}.csv");
    let table = out.join(&csv_name);
    write_output(&output, &table, OutputFormat::Csv)?;
    let script = out.join(format!("{preset}.gp"));
    fs::write(&script, emit_plot_script(&output.rows, preset, &csv_name))?;
    println!("{}", table.display());
    println!("{}", script.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep { config, out, common } => sweep(&config, out, &common),
        Command::Point {
            ads_length,
            mass,
            d_a,
            d_ab,
            gap,
            zeta,
            common,
        } => {
            let mut tol = SweepTolerances::default();
            common.apply(&mut tol);
            let point: BTreeMap<Variable, f64> = [
                (Variable::AdsLength, ads_length),
                (Variable::Mass, mass),
                (Variable::DA, d_a),
                (Variable::DAB, d_ab),
                (Variable::Omega, gap),
                (Variable::Zeta, zeta as f64),
            ]
            .into_iter()
            .collect();
            let row = evaluate_point(&point, &tol.to_detector()?);
            let mut stdout = io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, &row)?;
            writeln!(stdout)?;
            if !row.is_ok() {
                bail!("{}", row.status);
            }
            Ok(())
        }
        Command::Preset { name, out, common } => preset(&name, &out, &common),
    }
}
