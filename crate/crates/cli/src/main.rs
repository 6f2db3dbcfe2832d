//! `sps`: calibrated coherence sweeps, HOM delay scans, Mach–Zehnder peak
//! tables and Monte Carlo validation runs.

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};
use error::CliError;
use output::{manifest_path, write_table, Manifest};

#[derive(Parser, Debug)]
#[command(name = "sps", version, about = "Pulsed single-photon source simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrated g², |g¹|², HOM and MZ values over a sweep.
    Coherence(Common),
    /// HOM coincidences of two sources against their relative delay.
    HomDelay {
        #[command(flatten)]
        common: Common,
        /// Config of the second source; defaults to the first.
        #[arg(long)]
        config_b: Option<PathBuf>,
    },
    /// Five-peak Mach–Zehnder coincidence amplitudes.
    Mz {
        #[command(flatten)]
        common: Common,
        /// Intensity reflectivity of the first splitter.
        #[arg(long)]
        r1: Option<f64>,
        /// Intensity reflectivity of the second splitter.
        #[arg(long)]
        r2: Option<f64>,
    },
    /// Compares Monte Carlo photocount statistics with the deterministic pipeline.
    McValidate {
        #[command(flatten)]
        common: Common,
        /// Also write every click record as CSV.
        #[arg(long)]
        clicks: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// two_level, ladder or lambda.
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    fwhm: Option<f64>,
    /// Pulse area in units of π.
    #[arg(long)]
    area: Option<f64>,
    /// Calibrate the amplitude to the target photon number.
    #[arg(long)]
    calibrate: bool,
    /// AXIS:LO:HI:N with AXIS one of fwhm, area, dephasing, delay.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Output table; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Manifest path; defaults to `<out>.manifest.json`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            system: self.system.clone(),
            fwhm: self.fwhm,
            area: self.area,
            calibrate: self.calibrate,
            sweep: self.sweep.clone(),
            trials: self.trials,
            seed: self.seed,
            eta: self.eta,
            out: self.out.as_ref().map(|p| p.display().to_string()),
            format: self.format.clone(),
        }
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        RunConfig::resolve(self.config.as_deref(), &self.overrides())
    }

    /// Prints `c` when `--print-config` was given.
    fn printed(&self, c: &RunConfig) -> bool {
        if self.print_config {
            print!("{}", c.to_toml());
        }
        self.print_config
    }
}

fn finish<T: serde::Serialize>(
    rows: &[T],
    c: &RunConfig,
    common: &Common,
    mut manifest: Manifest,
    start: Instant,
) -> Result<(), CliError> {
    let out = c.output.path.as_deref().map(Path::new);
    write_table(rows, c.output.format, out)?;
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    let path = common.manifest.clone().or_else(|| out.map(manifest_path));
    if let Some(p) = path {
        manifest.write(&p)?;
    }
    if !manifest.errors.is_empty() {
        return Err(CliError::Numerical(format!("{} sweep point(s) failed", manifest.errors.len())));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    match cli.command {
        Command::Coherence(common) => {
            let c = common.resolve()?;
            if common.printed(&c) {
                return Ok(());
            }
            let mut m = Manifest::new("coherence", &c);
            let rows = commands::cmd_coherence(&c, &mut m)?;
            finish(&rows, &c, &common, m, start)
        }
        Command::HomDelay { common, config_b } => {
            let a = common.resolve()?;
            if common.printed(&a) {
                return Ok(());
            }
            let b = match config_b {
                Some(p) => {
                    let mut b = RunConfig::load(&p)?;
                    b.validate()?;
                    b.sweep = a.sweep;
                    b
                }
                None => a.clone(),
            };
            let mut m = Manifest::new("hom-delay", &a);
            let rows = commands::cmd_hom_delay(&a, &b, &mut m)?;
            finish(&rows, &a, &common, m, start)
        }
        Command::Mz { common, r1, r2 } => {
            let mut c = common.resolve()?;
            if let Some(r) = r1 {
                c.splitter.r1 = r;
            }
            if let Some(r) = r2 {
                c.splitter.r2 = r;
            }
            c.validate()?;
            if common.printed(&c) {
                return Ok(());
            }
            let mut m = Manifest::new("mz", &c);
            let rows = commands::cmd_mz(&c, &mut m)?;
            finish(&rows, &c, &common, m, start)
        }
        Command::McValidate { common, clicks } => {
            let c = common.resolve()?;
            if common.printed(&c) {
                return Ok(());
            }
            let mut m = Manifest::new("mc-validate", &c);
            let mut records = Vec::new();
            let rows = commands::cmd_mc_validate(&c, &mut m, clicks.as_ref().map(|_| &mut records))?;
            if let Some(p) = &clicks {
                let f = std::fs::File::create(p).map_err(|e| CliError::Config(format!("cannot write clicks: {e}")))?;
                sps_core::trajectories::write_clicks_csv(&records, std::io::BufWriter::new(f))?;
            }
            let failed = rows.iter().filter(|r| r.verdict == "FAIL").count();
            finish(&rows, &c, &common, m, start)?;
            if failed > 0 {
                return Err(CliError::Validation(format!("{failed} configuration(s) disagree beyond 3σ")));
            }
            Ok(())
        }
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
