use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hybrid_chsh::app::{self, calc, AppError, Mode, RunConfig};
use hybrid_chsh::chsh::ParamId;

#[derive(Debug, Parser)]
#[command(name = "hybrid-chsh", version, about = "CHSH tests between an atom and a single-photon optical mode")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Optimizer seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for result tables and summaries.
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CalcCommon {
    /// Accepted for uniformity; the calculators are deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write a CSV row and summary into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// S for fixed settings (free parameters are ignored).
    Evaluate {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Maximize S over the free parameters.
    Optimize {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Critical efficiency at which the optimized S reaches 2.
    Threshold {
        config: PathBuf,
        /// eta_t or eta_d.
        #[arg(long)]
        param: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Optimized S against transmission efficiency for the five standard menus.
    Fig2 {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Space-like separation and fiber transmission for a link.
    Locality {
        #[arg(long, default_value_t = 300.0)]
        distance_m: f64,
        #[arg(long, default_value_t = 2.0)]
        attenuation_db_per_km: f64,
        #[arg(long, default_value_t = 1e-6)]
        detection_time_s: f64,
        #[arg(long, default_value_t = calc::VACUUM_LIGHT_SPEED)]
        signal_speed_m_per_s: f64,
        #[command(flatten)]
        common: CalcCommon,
    },
    /// Path-length stability |k| dL against a phase threshold.
    Stability {
        /// Optical wavevector norm; defaults to 800 nm light.
        #[arg(long, conflicts_with = "wavelength_m")]
        k_norm_per_m: Option<f64>,
        #[arg(long)]
        wavelength_m: Option<f64>,
        #[arg(long)]
        delta_l_m: f64,
        #[arg(long, default_value_t = calc::DEFAULT_PHASE_THRESHOLD)]
        threshold_rad: f64,
        #[command(flatten)]
        common: CalcCommon,
    },
}

fn config_run(mode: Mode, config: &Path, common: &Common) -> Result<app::Report, AppError> {
    let cfg = RunConfig::load(config)?;
    app::run(mode, &cfg, common.seed, &common.out)
}

fn dispatch(cmd: Command) -> Result<app::Report, AppError> {
    match cmd {
        Command::Evaluate { config, common } => config_run(Mode::Evaluate, &config, &common),
        Command::Optimize { config, common } => config_run(Mode::Optimize, &config, &common),
        Command::Threshold { config, param, common } => {
            let param = param
                .map(|p| p.parse::<ParamId>().map_err(|e| AppError::Usage(format!("--param: {e}"))))
                .transpose()?;
            config_run(Mode::Threshold(param), &config, &common)
        }
        Command::Fig2 { config, common } => config_run(Mode::Fig2, &config, &common),
        Command::Locality {
            distance_m,
            attenuation_db_per_km,
            detection_time_s,
            signal_speed_m_per_s,
            common,
        } => app::run_locality(
            &app::LinkBudget {
                distance_m,
                attenuation_db_per_km,
                detection_time_s,
                signal_speed_m_per_s,
            },
            common.out.as_deref(),
        ),
        Command::Stability {
            k_norm_per_m,
            wavelength_m,
            delta_l_m,
            threshold_rad,
            common,
        } => {
            let k = match (k_norm_per_m, wavelength_m) {
                (Some(k), _) => k,
                (None, Some(w)) if w > 0.0 => std::f64::consts::TAU / w,
                (None, Some(w)) => return Err(AppError::Domain(format!("wavelength_m = {w} must be positive"))),
                (None, None) => std::f64::consts::TAU / 800e-9,
            };
            app::run_stability(k, delta_l_m, threshold_rad, common.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(report) => {
            print!("{}", report.summary);
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
