//! Command-line harness: single-point evaluations, parameter sweeps and
//! figure-data reproduction, all emitted as CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xlarray::sweep::{
    field_distances_csv, figure_csv, snr_csv, sweep_csv, ula_csv, ScenarioFile, Settings,
    SweepSpec, FIGURE_NAMES,
};

#[derive(Parser)]
#[command(name = "xlarray", about = "Near-field XL-array SNR and field-boundary calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form and brute-force SNR for a single configuration
    Snr(CommonFlags),
    /// Sweep one parameter and tabulate SNR
    Sweep(SweepFlags),
    /// UPD, direction-dependent and classical Rayleigh distances
    FieldDistances(CommonFlags),
    /// ULA angular spans and SNR (array size taken from --mz)
    Ula(CommonFlags),
    /// Reproduce the data behind a reference figure
    Figure(FigureFlags),
}

#[derive(Args)]
struct CommonFlags {
    /// Elements along y
    #[arg(long)]
    my: Option<usize>,
    /// Elements along z
    #[arg(long)]
    mz: Option<usize>,
    /// Element spacing, meters
    #[arg(long)]
    d: Option<f64>,
    /// Element area, square meters
    #[arg(long)]
    a: Option<f64>,
    /// Carrier wavelength, meters
    #[arg(long)]
    lambda: Option<f64>,
    /// Link distance, meters
    #[arg(long)]
    r: Option<f64>,
    /// Zenith angle, radians in [0, pi]
    #[arg(long)]
    theta: Option<f64>,
    /// Azimuth angle, radians in [-pi/2, pi/2]
    #[arg(long)]
    phi: Option<f64>,
    /// Transmit SNR in dB (power convention: 90 dB = 1e9 linear)
    #[arg(long = "pbar-db")]
    pbar_db: Option<f64>,
    /// Reference channel gain at 1 m
    #[arg(long)]
    beta0: Option<f64>,
    /// Channel model: proposed, upw, usw or nusw
    #[arg(long)]
    model: Option<String>,
    /// Power-ratio threshold for the uniform-power distance
    #[arg(long = "gamma-th")]
    gamma_th: Option<f64>,
    /// JSON scenario file; flags override its values
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output file (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepFlags {
    #[command(flatten)]
    common: CommonFlags,
    /// Swept variable: m, r, theta or phi
    #[arg(long)]
    var: Option<String>,
    /// Sweep start value
    #[arg(long)]
    from: Option<f64>,
    /// Sweep end value
    #[arg(long)]
    to: Option<f64>,
    /// Number of sweep points
    #[arg(long)]
    points: Option<usize>,
    /// Log-spaced samples instead of linear
    #[arg(long)]
    log: bool,
}

#[derive(Args)]
struct FigureFlags {
    /// One of: fig5, fig6, fig7a, fig7b, fig8, fig9, fig10
    name: String,
    /// Output file (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn init_threads() -> Result<(), String> {
    match std::env::var("XLARRAY_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| format!("invalid XLARRAY_THREADS value `{raw}`: expected a positive integer"))?;
            if n == 0 {
                return Err("invalid XLARRAY_THREADS value `0`: expected a positive integer".into());
            }
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| e.to_string())?;
            Ok(())
        }
    }
}

fn scenario_from_flags(f: &CommonFlags, sweep: Option<&SweepFlags>) -> Result<ScenarioFile, String> {
    let flags = ScenarioFile {
        my: f.my,
        mz: f.mz,
        d: f.d,
        a: f.a,
        lambda: f.lambda,
        r: f.r,
        theta: f.theta,
        phi: f.phi,
        pbar_db: f.pbar_db,
        beta0: f.beta0,
        model: f.model.clone(),
        gamma_th: f.gamma_th,
        var: sweep.and_then(|s| s.var.clone()),
        from: sweep.and_then(|s| s.from),
        to: sweep.and_then(|s| s.to),
        points: sweep.and_then(|s| s.points),
        log: sweep.map(|s| s.log).filter(|&l| l),
    };
    match &f.scenario {
        None => Ok(flags),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read scenario file {}: {e}", path.display()))?;
            let file = ScenarioFile::parse_json(&text).map_err(|e| e.to_string())?;
            Ok(flags.over(&file))
        }
    }
}

fn emit(out: Option<&PathBuf>, csv: &str) -> Result<(), String> {
    match out {
        None => {
            print!("{csv}");
            Ok(())
        }
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
    }
}

fn run() -> Result<(), String> {
    let cli = Cli::parse();
    init_threads()?;
    match &cli.command {
        Command::Snr(f) => {
            let settings = Settings::resolve(&scenario_from_flags(f, None)?).map_err(|e| e.to_string())?;
            emit(f.out.as_ref(), &snr_csv(&settings).map_err(|e| e.to_string())?)
        }
        Command::Sweep(sf) => {
            let scen = scenario_from_flags(&sf.common, Some(sf))?;
            let settings = Settings::resolve(&scen).map_err(|e| e.to_string())?;
            let spec = SweepSpec::from_scenario(&scen).map_err(|e| e.to_string())?;
            emit(sf.common.out.as_ref(), &sweep_csv(&settings, &spec).map_err(|e| e.to_string())?)
        }
        Command::FieldDistances(f) => {
            let settings = Settings::resolve(&scenario_from_flags(f, None)?).map_err(|e| e.to_string())?;
            emit(f.out.as_ref(), &field_distances_csv(&settings).map_err(|e| e.to_string())?)
        }
        Command::Ula(f) => {
            let settings = Settings::resolve(&scenario_from_flags(f, None)?).map_err(|e| e.to_string())?;
            emit(f.out.as_ref(), &ula_csv(&settings).map_err(|e| e.to_string())?)
        }
        Command::Figure(f) => {
            if !FIGURE_NAMES.contains(&f.name.as_str()) {
                return Err(format!(
                    "unknown figure `{}` (expected one of {})",
                    f.name,
                    FIGURE_NAMES.join(", ")
                ));
            }
            emit(f.out.as_ref(), &figure_csv(&f.name).map_err(|e| e.to_string())?)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
