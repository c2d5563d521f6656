use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mdiqkd::conditionals::Basis;
use mdiqkd::decoy::IntensityLevel;

use mdiqkd_cli::config::SweepConfig;
use mdiqkd_cli::output::{format_float, write_csv, CSV_HEADER};
use mdiqkd_cli::sweep::{PointReport, SweepEngine};
use mdiqkd_cli::verify::run_verify;
use mdiqkd_cli::RunError;

#[derive(Parser)]
#[command(
    name = "mdiqkd",
    about = "Gains, error rates, decoy-state bounds and key rates of MDI-QKD over lossy channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the channel-loss sweep described by a config file and emit CSV.
    Sweep {
        /// TOML config file.
        config: PathBuf,
        /// Override the config's output path; "-" writes to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate one total-loss point and dump the full gain table.
    Point {
        /// TOML config file (its sweep section is ignored).
        config: PathBuf,
        /// Total channel loss in dB, split between the arms per the config.
        #[arg(long)]
        loss_db: f64,
    },
    /// Compare every closed-form conditional against the Fock-space oracle.
    Verify {
        /// Photon numbers per side run from 0 to this value.
        #[arg(long, default_value_t = 4)]
        max_photons: usize,
        /// Comma-separated relay dark rates to test.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 1e-3, 0.05])]
        dark: Vec<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn run(cli: Cli) -> Result<i32, RunError> {
    match cli.command {
        Command::Sweep { config, output } => {
            let cfg = SweepConfig::from_path(&config)?;
            let destination = output
                .map(|p| p.display().to_string())
                .or_else(|| cfg.output.path.clone());
            let engine = SweepEngine::new(cfg)?;
            let rows = engine.run()?;
            match destination.as_deref() {
                None | Some("-") => {
                    let stdout = std::io::stdout();
                    write_csv(&rows, &mut stdout.lock())?;
                }
                Some(path) => {
                    let mut file = std::fs::File::create(path)?;
                    write_csv(&rows, &mut file)?;
                }
            }
            Ok(0)
        }
        Command::Point { config, loss_db } => {
            let cfg = SweepConfig::from_path(&config)?;
            let engine = SweepEngine::new(cfg)?;
            let report = engine.evaluate_point_detailed(loss_db)?;
            let stdout = std::io::stdout();
            render_point(&report, &mut stdout.lock())?;
            Ok(if report.row.flags.conditioning_failure() {
                3
            } else {
                0
            })
        }
        Command::Verify { max_photons, dark } => {
            let report = run_verify(max_photons, &dark)?;
            let stdout = std::io::stdout();
            report.render(&mut stdout.lock())?;
            Ok(if report.passed() { 0 } else { 2 })
        }
    }
}

fn render_point(report: &PointReport, out: &mut impl Write) -> std::io::Result<()> {
    let row = &report.row;
    writeln!(out, "loss_db: {}", format_float(row.loss_db))?;
    writeln!(out, "mu_prime_star: {}", format_float(row.mu_prime_star))?;
    writeln!(out, "flags: {}", row.flags)?;
    writeln!(out, "\n[gain table]")?;
    let labels = [
        (IntensityLevel::Vacuum, "0"),
        (IntensityLevel::Decoy, "mu"),
        (IntensityLevel::Signal, "mu'"),
    ];
    for (a, a_name) in labels {
        for (b, b_name) in labels {
            for (basis, basis_name) in [(Basis::Z, "Z"), (Basis::X, "X")] {
                let stats = report.table.basis(a, b, basis);
                let error = stats
                    .adjusted_error
                    .map(format_float)
                    .unwrap_or_else(|| "undefined".into());
                writeln!(
                    out,
                    "S_{basis_name}[{a_name},{b_name}] = {}  E_{basis_name}[{a_name},{b_name}] = {error}",
                    format_float(stats.gain)
                )?;
            }
        }
    }
    writeln!(out, "\n[coefficients]")?;
    for k in 0..=2 {
        writeln!(
            out,
            "a{k} = {}  a{k}' = {}  b{k} = {}  b{k}' = {}",
            format_float(report.chosen.a(k)),
            format_float(report.chosen.a_prime(k)),
            format_float(report.chosen.b(k)),
            format_float(report.chosen.b_prime(k)),
        )?;
    }
    writeln!(out, "\n[bounds]")?;
    let opt = |v: Option<f64>| v.map(format_float).unwrap_or_else(|| "undefined".into());
    writeln!(out, "Y11_Z_true = {}", format_float(row.y11_z_true))?;
    writeln!(out, "Y11_Z_lower = {}", opt(row.y11_z_lower))?;
    writeln!(out, "Y11_X_true = {}", format_float(row.y11_x_true))?;
    writeln!(out, "Y11_X_lower = {}", opt(row.y11_x_lower))?;
    writeln!(out, "e11_X_true = {}", opt(row.e11_x_true))?;
    writeln!(out, "e11_X_upper = {}", opt(row.e11_x_upper))?;
    writeln!(out, "e11_X_as_printed = {}", opt(report.e11_as_printed))?;
    writeln!(
        out,
        "y11_denominator = {} (must be positive)",
        format_float(report.y11_denominator)
    )?;
    writeln!(out, "\n[key rates]")?;
    writeln!(out, "R_3decoy = {}", format_float(row.r_3decoy))?;
    writeln!(out, "R_infinite = {}", format_float(row.r_infinite))?;
    writeln!(out, "\ncsv: {CSV_HEADER}")?;
    Ok(())
}
