use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wgcli::output::{comparison_csv, json, spectrum_csv, sweep_svg, wavefunction_text, write_file};
use wgcli::{
    run_existence, run_oracle_compare, run_spectrum, run_sweep, run_wavefunction, CliError, Format, NamedSweep,
    RunConfig,
};

/// Bound states of a planar waveguide with a Robin coupling well.
#[derive(Parser)]
#[command(name = "wgcli", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound states of a single configuration.
    Spectrum(Args),
    /// Bound states over the [sweep] values (and families).
    Sweep(Args),
    /// Sampled wavefunction(s), one per alpha1 sweep value if given.
    Wavefunction(Args),
    /// Mode matching against the finite-difference oracle.
    Oracle(Args),
    /// Variational existence test.
    Existence(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML configuration file.
    config: PathBuf,
    /// Output directory, overriding output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn emit(cfg: &RunConfig, format: Format, name: &str, contents: impl FnOnce() -> String) -> Result<(), CliError> {
    if cfg.wants(format) {
        let path: PathBuf = Path::new(&cfg.output.dir).join(name);
        write_file(&path, &contents())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn write_sweeps(cfg: &RunConfig, sweeps: &[NamedSweep]) -> Result<(), CliError> {
    for s in sweeps {
        let stem = if sweeps.len() == 1 {
            "sweep".to_string()
        } else {
            format!("sweep_{}", s.label)
        };
        emit(cfg, Format::Csv, &format!("{stem}.csv"), || spectrum_csv(&s.result))?;
        let states = s.result.rows.len();
        println!(
            "{}: {states} states over {} points",
            s.label,
            cfg.sweep.as_ref().map_or(0, |w| w.values.len())
        );
    }
    emit(cfg, Format::Json, "sweep.json", || json(&sweeps))?;
    emit(cfg, Format::Svg, "sweep.svg", || sweep_svg(sweeps))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum(args) => {
            let cfg = load(&args)?;
            let result = run_spectrum(&cfg)?;
            for r in &result.rows {
                println!(
                    "n={} {} lambda={} lambda/(pi/d)^2={}",
                    r.n, r.sector, r.lambda, r.lambda_pi2
                );
            }
            emit(&cfg, Format::Csv, "spectrum.csv", || spectrum_csv(&result))?;
            emit(&cfg, Format::Json, "spectrum.json", || json(&result))
        }
        Command::Sweep(args) => {
            let cfg = load(&args)?;
            let sweeps = run_sweep(&cfg)?;
            write_sweeps(&cfg, &sweeps)
        }
        Command::Wavefunction(args) => {
            let cfg = load(&args)?;
            let exports = run_wavefunction(&cfg)?;
            for e in &exports {
                println!("{}: lambda={} <x^2>={}", e.label, e.state.lambda, e.second_moment);
                let path = Path::new(&cfg.output.dir).join(format!("{}.dat", e.label));
                write_file(&path, &wavefunction_text(&e.grid))?;
                println!("wrote {}", path.display());
            }
            let moments: Vec<(String, f64, f64)> = exports
                .iter()
                .map(|e| (e.label.clone(), e.state.lambda, e.second_moment))
                .collect();
            emit(&cfg, Format::Json, "wavefunction.json", || json(&moments))
        }
        Command::Oracle(args) => {
            let cfg = load(&args)?;
            let (rows, oracle) = run_oracle_compare(&cfg)?;
            print!("{}", comparison_csv(&rows));
            emit(&cfg, Format::Csv, "oracle.csv", || comparison_csv(&rows))?;
            emit(&cfg, Format::Json, "oracle.json", || json(&oracle))
        }
        Command::Existence(args) => {
            let cfg = load(&args)?;
            let report = run_existence(&cfg)?;
            println!(
                "conclusion: {:?}, first negative n: {:?}",
                report.conclusion, report.first_negative_n
            );
            emit(&cfg, Format::Json, "existence.json", || json(&report))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wgcli: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
