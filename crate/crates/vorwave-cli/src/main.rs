use clap::{Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use vorwave_cli::commands::{self, CommandOutput};
use vorwave_cli::config::RunConfig;
use vorwave_cli::report::render_json;
use vorwave_cli::CliError;

#[derive(Parser)]
#[command(
    name = "vorwave",
    version,
    about = "Shear flows, dispersion equations and bifurcation wavelengths for steady water waves with vorticity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// All stream solutions at a given Bernoulli head r.
    ScanStreams { config: PathBuf },
    /// Critical values s0, s_c, r_c and the limit r0 of the lowest branch.
    Critical { config: PathBuf },
    /// Sampled dispersion function with poles and continuity intervals.
    Dispersion { config: PathBuf },
    /// Bifurcation roots tau0 and wavelengths 2 pi / tau0.
    Roots { config: PathBuf },
    /// Linearized kernel W(z) at a dispersion root.
    Kernel { config: PathBuf },
    /// Leading-order Stokes-wave field at small amplitude.
    Field { config: PathBuf },
    /// Root curve tau(s) of the fixed-wavelength dispersion equation.
    BranchTau { config: PathBuf },
    /// Differential self-check against the closed-form oracles.
    OracleCheck {
        #[arg(long)]
        family: String,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("`{}`: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    cfg.apply_tolerances()?;
    Ok(cfg)
}

fn dispatch(command: &Command) -> Result<CommandOutput, CliError> {
    if let Command::OracleCheck { family, b, config } = command {
        let (echo, output) = match config {
            Some(path) => {
                let cfg = load_config(path)?;
                (cfg.echo.clone(), cfg.output.clone())
            }
            None => (BTreeMap::new(), Default::default()),
        };
        let mut out = commands::oracle_check(family, *b, &echo)?;
        write_artifacts(&output, &mut out)?;
        return Ok(out);
    }
    type Runner = fn(&RunConfig) -> Result<CommandOutput, CliError>;
    let (path, run): (&PathBuf, Runner) = match command {
        Command::ScanStreams { config } => (config, commands::scan_streams),
        Command::Critical { config } => (config, commands::critical),
        Command::Dispersion { config } => (config, commands::dispersion),
        Command::Roots { config } => (config, commands::roots),
        Command::Kernel { config } => (config, commands::kernel),
        Command::Field { config } => (config, commands::field),
        Command::BranchTau { config } => (config, commands::branch_tau),
        Command::OracleCheck { .. } => unreachable!(),
    };
    let cfg = load_config(path)?;
    let mut out = run(&cfg)?;
    write_artifacts(&cfg.output, &mut out)?;
    Ok(out)
}

fn write_artifacts(
    output: &vorwave_cli::config::OutputConfig,
    out: &mut CommandOutput,
) -> Result<(), CliError> {
    let Some(dir) = &output.dir else { return Ok(()) };
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("`output.dir`: cannot create {}: {e}", dir.display())))?;
    if output.csv {
        for csv in &out.csvs {
            let path = dir.join(&csv.filename);
            std::fs::write(&path, csv.render())
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    if output.json_file {
        let path = dir.join("report.json");
        std::fs::write(&path, render_json(&out.report))
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(out) => {
            print!("{}", render_json(&out.report));
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
