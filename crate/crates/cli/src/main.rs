use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use floquet_rydberg::experiments::{
    load_config, registry_names, registry_spec, run_experiment, write_outputs, ExperimentOutput,
    ExperimentSpec, Format, Mode,
};
use floquet_rydberg::Error;

#[derive(Parser)]
#[command(name = "floquet-rydberg", version, about = "Stroboscopic W-state preparation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// flat key-value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// base seed for noise channels
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// run a registered experiment
    Run { name: String },
    /// fidelity grid over U_rr/Ω and N (default: fig3)
    Sweep { name: Option<String> },
    /// quasienergy spectrum along a sweep axis (default: fig3)
    Spectrum { name: Option<String> },
    /// check a config file and print the resolved parameters
    ValidateConfig,
    /// list registered experiments
    List,
}

fn resolve(cli: &Cli, name: Option<&str>) -> Result<ExperimentSpec, Error> {
    let mut spec = match &cli.config {
        Some(path) => load_config(path, name)?,
        None => registry_spec(name.unwrap_or("custom"))?,
    };
    if let Some(seed) = cli.seed {
        spec.noise.seed = seed;
    }
    Ok(spec)
}

fn emit(cli: &Cli, out: &ExperimentOutput, started: Instant) -> Result<(), Error> {
    let format = match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    for path in write_outputs(out, &cli.out_dir, format)? {
        println!("{}", path.display());
    }
    for (k, v) in &out.summary {
        eprintln!("{k} = {v}");
    }
    eprintln!("runtime_s = {:.3}", started.elapsed().as_secs_f64());
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), Error> {
    let started = Instant::now();
    match &cli.command {
        Command::List => {
            for name in registry_names() {
                println!("{name}");
            }
        }
        Command::ValidateConfig => {
            let path = cli
                .config
                .as_ref()
                .ok_or_else(|| Error::config("--config", "validate-config needs --config"))?;
            let spec = load_config(path, None)?;
            println!("experiment = {}", spec.name);
            println!("t_a_us = {}", spec.params.t_a());
            println!("t_b_us = {}", spec.params.t_b());
            println!("{}", serde_json::to_string_pretty(&spec)?);
        }
        Command::Run { name } => {
            let spec = resolve(cli, Some(name))?;
            let out = run_experiment(&spec, cli.workers)?;
            emit(cli, &out, started)?;
        }
        Command::Sweep { name } => {
            let mut spec = resolve(cli, Some(name.as_deref().unwrap_or("fig3")))?;
            if spec.sweep.is_none() {
                return Err(Error::config("sweep_urr_min", "experiment defines no sweep grid"));
            }
            spec.mode = Mode::None;
            spec.spectrum = None;
            let out = run_experiment(&spec, cli.workers)?;
            emit(cli, &out, started)?;
        }
        Command::Spectrum { name } => {
            let mut spec = resolve(cli, Some(name.as_deref().unwrap_or("fig3")))?;
            if spec.spectrum.is_none() {
                return Err(Error::config("spectrum_axis", "experiment defines no spectrum axis"));
            }
            spec.mode = Mode::None;
            spec.sweep = None;
            let out = run_experiment(&spec, cli.workers)?;
            emit(cli, &out, started)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else if e.is_numerical() {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
