use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use scatter_cli::artifacts;
use scatter_cli::pipeline::{run_forward, run_inversion, run_sampling};
use scatter_cli::scenario::BUILTIN;
use scatter_cli::{run_pipeline, HarnessError, Result, RunOptions, Scenario};
use scatter_core::Dim;

#[derive(Parser)]
#[command(name = "scatter", version, about = "Inverse medium scattering: direct sampling plus sparse inversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate measurements for a scenario.
    Forward(Common),
    /// Compute the sampling index and the inversion domain from measurements.
    Sample(Common),
    /// Run the mixed-regularization inversion from sampling results.
    Invert(Common),
    /// Run every stage in sequence.
    Pipeline(Common),
    /// Print a scenario file (to --out when given).
    GenScenario(Common),
}

#[derive(Args)]
struct Common {
    /// Built-in scenario name or path to a scenario file.
    #[arg(long, default_value = "ex1a")]
    scenario: String,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Output directory (a file for gen-scenario).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory holding the inputs of a stage; defaults to --out.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Use the fine sampling and inversion meshes.
    #[arg(long)]
    full_res: bool,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Search around the starting weights if the result is poor.
    #[arg(long)]
    search: bool,
}

impl Common {
    fn load(&self) -> Result<Scenario> {
        let mut s = match Scenario::builtin(&self.scenario) {
            Some(s) => s,
            None => {
                let text = std::fs::read_to_string(&self.scenario).map_err(|source| {
                    if Path::new(&self.scenario).exists() {
                        HarnessError::Io { path: self.scenario.clone(), source }
                    } else {
                        HarnessError::Invalid(format!(
                            "`{}` is neither a file nor a built-in scenario ({})",
                            self.scenario,
                            BUILTIN.join(", ")
                        ))
                    }
                })?;
                Scenario::parse(&text)?
            }
        };
        if let Some(n) = self.noise {
            s.noise = n;
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(mu) = self.mu {
            s.mu = mu;
        }
        if self.full_res {
            s.sampling.h = 0.01;
            s.inversion_h = match s.dim {
                Dim::Two => 0.02,
                Dim::Three => 0.03,
            };
        }
        s.validate()?;
        Ok(s)
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn in_dir(&self) -> PathBuf {
        self.input.clone().unwrap_or_else(|| self.out_dir())
    }

    fn run_options(&self) -> RunOptions {
        RunOptions { alpha: self.alpha, beta: self.beta, search: self.search }
    }
}

fn print_timings(timings: &[(&str, Duration)]) {
    for (stage, t) in timings {
        println!("time {stage} {:.3}s", t.as_secs_f64());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenScenario(c) => {
            let text = c.load()?.to_text();
            match &c.out {
                Some(path) => std::fs::write(path, text)
                    .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?,
                None => print!("{text}"),
            }
        }
        Command::Forward(c) => {
            let s = c.load()?;
            let t = Instant::now();
            let f = run_forward(&s)?;
            artifacts::write_forward(&c.out_dir(), &f)?;
            print_timings(&[("forward", t.elapsed())]);
        }
        Command::Sample(c) => {
            let s = c.load()?;
            let data = artifacts::read_measurements(&c.in_dir())?;
            let t = Instant::now();
            let out = run_sampling(&s, &data)?;
            artifacts::write_sampling(&c.out_dir(), &out)?;
            println!("inversion domain {} cells, {} index peaks", out.support.len(), out.peaks.len());
            print_timings(&[("sampling", t.elapsed())]);
        }
        Command::Invert(c) => {
            let s = c.load()?;
            let data = artifacts::read_measurements(&c.in_dir())?;
            let sampling = artifacts::read_sampling(&c.in_dir())?;
            let mut timings = Vec::new();
            let (_, inv, report) = run_inversion(&s, &data, sampling, &c.run_options(), &mut timings)?;
            artifacts::write_inversion(&c.out_dir(), &inv, &report)?;
            print!("{}", report.to_text());
            print_timings(&timings);
        }
        Command::Pipeline(c) => {
            let s = c.load()?;
            let out = run_pipeline(&s, &c.run_options())?;
            let dir = c.out_dir();
            if let Some(f) = &out.forward {
                artifacts::write_forward(&dir, f)?;
            }
            artifacts::write_sampling(&dir, &out.sampling)?;
            artifacts::write_inversion(&dir, &out.inversion, &out.report)?;
            print!("{}", out.report.to_text());
            print_timings(&out.timings);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
