use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bathchain::config::{self, RunSpec};
use bathchain::runner;
use bathchain::Error;

/// Chain-mapped MPS dynamics of open two-level systems.
#[derive(Parser)]
#[command(name = "bathchain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory (or a mapping comparison).
    Run(Common),
    /// Run every point of the [sweep] grid.
    Sweep(Common),
    /// Write the bath, band coefficients and |c_k(t)| grid without evolving.
    Couplings(Common),
    /// Write the band coefficients of the chain.
    Bandcoeffs(Common),
    /// Parse and validate the configuration only.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep worker threads (overrides run.workers).
    #[arg(long)]
    workers: Option<usize>,
    /// `section.key=value`, applied after the file. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn spec(&self) -> Result<RunSpec, Error> {
        let mut spec = config::load(&self.config, &self.overrides)?;
        if let Some(out) = &self.out {
            spec.output_dir = out.clone();
        }
        if let Some(w) = self.workers {
            spec.workers = w.max(1);
        }
        Ok(spec)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Validate(c) => {
            let spec = c.spec()?;
            println!("{}", serde_json::to_string_pretty(&spec.manifest()).unwrap_or_default());
            Ok(())
        }
        Command::Run(c) => {
            let spec = c.spec()?;
            let outcomes = runner::run(&spec, &spec.output_dir)?;
            for o in &outcomes {
                let last = o.trajectory.populations.last().cloned().unwrap_or_default();
                println!(
                    "{}: final populations {:?} -> {}",
                    o.mapping.name(),
                    last,
                    o.dir.display()
                );
            }
            if let [a, b] = outcomes.as_slice() {
                let (d, t) = runner::max_population_difference(&a.trajectory, &b.trajectory);
                println!("max |dP_state0| = {d:.3e} at t = {t:.4} ps");
            }
            Ok(())
        }
        Command::Sweep(c) => {
            let spec = c.spec()?;
            let points = runner::sweep(&spec, &spec.output_dir, spec.workers)?;
            let mut first_error = None;
            for p in points {
                match p.result {
                    Ok(pop) => println!(
                        "omega_diag {} meV, omega_od {} meV: P_state0 = {:.6}",
                        p.omega_diag, p.omega_od, pop[0]
                    ),
                    Err(e) => {
                        println!(
                            "omega_diag {} meV, omega_od {} meV: failed: {e}",
                            p.omega_diag, p.omega_od
                        );
                        first_error.get_or_insert(e);
                    }
                }
            }
            println!("summary: {}", spec.output_dir.join("summary.csv").display());
            first_error.map_or(Ok(()), Err)
        }
        Command::Couplings(c) => {
            let spec = c.spec()?;
            runner::couplings(&spec, &spec.output_dir)?;
            println!("couplings written to {}", spec.output_dir.display());
            Ok(())
        }
        Command::Bandcoeffs(c) => {
            let spec = c.spec()?;
            runner::bandcoeffs(&spec, &spec.output_dir)?;
            println!("band coefficients written to {}", spec.output_dir.display());
            Ok(())
        }
    }
}
