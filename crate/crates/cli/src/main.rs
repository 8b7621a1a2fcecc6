use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mowave_cli::commands::{cmd_certify, cmd_convergence, cmd_simulate, cmd_sweep};
use mowave_cli::RunFlags;

#[derive(Parser)]
#[command(name = "mowave", version, about = "Damped nonlinear waves on an expanding interval")]
struct Cli {
    /// Directory for all outputs.
    #[arg(long, global = true, env = "MOWAVE_OUTDIR", default_value = "mowave-out")]
    outdir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Numerics {
    /// Spatial intervals on the reference grid.
    #[arg(long, default_value_t = 200)]
    grid_n: usize,
    #[arg(long, default_value_t = mowave_core::solver::DEFAULT_CFL)]
    cfl: f64,
    /// Keep every k-th time step.
    #[arg(long, default_value_t = 1)]
    sample_every: usize,
    /// Use ½u² instead of (b/2)u² in the reported energy.
    #[arg(long)]
    paper_literal_energy: bool,
    /// Also write trajectory.csv with every nodal value.
    #[arg(long)]
    trajectory: bool,
}

impl Numerics {
    fn flags(&self) -> RunFlags {
        RunFlags {
            grid_n: self.grid_n,
            cfl: self.cfl,
            sample_every: self.sample_every,
            paper_literal_energy: self.paper_literal_energy,
            trajectory: self.trajectory,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one problem and write energy/identity series, plot and manifest.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Print the decay certificate as JSON.
    Certify { config: PathBuf },
    /// Refinement study on the manufactured and modal problems.
    Convergence {
        config: PathBuf,
        /// Comma-separated grid sizes.
        #[arg(long, value_delimiter = ',', default_values_t = [50usize, 100, 200])]
        grid_n: Vec<usize>,
        #[arg(long, default_value_t = mowave_core::solver::DEFAULT_CFL)]
        cfl: f64,
    },
    /// Cartesian parameter sweep.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        numerics: Numerics,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match &cli.command {
        Command::Simulate { config, numerics } => cmd_simulate(config, &numerics.flags(), &cli.outdir),
        Command::Certify { config } => cmd_certify(config),
        Command::Convergence { config, grid_n, cfl } => {
            let flags = RunFlags {
                cfl: *cfl,
                ..RunFlags::default()
            };
            cmd_convergence(config, grid_n, &flags, &cli.outdir)
        }
        Command::Sweep {
            config,
            jobs,
            numerics,
        } => cmd_sweep(config, &numerics.flags(), *jobs, &cli.outdir),
    };
    ExitCode::from(status.code() as u8)
}
