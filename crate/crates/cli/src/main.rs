use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use graph_core::TreeStrategy;
use vibsync::{write_artifacts, Artifact, CliError, Overrides, Scenario};

#[derive(Parser)]
#[command(version, about = "Vibrational control of cluster synchronization in Kuramoto networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario JSON file.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "vibsync-out")]
    out: PathBuf,
    /// Vibration time scale; overrides the scenario value.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Design tolerance factor on max(max|delta|, 0.01).
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Spanning-tree strategy: min_depth or first_found.
    #[arg(long, global = true, default_value = "min_depth")]
    tree: TreeStrategy,
}

#[derive(Subcommand)]
enum Command {
    /// Jacobians, robustness, modifiable graphs, and invariance.
    Analyze,
    /// Vibration schedule for the scenario's delta blocks.
    Design,
    /// Trajectory and sync error under the scenario's vibrations.
    Simulate {
        /// Ignore any schedule or delta in the scenario.
        #[arg(long)]
        uncontrolled: bool,
    },
    /// Stability certificate with simulation evidence.
    Certify {
        #[arg(long)]
        uncontrolled: bool,
    },
    /// Run the bundled two-cluster benchmark end to end.
    Reproduce,
}

fn load(path: &Option<PathBuf>) -> Result<Scenario, CliError> {
    let path = path.as_ref().ok_or_else(|| CliError::Validation("--scenario is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    vibsync::parse_scenario(&text)
}

fn run(cli: &Cli) -> Result<(String, Vec<Artifact>), CliError> {
    let mut ov = Overrides { epsilon: cli.epsilon, seed: cli.seed, tolerance: cli.tolerance, tree: cli.tree, uncontrolled: false };
    match cli.command {
        Command::Analyze => {
            let (r, files) = vibsync::analyze(&load(&cli.scenario)?, &ov)?;
            let rs: Vec<String> =
                r.clusters.iter().map(|c| format!("R(J{}) = {}", c.index, c.robustness.map_or("n/a".into(), |v| format!("{v:.4}")))).collect();
            Ok((rs.join(", "), files))
        }
        Command::Design => {
            let (r, files) = vibsync::design(&load(&cli.scenario)?, &ov)?;
            let msg = format!(
                "{} vibrated edges; S is {}an M-matrix",
                r.schedule.entries.len(),
                if r.certificate.m_matrix { "" } else { "not " }
            );
            Ok((msg, files))
        }
        Command::Simulate { uncontrolled } => {
            ov.uncontrolled = uncontrolled;
            let (s, files) = vibsync::simulate(&load(&cli.scenario)?, &ov)?;
            Ok((format!("sync error {:.3e} -> {:.3e} over t = {}", s.initial_error, s.final_error, s.t_end), files))
        }
        Command::Certify { uncontrolled } => {
            ov.uncontrolled = uncontrolled;
            let (r, files) = vibsync::certify(&load(&cli.scenario)?, &ov)?;
            Ok((format!("status: {:?}", r.status), files))
        }
        Command::Reproduce => {
            let (rows, files) = vibsync::reproduce(&ov)?;
            let passed = rows.iter().filter(|r| r.pass).count();
            Ok((format!("{passed} of {} rows within tolerance (see summary.txt)", rows.len()), files))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(msg, files)| {
        write_artifacts(&cli.out, &files)?;
        Ok(msg)
    });
    match result {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
