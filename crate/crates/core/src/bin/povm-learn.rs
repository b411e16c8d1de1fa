use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use povm_learn::experiment::checks::{oracle_battery, selftest};
use povm_learn::experiment::output::{emit_results, render_summary};
use povm_learn::experiment::{run_sweep, Settings, SweepGrid};
use povm_learn::Error;

/// Learn a qubit discrimination measurement from unlabeled samples and
/// check it against the Helstrom bound.
#[derive(Parser)]
#[command(name = "povm-learn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario for a number of seeded trials.
    Run(ExperimentArgs),
    /// Run every combination of comma-separated parameter lists.
    Sweep(ExperimentArgs),
    /// Compare the closed-form mixture targets with the Helstrom oracle.
    OracleCheck {
        #[arg(long, default_value_t = 10_000)]
        instances: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the built-in invariant suites.
    Selftest,
}

/// Values accept `pi` expressions such as `pi/3` or `2pi/3`. Flags override
/// the `--config` file.
#[derive(Args)]
struct ExperimentArgs {
    /// Flat `key = value` file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// equal-prior-xz, unequal-prior-xz or const-z.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    eta0: Option<String>,
    /// Angle between the two state Bloch vectors.
    #[arg(long)]
    theta: Option<String>,
    /// State-pair orientation (equal priors) or ensemble vector direction.
    #[arg(long)]
    alpha: Option<String>,
    /// Half-angle between the states, equal priors only.
    #[arg(long)]
    beta: Option<String>,
    /// Height of the constant-z plane.
    #[arg(long)]
    nz: Option<String>,
    /// Learning shots per setting or per Pauli axis.
    #[arg(long)]
    shots_learn: Option<String>,
    #[arg(long)]
    shots_holdout: Option<String>,
    /// Trials per grid cell.
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// Base setting of the equal-prior tuning procedure.
    #[arg(long)]
    phi0: Option<String>,
    /// Weak-signal threshold on the tuning differences.
    #[arg(long)]
    weak_threshold: Option<String>,
}

impl ExperimentArgs {
    fn settings(&self) -> Result<Settings, Error> {
        let mut settings = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let flags = [
            ("scenario", &self.scenario),
            ("eta0", &self.eta0),
            ("theta", &self.theta),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("nz", &self.nz),
            ("shots_learn", &self.shots_learn),
            ("shots_holdout", &self.shots_holdout),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("format", &self.format),
            ("out", &self.out),
            ("phi0", &self.phi0),
            ("weak_threshold", &self.weak_threshold),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                settings.set(key, v.as_str())?;
            }
        }
        Ok(settings)
    }
}

fn run_experiment_command(args: &ExperimentArgs, allow_lists: bool) -> Result<(), Error> {
    let grid = SweepGrid::from_settings(&args.settings()?, allow_lists)?;
    let output = run_sweep(&grid)?;
    emit_results(&output, grid.base.format, grid.base.out.as_deref())?;
    eprint!("{}", render_summary(&output.summary));
    Ok(())
}

fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) => ExitCode::from(2),
        Error::Io { .. } => ExitCode::from(3),
        _ => ExitCode::from(4),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run_experiment_command(args, false),
        Command::Sweep(args) => run_experiment_command(args, true),
        Command::OracleCheck { instances, seed } => match oracle_battery(*instances, *seed) {
            Ok(r) => {
                println!("instances            {}", r.instances);
                println!("|m0| - |m1|          {:.3e}", r.norm_gap);
                println!("axis vs n_perp       {:.3e}", r.axis_error);
                println!("success vs closed    {:.3e}", r.success_error);
                println!("recombination        {:.3e}", r.recombination_error);
                println!("{}", if r.passed() { "PASS" } else { "FAIL" });
                if !r.passed() {
                    return ExitCode::FAILURE;
                }
                Ok(())
            }
            Err(e) => Err(e),
        },
        Command::Selftest => {
            let checks = selftest();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().any(|c| !c.passed) {
                return ExitCode::FAILURE;
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
