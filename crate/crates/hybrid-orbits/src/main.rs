use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use hybrid_orbits::checks::model_checks;
use hybrid_orbits::config::{parse_config, scenario_source};
use hybrid_orbits::run::{format_report, verify_curve};
use hybrid_orbits::{load_config, parse_trajectory, run_design, ExitStatus, RunConfig, RunOptions};
use hybrid_orbits_core::biped::Biped;

#[derive(Parser)]
#[command(name = "hybrid-orbits", version, about = "Periodic orbit design for a planar biped with impacts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Gait1,
    Gait2,
}

#[derive(Subcommand)]
enum Command {
    /// Run the three-step design and verify the result.
    Design {
        #[arg(long, required_unless_present = "scenario")]
        config: Option<PathBuf>,
        /// Run directory; defaults to `output.directory` of the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bundled preset, used when no --config is given.
        #[arg(long, value_enum, conflicts_with = "config")]
        scenario: Option<Preset>,
        /// Wall-clock limit; the solver stops at the next outer iteration.
        #[arg(long)]
        max_minutes: Option<f64>,
    },
    /// Check a trajectory CSV against the boundary states of a config.
    Verify {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate the biped model invariants.
    CheckModel,
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn load(config: Option<PathBuf>, scenario: Option<Preset>) -> Result<RunConfig, String> {
    match (config, scenario) {
        (Some(path), _) => load_config(&path).map_err(|e| e.to_string()),
        (None, Some(p)) => {
            let name = match p {
                Preset::Gait1 => "gait1",
                Preset::Gait2 => "gait2",
            };
            parse_config(scenario_source(name).expect("bundled preset"), name).map_err(|e| e.to_string())
        }
        (None, None) => Err("either --config or --scenario is required".into()),
    }
}

fn design(config: Option<PathBuf>, out: Option<PathBuf>, scenario: Option<Preset>, max_minutes: Option<f64>) -> ExitCode {
    let cfg = match load(config, scenario) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(ExitStatus::Validation);
        }
    };
    let max_duration = match max_minutes {
        Some(m) if !(m > 0.0 && m.is_finite()) => {
            eprintln!("error: --max-minutes must be positive");
            return exit(ExitStatus::Validation);
        }
        Some(m) => Some(Duration::from_secs_f64(60.0 * m)),
        None => None,
    };
    let outcome = run_design(&cfg, &RunOptions { out, max_duration });
    let r = &outcome.report;
    if let Some(v) = &r.verification {
        print!("{}", format_report(v));
    }
    let s = &r.summary;
    if let (Some(peak), Some(last)) = (s.max_abs_u2_final_tenth, s.u2_final) {
        println!("max |u2| over final 10%: {peak:.2} N m, u2(T) = {last:.2} N m");
    }
    println!("outer iterations: {}, runtime {:.1} s", s.outer_iterations, s.runtime_s);
    if let Some(e) = &r.error {
        eprintln!("error in {}: {}", e.phase, e.message);
    }
    println!("run directory: {}", outcome.dir.display());
    exit(r.status)
}

fn verify(traj: PathBuf, config: PathBuf) -> ExitCode {
    let scenario = match load_config(&config).and_then(|c| c.scenario()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(ExitStatus::Validation);
        }
    };
    let curve = match parse_trajectory(&traj) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(ExitStatus::Validation);
        }
    };
    match verify_curve(&scenario, &curve) {
        Ok(report) => {
            print!("{}", format_report(&report));
            exit(if report.passed {
                ExitStatus::Pass
            } else {
                ExitStatus::VerificationFailure
            })
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit(ExitStatus::Validation)
        }
    }
}

fn check_model() -> ExitCode {
    let checks = model_checks(&Biped::default());
    for c in &checks {
        println!(
            "{:<28} {:>12.4e} < {:<10.3e} {}",
            c.name,
            c.value,
            c.threshold,
            if c.passed { "ok" } else { "FAIL" }
        );
    }
    exit(if checks.iter().all(|c| c.passed) {
        ExitStatus::Pass
    } else {
        ExitStatus::VerificationFailure
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit(ExitStatus::Validation)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Design {
            config,
            out,
            scenario,
            max_minutes,
        } => design(config, out, scenario, max_minutes),
        Command::Verify { traj, config } => verify(traj, config),
        Command::CheckModel => check_model(),
    }
}
