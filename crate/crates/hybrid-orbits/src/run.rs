//! Design runs: strategy execution with every artifact written to a run
//! directory as soon as it exists.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use hybrid_orbits_core::dynamics::MechanicalModel;
use hybrid_orbits_core::integrate::Curve;
use hybrid_orbits_core::orbit::{
    prepare_desired, step2_embedding_continuation, step3_enforce_final_state, verify_periodic_orbit, Desired,
    EmbeddingOptimum, Hooks, StrategyFailure, StrategyTrace, TerminalOptimum, TraceRecord, VerificationReport,
};
use serde::Serialize;

use crate::config::{RunConfig, Scenario};
use crate::plot::{emit_plot_data, PlotSeries};
use crate::trajectory::{export_trajectory, CsvError};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitStatus {
    Pass = 0,
    Validation = 2,
    SolverFailure = 3,
    VerificationFailure = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunPhase {
    Setup,
    Desired,
    Embedding,
    Terminal,
    Verify,
    Export,
}

impl std::fmt::Display for RunPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RunPhase::Setup => "setup",
            RunPhase::Desired => "desired curve (step 1)",
            RunPhase::Embedding => "embedding continuation (step 2)",
            RunPhase::Terminal => "terminal-state enforcement (step 3)",
            RunPhase::Verify => "verification",
            RunPhase::Export => "export",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunError {
    pub phase: RunPhase,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunSummary {
    pub u_emb_norm: Option<f64>,
    pub rho_emb: Option<f64>,
    /// Normalized terminal error of the embedding optimum.
    pub embedding_terminal_error: Option<f64>,
    pub rho_f: Option<f64>,
    pub terminal_error: Option<f64>,
    pub x_target_deg: Option<Vec<f64>>,
    /// `max |u2|` over the last 10% of the horizon, N m.
    pub max_abs_u2_final_tenth: Option<f64>,
    pub u2_final: Option<f64>,
    pub outer_iterations: usize,
    pub branch_violations: Vec<String>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub status: ExitStatus,
    pub verification: Option<VerificationReport>,
    pub summary: RunSummary,
    pub error: Option<RunError>,
}

/// Everything a finished (or failed) run leaves in memory.
#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub report: RunReport,
    pub trace: StrategyTrace,
    pub desired: Option<Desired>,
    pub embedding: Option<EmbeddingOptimum>,
    pub terminal: Option<TerminalOptimum>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output.directory`.
    pub out: Option<PathBuf>,
    pub max_duration: Option<Duration>,
}

/// `max |u2|` over nodes with `t >= 0.9 T`, and `u2(T)`.
pub fn final_torque(curve: &Curve) -> (f64, f64) {
    let t0 = 0.9 * curve.grid.horizon();
    let peak = curve
        .grid
        .times()
        .zip(&curve.inputs)
        .filter(|(t, _)| *t >= t0)
        .map(|(_, u)| u[1].abs())
        .fold(0.0, f64::max);
    (peak, curve.inputs[curve.grid.intervals()][1])
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError {
        phase: RunPhase::Export,
        message: format!("{}: {e}", path.display()),
    }
}

fn export(dir: &Path, name: &str, curve: &Curve) -> Result<(), RunError> {
    let path = dir.join(name);
    export_trajectory(curve, &path).map_err(|e: CsvError| io_err(&path, e))
}

struct Run {
    scenario: Scenario,
    dir: PathBuf,
    trace: StrategyTrace,
    desired: Option<Desired>,
    embedding: Option<EmbeddingOptimum>,
    terminal: Option<TerminalOptimum>,
    verification: Option<VerificationReport>,
    summary: RunSummary,
}

impl Run {
    fn solver_error(&mut self, phase: RunPhase, f: Box<StrategyFailure>) -> RunError {
        self.trace = f.trace.clone();
        if let Some(last) = &f.last {
            let _ = export(&self.dir, "last.csv", last);
        }
        RunError {
            phase,
            message: f.to_string(),
        }
    }

    fn execute(&mut self, trace_out: &mut dyn FnMut(&TraceRecord), deadline: Option<Instant>) -> Result<(), RunError> {
        let sys = self.scenario.system.clone();
        let prob = self.scenario.problem.clone();
        let opts = self.scenario.options.clone();
        let timed_out = move || deadline.is_some_and(|d| Instant::now() >= d);
        let mut hooks = Hooks {
            interrupt: &timed_out,
            observer: trace_out,
        };

        let desired = prepare_desired(&sys, &prob).map_err(|e| RunError {
            phase: RunPhase::Desired,
            message: e.to_string(),
        })?;
        let dcurve = desired.target().map_err(|e| RunError {
            phase: RunPhase::Desired,
            message: e.to_string(),
        })?;
        export(&self.dir, "desired.csv", &dcurve)?;
        self.desired = Some(desired.clone());

        let emb = match step2_embedding_continuation(&sys, &prob, &desired, &opts, &mut self.trace, &mut hooks) {
            Ok(e) => e,
            Err(f) => return Err(self.solver_error(RunPhase::Embedding, f)),
        };
        export(&self.dir, "embedding.csv", &emb.trajectory)?;
        self.summary.u_emb_norm = Some(emb.u_emb_norm);
        self.summary.rho_emb = Some(emb.rho_emb);
        self.summary.embedding_terminal_error = Some(prob.scaling.inf_norm(&(emb.trajectory.final_state() - &prob.xf)));
        self.embedding = Some(emb.clone());

        let term = match step3_enforce_final_state(&sys, &prob, &desired, &emb.trajectory, &opts, &mut self.trace, &mut hooks)
        {
            Ok(t) => t,
            Err(f) => return Err(self.solver_error(RunPhase::Terminal, f)),
        };
        let iter_dir = self.dir.join("iterates");
        std::fs::create_dir_all(&iter_dir).map_err(|e| io_err(&iter_dir, e))?;
        for (i, it) in term.iterates.iter().enumerate() {
            export(&iter_dir, &format!("step3_{i:02}.csv"), it)?;
        }
        export(&self.dir, "final.csv", &term.trajectory)?;
        self.summary.rho_f = Some(term.rho_f);
        self.summary.terminal_error = Some(term.terminal_error);
        self.summary.x_target_deg = Some(term.x_target.iter().map(|v| v.to_degrees()).collect());
        let (peak, last) = final_torque(&term.trajectory);
        self.summary.max_abs_u2_final_tenth = Some(peak);
        self.summary.u2_final = Some(last);
        self.terminal = Some(term.clone());

        let mut series = vec![
            PlotSeries {
                name: "desired",
                curve: &dcurve,
            },
            PlotSeries {
                name: "embedding",
                curve: &emb.trajectory,
            },
        ];
        let names: Vec<String> = (0..term.iterates.len()).map(|i| format!("iterate_{i:02}")).collect();
        for (name, it) in names.iter().zip(&term.iterates) {
            series.push(PlotSeries { name, curve: it });
        }
        series.push(PlotSeries {
            name: "final",
            curve: &term.trajectory,
        });
        let plot_dir = self.dir.join("plot");
        emit_plot_data(&plot_dir, &series).map_err(|e| io_err(&plot_dir, e))?;

        let report = verify_periodic_orbit(
            &sys,
            &prob.x0,
            &prob.xf,
            &term.trajectory,
            &prob.scaling,
            &self.scenario.verify,
        )
        .map_err(|e| RunError {
            phase: RunPhase::Verify,
            message: e.to_string(),
        })?;
        self.verification = Some(report);
        Ok(())
    }
}

/// Runs the three steps and verification; writes `config.toml`,
/// `trace.jsonl`, the trajectory CSVs, `plot/` and `report.json` under the
/// run directory. Artifacts written before a failure are kept and the
/// report names the failing phase.
pub fn run_design(cfg: &RunConfig, opts: &RunOptions) -> RunOutcome {
    let start = Instant::now();
    let dir = opts.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
    let deadline = opts.max_duration.map(|d| start + d);

    let mut error = None;
    let scenario = match cfg.scenario() {
        Ok(s) => Some(s),
        Err(e) => {
            error = Some(RunError {
                phase: RunPhase::Setup,
                message: e.to_string(),
            });
            None
        }
    };
    if let Err(e) = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(dir.join("config.toml"), cfg.to_toml())) {
        error.get_or_insert(io_err(&dir, e));
    }

    let mut run = scenario.map(|scenario| Run {
        scenario,
        dir: dir.clone(),
        trace: StrategyTrace::default(),
        desired: None,
        embedding: None,
        terminal: None,
        verification: None,
        summary: RunSummary::default(),
    });

    if let (Some(run), None) = (run.as_mut(), error.as_ref()) {
        let trace_path = dir.join("trace.jsonl");
        match File::create(&trace_path) {
            Ok(file) => {
                let mut w = BufWriter::new(file);
                let mut write_err = None;
                let mut observer = |r: &TraceRecord| {
                    let line = serde_json::to_string(r).expect("trace record serializes");
                    if let Err(e) = writeln!(w, "{line}").and_then(|_| w.flush()) {
                        write_err.get_or_insert(e);
                    }
                };
                let result = run.execute(&mut observer, deadline);
                if let Err(e) = result {
                    error = Some(e);
                } else if let Some(e) = write_err {
                    error = Some(io_err(&trace_path, e));
                }
            }
            Err(e) => error = Some(io_err(&trace_path, e)),
        }
    }

    let mut summary = run.as_ref().map(|r| r.summary.clone()).unwrap_or_default();
    let trace = run.as_ref().map(|r| r.trace.clone()).unwrap_or_default();
    summary.outer_iterations = trace.records.len();
    summary.branch_violations = trace.branch_violations(cfg.tolerances.delta_f_tol);
    summary.runtime_s = start.elapsed().as_secs_f64();
    let verification = run.as_ref().and_then(|r| r.verification.clone());
    let status = match (&error, &verification) {
        (Some(e), _) if e.phase == RunPhase::Setup => ExitStatus::Validation,
        (Some(_), _) => ExitStatus::SolverFailure,
        (None, Some(v)) if v.passed => ExitStatus::Pass,
        _ => ExitStatus::VerificationFailure,
    };
    let report = RunReport {
        status,
        verification,
        summary,
        error,
    };
    let report_path = dir.join("report.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    let mut report = report;
    if let Err(e) = std::fs::write(&report_path, json) {
        report.status = ExitStatus::SolverFailure;
        report.error.get_or_insert(io_err(&report_path, e));
    }

    let (desired, embedding, terminal) = match run {
        Some(r) => (r.desired, r.embedding, r.terminal),
        None => (None, None, None),
    };
    RunOutcome {
        dir,
        report,
        trace,
        desired,
        embedding,
        terminal,
    }
}

/// Verifies a stored trajectory against the boundary states of `scenario`.
pub fn verify_curve(scenario: &Scenario, curve: &Curve) -> Result<VerificationReport, String> {
    let p = &scenario.problem;
    if curve.input_dim() != scenario.system.n_act() {
        return Err(format!(
            "trajectory has {} inputs; the underactuated system has {} (embedding trajectories are not orbits)",
            curve.input_dim(),
            scenario.system.n_act()
        ));
    }
    verify_periodic_orbit(&scenario.system, &p.x0, &p.xf, curve, &p.scaling, &scenario.verify).map_err(|e| e.to_string())
}

/// Renders the checks of a report, one per line.
pub fn format_report(report: &VerificationReport) -> String {
    let mut s = String::new();
    for c in &report.checks {
        s.push_str(&format!(
            "{:<16} {:>12.4e} < {:<10.3e} {}\n",
            c.name,
            c.value,
            c.threshold,
            if c.passed { "ok" } else { "FAIL" }
        ));
    }
    s
}
