//! Run configuration: TOML with section headers, degrees at the boundary.

use std::fmt;
use std::path::{Path, PathBuf};

use hybrid_orbits_core::biped::{make_biped_system, Biped, BipedParams};
use hybrid_orbits_core::dynamics::HybridSystem;
use hybrid_orbits_core::integrate::{TimeGrid, MIN_INTERVALS};
use hybrid_orbits_core::orbit::{
    ContinuationSchedule, DesignProblem, DesiredInput, StrategyOptions, VerifyTolerances, ViaPoint,
};
use hybrid_orbits_core::pronto::{DescentMode, LineSearchParams, ProntoOptions};
use hybrid_orbits_core::scaling::StateScaling;
use hybrid_orbits_core::{Matrix, Vector};
use serde::{Deserialize, Serialize};

const DOF: usize = 3;
const N_ACT: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub problem: ProblemConfig,
    pub schedules: SchedulesConfig,
    pub tolerances: TolerancesConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Biped parameters in SI units; the jump angle in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub m: f64,
    pub m_hip: f64,
    pub m_torso: f64,
    pub r: f64,
    pub l: f64,
    pub g: f64,
    pub theta1_jmp_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Angles in deg, rates in deg/s.
    pub x0_deg: Vec<f64>,
    pub horizon: f64,
    pub intervals: usize,
    pub q_diag: Vec<f64>,
    pub r_diag: Vec<f64>,
    pub desired_input: DesiredInput,
    #[serde(default)]
    pub via_points: Vec<ViaPointConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViaPointConfig {
    pub t: f64,
    pub q_deg: Vec<f64>,
    pub qd_deg: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub rho0: f64,
    pub factor: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulesConfig {
    pub rho_emb: ScheduleConfig,
    pub rho_f: ScheduleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesConfig {
    pub eps_emb: f64,
    pub delta_f_tol: f64,
    pub eps_f_tol: f64,
    pub grad_tol: f64,
    #[serde(default = "default_terminal_grad_tol")]
    pub terminal_grad_tol: f64,
    #[serde(default = "default_initial_tol")]
    pub initial_tol: f64,
    #[serde(default = "default_defect_tol")]
    pub defect_tol: f64,
}

fn default_terminal_grad_tol() -> f64 {
    StrategyOptions::default().terminal_grad_tol
}

fn default_initial_tol() -> f64 {
    VerifyTolerances::default().initial_tol
}

fn default_defect_tol() -> f64 {
    VerifyTolerances::default().defect_tol
}

/// Optimizer settings; every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub gain_q: f64,
    pub gain_r: f64,
    pub gain_q_final: f64,
    pub mode: DescentMode,
    pub max_iterations: usize,
    pub armijo_alpha: f64,
    pub backtrack_factor: f64,
    pub max_halvings: usize,
    pub divergence_bound: f64,
    pub dbeta_step: f64,
    pub max_dbeta_cond: f64,
    pub max_target_halvings: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let p = ProntoOptions::default();
        let s = StrategyOptions::default();
        Self {
            gain_q: p.gain_q,
            gain_r: p.gain_r,
            gain_q_final: p.gain_q_final,
            mode: p.mode,
            max_iterations: p.max_iterations,
            armijo_alpha: p.line_search.alpha,
            backtrack_factor: p.line_search.factor,
            max_halvings: p.line_search.max_halvings,
            divergence_bound: p.divergence_bound,
            dbeta_step: s.dbeta_step,
            max_dbeta_cond: s.max_dbeta_cond,
            max_target_halvings: s.max_target_halvings,
        }
    }
}

/// Units of the normalized state norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingConfig {
    pub angle_deg: f64,
    pub rate: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            angle_deg: 45.0,
            rate: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("run"),
            formats: vec!["csv".into()],
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, source: std::io::Error },
    /// TOML syntax or schema error; the message carries line and key.
    Parse { origin: String, message: String },
    Invalid { violations: Vec<String> },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => write!(f, "cannot read {}: {source}", path.display()),
            ConfigError::Parse { origin, message } => write!(f, "{origin}: {}", message.trim_end()),
            ConfigError::Invalid { violations } => {
                write!(f, "invalid configuration ({} problems)", violations.len())?;
                for v in violations {
                    write!(f, "\n  - {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ConfigError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Bundled presets for the two gaits.
pub const GAIT1: &str = include_str!("../configs/gait1.cfg");
pub const GAIT2: &str = include_str!("../configs/gait2.cfg");

pub fn scenario_source(name: &str) -> Option<&'static str> {
    match name {
        "gait1" => Some(GAIT1),
        "gait2" => Some(GAIT2),
        _ => None,
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, &path.display().to_string())
}

/// Parses and validates; `origin` names the source in diagnostics.
pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        origin: origin.into(),
        message: e.to_string(),
    })?;
    let violations = cfg.violations();
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid { violations })
    }
}

/// Everything a run needs, in internal units.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub system: Biped,
    pub problem: DesignProblem,
    pub options: StrategyOptions,
    pub verify: VerifyTolerances,
}

fn deg(v: &[f64]) -> Vector {
    Vector::from_iterator(v.len(), v.iter().map(|d| d.to_radians()))
}

fn positive(out: &mut Vec<String>, key: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        out.push(format!("{key} must be positive and finite (got {v})"));
    }
}

fn length(out: &mut Vec<String>, key: &str, v: &[f64], n: usize) -> bool {
    if v.len() != n {
        out.push(format!("{key} needs {n} entries (got {})", v.len()));
        return false;
    }
    if v.iter().any(|x| !x.is_finite()) {
        out.push(format!("{key} has non-finite entries"));
        return false;
    }
    true
}

fn schedule(out: &mut Vec<String>, key: &str, s: &ScheduleConfig) {
    positive(out, &format!("{key}.rho0"), s.rho0);
    if !(s.factor > 1.0 && s.factor.is_finite()) {
        out.push(format!("{key}.factor must exceed 1 (got {})", s.factor));
    }
    if s.max_steps == 0 {
        out.push(format!("{key}.max_steps must be at least 1"));
    }
}

impl RunConfig {
    pub fn params(&self) -> BipedParams {
        let m = &self.model;
        BipedParams {
            m: m.m,
            m_hip: m.m_hip,
            m_torso: m.m_torso,
            r: m.r,
            l: m.l,
            g: m.g,
            theta1_jmp: m.theta1_jmp_deg.to_radians(),
        }
    }

    /// Every violated constraint, empty when the configuration is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let m = &self.model;
        for (k, v) in [
            ("model.m", m.m),
            ("model.m_hip", m.m_hip),
            ("model.m_torso", m.m_torso),
            ("model.r", m.r),
            ("model.l", m.l),
        ] {
            positive(&mut out, k, v);
        }
        if !m.g.is_finite() || !m.theta1_jmp_deg.is_finite() {
            out.push("model.g and model.theta1_jmp_deg must be finite".into());
        }

        let p = &self.problem;
        let x0_ok = length(&mut out, "problem.x0_deg", &p.x0_deg, 2 * DOF);
        positive(&mut out, "problem.horizon", p.horizon);
        if p.intervals < MIN_INTERVALS {
            out.push(format!("problem.intervals must be at least {MIN_INTERVALS} (got {})", p.intervals));
        }
        if length(&mut out, "problem.q_diag", &p.q_diag, 2 * DOF) && p.q_diag.iter().any(|q| *q < 0.0) {
            out.push("problem.q_diag entries must be non-negative".into());
        }
        if length(&mut out, "problem.r_diag", &p.r_diag, N_ACT) && p.r_diag.iter().any(|r| *r <= 0.0) {
            out.push("problem.r_diag entries must be positive".into());
        }
        let mut last = 0.0;
        for (i, v) in p.via_points.iter().enumerate() {
            let key = format!("problem.via_points[{i}]");
            length(&mut out, &format!("{key}.q_deg"), &v.q_deg, DOF);
            length(&mut out, &format!("{key}.qd_deg"), &v.qd_deg, DOF);
            if !(v.t > last && v.t < p.horizon) {
                out.push(format!("{key}.t must increase strictly inside (0, horizon) (got {})", v.t));
            }
            last = v.t;
        }

        schedule(&mut out, "schedules.rho_emb", &self.schedules.rho_emb);
        schedule(&mut out, "schedules.rho_f", &self.schedules.rho_f);

        let t = &self.tolerances;
        for (k, v) in [
            ("tolerances.eps_emb", t.eps_emb),
            ("tolerances.delta_f_tol", t.delta_f_tol),
            ("tolerances.eps_f_tol", t.eps_f_tol),
            ("tolerances.grad_tol", t.grad_tol),
            ("tolerances.terminal_grad_tol", t.terminal_grad_tol),
            ("tolerances.initial_tol", t.initial_tol),
            ("tolerances.defect_tol", t.defect_tol),
        ] {
            positive(&mut out, k, v);
        }
        if t.eps_f_tol > t.delta_f_tol {
            out.push("tolerances.eps_f_tol must not exceed tolerances.delta_f_tol".into());
        }

        let s = &self.solver;
        for (k, v) in [
            ("solver.gain_q", s.gain_q),
            ("solver.gain_r", s.gain_r),
            ("solver.gain_q_final", s.gain_q_final),
            ("solver.divergence_bound", s.divergence_bound),
            ("solver.dbeta_step", s.dbeta_step),
            ("solver.max_dbeta_cond", s.max_dbeta_cond),
        ] {
            positive(&mut out, k, v);
        }
        if !(s.armijo_alpha > 0.0 && s.armijo_alpha < 1.0) {
            out.push(format!("solver.armijo_alpha must lie in (0, 1) (got {})", s.armijo_alpha));
        }
        if !(s.backtrack_factor > 0.0 && s.backtrack_factor < 1.0) {
            out.push(format!("solver.backtrack_factor must lie in (0, 1) (got {})", s.backtrack_factor));
        }
        if s.max_iterations == 0 {
            out.push("solver.max_iterations must be at least 1".into());
        }
        positive(&mut out, "scaling.angle_deg", self.scaling.angle_deg);
        positive(&mut out, "scaling.rate", self.scaling.rate);
        for f in &self.output.formats {
            if f != "csv" {
                out.push(format!("output.formats: unsupported format {f:?} (only \"csv\")"));
            }
        }

        if out.is_empty() {
            if let Err(e) = self.params().validate() {
                out.push(format!("model: {e}"));
            } else if x0_ok {
                let sys = make_biped_system(self.params()).expect("validated");
                let x0 = deg(&p.x0_deg);
                if !(sys.guard(&x0) < 0.0) {
                    out.push("problem.x0_deg: initial state lies on or past the jump set".into());
                }
                if let Err(e) = sys.inverse_jump(&x0) {
                    out.push(format!("problem.x0_deg: no pre-impact state ({e})"));
                }
            }
        }
        out
    }

    pub fn scaling(&self) -> StateScaling {
        StateScaling::mechanical(DOF, self.scaling.angle_deg.to_radians(), self.scaling.rate)
    }

    pub fn strategy_options(&self) -> StrategyOptions {
        let s = &self.solver;
        let sched = |c: &ScheduleConfig| ContinuationSchedule {
            rho0: c.rho0,
            factor: c.factor,
            max_steps: c.max_steps,
        };
        StrategyOptions {
            rho_emb: sched(&self.schedules.rho_emb),
            rho_f: sched(&self.schedules.rho_f),
            eps_emb: self.tolerances.eps_emb,
            delta_f_tol: self.tolerances.delta_f_tol,
            eps_f_tol: self.tolerances.eps_f_tol,
            terminal_grad_tol: self.tolerances.terminal_grad_tol,
            dbeta_step: s.dbeta_step,
            max_dbeta_cond: s.max_dbeta_cond,
            max_target_halvings: s.max_target_halvings,
            pronto: ProntoOptions {
                gain_q: s.gain_q,
                gain_r: s.gain_r,
                gain_q_final: s.gain_q_final,
                mode: s.mode,
                grad_tol: self.tolerances.grad_tol,
                max_iterations: s.max_iterations,
                line_search: LineSearchParams {
                    alpha: s.armijo_alpha,
                    factor: s.backtrack_factor,
                    max_halvings: s.max_halvings,
                },
                divergence_bound: s.divergence_bound,
                ..ProntoOptions::default()
            },
        }
    }

    pub fn verify_tolerances(&self) -> VerifyTolerances {
        VerifyTolerances {
            eps_f_tol: self.tolerances.eps_f_tol,
            initial_tol: self.tolerances.initial_tol,
            defect_tol: self.tolerances.defect_tol,
        }
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let invalid = |e: hybrid_orbits_core::Error| ConfigError::Invalid {
            violations: vec![e.to_string()],
        };
        let system = make_biped_system(self.params()).map_err(invalid)?;
        let p = &self.problem;
        let grid = TimeGrid::new(p.horizon, p.intervals).map_err(invalid)?;
        let via = p
            .via_points
            .iter()
            .map(|v| ViaPoint {
                t: v.t,
                q: v.q_deg.iter().map(|d| d.to_radians()).collect(),
                qd: v.qd_deg.iter().map(|d| d.to_radians()).collect(),
            })
            .collect();
        let problem = DesignProblem::new(
            &system,
            deg(&p.x0_deg),
            grid,
            Matrix::from_diagonal(&Vector::from_column_slice(&p.q_diag)),
            Matrix::from_diagonal(&Vector::from_column_slice(&p.r_diag)),
            p.desired_input,
            via,
            self.scaling(),
        )
        .map_err(invalid)?;
        Ok(Scenario {
            system,
            problem,
            options: self.strategy_options(),
            verify: self.verify_tolerances(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }
}
