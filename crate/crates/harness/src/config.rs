//! Run configuration: INI-style files plus command-line overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use sldg_core::imex::{Builtin, ButcherPair, PenaltyRefresh};
use sldg_core::limiter::LimiterConfig;
use sldg_core::mesh::Boundary;

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Epsilon {
    Constant(f64),
    /// eps0 + (tanh(1 - 10(x - 1/2)) + tanh(1 + 10(x - 1/2)))/2
    Mixing { eps0: f64 },
}

impl Epsilon {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            Epsilon::Constant(e) => e,
            Epsilon::Mixing { eps0 } => {
                let y = 10.0 * (x - 0.5);
                eps0 + 0.5 * ((1.0 - y).tanh() + (1.0 + y).tanh())
            }
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Constant(e) => write!(f, "{e:e}"),
            Epsilon::Mixing { eps0 } => write!(f, "mixing(eps0={eps0:e})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InitialCondition {
    MaxwellianSmooth,
    BiMaxwellianTestII,
    Sod,
    BiMaxwellianTestIV,
}

impl FromStr for InitialCondition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "smooth" | "maxwellian" | "maxwelliansmooth" => Ok(Self::MaxwellianSmooth),
            "ap" | "bimaxwellian" | "bimaxwelliantestii" => Ok(Self::BiMaxwellianTestII),
            "sod" => Ok(Self::Sod),
            "mixing" | "bimaxwelliantestiv" => Ok(Self::BiMaxwellianTestIV),
            _ => Err(format!("unknown initial condition '{s}'")),
        }
    }
}

/// The four preset experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
pub enum TestKind {
    Accuracy,
    Ap,
    Sod,
    Mixing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SchemeSpec {
    Builtin(Builtin),
    File(PathBuf),
}

impl SchemeSpec {
    /// Builtin name, or a path to a tableau file.
    pub fn parse(s: &str) -> Self {
        match s.parse::<Builtin>() {
            Ok(b) => SchemeSpec::Builtin(b),
            Err(_) => SchemeSpec::File(PathBuf::from(s)),
        }
    }

    pub fn load(&self) -> Result<ButcherPair, HarnessError> {
        match self {
            SchemeSpec::Builtin(b) => Ok(ButcherPair::builtin(*b)),
            SchemeSpec::File(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| HarnessError::Config(format!("cannot read tableau {}: {e}", p.display())))?;
                ButcherPair::parse(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            SchemeSpec::Builtin(b) => b.name().to_string(),
            SchemeSpec::File(p) => p.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub x_left: f64,
    pub x_right: f64,
    pub n_cells: usize,
    pub boundary: Boundary,
    pub degree: usize,
    pub half_width: f64,
    pub n_v: usize,
    pub n_angles: usize,
    pub scheme: SchemeSpec,
    pub cfl: f64,
    /// Fixed time step; overrides the CFL rule when set.
    pub dt: Option<f64>,
    pub epsilon: Epsilon,
    pub t_final: f64,
    pub initial: InitialCondition,
    pub limiter: LimiterConfig,
    pub penalty: PenaltyRefresh,
    /// Replace Q(f) by Q(f) - Q(M_f).
    pub equilibrium_correction: bool,
    pub output_dir: Option<PathBuf>,
    /// Write a snapshot every this many steps; 0 writes the final state only.
    pub snapshot_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::preset(TestKind::Accuracy)
    }
}

impl RunConfig {
    pub fn preset(test: TestKind) -> Self {
        let base = RunConfig {
            x_left: 0.0,
            x_right: 1.0,
            n_cells: 16,
            boundary: Boundary::Periodic,
            degree: 2,
            half_width: 7.0,
            n_v: 32,
            n_angles: 8,
            scheme: SchemeSpec::Builtin(Builtin::ARS443),
            cfl: 0.5,
            dt: None,
            epsilon: Epsilon::Constant(1.0),
            t_final: 0.1,
            initial: InitialCondition::MaxwellianSmooth,
            limiter: LimiterConfig::default(),
            penalty: PenaltyRefresh::Refreshed,
            equilibrium_correction: true,
            output_dir: None,
            snapshot_every: 0,
        };
        match test {
            TestKind::Accuracy => base,
            TestKind::Ap => RunConfig {
                n_cells: 32,
                epsilon: Epsilon::Constant(1e-2),
                t_final: 0.2,
                initial: InitialCondition::BiMaxwellianTestII,
                ..base
            },
            TestKind::Sod => RunConfig {
                n_cells: 80,
                boundary: Boundary::Neumann,
                scheme: SchemeSpec::Builtin(Builtin::FBEuler),
                epsilon: Epsilon::Constant(1e-2),
                t_final: 0.2,
                initial: InitialCondition::Sod,
                limiter: LimiterConfig::enabled(),
                ..base
            },
            TestKind::Mixing => RunConfig {
                n_cells: 80,
                epsilon: Epsilon::Mixing { eps0: 1e-6 },
                t_final: 0.3,
                initial: InitialCondition::BiMaxwellianTestIV,
                ..base
            },
        }
    }

    pub fn dx(&self) -> f64 {
        (self.x_right - self.x_left) / self.n_cells as f64
    }

    /// dt = CFL dx / v_max with v_max = L, unless fixed explicitly.
    pub fn time_step(&self) -> f64 {
        self.dt.unwrap_or(self.cfl * self.dx() / self.half_width)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if !(self.x_right > self.x_left) {
            return bad("x_right must exceed x_left");
        }
        if self.n_cells == 0 {
            return bad("n_cells must be positive");
        }
        if self.n_v < 8 {
            return bad("velocity grid needs at least 8 points");
        }
        if !(self.half_width > 0.0) {
            return bad("velocity half width must be positive");
        }
        if !(self.cfl > 0.0) && self.dt.is_none() {
            return bad("cfl must be positive");
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad("dt must be positive");
            }
        }
        if !(self.t_final > 0.0) {
            return bad("t_final must be positive");
        }
        match self.epsilon {
            Epsilon::Constant(e) if !(e > 0.0) => return bad("epsilon must be positive"),
            Epsilon::Mixing { eps0 } if !(eps0 > 0.0) => return bad("eps0 must be positive"),
            _ => {}
        }
        if self.limiter.enabled {
            self.limiter
                .validate(self.degree)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Reads an INI-style file on top of the preset named by `problem.test`
    /// (or the accuracy preset).
    pub fn from_ini(text: &str) -> Result<Self, HarnessError> {
        Self::from_ini_with(text, None)
    }

    /// Like [`RunConfig::from_ini`], but `test` replaces the file's preset.
    pub fn from_ini_with(text: &str, test: Option<TestKind>) -> Result<Self, HarnessError> {
        let entries = parse_ini(text)?;
        let named = entries.iter().find(|e| e.key == "problem.test");
        let mut cfg = match (test, named) {
            (Some(t), _) => RunConfig::preset(t),
            (None, Some(e)) => RunConfig::preset(parse_test(&e.value).map_err(|m| e.error(m))?),
            (None, None) => RunConfig::default(),
        };
        for e in &entries {
            if e.key != "problem.test" {
                cfg.set(&e.key, &e.value).map_err(|m| e.error(m))?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one `section.key` entry.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("bad number '{v}'"))
        }
        match key {
            "mesh.x_left" => self.x_left = num(value)?,
            "mesh.x_right" => self.x_right = num(value)?,
            "mesh.n_cells" => self.n_cells = num(value)?,
            "mesh.degree" => self.degree = num(value)?,
            "mesh.boundary" => {
                self.boundary = match value.to_ascii_lowercase().as_str() {
                    "periodic" => Boundary::Periodic,
                    "neumann" => Boundary::Neumann,
                    _ => return Err(format!("unknown boundary '{value}'")),
                }
            }
            "velocity.half_width" => self.half_width = num(value)?,
            "velocity.n_points" => self.n_v = num(value)?,
            "velocity.angles" => self.n_angles = num(value)?,
            "scheme.name" => self.scheme = SchemeSpec::parse(value),
            "scheme.cfl" => self.cfl = num(value)?,
            "scheme.dt" => self.dt = Some(num(value)?),
            "scheme.penalty" => {
                self.penalty = match value.to_ascii_lowercase().as_str() {
                    "refreshed" => PenaltyRefresh::Refreshed,
                    "stage_consistent" | "stage-consistent" => PenaltyRefresh::StageConsistent,
                    _ => return Err(format!("unknown penalty mode '{value}'")),
                }
            }
            "velocity.equilibrium_correction" => self.equilibrium_correction = parse_switch(value)?,
            "scheme.limiter" => self.limiter.enabled = parse_switch(value)?,
            "scheme.limiter_samples" => self.limiter.sample_count = num(value)?,
            "problem.initial" => self.initial = value.parse()?,
            "problem.epsilon" => {
                self.epsilon = if value.eq_ignore_ascii_case("mixing") {
                    match self.epsilon {
                        Epsilon::Mixing { .. } => self.epsilon,
                        _ => Epsilon::Mixing { eps0: 1e-6 },
                    }
                } else {
                    Epsilon::Constant(num(value)?)
                }
            }
            "problem.eps0" => self.epsilon = Epsilon::Mixing { eps0: num(value)? },
            "problem.t_final" => self.t_final = num(value)?,
            "output.dir" => self.output_dir = Some(PathBuf::from(value)),
            "output.snapshot_every" => self.snapshot_every = num(value)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }
}

pub fn parse_test(s: &str) -> Result<TestKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "accuracy" => Ok(TestKind::Accuracy),
        "ap" => Ok(TestKind::Ap),
        "sod" => Ok(TestKind::Sod),
        "mixing" => Ok(TestKind::Mixing),
        _ => Err(format!("unknown test '{s}'")),
    }
}

pub fn parse_switch(v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected on/off, got '{v}'")),
    }
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

impl Entry {
    fn error(&self, message: String) -> HarnessError {
        HarnessError::ConfigLine {
            line: self.line,
            message,
        }
    }
}

/// `[section]` headers, `key = value` lines, `#` or `;` comments.
fn parse_ini(text: &str) -> Result<Vec<Entry>, HarnessError> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split(['#', ';']).next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if let Some(rest) = l.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or(HarnessError::ConfigLine {
                line,
                message: "unterminated section header".into(),
            })?;
            section = name.trim().to_ascii_lowercase();
            continue;
        }
        let (k, v) = l.split_once('=').ok_or(HarnessError::ConfigLine {
            line,
            message: format!("expected 'key = value', got '{l}'"),
        })?;
        if section.is_empty() {
            return Err(HarnessError::ConfigLine {
                line,
                message: "entry outside a section".into(),
            });
        }
        out.push(Entry {
            line,
            key: format!("{section}.{}", k.trim().to_ascii_lowercase()),
            value: v.trim().to_string(),
        });
    }
    Ok(out)
}
