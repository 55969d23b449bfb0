//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment. Numbers accept products and
//! one quotient of literals and `pi`, e.g. `pi/4`, `1/100`, `2*pi`. Lists are
//! comma separated. Unknown keys are rejected.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use crate::greens::IntegralMode;

/// Configuration problem, optionally tied to a line of the source file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub origin: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.origin, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Initial state selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialKind {
    Boltzmann(f64),
    Uniform,
}

impl InitialKind {
    pub fn label(&self) -> String {
        match self {
            InitialKind::Boltzmann(b) => format!("{b:?}"),
            InitialKind::Uniform => "uniform".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub half_sites: usize,
    pub upsilon0: f64,
    pub kappa_r: f64,
    pub kappa_d: f64,
    pub beta: InitialKind,
    pub tau_max: f64,
    pub tau_steps: usize,
    pub output_dir: PathBuf,
    pub write_observables: bool,
    pub write_density: bool,
    pub write_eigensystem: bool,
    pub eigensystem_input: Option<PathBuf>,
    pub sweep_betas: Vec<InitialKind>,
    pub workers: usize,
    pub box_length: f64,
    pub hbar: f64,
    pub series_terms: usize,
    pub p_ref: f64,
    pub strength: f64,
    pub integrals_mode: IntegralMode,
    pub pole_e_lo: f64,
    pub pole_e_hi: f64,
    pub bisection_tol: f64,
    pub greens_points: usize,
    pub greens_xp: f64,
    pub greens_energies: Vec<f64>,
    pub delta_strength: f64,
    pub dispersion_tols: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            half_sites: 124,
            upsilon0: 0.1,
            kappa_r: PI / 4.0,
            kappa_d: PI / 2.0,
            beta: InitialKind::Boltzmann(0.01),
            tau_max: 20_000.0,
            tau_steps: 2001,
            output_dir: PathBuf::from("out"),
            write_observables: true,
            write_density: true,
            write_eigensystem: false,
            eigensystem_input: None,
            sweep_betas: vec![
                InitialKind::Boltzmann(0.5),
                InitialKind::Boltzmann(0.01),
                InitialKind::Boltzmann(0.005),
            ],
            workers: 0,
            box_length: PI,
            hbar: 1.0,
            series_terms: 4096,
            p_ref: 4.6,
            strength: 1.0,
            integrals_mode: IntegralMode::Approx,
            pole_e_lo: 0.1,
            pole_e_hi: 60.0,
            bisection_tol: 1e-12,
            greens_points: 41,
            greens_xp: 0.3,
            greens_energies: vec![0.7, 13.0],
            delta_strength: 1.0,
            dispersion_tols: vec![0.01, 0.05, 0.1, 0.2],
        }
    }
}

pub const KEYS: &[&str] = &[
    "half_sites",
    "upsilon0",
    "kappa_r",
    "kappa_d",
    "beta",
    "tau_max",
    "tau_steps",
    "output_dir",
    "write_observables",
    "write_density",
    "write_eigensystem",
    "eigensystem_input",
    "sweep_betas",
    "workers",
    "box_length",
    "hbar",
    "series_terms",
    "p_ref",
    "strength",
    "integrals_mode",
    "pole_e_lo",
    "pole_e_hi",
    "bisection_tol",
    "greens_points",
    "greens_xp",
    "greens_energies",
    "delta_strength",
    "dispersion_tols",
];

/// Evaluate `a*b/c*d`-style expressions over literals and `pi`.
pub fn parse_number(text: &str) -> Result<f64, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("empty number".into());
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t),
    };
    let mut parts = body.split('/');
    let num = product(parts.next().unwrap_or_default())?;
    let value = match (parts.next(), parts.next()) {
        (None, _) => num,
        (Some(den), None) => {
            let d = product(den)?;
            if d == 0.0 {
                return Err(format!("division by zero in '{text}'"));
            }
            num / d
        }
        _ => return Err(format!("at most one '/' allowed in '{text}'")),
    };
    Ok(sign * value)
}

fn product(text: &str) -> Result<f64, String> {
    text.split('*').try_fold(1.0, |acc, f| {
        let f = f.trim();
        let v = match f.to_ascii_lowercase().as_str() {
            "pi" => PI,
            "inf" | "infinity" => f64::INFINITY,
            _ => f.parse::<f64>().map_err(|_| format!("cannot read '{f}' as a number"))?,
        };
        Ok(acc * v)
    })
}

fn parse_usize(text: &str) -> Result<usize, String> {
    text.trim()
        .parse::<usize>()
        .map_err(|_| format!("expected a non-negative integer, got '{}'", text.trim()))
}

fn parse_bool(text: &str) -> Result<bool, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, got '{other}'")),
    }
}

fn parse_initial(text: &str) -> Result<InitialKind, String> {
    if text.trim().eq_ignore_ascii_case("uniform") {
        Ok(InitialKind::Uniform)
    } else {
        Ok(InitialKind::Boltzmann(parse_number(text)?))
    }
}

fn parse_list<T>(text: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(item).collect()
}

fn fmt_list<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Set one key from its textual value.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "half_sites" => self.half_sites = parse_usize(v)?,
            "upsilon0" => self.upsilon0 = parse_number(v)?,
            "kappa_r" => self.kappa_r = parse_number(v)?,
            "kappa_d" => self.kappa_d = parse_number(v)?,
            "beta" => self.beta = parse_initial(v)?,
            "tau_max" => self.tau_max = parse_number(v)?,
            "tau_steps" => self.tau_steps = parse_usize(v)?,
            "output_dir" => {
                if v.is_empty() {
                    return Err("output_dir must not be empty".into());
                }
                self.output_dir = PathBuf::from(v)
            }
            "write_observables" => self.write_observables = parse_bool(v)?,
            "write_density" => self.write_density = parse_bool(v)?,
            "write_eigensystem" => self.write_eigensystem = parse_bool(v)?,
            "eigensystem_input" => self.eigensystem_input = (!v.is_empty()).then(|| PathBuf::from(v)),
            "sweep_betas" => self.sweep_betas = parse_list(v, parse_initial)?,
            "workers" => self.workers = parse_usize(v)?,
            "box_length" => self.box_length = parse_number(v)?,
            "hbar" => self.hbar = parse_number(v)?,
            "series_terms" => self.series_terms = parse_usize(v)?,
            "p_ref" => self.p_ref = parse_number(v)?,
            "strength" => self.strength = parse_number(v)?,
            "integrals_mode" => {
                self.integrals_mode = match v.to_ascii_lowercase().as_str() {
                    "exact" => IntegralMode::Exact,
                    "approx" => IntegralMode::Approx,
                    other => return Err(format!("integrals_mode must be exact or approx, got '{other}'")),
                }
            }
            "pole_e_lo" => self.pole_e_lo = parse_number(v)?,
            "pole_e_hi" => self.pole_e_hi = parse_number(v)?,
            "bisection_tol" => self.bisection_tol = parse_number(v)?,
            "greens_points" => self.greens_points = parse_usize(v)?,
            "greens_xp" => self.greens_xp = parse_number(v)?,
            "greens_energies" => self.greens_energies = parse_list(v, parse_number)?,
            "delta_strength" => self.delta_strength = parse_number(v)?,
            "dispersion_tols" => self.dispersion_tols = parse_list(v, parse_number)?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Apply every assignment in `text`; `source` names the file in errors.
    pub fn apply_text(&mut self, text: &str, source: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let origin = format!("{source}:{}", i + 1);
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
                origin: origin.clone(),
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            self.apply(key.trim(), value).map_err(|message| ConfigError { origin, message })?;
        }
        Ok(())
    }

    /// Apply a `key=value` override given on the command line.
    pub fn apply_override(&mut self, assignment: &str, origin: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| ConfigError {
            origin: origin.into(),
            message: format!("expected key=value, got '{assignment}'"),
        })?;
        self.apply(key.trim(), value).map_err(|message| ConfigError {
            origin: origin.into(),
            message,
        })
    }

    /// Cross-field checks that do not need any numerics.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |message: String| ConfigError {
            origin: "config".into(),
            message,
        };
        if self.tau_steps < 1 {
            return Err(fail("tau_steps must be at least 1".into()));
        }
        if !(self.tau_max >= 0.0 && self.tau_max.is_finite()) {
            return Err(fail(format!("tau_max must be finite and >= 0, got {}", self.tau_max)));
        }
        if let InitialKind::Boltzmann(b) = self.beta {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(fail(format!("beta must be finite and >= 0, got {b}")));
            }
        }
        if self.sweep_betas.is_empty() {
            return Err(fail("sweep_betas needs at least one value".into()));
        }
        if self.greens_points < 1 {
            return Err(fail("greens_points must be at least 1".into()));
        }
        Ok(())
    }

    /// Every key with its resolved value, in a form `apply_text` reads back.
    pub fn to_text(&self) -> String {
        let initial = |k: &InitialKind| k.label();
        let float = |v: &f64| format!("{v:?}");
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let mode = match self.integrals_mode {
            IntegralMode::Exact => "exact",
            IntegralMode::Approx => "approx",
        };
        let entries: Vec<(&str, String)> = vec![
            ("half_sites", self.half_sites.to_string()),
            ("upsilon0", float(&self.upsilon0)),
            ("kappa_r", float(&self.kappa_r)),
            ("kappa_d", float(&self.kappa_d)),
            ("beta", initial(&self.beta)),
            ("tau_max", float(&self.tau_max)),
            ("tau_steps", self.tau_steps.to_string()),
            ("output_dir", self.output_dir.display().to_string()),
            ("write_observables", self.write_observables.to_string()),
            ("write_density", self.write_density.to_string()),
            ("write_eigensystem", self.write_eigensystem.to_string()),
            ("eigensystem_input", path(&self.eigensystem_input)),
            ("sweep_betas", fmt_list(&self.sweep_betas, initial)),
            ("workers", self.workers.to_string()),
            ("box_length", float(&self.box_length)),
            ("hbar", float(&self.hbar)),
            ("series_terms", self.series_terms.to_string()),
            ("p_ref", float(&self.p_ref)),
            ("strength", float(&self.strength)),
            ("integrals_mode", mode.to_string()),
            ("pole_e_lo", float(&self.pole_e_lo)),
            ("pole_e_hi", float(&self.pole_e_hi)),
            ("bisection_tol", float(&self.bisection_tol)),
            ("greens_points", self.greens_points.to_string()),
            ("greens_xp", float(&self.greens_xp)),
            ("greens_energies", fmt_list(&self.greens_energies, float)),
            ("delta_strength", float(&self.delta_strength)),
            ("dispersion_tols", fmt_list(&self.dispersion_tols, float)),
        ];
        debug_assert_eq!(entries.len(), KEYS.len());
        entries.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
