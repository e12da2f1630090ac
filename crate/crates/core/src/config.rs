//! Engine configuration from INI files and command-line overrides.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::str::FromStr;

use ini::Ini;

use crate::accounting::{FlipConvention, Mode};
use crate::engine::Thermalization;
use crate::error::{Error, Result};
use crate::spin_algebra::Spin;
use crate::therm::BosonicForm;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Selective,
    Unselective,
    Zeno,
}

impl RunMode {
    pub fn label(self) -> &'static str {
        match self {
            RunMode::Selective => "selective",
            RunMode::Unselective => "unselective",
            RunMode::Zeno => "zeno",
        }
    }

    pub fn cycle_mode(self) -> Option<Mode> {
        match self {
            RunMode::Selective => Some(Mode::Selective),
            RunMode::Unselective => Some(Mode::Unselective),
            RunMode::Zeno => None,
        }
    }
}

impl FromStr for RunMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "selective" => Ok(RunMode::Selective),
            "unselective" => Ok(RunMode::Unselective),
            "zeno" => Ok(RunMode::Zeno),
            other => Err(Error::param("mode", format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThermKind {
    Instant,
    Subunit,
    Bosonic,
}

impl ThermKind {
    pub fn label(self) -> &'static str {
        match self {
            ThermKind::Instant => "instant",
            ThermKind::Subunit => "subunit",
            ThermKind::Bosonic => "bosonic",
        }
    }
}

impl FromStr for ThermKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "instant" => Ok(ThermKind::Instant),
            "subunit" => Ok(ThermKind::Subunit),
            "bosonic" => Ok(ThermKind::Bosonic),
            other => Err(Error::param("therm_model", format!("unknown model `{other}`"))),
        }
    }
}

fn parse_flip(s: &str) -> Result<FlipConvention> {
    match s.trim().to_ascii_lowercase().as_str() {
        "nominal" => Ok(FlipConvention::Nominal),
        "energy-balance" | "energy_balance" => Ok(FlipConvention::EnergyBalance),
        other => Err(Error::param("flip", format!("unknown convention `{other}`"))),
    }
}

fn parse_form(s: &str) -> Result<BosonicForm> {
    match s.trim().to_ascii_lowercase().as_str() {
        "trace-preserving" | "trace_preserving" => Ok(BosonicForm::TracePreserving),
        "printed" => Ok(BosonicForm::Printed),
        other => Err(Error::param("bosonic_form", format!("unknown form `{other}`"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    pub l: f64,
    pub dt: f64,
    pub beta: f64,
    pub tau_tilde: f64,
    pub tau_prime: f64,
    pub mode: RunMode,
    pub therm_model: ThermKind,
    pub n_beta: usize,
    pub tau_beta: f64,
    pub flip: FlipConvention,
    pub bosonic_form: BosonicForm,
    pub l_values: Vec<f64>,
    pub dt_values: Vec<f64>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            l: 1.0,
            dt: 0.05,
            beta: 1.0,
            tau_tilde: FRAC_PI_2,
            tau_prime: PI,
            mode: RunMode::Selective,
            therm_model: ThermKind::Instant,
            n_beta: 1,
            tau_beta: 1.0,
            flip: FlipConvention::Nominal,
            bosonic_form: BosonicForm::TracePreserving,
            l_values: Vec::new(),
            dt_values: Vec::new(),
        }
    }
}

fn parse_f64(name: &'static str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::param(name, format!("`{value}` is not a number")))
}

/// Parses `a,b,c` or an inclusive range `start:stop:step`.
pub fn parse_values(name: &'static str, text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::param(name, "empty list"));
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::param(name, format!("range `{text}` must be start:stop:step")));
        }
        let (start, stop, step) = (parse_f64(name, parts[0])?, parse_f64(name, parts[1])?, parse_f64(name, parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err(Error::param(name, format!("range `{text}` is empty or has a non-positive step")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + i as f64 * step).collect());
    }
    text.split(',').map(|v| parse_f64(name, v)).collect()
}

impl EngineConfig {
    /// Applies one `key = value` setting; keys match the field names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim().replace('-', "_").as_str() {
            "l" => self.l = parse_f64("l", value)?,
            "dt" => self.dt = parse_f64("dt", value)?,
            "beta" => self.beta = parse_f64("beta", value)?,
            "tau_tilde" => self.tau_tilde = parse_f64("tau_tilde", value)?,
            "tau_prime" => self.tau_prime = parse_f64("tau_prime", value)?,
            "mode" => self.mode = value.parse()?,
            "therm_model" => self.therm_model = value.parse()?,
            "n_beta" => {
                self.n_beta = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::param("n_beta", format!("`{value}` is not a positive integer")))?
            }
            "tau_beta" => self.tau_beta = parse_f64("tau_beta", value)?,
            "flip" => self.flip = parse_flip(value)?,
            "bosonic_form" => self.bosonic_form = parse_form(value)?,
            "l_values" => self.l_values = parse_values("l_values", value)?,
            "dt_values" => self.dt_values = parse_values("dt_values", value)?,
            other => {
                return Err(Error::InvalidParameter { name: "config", reason: format!("unknown key `{other}`") })
            }
        }
        Ok(())
    }

    /// Reads every key of every section; later sections override earlier ones.
    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text)
            .map_err(|e| Error::InvalidParameter { name: "config", reason: e.to_string() })?;
        let mut cfg = Self::default();
        for (_, props) in ini.iter() {
            for (k, v) in props.iter() {
                cfg.set(k, v)?;
            }
        }
        Ok(cfg)
    }

    pub fn from_ini_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidParameter {
            name: "config",
            reason: format!("{}: {e}", path.display()),
        })?;
        Self::from_ini_str(&text)
    }

    pub fn spin(&self) -> Result<Spin> {
        Spin::new(self.l).map_err(|_| Error::param("l", format!("{} is not a positive half-integer", self.l)))
    }

    pub fn thermalization(&self) -> Thermalization {
        match self.therm_model {
            ThermKind::Instant if self.n_beta <= 1 => Thermalization::Instant,
            ThermKind::Instant | ThermKind::Subunit => Thermalization::SubUnit { n_beta: self.n_beta },
            ThermKind::Bosonic => Thermalization::Bosonic {
                n_beta: self.n_beta,
                tau_beta: self.tau_beta,
                form: self.bosonic_form,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spin()?;
        if !(self.beta > 0.0) {
            return Err(Error::param("beta", format!("must be positive, got {}", self.beta)));
        }
        if !(self.tau_tilde >= 0.0 && self.tau_tilde < self.tau_prime) {
            return Err(Error::param("tau_tilde", "must satisfy 0 <= tau_tilde < tau_prime"));
        }
        if self.tau_prime > 2.0 * PI + 1e-12 {
            return Err(Error::param("tau_prime", "must not exceed 2π"));
        }
        if !(self.dt > 0.0 && self.dt <= self.tau_prime - self.tau_tilde + 1e-12) {
            return Err(Error::param("dt", "must lie in (0, tau_prime - tau_tilde]"));
        }
        if self.n_beta == 0 {
            return Err(Error::param("n_beta", "must be at least 1"));
        }
        if !(self.tau_beta >= 0.0) {
            return Err(Error::param("tau_beta", "must be non-negative"));
        }
        Ok(())
    }

    /// `(l, dt)` pairs of a sweep in l-major order; unset lists fall back to the scalar value.
    pub fn sweep_points(&self) -> Vec<(f64, f64)> {
        let ls = if self.l_values.is_empty() { vec![self.l] } else { self.l_values.clone() };
        let dts = if self.dt_values.is_empty() { vec![self.dt] } else { self.dt_values.clone() };
        ls.iter().flat_map(|&l| dts.iter().map(move |&dt| (l, dt))).collect()
    }

    pub fn with_point(&self, l: f64, dt: f64) -> Self {
        Self { l, dt, ..self.clone() }
    }
}
