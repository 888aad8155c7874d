//! Run configuration: a JSON document and/or command-line flags, merged and
//! then resolved against per-command defaults.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use psqm::continuity::RegularizationPolicy;
use psqm::quantizer::Potential;
use psqm::scattering::{Mode, Sign, Spin};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    FreeNonrel,
    FreeDirac,
    Step,
    KleinScan,
    Evolve,
    Verify,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::FreeNonrel => "free-nonrel",
            Command::FreeDirac => "free-dirac",
            Command::Step => "step",
            Command::KleinScan => "klein-scan",
            Command::Evolve => "evolve",
            Command::Verify => "verify",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A single height or an `a:b:step` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HeightSpec {
    Value(f64),
    Range(Sweep),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Sweep {
    /// start, start + step, … up to stop inclusive (with a 1e-9·step slack).
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl FromStr for HeightSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        match parts.as_slice() {
            [v] => Ok(HeightSpec::Value(num(v)?)),
            [a, b, st] => {
                let sw = Sweep { start: num(a)?, stop: num(b)?, step: num(st)? };
                if !(sw.step > 0.0) || !(sw.stop >= sw.start) {
                    return Err(format!("sweep `{s}` needs start ≤ stop and step > 0"));
                }
                Ok(HeightSpec::Range(sw))
            }
            _ => Err(format!("expected a number or start:stop:step, got `{s}`")),
        }
    }
}

/// `up`, `down` or four comma-separated mixture coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpinSpec {
    Named(SpinName),
    Mixture([f64; 4]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinName {
    Up,
    Down,
}

impl SpinSpec {
    pub fn to_spin(self) -> Spin {
        match self {
            SpinSpec::Named(SpinName::Up) => Spin::Up,
            SpinSpec::Named(SpinName::Down) => Spin::Down,
            SpinSpec::Mixture(c) => Spin::Mixture(c),
        }
    }

    /// Spinor (A1, A0) for wave packets; mixtures have none.
    pub fn spinor(self) -> Option<[psqm::C64; 2]> {
        use psqm::C64;
        match self {
            SpinSpec::Named(SpinName::Up) => Some([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
            SpinSpec::Named(SpinName::Down) => Some([C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
            SpinSpec::Mixture(_) => None,
        }
    }
}

impl FromStr for SpinSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "up" => Ok(SpinSpec::Named(SpinName::Up)),
            "down" => Ok(SpinSpec::Named(SpinName::Down)),
            _ => {
                let v: Vec<f64> = s
                    .split(',')
                    .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
                    .collect::<Result<_, _>>()?;
                let arr: [f64; 4] = v.try_into().map_err(|_| "a mixture needs four coefficients".to_string())?;
                Ok(SpinSpec::Mixture(arr))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Zero,
    Constant,
    Step,
    Linear,
    Harmonic,
}

/// Every parameter any command may use. Unset fields fall back to the
/// command's defaults during [`RunConfig::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v0: Option<HeightSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin: Option<SpinSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<Sign>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_x: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_p: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub regularization: Option<RegularizationPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn field_err(field: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("field `{field}`: {msg}"))
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(format!("config file: {e}")))
    }

    /// Fields set in `other` win.
    pub fn overlay(mut self, other: &RunConfig) -> RunConfig {
        let dst = &mut self;
        overlay!(dst, other; command, energy, mass, c, q, v0, p, spin, sign, mode, hbar, x_min, x_max, n_x, p_min, p_max, n_p,
            x0, p0, width, potential, strength, t_end, dt, sample_every, regularization, criterion, seed, format, out);
        self
    }

    /// Fill the defaults of the chosen command and check that every
    /// required parameter is present and in range.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let cmd = self.command.ok_or_else(|| field_err("command", "missing"))?;
        let mut r = self.clone();
        r.hbar.get_or_insert(1.0);
        r.seed.get_or_insert(0);
        r.format.get_or_insert(Format::Csv);
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| field_err(name, format!("required by `{cmd}`")));
        match cmd {
            Command::FreeNonrel => {
                need(r.p, "p")?;
                r.mass.get_or_insert(1.0);
                r.spin.get_or_insert(SpinSpec::Named(SpinName::Up));
                r.regularization.get_or_insert_with(RegularizationPolicy::default);
            }
            Command::FreeDirac => {
                need(r.p, "p")?;
                r.mass.get_or_insert(1.0);
                r.c.get_or_insert(1.0);
                r.q.get_or_insert(1.0);
                r.sign.get_or_insert(Sign::Particle);
                r.regularization.get_or_insert_with(RegularizationPolicy::default);
            }
            Command::Step => {
                need(r.energy, "E")?;
                match r.v0 {
                    Some(HeightSpec::Value(_)) => {}
                    Some(HeightSpec::Range(_)) => return Err(field_err("v0", "`step` takes a single height")),
                    None => return Err(field_err("v0", "required by `step`")),
                }
                r.mass.get_or_insert(1.0);
                r.c.get_or_insert(1.0);
                r.q.get_or_insert(1.0);
                r.mode.get_or_insert(Mode::Nonrel);
                r.spin.get_or_insert(SpinSpec::Named(SpinName::Up));
                r.x_min.get_or_insert(-5.0);
                r.x_max.get_or_insert(5.0);
                r.n_x.get_or_insert(101);
                r.regularization.get_or_insert_with(RegularizationPolicy::default);
            }
            Command::KleinScan => {
                need(r.energy, "E")?;
                if r.v0.is_none() {
                    return Err(field_err("v0", "required by `klein-scan`"));
                }
                r.mass.get_or_insert(1.0);
                r.c.get_or_insert(1.0);
                r.q.get_or_insert(1.0);
            }
            Command::Evolve => {
                r.mass.get_or_insert(1.0);
                r.c.get_or_insert(1.0);
                r.q.get_or_insert(1.0);
                r.mode.get_or_insert(Mode::Nonrel);
                r.spin.get_or_insert(SpinSpec::Named(SpinName::Up));
                r.x_min.get_or_insert(-16.0);
                r.x_max.get_or_insert(16.0);
                r.n_x.get_or_insert(128);
                r.p_min.get_or_insert(-6.0);
                r.p_max.get_or_insert(6.0);
                r.n_p.get_or_insert(64);
                r.x0.get_or_insert(-2.0);
                r.p0.get_or_insert(1.0);
                r.width.get_or_insert(1.0);
                r.potential.get_or_insert(PotentialKind::Zero);
                r.strength.get_or_insert(0.0);
                r.t_end.get_or_insert(1.0);
                r.dt.get_or_insert(0.01);
                r.sample_every.get_or_insert(50);
                if r.spin.and_then(|s| s.spinor()).is_none() {
                    return Err(field_err("spin", "wave packets need `up` or `down`"));
                }
            }
            Command::Verify => {
                if let Some(id) = r.criterion {
                    if !(1..=8).contains(&id) {
                        return Err(field_err("criterion", format!("must be 1..=8, got {id}")));
                    }
                }
            }
        }
        for (name, v) in [("M", r.mass), ("c", r.c), ("hbar", r.hbar), ("width", r.width), ("dt", r.dt)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(field_err(name, format!("must be positive and finite, got {v}")));
                }
            }
        }
        for (name, v) in [("E", r.energy), ("p", r.p), ("q", r.q), ("x0", r.x0), ("p0", r.p0), ("strength", r.strength), ("t_end", r.t_end)]
        {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(field_err(name, format!("must be finite, got {v}")));
                }
            }
        }
        if let Some(pol) = &r.regularization {
            pol.validate().map_err(|e| field_err("regularization", e))?;
        }
        Ok(r)
    }

    pub fn v0_value(&self) -> f64 {
        match self.v0 {
            Some(HeightSpec::Value(v)) => v,
            Some(HeightSpec::Range(s)) => s.start,
            None => f64::NAN,
        }
    }

    pub fn v0_values(&self) -> Vec<f64> {
        match self.v0 {
            Some(HeightSpec::Value(v)) => vec![v],
            Some(HeightSpec::Range(s)) => s.values(),
            None => Vec::new(),
        }
    }

    pub fn potential(&self) -> Potential {
        let s = self.strength.unwrap_or(0.0);
        match self.potential.unwrap_or(PotentialKind::Zero) {
            PotentialKind::Zero => Potential::Zero,
            PotentialKind::Constant => Potential::Constant(s),
            PotentialKind::Step => Potential::Step { height: s },
            PotentialKind::Linear => Potential::Linear { slope: s },
            PotentialKind::Harmonic => Potential::Harmonic { k: s },
        }
    }
}
