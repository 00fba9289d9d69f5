//! TOML run configuration.
//!
//! ```toml
//! [chain]
//! couplings = [0.8, 0.8]   # k1 .. k_{N+1}
//! alpha = 1.0              # or `losses = [..]`, one per ring
//! theta = 0.0              # or `phases = [..]`
//!
//! [options]
//! regime = "both"          # classical | quantum | both
//! n_max = 1000
//!
//! [output]
//! path = "steady.csv"
//! format = "csv"
//! ```
//!
//! Exactly one of `[chain]` and `[coupler]` must be present. Every section
//! rejects unknown keys.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{Axis, Metric, Regime, Scenario, DEFAULT_GOAL, MAX_TIME_STEPS};
use crate::classical::{DEFAULT_TOL, MAX_STEPS};
use crate::coupler::{CouplerSpec, GapModes};
use crate::error::{Error, Result};
use crate::graph::{ChainGeometry, RingChainSpec};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupler: Option<CouplerSection>,
    #[serde(default)]
    pub options: Options,
    #[serde(default)]
    pub output: Output,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    /// Axis for `timegrid` and `hit`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub couplings: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub losses: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<ChainGeometry>,
}

impl ChainSection {
    pub fn to_spec(&self) -> Result<RingChainSpec> {
        if self.alpha.is_some() && self.losses.is_some() {
            return Err(Error::InvalidArgument("give either chain.alpha or chain.losses, not both".into()));
        }
        if self.theta.is_some() && self.phases.is_some() {
            return Err(Error::InvalidArgument("give either chain.theta or chain.phases, not both".into()));
        }
        let explicit = self.alpha.is_some() || self.losses.is_some() || self.theta.is_some() || self.phases.is_some();
        if let (Some(geometry), false) = (&self.geometry, explicit) {
            return RingChainSpec::from_geometry(self.couplings.clone(), geometry.clone());
        }
        let n = self.couplings.len().saturating_sub(1);
        let losses = match (&self.losses, self.alpha) {
            (Some(l), _) => l.clone(),
            (None, a) => vec![a.unwrap_or(1.0); n],
        };
        let phases = match (&self.phases, self.theta) {
            (Some(p), _) => p.clone(),
            (None, t) => vec![t.unwrap_or(0.0); n],
        };
        let spec = RingChainSpec::new(self.couplings.clone(), losses, phases)?;
        match &self.geometry {
            Some(g) => spec.with_geometry(g.clone()),
            None => Ok(spec),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerSection {
    pub wavelength: f64,
    pub n_eff1: f64,
    pub n_eff2: f64,
    pub gap: f64,
    pub straight_length: f64,
    pub coupling_distance: f64,
    pub ridge_half_width: f64,
    pub bend_radius: f64,
    /// Rows of the `κ²` table; each gap carries its own supermode indices.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gaps: Vec<GapModes>,
    /// Columns of the `κ²` table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub straight_lengths: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bend_loss: Option<BendLossSection>,
}

impl CouplerSection {
    pub fn spec(&self) -> CouplerSpec {
        CouplerSpec {
            wavelength: self.wavelength,
            n_eff1: self.n_eff1,
            n_eff2: self.n_eff2,
            gap: self.gap,
            straight_length: self.straight_length,
            coupling_distance: self.coupling_distance,
            ridge_half_width: self.ridge_half_width,
            bend_radius: self.bend_radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub samples: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.samples == 1 {
            return vec![self.start];
        }
        let last = (self.samples - 1) as f64;
        (0..self.samples)
            .map(|i| {
                if i + 1 == self.samples {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BendLossSection {
    /// CSV with `radius_m,transmission_per_90deg` columns, relative to the
    /// config file.
    pub csv: String,
    pub min_transmission: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeChoice {
    Classical,
    Quantum,
    #[default]
    Both,
}

impl RegimeChoice {
    pub fn regimes(&self) -> Vec<Regime> {
        match self {
            RegimeChoice::Classical => vec![Regime::Classical],
            RegimeChoice::Quantum => vec![Regime::Quantum],
            RegimeChoice::Both => vec![Regime::Classical, Regime::Quantum],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Options {
    pub tol: f64,
    pub n_max: usize,
    pub samples: usize,
    pub p_g: f64,
    pub regime: RegimeChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            n_max: 1000,
            samples: 10_000,
            p_g: DEFAULT_GOAL,
            regime: RegimeChoice::Both,
            threads: None,
        }
    }
}

impl Options {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("options.tol = {} is outside (0, 1)", self.tol));
        }
        if !(1..=MAX_STEPS).contains(&self.n_max) {
            return bad(format!("options.n_max = {} is outside 1..={MAX_STEPS}", self.n_max));
        }
        if self.samples < 2 {
            return bad(format!("options.samples = {} must be at least 2", self.samples));
        }
        if !(self.p_g > 0.0 && self.p_g < 1.0) {
            return bad(format!("options.p_g = {} is outside (0, 1)", self.p_g));
        }
        if self.threads == Some(0) {
            return bad("options.threads must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub format: Format,
    /// Grid CSV as a whitespace-separated nonuniform matrix.
    pub gnuplot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub metric: Metric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    pub axis1: Axis,
    pub axis2: Axis,
}

impl RunConfig {
    /// Parse TOML. Syntax errors, unknown keys and type mismatches are
    /// [`Error::Config`].
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Semantic checks that do not depend on the subcommand.
    pub fn validate(&self) -> Result<()> {
        match (&self.chain, &self.coupler) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument("give either [chain] or [coupler], not both".into()))
            }
            (None, None) => return Err(Error::InvalidArgument("config needs a [chain] or [coupler] section".into())),
            _ => {}
        }
        self.options.validate()?;
        if let Some(chain) = &self.chain {
            chain.to_spec()?;
        }
        if let Some(coupler) = &self.coupler {
            coupler.spec().validate()?;
            if let Some(r) = &coupler.straight_lengths {
                if r.samples == 0 {
                    return Err(Error::InvalidArgument("coupler.straight_lengths needs at least one sample".into()));
                }
            }
            if let Some(b) = &coupler.bend_loss {
                if !(0.0..=1.0).contains(&b.min_transmission) {
                    return Err(Error::InvalidArgument(format!(
                        "coupler.bend_loss.min_transmission = {} is outside [0, 1]",
                        b.min_transmission
                    )));
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            sweep.axis1.validate()?;
            sweep.axis2.validate()?;
        }
        if let Some(axis) = &self.axis {
            axis.validate()?;
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<RingChainSpec> {
        self.chain
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("this command needs a [chain] section".into()))?
            .to_spec()
    }

    pub fn check_time_steps(&self) -> Result<()> {
        if self.options.n_max > MAX_TIME_STEPS {
            return Err(Error::InvalidArgument(format!(
                "options.n_max = {} exceeds {MAX_TIME_STEPS} for time grids",
                self.options.n_max
            )));
        }
        Ok(())
    }
}
