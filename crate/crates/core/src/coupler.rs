//! Directional-coupler design: beat length, effective coupling length and
//! power coupling coefficient, plus minimum bend radius from tabulated loss.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two parallel waveguides with curved lead-in sections. Lengths in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerSpec {
    pub wavelength: f64,
    /// Symmetric supermode index.
    pub n_eff1: f64,
    /// Antisymmetric supermode index.
    pub n_eff2: f64,
    /// Gap `d`.
    pub gap: f64,
    /// Straight section `L_s`.
    pub straight_length: f64,
    /// Largest separation `d_c` at which the guides still couple.
    pub coupling_distance: f64,
    /// Ridge half-width `r_w`.
    pub ridge_half_width: f64,
    /// Bend radius `r_b` of the lead-in sections.
    pub bend_radius: f64,
}

fn invalid(msg: String) -> Error {
    Error::InvalidCoupler(msg)
}

impl CouplerSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [("wavelength", self.wavelength), ("bend_radius", self.bend_radius)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("gap", self.gap),
            ("straight_length", self.straight_length),
            ("coupling_distance", self.coupling_distance),
            ("ridge_half_width", self.ridge_half_width),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.n_eff1 > self.n_eff2) {
            return Err(invalid(format!(
                "n_eff1 ({}) must exceed n_eff2 ({})",
                self.n_eff1, self.n_eff2
            )));
        }
        let arg = self.arccos_argument();
        if !(-1.0..=1.0).contains(&arg) {
            return Err(invalid(format!(
                "curved-section arccos argument {arg} is outside [-1, 1]; check gap, coupling_distance and radii"
            )));
        }
        Ok(())
    }

    fn arccos_argument(&self) -> f64 {
        let edge_gap = self.gap - 2.0 * self.ridge_half_width;
        1.0 - (self.coupling_distance - edge_gap) / (2.0 * self.bend_radius + 2.0 * self.ridge_half_width)
    }

    pub fn beat_length(&self) -> Result<f64> {
        beat_length(self.wavelength, self.n_eff1, self.n_eff2)
    }

    pub fn effective_length(&self) -> Result<f64> {
        effective_length(self)
    }

    pub fn coupling(&self) -> Result<f64> {
        Ok(coupling_coefficient(self.effective_length()?, self.beat_length()?))
    }
}

/// `L_b = λ / (2 (n_eff1 - n_eff2))`.
pub fn beat_length(wavelength: f64, n_eff1: f64, n_eff2: f64) -> Result<f64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(invalid(format!("wavelength must be positive, got {wavelength}")));
    }
    if !(n_eff1 > n_eff2) {
        return Err(invalid(format!("n_eff1 ({n_eff1}) must exceed n_eff2 ({n_eff2})")));
    }
    Ok(wavelength / (2.0 * (n_eff1 - n_eff2)))
}

/// Straight length plus the stretch of both bends that lies within the
/// coupling distance.
pub fn effective_length(spec: &CouplerSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.straight_length + 2.0 * spec.bend_radius * spec.arccos_argument().acos())
}

/// `κ² = sin²(π L_e / (2 L_b))`.
pub fn coupling_coefficient(effective_length: f64, beat_length: f64) -> f64 {
    (PI * effective_length / (2.0 * beat_length)).sin().powi(2)
}

/// Supermode indices measured or simulated for one gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapModes {
    pub gap: f64,
    pub n_eff1: f64,
    pub n_eff2: f64,
}

/// `κ²` over gaps (rows) and straight lengths (columns).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingMap {
    pub gaps: Vec<f64>,
    pub straight_lengths: Vec<f64>,
    pub kappa2: Vec<Vec<f64>>,
}

pub fn coupling_map(base: &CouplerSpec, gaps: &[GapModes], straight_lengths: &[f64]) -> Result<CouplingMap> {
    let kappa2 = gaps
        .iter()
        .map(|g| {
            straight_lengths
                .iter()
                .map(|&ls| {
                    CouplerSpec {
                        gap: g.gap,
                        n_eff1: g.n_eff1,
                        n_eff2: g.n_eff2,
                        straight_length: ls,
                        ..base.clone()
                    }
                    .coupling()
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CouplingMap {
        gaps: gaps.iter().map(|g| g.gap).collect(),
        straight_lengths: straight_lengths.to_vec(),
        kappa2,
    })
}

/// Bend transmission per 90° against bend radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BendLossTable {
    pub radii: Vec<f64>,
    pub transmissions: Vec<f64>,
    pub tag: String,
}

#[derive(Deserialize)]
struct BendLossRow {
    radius_m: f64,
    transmission_per_90deg: f64,
}

impl BendLossTable {
    pub fn new(radii: Vec<f64>, transmissions: Vec<f64>, tag: impl Into<String>) -> Result<Self> {
        let table = Self { radii, transmissions, tag: tag.into() };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() {
            return Err(invalid("bend-loss table is empty".into()));
        }
        if self.radii.len() != self.transmissions.len() {
            return Err(invalid(format!(
                "{} radii but {} transmissions",
                self.radii.len(),
                self.transmissions.len()
            )));
        }
        if self.radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("bend-loss radii must be strictly increasing".into()));
        }
        if let Some(r) = self.radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(invalid(format!("bend radius {r} must be positive")));
        }
        if let Some(t) = self.transmissions.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(invalid(format!("transmission {t} is outside [0, 1]")));
        }
        Ok(())
    }

    /// Read `radius_m,transmission_per_90deg` rows; lines starting with `#`
    /// are skipped.
    pub fn from_reader<R: Read>(reader: R, tag: impl Into<String>) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let (mut radii, mut transmissions) = (Vec::new(), Vec::new());
        for row in csv.deserialize() {
            let row: BendLossRow = row?;
            radii.push(row.radius_m);
            transmissions.push(row.transmission_per_90deg);
        }
        Self::new(radii, transmissions, tag)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::from_reader(file, path.display().to_string())
    }
}

/// Smallest radius whose transmission reaches `min_transmission`, linearly
/// interpolated inside the first sample interval that crosses it. `None` if
/// no sample reaches the threshold.
pub fn min_radius_for_loss(table: &BendLossTable, min_transmission: f64) -> Result<Option<f64>> {
    table.validate()?;
    if !(0.0..=1.0).contains(&min_transmission) {
        return Err(Error::InvalidArgument(format!(
            "minimum transmission {min_transmission} is outside [0, 1]"
        )));
    }
    let (r, t) = (&table.radii, &table.transmissions);
    if t[0] >= min_transmission {
        return Ok(Some(r[0]));
    }
    for i in 1..r.len() {
        if t[i] >= min_transmission {
            let frac = (min_transmission - t[i - 1]) / (t[i] - t[i - 1]);
            return Ok(Some(r[i - 1] + frac * (r[i] - r[i - 1])));
        }
    }
    Ok(None)
}
