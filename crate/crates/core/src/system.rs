//! Complete physical description of a run and the scan axes.

use serde::Serialize;
use thiserror::Error;

use crate::doppler::{make_grid, VelocityGrid};
use crate::model::{DecayModel, FieldConfig, Level, LevelScheme};
use crate::probe::ProbeOptions;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("configuration violates {invariant}: {detail}")]
pub struct ValidationError {
    pub invariant: String,
    pub detail: String,
}

impl ValidationError {
    pub fn new(invariant: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            invariant: invariant.into(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DopplerConfig {
    pub temperature: f64,
    pub mass_amu: f64,
    pub nodes: usize,
    pub span: f64,
    /// Velocity class evaluated when averaging is off, m/s.
    pub velocity: f64,
}

impl Default for DopplerConfig {
    fn default() -> Self {
        Self {
            temperature: 300.0,
            mass_amu: 87.0,
            nodes: 1025,
            span: 3.0,
            velocity: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    pub scheme: LevelScheme,
    pub decay: DecayModel,
    pub l1: FieldConfig,
    /// The AOM offset of L2 is the scan axis; the offset stored here is ignored.
    pub l2: FieldConfig,
    pub l3: FieldConfig,
    /// Largest allowed ratio of L3 to L1 Rabi frequency.
    pub l3_ratio_bound: f64,
    pub probe: ProbeOptions,
    pub doppler: DopplerConfig,
    pub optical_depth: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            scheme: LevelScheme::default(),
            decay: DecayModel::default(),
            l1: FieldConfig::l1(6.07, 6.07).expect("valid default"),
            l2: FieldConfig::l2(3.0, 3.0, 0.0).expect("valid default"),
            l3: FieldConfig::l3(0.3, 0.3).expect("valid default"),
            l3_ratio_bound: 0.2,
            probe: ProbeOptions::default(),
            doppler: DopplerConfig::default(),
            optical_depth: 1.0,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let l1 = self.l1.rabi(Level::Excited0);
        let l3 = self.l3.max_rabi();
        if !(self.l3_ratio_bound.is_finite() && self.l3_ratio_bound > 0.0) {
            return Err(ValidationError::new(
                "perturbative ratio bound",
                format!("l3.max_ratio must be > 0, got {}", self.l3_ratio_bound),
            ));
        }
        if l3 > self.l3_ratio_bound * l1 {
            return Err(ValidationError::new(
                "perturbative ratio bound",
                format!(
                    "L3 Rabi frequency {l3} MHz exceeds {} x L1 resonant Rabi frequency {l1} MHz",
                    self.l3_ratio_bound
                ),
            ));
        }
        if !(self.optical_depth.is_finite() && self.optical_depth >= 0.0) {
            return Err(ValidationError::new(
                "optical depth >= 0",
                format!("got {}", self.optical_depth),
            ));
        }
        if !self.doppler.velocity.is_finite() {
            return Err(ValidationError::new("finite velocity", "doppler.velocity"));
        }
        self.velocity_grid(true)?;
        Ok(())
    }

    /// Velocity classes for a scan; a single class at `doppler.velocity` when averaging is off.
    pub fn velocity_grid(&self, doppler: bool) -> Result<VelocityGrid, ValidationError> {
        if !doppler {
            return Ok(VelocityGrid::single(self.doppler.velocity));
        }
        let d = &self.doppler;
        make_grid(d.temperature, d.mass_amu, d.nodes, d.span)
            .map_err(|e| ValidationError::new("velocity grid", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self, ValidationError> {
        let axis = Self { start, stop, step };
        axis.validate("axis")?;
        Ok(axis)
    }

    pub fn validate(&self, name: &str) -> Result<(), ValidationError> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(ValidationError::new(
                format!("{name} step > 0"),
                format!("got {}", self.step),
            ));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.stop >= self.start) {
            return Err(ValidationError::new(
                format!("{name} range non-empty"),
                format!("[{}, {}]", self.start, self.stop),
            ));
        }
        Ok(())
    }

    /// Grid points `start + k·step` up to `stop` (inclusive within 1e-9 of a step).
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.start + k as f64 * self.step).collect()
    }

    pub fn len(&self) -> usize {
        self.points().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    pub delta10: Axis,
    pub aom: Axis,
    pub doppler: bool,
    /// Off-resonant L1 leg `(g-, e1)` on or off.
    pub off_resonant: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            delta10: Axis {
                start: -35.0,
                stop: 35.0,
                step: 1.0,
            },
            aom: Axis {
                start: -10.0,
                stop: 10.0,
                step: 0.1,
            },
            doppler: false,
            off_resonant: true,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        self.delta10.validate("delta10")?;
        self.aom.validate("aom")?;
        if self.aom.len() < 3 {
            return Err(ValidationError::new(
                "aom trace has at least 3 points",
                format!("got {}", self.aom.len()),
            ));
        }
        Ok(())
    }
}
