//! Maxwell–Boltzmann averaging over the axial velocity.

use serde::Serialize;
use thiserror::Error;

use crate::error::PointError;
use crate::units::most_probable_speed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("velocity grid needs an odd node count >= 3 so that v = 0 is a node, got {0}")]
    NodeCount(usize),
    #[error("invalid velocity grid {name}: {value}")]
    Parameter { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("at velocity {velocity} m/s: {source}")]
pub struct VelocityError {
    pub velocity: f64,
    #[source]
    pub source: PointError,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocityGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    most_probable_speed: f64,
}

impl VelocityGrid {
    /// One velocity class with unit weight.
    pub fn single(velocity: f64) -> Self {
        Self {
            nodes: vec![velocity],
            weights: vec![1.0],
            most_probable_speed: 0.0,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn most_probable_speed(&self) -> f64 {
        self.most_probable_speed
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Uniform trapezoidal grid on `[-span·v_p, span·v_p]` with weights `∝ exp(-v²/v_p²)`.
pub fn make_grid(
    temperature: f64,
    mass_amu: f64,
    n_nodes: usize,
    span: f64,
) -> Result<VelocityGrid, GridError> {
    if n_nodes < 3 || n_nodes.is_multiple_of(2) {
        return Err(GridError::NodeCount(n_nodes));
    }
    for (name, value) in [("temperature", temperature), ("mass", mass_amu), ("span", span)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(GridError::Parameter { name, value });
        }
    }
    let vp = most_probable_speed(temperature, mass_amu);
    let half = (n_nodes / 2) as i64;
    let step = span * vp / half as f64;
    let nodes: Vec<f64> = (-half..=half).map(|k| k as f64 * step).collect();
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|v| (-(v / vp).powi(2)).exp())
        .collect();
    weights[0] *= 0.5;
    weights[n_nodes - 1] *= 0.5;
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok(VelocityGrid {
        nodes,
        weights,
        most_probable_speed: vp,
    })
}

/// `Σ w_i·f(v_i)` in ascending node order.
pub fn average<F>(response: F, grid: &VelocityGrid) -> Result<f64, VelocityError>
where
    F: Fn(f64) -> Result<f64, PointError>,
{
    let mut acc = 0.0;
    for (&v, &w) in grid.nodes.iter().zip(&grid.weights) {
        let value = response(v).map_err(|source| VelocityError {
            velocity: v,
            source,
        })?;
        acc += w * value;
    }
    Ok(acc)
}

/// Weighted sum of per-node samples, reduced in ascending node order.
///
/// `samples[i]` belongs to `grid.nodes()[i]`; all samples share one length.
pub fn reduce(samples: &[Vec<f64>], grid: &VelocityGrid) -> Vec<f64> {
    assert_eq!(samples.len(), grid.len(), "one sample per velocity node");
    let width = samples.first().map_or(0, Vec::len);
    let mut acc = vec![0.0; width];
    for (sample, &w) in samples.iter().zip(&grid.weights) {
        for (a, s) in acc.iter_mut().zip(sample) {
            *a += w * s;
        }
    }
    acc
}
