//! First-order response to the weak L3 probe.
//!
//! With `ΔH(t) = V·e^{-iνt} + V†·e^{iνt}` (`V` the raising part, `ν` the probe's
//! detuning mismatch against the frame) the first-order correction is
//! `Δρ(t) = X·e^{-iνt} + X†·e^{iνt}` where
//!
//! ```text
//! (L + iν)·vec(X) = i·vec([V, ρ]),   Tr X = 0.
//! ```
//!
//! For `ν = 0` this reduces to the static equation `L·vec(Δρ) = i·vec([ΔH, ρ])`
//! with `Tr Δρ = 0`; the reported `delta_rho` is always `X + X†`. The static
//! treatment (the default) drops `ν` altogether, so the velocity enters the
//! probe response only through `L` and `ρ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::liouville::{solve_trace_constrained, DensityMatrix, Liouvillian, RESIDUAL_TOL};
use crate::model::{FieldConfig, Leg, ProbeHamiltonian};
use crate::superop::{
    commutator, hermiticity_error, unvectorize, vectorize, MaxNorm, Operator, Superop, I, ZERO,
};

/// Which coherence the probe coefficient is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeReadout {
    /// `X[e, g]`: the part of the response oscillating with the probe field.
    #[default]
    PhaseMatched,
    /// `Δρ[e, g] = X[e, g] + conj(X[g, e])`.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub readout: ProbeReadout,
    /// Keep the detuning mismatch `ν` in the probe equation.
    pub beat: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResponse {
    pub delta_rho: Operator,
    pub phase_matched: Operator,
    /// Dimensionless, per unit probe Rabi frequency; positive is absorption.
    pub absorption_coefficient: f64,
}

/// `Γ·Σ Ω_leg·Im M[e, g] / Σ Ω_leg²`; equals the population difference for a weak
/// resonant two-level probe.
pub fn leg_absorption(m: &Operator, legs: &[Leg], gamma_e: f64) -> f64 {
    let norm: f64 = legs.iter().map(|l| l.rabi * l.rabi).sum();
    if norm == 0.0 {
        return 0.0;
    }
    let num: f64 = legs
        .iter()
        .map(|l| l.rabi * m[(l.excited.index(), l.ground.index())].im)
        .sum();
    gamma_e * num / norm
}

pub fn solve_delta_rho(
    liouvillian: &Liouvillian,
    probe: &ProbeHamiltonian,
    rho: &DensityMatrix,
    gamma_e: f64,
    options: ProbeOptions,
) -> Result<ProbeResponse, SolverError> {
    let residual = liouvillian.residual(rho.matrix());
    if residual > RESIDUAL_TOL {
        return Err(SolverError::InvalidBaseState { residual });
    }
    let source = commutator(probe.raising(), rho.matrix()) * I;
    let nu = if options.beat {
        probe.detuning_mismatch()
    } else {
        0.0
    };
    let shifted = liouvillian.matrix() + Superop::identity() * Complex64::new(0.0, nu);
    let x = solve_trace_constrained(&shifted, &vectorize(&source), ZERO)?;
    let phase_matched = unvectorize(&x);

    let x_residual = (shifted * x - vectorize(&source)).max_norm();
    if x_residual > RESIDUAL_TOL {
        return Err(SolverError::InvariantViolated {
            what: "probe-equation residual",
            value: x_residual,
        });
    }
    let delta_rho = phase_matched + phase_matched.adjoint();
    let trace = delta_rho.trace().norm();
    if trace > 1e-10 {
        return Err(SolverError::InvariantViolated {
            what: "zero trace of the probe correction",
            value: trace,
        });
    }
    let herm = hermiticity_error(&delta_rho);
    if herm > 1e-9 {
        return Err(SolverError::InvariantViolated {
            what: "Hermiticity of the probe correction",
            value: herm,
        });
    }
    let readout_matrix = match options.readout {
        ProbeReadout::PhaseMatched => &phase_matched,
        ProbeReadout::Total => &delta_rho,
    };
    let absorption_coefficient = leg_absorption(readout_matrix, probe.legs(), gamma_e);
    Ok(ProbeResponse {
        delta_rho,
        phase_matched,
        absorption_coefficient,
    })
}

/// Absorption coefficient of the strong L2 field read from the unperturbed state.
pub fn l2_response(rho: &DensityMatrix, l2: &FieldConfig, gamma_e: f64) -> f64 {
    leg_absorption(rho.matrix(), l2.legs(), gamma_e)
}
