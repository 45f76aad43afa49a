//! The four-level scheme, the three laser fields and the decay model.
//!
//! Basis order is fixed everywhere as `(g-, g+, e0, e1)`: the two ground
//! Zeeman sublevels `m_F = -1, +1` of `F = 1` and the excited hyperfine levels
//! `F' = 0` and `F' = 1`.
//!
//! The Hamiltonians live in a single rotating frame that removes the laser
//! carrier as seen by a co-propagating atom, i.e. the frame detuning is
//! `δ10 + k·v`. In that frame `e0` sits at `-(δ10 + k·v)`, `e1` at
//! `Δhf - (δ10 + k·v)`, and each ground level carries the detuning of the field
//! that drives it relative to the frame (for L2 this is its AOM offset).
//! Couplings follow the rotating-wave convention `H[g, e] = H[e, g] = -Ω/2`.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::ModelError;
use crate::superop::{
    hermiticity_error, left_multiplication, lindblad_dissipator, right_multiplication, vec_index,
    Operator, Superop,
    ZERO,
};
use crate::units::doppler_shift;

/// Hermiticity tolerance for assembled Hamiltonians, MHz.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Level {
    GroundMinus = 0,
    GroundPlus = 1,
    Excited0 = 2,
    Excited1 = 3,
}

impl Level {
    pub const ALL: [Level; 4] = [
        Level::GroundMinus,
        Level::GroundPlus,
        Level::Excited0,
        Level::Excited1,
    ];
    pub const GROUND: [Level; 2] = [Level::GroundMinus, Level::GroundPlus];
    pub const EXCITED: [Level; 2] = [Level::Excited0, Level::Excited1];

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn label(self) -> &'static str {
        match self {
            Level::GroundMinus => "g-",
            Level::GroundPlus => "g+",
            Level::Excited0 => "e0",
            Level::Excited1 => "e1",
        }
    }

    pub const fn is_ground(self) -> bool {
        matches!(self, Level::GroundMinus | Level::GroundPlus)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelScheme {
    hyperfine_splitting: f64,
}

impl LevelScheme {
    /// `hyperfine_splitting` is the e1 − e0 gap in MHz.
    pub fn new(hyperfine_splitting: f64) -> Result<Self, ModelError> {
        if !(hyperfine_splitting.is_finite() && hyperfine_splitting > 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "hyperfine_splitting",
                reason: format!("must be finite and > 0, got {hyperfine_splitting}"),
            });
        }
        Ok(Self { hyperfine_splitting })
    }

    pub fn hyperfine_splitting(&self) -> f64 {
        self.hyperfine_splitting
    }
}

impl Default for LevelScheme {
    fn default() -> Self {
        Self {
            hyperfine_splitting: 72.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FieldName {
    L1,
    L2,
    L3,
}

impl FieldName {
    /// The (ground, excited) pairs a field couples, in canonical order.
    pub const fn legs(self) -> [(Level, Level); 2] {
        match self {
            FieldName::L1 | FieldName::L3 => [
                (Level::GroundMinus, Level::Excited0),
                (Level::GroundMinus, Level::Excited1),
            ],
            FieldName::L2 => [
                (Level::GroundPlus, Level::Excited0),
                (Level::GroundPlus, Level::Excited1),
            ],
        }
    }
}

impl fmt::Display for FieldName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldName::L1 => "L1",
            FieldName::L2 => "L2",
            FieldName::L3 => "L3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Co,
    Counter,
}

impl Direction {
    pub const fn sign(self) -> f64 {
        match self {
            Direction::Co => 1.0,
            Direction::Counter => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Leg {
    pub ground: Level,
    pub excited: Level,
    pub rabi: f64,
}

/// One laser field: the legs it drives, its static frequency offset from the
/// common laser detuning, and its propagation direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldConfig {
    name: FieldName,
    legs: [Leg; 2],
    detuning_offset: f64,
    direction: Direction,
}

impl FieldConfig {
    pub fn new(
        name: FieldName,
        legs: [Leg; 2],
        detuning_offset: f64,
        direction: Direction,
    ) -> Result<Self, ModelError> {
        let expected = name.legs();
        for (leg, (g, e)) in legs.iter().zip(expected) {
            if leg.ground != g || leg.excited != e {
                return Err(ModelError::InvalidLegs {
                    field: name,
                    reason: format!(
                        "expected legs {:?}, got ({}, {})",
                        expected
                            .map(|(g, e)| format!("({g}, {e})"))
                            .join(", "),
                        leg.ground,
                        leg.excited
                    ),
                });
            }
            if !(leg.rabi.is_finite() && leg.rabi >= 0.0) {
                return Err(ModelError::InvalidLegs {
                    field: name,
                    reason: format!("Rabi frequency on ({g}, {e}) must be >= 0, got {}", leg.rabi),
                });
            }
        }
        if !detuning_offset.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "detuning_offset",
                reason: "must be finite".into(),
            });
        }
        Ok(Self {
            name,
            legs,
            detuning_offset,
            direction,
        })
    }

    fn with_rabis(
        name: FieldName,
        rabi_e0: f64,
        rabi_e1: f64,
        offset: f64,
        direction: Direction,
    ) -> Result<Self, ModelError> {
        let [(g0, e0), (g1, e1)] = name.legs();
        Self::new(
            name,
            [
                Leg { ground: g0, excited: e0, rabi: rabi_e0 },
                Leg { ground: g1, excited: e1, rabi: rabi_e1 },
            ],
            offset,
            direction,
        )
    }

    /// Strong co-propagating field on `(g-, e0)` with its off-resonant leg `(g-, e1)`.
    pub fn l1(resonant_rabi: f64, off_resonant_rabi: f64) -> Result<Self, ModelError> {
        Self::with_rabis(FieldName::L1, resonant_rabi, off_resonant_rabi, 0.0, Direction::Co)
    }

    /// Co-propagating field on the `g+` legs, shifted by the AOM offset.
    pub fn l2(rabi_e0: f64, rabi_e1: f64, aom_offset: f64) -> Result<Self, ModelError> {
        Self::with_rabis(FieldName::L2, rabi_e0, rabi_e1, aom_offset, Direction::Co)
    }

    /// Weak counter-propagating probe on the same legs as L1.
    pub fn l3(rabi_e0: f64, rabi_e1: f64) -> Result<Self, ModelError> {
        Self::with_rabis(FieldName::L3, rabi_e0, rabi_e1, 0.0, Direction::Counter)
    }

    pub fn name(&self) -> FieldName {
        self.name
    }

    pub fn legs(&self) -> &[Leg; 2] {
        &self.legs
    }

    pub fn detuning_offset(&self) -> f64 {
        self.detuning_offset
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Rabi frequency on the leg touching `excited`.
    pub fn rabi(&self, excited: Level) -> f64 {
        self.legs
            .iter()
            .find(|l| l.excited == excited)
            .map_or(0.0, |l| l.rabi)
    }

    pub fn max_rabi(&self) -> f64 {
        self.legs.iter().map(|l| l.rabi).fold(0.0, f64::max)
    }

    /// Copy of this field with the leg on `excited` set to `rabi`.
    pub fn with_leg_rabi(&self, excited: Level, rabi: f64) -> Result<Self, ModelError> {
        let mut legs = self.legs;
        for leg in legs.iter_mut().filter(|l| l.excited == excited) {
            leg.rabi = rabi;
        }
        Self::new(self.name, legs, self.detuning_offset, self.direction)
    }

    pub fn with_detuning_offset(&self, offset: f64) -> Result<Self, ModelError> {
        Self::new(self.name, self.legs, offset, self.direction)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, ModelError> {
        let mut legs = self.legs;
        for leg in legs.iter_mut() {
            leg.rabi *= factor;
        }
        Self::new(self.name, legs, self.detuning_offset, self.direction)
    }

    /// Detuning from the `e0` resonance seen by an atom moving at `velocity`.
    pub fn effective_detuning(&self, delta10: f64, velocity: f64) -> f64 {
        delta10 + self.detuning_offset + self.direction.sign() * doppler_shift(velocity)
    }

    fn expect(&self, name: FieldName) -> Result<(), ModelError> {
        if self.name == name {
            Ok(())
        } else {
            Err(ModelError::WrongField {
                expected: name,
                found: self.name,
            })
        }
    }
}

/// Spontaneous decay of the excited levels plus ground-state relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayModel {
    gamma_e: f64,
    /// `branching[k] = [to g-, to g+]` for excited level `e_k`.
    branching: [[f64; 2]; 2],
    gamma_ground: f64,
}

impl DecayModel {
    pub fn new(
        gamma_e: f64,
        branching: [[f64; 2]; 2],
        gamma_ground: f64,
    ) -> Result<Self, ModelError> {
        if !(gamma_e.is_finite() && gamma_e > 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "gamma_e",
                reason: format!("must be > 0, got {gamma_e}"),
            });
        }
        for (k, pair) in branching.iter().enumerate() {
            if pair.iter().any(|b| !(0.0..=1.0).contains(b)) {
                return Err(ModelError::InvalidParameter {
                    name: "branching",
                    reason: format!("fractions from e{k} must lie in [0, 1], got {pair:?}"),
                });
            }
            if (pair[0] + pair[1] - 1.0).abs() > 1e-12 {
                return Err(ModelError::InvalidParameter {
                    name: "branching",
                    reason: format!("fractions from e{k} must sum to 1, got {pair:?}"),
                });
            }
        }
        if !(gamma_ground.is_finite() && gamma_ground >= 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "gamma_ground",
                reason: format!("must be >= 0, got {gamma_ground}"),
            });
        }
        if gamma_ground > 0.1 * gamma_e {
            return Err(ModelError::InvalidParameter {
                name: "gamma_ground",
                reason: format!(
                    "must be much smaller than gamma_e (bound 0.1·gamma_e = {}), got {gamma_ground}",
                    0.1 * gamma_e
                ),
            });
        }
        Ok(Self {
            gamma_e,
            branching,
            gamma_ground,
        })
    }

    /// Branching `to_g_minus` / `1 - to_g_minus` from both excited levels.
    pub fn with_fraction(
        gamma_e: f64,
        to_g_minus: [f64; 2],
        gamma_ground: f64,
    ) -> Result<Self, ModelError> {
        Self::new(
            gamma_e,
            [
                [to_g_minus[0], 1.0 - to_g_minus[0]],
                [to_g_minus[1], 1.0 - to_g_minus[1]],
            ],
            gamma_ground,
        )
    }

    pub fn gamma_e(&self) -> f64 {
        self.gamma_e
    }

    pub fn branching(&self) -> [[f64; 2]; 2] {
        self.branching
    }

    pub fn gamma_ground(&self) -> f64 {
        self.gamma_ground
    }

    pub fn with_gamma_ground(&self, gamma_ground: f64) -> Result<Self, ModelError> {
        Self::new(self.gamma_e, self.branching, gamma_ground)
    }
}

impl Default for DecayModel {
    fn default() -> Self {
        Self {
            gamma_e: 6.07,
            branching: [[0.5, 0.5], [0.5, 0.5]],
            gamma_ground: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Frame {
    /// Rotating with the laser carrier seen by a co-propagating atom; `g-`
    /// carries L1's offset (zero for the default field set).
    CoPropagatingCarrier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    matrix: Operator,
    frame: Frame,
}

impl Hamiltonian {
    pub fn from_matrix(matrix: Operator) -> Result<Self, ModelError> {
        let deviation = hermiticity_error(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(ModelError::NonHermitian { deviation });
        }
        Ok(Self {
            matrix,
            frame: Frame::CoPropagatingCarrier,
        })
    }

    pub fn zero() -> Self {
        Self {
            matrix: Operator::zeros(),
            frame: Frame::CoPropagatingCarrier,
        }
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn entry(&self, row: Level, col: Level) -> Complex64 {
        self.matrix[(row.index(), col.index())]
    }
}

/// The L3 interaction `ΔH` with the probe's detuning mismatch against the frame.
///
/// `raising` holds only the `[e, g]` elements (the part that oscillates at the
/// probe frequency); `coupling = raising + raising†` is the Hermitian `ΔH`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeHamiltonian {
    coupling: Hamiltonian,
    raising: Operator,
    legs: [Leg; 2],
    detuning_mismatch: f64,
}

impl ProbeHamiltonian {
    /// Wraps an arbitrary raising operator; anything outside the `[e, g]` block is rejected.
    pub fn from_raising(
        raising: Operator,
        legs: [Leg; 2],
        detuning_mismatch: f64,
    ) -> Result<Self, ModelError> {
        let diagonal = (0..4).map(|i| raising[(i, i)].norm()).fold(0.0, f64::max);
        if diagonal > 0.0 {
            return Err(ModelError::DiagonalProbe {
                magnitude: diagonal,
            });
        }
        for r in 0..4 {
            for c in 0..4 {
                let in_block = !Level::ALL[r].is_ground() && Level::ALL[c].is_ground();
                if !in_block && r != c && raising[(r, c)] != ZERO {
                    return Err(ModelError::InvalidParameter {
                        name: "probe coupling",
                        reason: format!(
                            "element [{}, {}] lies outside the excited-ground block",
                            Level::ALL[r],
                            Level::ALL[c]
                        ),
                    });
                }
            }
        }
        let coupling = Hamiltonian::from_matrix(raising + raising.adjoint())?;
        Ok(Self {
            coupling,
            raising,
            legs,
            detuning_mismatch,
        })
    }

    pub fn coupling(&self) -> &Hamiltonian {
        &self.coupling
    }

    pub fn raising(&self) -> &Operator {
        &self.raising
    }

    pub fn legs(&self) -> &[Leg; 2] {
        &self.legs
    }

    /// Probe detuning minus the frame detuning, MHz (`-2·k·v` for a
    /// counter-propagating probe without offset).
    pub fn detuning_mismatch(&self) -> f64 {
        self.detuning_mismatch
    }

    /// Same probe with every Rabi frequency multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut legs = self.legs;
        for leg in legs.iter_mut() {
            leg.rabi *= factor;
        }
        let raising = self.raising * Complex64::new(factor, 0.0);
        Self {
            coupling: Hamiltonian {
                matrix: raising + raising.adjoint(),
                frame: self.coupling.frame,
            },
            raising,
            legs,
            detuning_mismatch: self.detuning_mismatch,
        }
    }
}

fn frame_detuning(delta10: f64, velocity: f64) -> f64 {
    delta10 + doppler_shift(velocity)
}

fn place_legs(h: &mut Operator, field: &FieldConfig) {
    for leg in field.legs() {
        let v = Complex64::new(-0.5 * leg.rabi, 0.0);
        h[(leg.ground.index(), leg.excited.index())] = v;
        h[(leg.excited.index(), leg.ground.index())] = v;
    }
}

/// Rotating-frame Hamiltonian `H0` for the strong co-propagating fields L1 and L2.
pub fn build_h0(
    scheme: &LevelScheme,
    l1: &FieldConfig,
    l2: &FieldConfig,
    delta10: f64,
    velocity: f64,
) -> Result<Hamiltonian, ModelError> {
    l1.expect(FieldName::L1)?;
    l2.expect(FieldName::L2)?;
    let frame = frame_detuning(delta10, velocity);
    let mut h = Operator::zeros();
    h[(0, 0)] = Complex64::new(l1.effective_detuning(delta10, velocity) - frame, 0.0);
    h[(1, 1)] = Complex64::new(l2.effective_detuning(delta10, velocity) - frame, 0.0);
    h[(2, 2)] = Complex64::new(-frame, 0.0);
    h[(3, 3)] = Complex64::new(scheme.hyperfine_splitting() - frame, 0.0);
    place_legs(&mut h, l1);
    place_legs(&mut h, l2);
    Hamiltonian::from_matrix(h)
}

/// Probe interaction `ΔH` for L3: couplings only, no diagonal content.
pub fn build_delta_h(
    _scheme: &LevelScheme,
    l3: &FieldConfig,
    delta10: f64,
    velocity: f64,
) -> Result<ProbeHamiltonian, ModelError> {
    l3.expect(FieldName::L3)?;
    if l3.direction() != Direction::Counter {
        return Err(ModelError::WrongDirection {
            field: FieldName::L3,
            expected: "counter",
        });
    }
    let mut raising = Operator::zeros();
    for leg in l3.legs() {
        raising[(leg.excited.index(), leg.ground.index())] = Complex64::new(-0.5 * leg.rabi, 0.0);
    }
    let mismatch = l3.effective_detuning(delta10, velocity) - frame_detuning(delta10, velocity);
    ProbeHamiltonian::from_raising(raising, *l3.legs(), mismatch)
}

/// Dissipative part of the Liouvillian.
///
/// Excited populations decay at `Γ`, optical coherences at `Γ/2` and the
/// `e0`–`e1` coherence at `Γ`; decayed population is fed into `g-`/`g+` by
/// the branching fractions. The ground populations relax toward an
/// unpolarized mixture and the ground coherence decays, both at `gamma_ground`,
/// through Lindblad terms that also add `3·gamma_ground/8` to the damping of
/// ground–excited coherences.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySuperop {
    matrix: Superop,
}

impl DecaySuperop {
    pub fn zero() -> Self {
        Self {
            matrix: Superop::zeros(),
        }
    }

    pub fn matrix(&self) -> &Superop {
        &self.matrix
    }
}

pub fn build_decay_superop(decay: &DecayModel) -> DecaySuperop {
    let gamma = decay.gamma_e();
    let mut rates = Operator::zeros();
    for e in Level::EXCITED {
        rates[(e.index(), e.index())] = Complex64::new(gamma, 0.0);
    }
    let half = Complex64::new(-0.5, 0.0);
    let mut l = (left_multiplication(&rates) + right_multiplication(&rates)) * half;

    let branching = decay.branching();
    for (k, e) in Level::EXCITED.into_iter().enumerate() {
        let ee = vec_index(e.index(), e.index());
        for (m, g) in Level::GROUND.into_iter().enumerate() {
            l[(vec_index(g.index(), g.index()), ee)] += Complex64::new(gamma * branching[k][m], 0.0);
        }
    }

    let gg = decay.gamma_ground();
    if gg > 0.0 {
        // Population exchange at gg/2 each way plus ground dephasing at gg/4.
        let (m, p) = (Level::GroundMinus.index(), Level::GroundPlus.index());
        let mut down = Operator::zeros();
        down[(m, p)] = Complex64::new((0.5 * gg).sqrt(), 0.0);
        let mut dephase = Operator::zeros();
        dephase[(m, m)] = Complex64::new((0.25 * gg).sqrt(), 0.0);
        dephase[(p, p)] = -dephase[(m, m)];
        l += lindblad_dissipator(&down) + lindblad_dissipator(&down.transpose()) + lindblad_dissipator(&dephase);
    }
    DecaySuperop { matrix: l }
}
