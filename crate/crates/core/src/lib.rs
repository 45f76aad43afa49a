//! Steady-state and linear-response model of a four-level N system driven by
//! two strong co-propagating fields (L1, L2) and a weak counter-propagating
//! probe (L3), with Doppler averaging and spectrum sweeps.

pub mod doppler;
pub mod error;
pub mod liouville;
pub mod model;
pub mod probe;
pub mod scan;
pub mod superop;
pub mod system;
pub mod units;

pub use error::{ModelError, PointError, SolverError};
pub use liouville::{assemble_liouvillian, steady_state, time_evolve, DensityMatrix, Liouvillian};
pub use model::{
    build_decay_superop, build_delta_h, build_h0, DecayModel, Direction, FieldConfig, FieldName,
    Hamiltonian, Level, LevelScheme, ProbeHamiltonian,
};
pub use probe::{l2_response, solve_delta_rho, ProbeOptions, ProbeReadout, ProbeResponse};
pub use scan::{
    contrast_curve, extract_feature, run_scan, threshold_detect, ContrastCurve, Feature, Spectrum,
};
pub use system::{Axis, DopplerConfig, ScanConfig, SystemConfig, ValidationError};
