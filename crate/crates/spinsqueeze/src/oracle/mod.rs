//! Brute-force small-`N` ground truth for every closed form in the crate.
//!
//! Nothing here reuses the moment formulas: states are built by applying the
//! actual unitaries to dense amplitude vectors, channels act by Kraus
//! conjugation, observables are evaluated by operator application, and the
//! joint `(J^2, J_y)` measurement is an explicit simultaneous eigenbasis.

mod basis;
mod sample;
mod sld;
mod state;

pub use basis::{
    j_values, joint_distribution, joint_measurement_basis, sector_multiplicity, JSector,
    JointBasis, JointDistribution, JointOutcome,
};
pub use sample::{
    invert_moments, mc_experiment, outcome_distribution, sample_shots, trajectory_model, McResult,
    MomentEstimate, SamplePath, TrajectoryModel,
};
pub use sld::{numeric_sld, NumericSld};
pub use state::{
    build_roat_state, evolve_density, exact_moment, exact_moment_canonical, j_squared_apply,
    jx_apply, jy_apply, jz_apply, oracle_cov_squared, oracle_jacobian, oracle_observables,
    scan_optimal_rotation, DenseState, DensityMatrix, OracleObservables, PureState,
};
