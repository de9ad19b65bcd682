//! Numeric policy for the whole crate.
//!
//! Every tolerance used by library checks, the validation suite, and the
//! acceptance tests is defined here once, with its basis, so no module invents
//! an ad-hoc threshold.

/// Kraus completeness `sum K'K = 1`. The sum is algebraically exact
/// (`(1+eta)/2 + (1-eta)/2`), so only a couple of roundings remain.
pub const KRAUS_COMPLETENESS: f64 = 1e-15;

/// Dual-map coefficients vs conjugation by explicit Kraus operators.
pub const DUAL_VS_KRAUS: f64 = 1e-14;

/// Elementwise action of the channel on a density matrix vs the scaled-matrix
/// form (diagonal untouched, coherences scaled by `eta e^{-+i phi}`).
pub const CHANNEL_MATRIX: f64 = 1e-14;

/// Dephase-then-rotate vs rotate-then-dephase on oracle states.
pub const CHANNEL_ORDER: f64 = 1e-13;

/// Trace deviation above which an input is rejected as not a density matrix.
pub const DENSITY_TRACE_DEV: f64 = 1e-12;

/// Eigenvalues below `-DENSITY_EIG_NEG` mark an input as not positive
/// semidefinite; anything in `[-DENSITY_EIG_NEG, 0)` is rounding.
pub const DENSITY_EIG_NEG: f64 = 1e-12;

/// Numeric symmetric-logarithmic-derivative solve vs the closed forms.
/// Limited by the finite-difference derivative of the output state.
pub const SLD_SOLVE: f64 = 1e-9;

/// `Tr(rho [L_eta, L_phi])` vanishes on equatorial inputs; this bounds the
/// numeric residual.
pub const COMMUTATOR_TRACE: f64 = 1e-12;

/// Absolute error between moment closed forms and the brute-force oracle.
pub const ORACLE_MOMENT_ABS: f64 = 1e-10;

/// Tighter per-operation moment checks at small `N` (values are O(1)).
pub const MOMENT_MATCH: f64 = 1e-12;

/// Moments that vanish by symmetry (odd y+z count, cross covariances).
pub const STRUCTURAL_ZERO: f64 = 1e-12;

/// Relative error of collective covariances vs the oracle.
pub const ORACLE_COV_REL: f64 = 1e-10;

/// Analytic Jacobian vs central finite differences of oracle means.
pub const JACOBIAN_FD: f64 = 1e-6;

/// Central finite-difference step for oracle derivatives: balances O(h^2)
/// truncation against O(eps/h) rounding at f64 precision.
pub const FD_STEP: f64 = 1e-5;

/// Rotation-angle formula vs brute-force Var(J_y) minimization.
pub const EPSILON_SCAN: f64 = 1e-6;

/// Variances in `[-NEGATIVE_VAR_SLACK * scale, 0)` clamp to zero with a
/// warning; anything more negative is a hard error (a logic bug, not rounding).
pub const NEGATIVE_VAR_SLACK: f64 = 1e-9;

/// Emitted normalized variances may not fall below `1 - BOUND_SLACK`.
pub const BOUND_SLACK: f64 = 1e-9;

/// Probabilities in `[-PROB_NEG, 0)` clamp to zero.
pub const PROB_NEG: f64 = 1e-12;

/// Joint-distribution probabilities must sum to one within this.
pub const PROB_SUM: f64 = 1e-10;

/// Off-block residual above which the joint eigenbasis construction fails.
pub const BASIS_RESIDUAL: f64 = 1e-9;

/// Clustering window for numeric J^2 eigenvalues around exact j(j+1).
pub const J2_CLUSTER: f64 = 1e-8;

/// Snap window for J_y eigenvalues to the exact ladder {-j, ..., j}.
pub const JY_SNAP: f64 = 1e-10;

/// Relative agreement of the compensated power path with 256-bit references.
pub const STABILITY_REL: f64 = 1e-12;

/// Above this particle number the collective statistics switch to the
/// double-double accumulation path: fourth-minus-squared-second moment
/// differences shrink like N^{-4/3} against O(1) terms.
pub const DD_THRESHOLD_N: u64 = 1_000_000;

/// Density-matrix oracle path: memory is (2^n)^2 complex entries.
pub const MAX_DENSITY_QUBITS: u64 = 12;

/// Pure-state / trajectory oracle path.
pub const MAX_PURE_QUBITS: u64 = 16;
