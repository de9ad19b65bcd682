//! The single-qubit sensing channel and its information geometry.
//!
//! One channel use rotates the qubit by a phase `phi` about `z` and shrinks
//! the equatorial Bloch components by a dephasing factor `eta`:
//!
//! ```text
//! rho  ->  U_phi ( K0 rho K0' + K1 rho K1' ) U_phi',
//! K0 = sqrt((1+eta)/2) 1,   K1 = sqrt((1-eta)/2) sigma_z,
//! U_phi = exp(-i phi sigma_z / 2).
//! ```
//!
//! In matrix form the diagonal is untouched and the coherences pick up
//! `eta e^{-+ i phi}`. Because dephasing is symmetric about `z`, the rotation
//! and the dephasing commute; [`kraus_ops`] fixes the composed set
//! `{U_phi K0, U_phi K1}` and the validation suite checks order-invariance
//! numerically.
//!
//! The dual (Heisenberg) action on Pauli operators is the closed linear map
//!
//! ```text
//! x -> eta ( cos(phi) x - sin(phi) y )
//! y -> eta ( sin(phi) x + cos(phi) y )
//! z -> z
//! ```
//!
//! exposed by [`dual_pauli`]; evolving observables this way is what lets every
//! collective moment be written in terms of input-state moments.

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::tolerances;
use crate::{Error, Result};

pub type Op2 = Matrix2<C64>;

const TAU: f64 = std::f64::consts::TAU;

/// The pair `(eta, phi)` parameterizing one use of the sensing channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    eta: f64,
    phi: f64,
}

impl ChannelParams {
    /// `eta` must lie in `[0, 1]`; `phi` is reduced mod 2*pi.
    pub fn new(eta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
            return Err(Error::InvalidParam(format!(
                "dephasing strength eta must be in [0, 1], got {eta}"
            )));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParam(format!(
                "phase phi must be finite, got {phi}"
            )));
        }
        let mut phi = phi % TAU;
        if phi < 0.0 {
            phi += TAU;
        }
        Ok(ChannelParams { eta, phi })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Coefficients over the ordered basis `{1, sigma_x, sigma_y, sigma_z}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliCombo {
    pub coeffs: [f64; 4],
}

impl PauliCombo {
    pub fn identity_part(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficient of the given Pauli axis (x, y, z).
    pub fn axis_part(&self, axis: crate::moments::Axis) -> f64 {
        match axis {
            crate::moments::Axis::X => self.coeffs[1],
            crate::moments::Axis::Y => self.coeffs[2],
            crate::moments::Axis::Z => self.coeffs[3],
        }
    }

    /// Materialize as a 2x2 operator.
    pub fn to_matrix(&self) -> Op2 {
        let [i, x, y, z] = self.coeffs;
        let mut m = pauli_i() * C64::new(i, 0.0);
        m += pauli_x() * C64::new(x, 0.0);
        m += pauli_y() * C64::new(y, 0.0);
        m += pauli_z() * C64::new(z, 0.0);
        m
    }
}

pub fn pauli_i() -> Op2 {
    Matrix2::identity()
}

pub fn pauli_x() -> Op2 {
    Matrix2::new(
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
    )
}

pub fn pauli_y() -> Op2 {
    Matrix2::new(
        C64::new(0.0, 0.0),
        C64::new(0.0, -1.0),
        C64::new(0.0, 1.0),
        C64::new(0.0, 0.0),
    )
}

pub fn pauli_z() -> Op2 {
    Matrix2::new(
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(-1.0, 0.0),
    )
}

/// `|+><+|`, the equatorial input that maximizes both Fisher informations.
pub fn plus_projector() -> Op2 {
    Matrix2::new(
        C64::new(0.5, 0.0),
        C64::new(0.5, 0.0),
        C64::new(0.5, 0.0),
        C64::new(0.5, 0.0),
    )
}

/// The composed Kraus pair `{U_phi K0, U_phi K1}`.
///
/// Completeness `sum K'K = 1` holds to machine precision because the dephasing
/// weights sum to one algebraically.
pub fn kraus_ops(params: ChannelParams) -> [Op2; 2] {
    let ChannelParams { eta, phi } = params;
    let u = Matrix2::new(
        C64::from_polar(1.0, -phi / 2.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::from_polar(1.0, phi / 2.0),
    );
    let w0 = ((1.0 + eta) / 2.0).sqrt();
    let w1 = ((1.0 - eta) / 2.0).sqrt();
    let k0 = u * C64::new(w0, 0.0);
    let k1 = (u * pauli_z()) * C64::new(w1, 0.0);
    [k0, k1]
}

fn min_hermitian_eigenvalue(rho: &Op2) -> f64 {
    let a = rho[(0, 0)].re;
    let b = rho[(1, 1)].re;
    let c = rho[(0, 1)];
    let mid = 0.5 * (a + b);
    let rad = (0.25 * (a - b) * (a - b) + c.norm_sqr()).sqrt();
    mid - rad
}

/// Apply the channel to a single-qubit density matrix.
///
/// The action is implemented in its exact matrix form — diagonal unchanged,
/// coherences scaled by `eta e^{-+i phi}` — so the trace is preserved exactly.
/// Inputs failing Hermiticity, unit trace, or positivity are rejected.
pub fn apply_channel(rho: &Op2, params: ChannelParams) -> Result<Op2> {
    let trace_dev = (rho[(0, 0)].re + rho[(1, 1)].re - 1.0)
        .abs()
        .max(rho[(0, 0)].im.abs())
        .max(rho[(1, 1)].im.abs());
    if trace_dev > tolerances::DENSITY_TRACE_DEV {
        return Err(Error::NotDensity(format!(
            "trace deviates from 1 by {trace_dev:.3e}"
        )));
    }
    let herm_dev = (rho[(0, 1)] - rho[(1, 0)].conj()).norm();
    if herm_dev > tolerances::DENSITY_TRACE_DEV {
        return Err(Error::NotDensity(format!(
            "hermiticity violated by {herm_dev:.3e}"
        )));
    }
    let min_eig = min_hermitian_eigenvalue(rho);
    if min_eig < -tolerances::DENSITY_EIG_NEG {
        return Err(Error::NotDensity(format!(
            "negative eigenvalue {min_eig:.3e}"
        )));
    }
    let scale = C64::from_polar(params.eta, -params.phi);
    Ok(Matrix2::new(
        rho[(0, 0)],
        rho[(0, 1)] * scale,
        rho[(1, 0)] * scale.conj(),
        rho[(1, 1)],
    ))
}

/// Heisenberg-picture image of a single Pauli operator under the dual channel.
///
/// The identity component is always zero: the dual map is unital and the
/// image of a traceless operator stays traceless.
pub fn dual_pauli(axis: crate::moments::Axis, params: ChannelParams) -> PauliCombo {
    use crate::moments::Axis;
    let (eta, phi) = (params.eta, params.phi);
    let coeffs = match axis {
        Axis::X => [0.0, eta * phi.cos(), -eta * phi.sin(), 0.0],
        Axis::Y => [0.0, eta * phi.sin(), eta * phi.cos(), 0.0],
        Axis::Z => [0.0, 0.0, 0.0, 1.0],
    };
    PauliCombo { coeffs }
}

/// Single-qubit Fisher information of the channel output on a `|+>` input.
#[derive(Clone, Debug)]
pub struct QfiReport {
    /// 2x2 Fisher matrix, indices ordered (eta, phi). `diag(1/(1-eta^2), eta^2)`;
    /// the eta entry is flagged infinite at `eta = 1`.
    pub f_matrix: [[f64; 2]; 2],
    /// Symmetric logarithmic derivative for eta, rotated to the operating phase.
    pub sld_eta: Op2,
    /// Symmetric logarithmic derivative for phi, rotated to the operating phase.
    pub sld_phi: Op2,
    /// `Im Tr(rho_out [L_eta, L_phi])`. The trace of a commutator of Hermitian
    /// operators against a Hermitian state is purely imaginary; its vanishing
    /// is the saturability condition for the matrix bound.
    pub commutator_trace: f64,
    /// Set when `eta = 1` makes the eta information divergent.
    pub eta_divergent: bool,
}

/// Closed-form QFI matrix and SLD operators at the operating point `params`.
///
/// The closed forms are anchored at `phi = 0` and conjugated by the phase
/// rotation for general `phi`; the commutator trace is evaluated numerically
/// on the actual output state.
pub fn single_qubit_qfi(params: ChannelParams) -> QfiReport {
    let (eta, phi) = (params.eta, params.phi);
    let eta_divergent = eta == 1.0;
    let f_eta = if eta_divergent {
        f64::INFINITY
    } else {
        1.0 / (1.0 - eta * eta)
    };
    let f_matrix = [[f_eta, 0.0], [0.0, eta * eta]];

    // L_eta(phi) = (cos(phi) x + sin(phi) y - eta) / (1 - eta^2)
    // L_phi(phi) = eta (cos(phi) y - sin(phi) x)
    let denom = 1.0 - eta * eta;
    let sld_eta = if eta_divergent {
        Matrix2::zeros()
    } else {
        (pauli_x() * C64::new(phi.cos() / denom, 0.0)
            + pauli_y() * C64::new(phi.sin() / denom, 0.0)
            + pauli_i() * C64::new(-eta / denom, 0.0)) as Op2
    };
    let sld_phi =
        pauli_y() * C64::new(eta * phi.cos(), 0.0) - pauli_x() * C64::new(eta * phi.sin(), 0.0);

    let rho_out = apply_channel(&plus_projector(), params).expect("|+><+| is a density matrix");
    let comm = sld_eta * sld_phi - sld_phi * sld_eta;
    let commutator_trace = (rho_out * comm).trace().im;

    QfiReport {
        f_matrix,
        sld_eta,
        sld_phi,
        commutator_trace,
        eta_divergent,
    }
}
