//! Brute-force symmetric-logarithmic-derivative solve.
//!
//! Independent check of the closed-form Fisher matrix: build the output state
//! by applying the channel, differentiate it by central finite differences in
//! `(eta, phi)`, and solve the defining equation
//! `d rho = (rho L + L rho) / 2` as a plain 4x4 real linear system over the
//! Hermitian basis `{E00, E11, (|0><1| + h.c.), (i|0><1| + h.c.)}`.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64 as C64;

use crate::channel::{apply_channel, plus_projector, ChannelParams};
use crate::{Error, Result};

type Op2 = Matrix2<C64>;

fn hermitian_basis() -> [Op2; 4] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        Matrix2::new(one, z, z, z),
        Matrix2::new(z, z, z, one),
        Matrix2::new(z, one, one, z),
        Matrix2::new(z, i, -i, z),
    ]
}

/// Solve `rho L + L rho = 2 d_rho` for Hermitian `L`.
fn solve_sld(rho: &Op2, d_rho: &Op2) -> Result<Op2> {
    let basis = hermitian_basis();
    // Four real equations: Re(0,0), Re(1,1), Re(0,1), Im(0,1).
    let mut a = Matrix4::<f64>::zeros();
    for (col, e) in basis.iter().enumerate() {
        let m = rho * e + e * rho;
        a[(0, col)] = m[(0, 0)].re;
        a[(1, col)] = m[(1, 1)].re;
        a[(2, col)] = m[(0, 1)].re;
        a[(3, col)] = m[(0, 1)].im;
    }
    let b = Vector4::new(
        2.0 * d_rho[(0, 0)].re,
        2.0 * d_rho[(1, 1)].re,
        2.0 * d_rho[(0, 1)].re,
        2.0 * d_rho[(0, 1)].im,
    );
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::InvalidParam("singular SLD system (rank-deficient state)".into()))?;
    let mut l = Matrix2::zeros();
    for (coef, e) in x.iter().zip(&basis) {
        l += e * C64::new(*coef, 0.0);
    }
    Ok(l)
}

/// Numerically solved SLDs and Fisher matrix at the given operating point.
#[derive(Clone, Debug)]
pub struct NumericSld {
    pub sld_eta: Op2,
    pub sld_phi: Op2,
    /// `Re Tr(rho L_a L_b)` over `(eta, phi)`.
    pub f_matrix: [[f64; 2]; 2],
}

/// Finite-difference step: `(eta, phi)` derivatives of the output state are
/// smooth, so `h^2` truncation at 1e-7 meets the 1e-9 target with room for
/// the `eps/h` rounding term.
const SLD_FD_STEP: f64 = 1e-5;

pub fn numeric_sld(params: ChannelParams) -> Result<NumericSld> {
    let rho_at = |eta: f64, phi: f64| -> Result<Op2> {
        apply_channel(&plus_projector(), ChannelParams::new(eta, phi)?)
    };
    let (eta, phi) = (params.eta(), params.phi());
    if eta >= 1.0 - SLD_FD_STEP {
        return Err(Error::InvalidParam(
            "numeric SLD solve needs eta away from the unitary limit".into(),
        ));
    }
    let h = SLD_FD_STEP;
    let rho = rho_at(eta, phi)?;
    let scale = C64::new(0.5 / h, 0.0);
    let d_eta = (rho_at(eta + h, phi)? - rho_at(eta - h, phi)?) * scale;
    let d_phi = (rho_at(eta, phi + h)? - rho_at(eta, phi - h)?) * scale;

    let sld_eta = solve_sld(&rho, &d_eta)?;
    let sld_phi = solve_sld(&rho, &d_phi)?;

    let entry = |a: &Op2, b: &Op2| (rho * a * b).trace().re;
    let f_matrix = [
        [entry(&sld_eta, &sld_eta), entry(&sld_eta, &sld_phi)],
        [entry(&sld_phi, &sld_eta), entry(&sld_phi, &sld_phi)],
    ];
    Ok(NumericSld {
        sld_eta,
        sld_phi,
        f_matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::single_qubit_qfi;
    use crate::tolerances;

    #[test]
    fn numeric_solve_reproduces_closed_form_fisher() {
        for eta in [0.2, 0.5, 0.6, 0.8] {
            for phi in [0.0, 0.9] {
                let params = ChannelParams::new(eta, phi).unwrap();
                let numeric = numeric_sld(params).unwrap();
                let closed = single_qubit_qfi(params);
                for a in 0..2 {
                    for b in 0..2 {
                        assert!(
                            (numeric.f_matrix[a][b] - closed.f_matrix[a][b]).abs()
                                <= tolerances::SLD_SOLVE,
                            "eta={eta} phi={phi} entry ({a},{b}): {} vs {}",
                            numeric.f_matrix[a][b],
                            closed.f_matrix[a][b]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn reference_point_eta_06() {
        let numeric = numeric_sld(ChannelParams::new(0.6, 0.0).unwrap()).unwrap();
        assert!((numeric.f_matrix[0][0] - 1.5625).abs() <= 1e-9);
        assert!((numeric.f_matrix[1][1] - 0.36).abs() <= 1e-9);
    }

    #[test]
    fn numeric_slds_match_closed_forms_elementwise() {
        let params = ChannelParams::new(0.5, 0.3).unwrap();
        let numeric = numeric_sld(params).unwrap();
        let closed = single_qubit_qfi(params);
        let d_eta = (numeric.sld_eta - closed.sld_eta)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let d_phi = (numeric.sld_phi - closed.sld_phi)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(d_eta <= 1e-8, "L_eta deviates by {d_eta}");
        assert!(d_phi <= 1e-8, "L_phi deviates by {d_phi}");
    }

    #[test]
    fn unitary_limit_is_rejected() {
        assert!(numeric_sld(ChannelParams::new(1.0, 0.0).unwrap()).is_err());
    }
}
