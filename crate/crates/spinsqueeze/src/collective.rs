//! First- through fourth-order statistics of the collective observables
//! `J^2` and `J_y` on the channel output, in closed form.
//!
//! Collective operators are half-sums of site Paulis, so any moment of them
//! is a sum of site-word expectations weighted by how many index tuples
//! contract onto each word. For `Cov(J_i^2, J_j^2)` the index tuples of
//! `<J_i^2 J_j^2>` fall into occurrence classes (all distinct, one cross
//! coincidence, a contracted pair, two cross pairs, both pairs contracted)
//! whose counts are polynomials in `N`; same-site products are reduced by
//! `sigma^2 = 1` and `sigma_i sigma_j = i e_{ijk} sigma_k` *before* the dual
//! channel is applied, so only single-site Paulis are ever evolved
//! (contract-then-evolve).
//!
//! The covariance entries are assembled from the collected-by-power-of-`N`
//! polynomials, with the fourth-minus-squared-second differences formed first:
//! those differences shrink like `N^2 chi^4` against O(1) terms, and above
//! [`tolerances::DD_THRESHOLD_N`] particles the whole evaluation switches to
//! double-double arithmetic.
//!
//! At the `phi = 0` operating point both `Cov(J^2, J_y)` and the Jacobian
//! off-diagonals vanish identically, which is what decouples the two
//! estimation problems.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::moments::{
    build_roat_map, output_moments, roat_moments, Axis, PauliWord, SqueezingConfig,
};
use crate::numerics::{Dd, Scalar};
use crate::tolerances;
use crate::{Error, Result};

/// Exact `phi = 0` statistics of `(J^2, J_y)` plus the mean-value Jacobian.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObservableStats {
    pub mean_j2: f64,
    pub mean_jy: f64,
    pub var_j2: f64,
    pub var_jy: f64,
    /// Exactly zero at `phi = 0` by the `x`-rotation symmetry.
    pub cov_j2_jy: f64,
    /// Rows `(J^2, J_y)`, columns `(eta, phi)`; diagonal at `phi = 0`.
    pub jacobian: [[f64; 2]; 2],
    /// Clamp notices for variances in the rounding slack band.
    pub warnings: Vec<String>,
}

fn require_phi_zero(op: &'static str, params: ChannelParams) -> Result<()> {
    if params.phi() != 0.0 {
        return Err(Error::RequiresPhiZero {
            op,
            phi: params.phi(),
        });
    }
    Ok(())
}

/// `<J_y> = (N eta / 2) [cos(phi) <y> + sin(phi) <x>]`; the `<y>` moment
/// vanishes by symmetry, so only the `sin(phi)` term survives.
pub fn mean_jy(config: &SqueezingConfig, params: ChannelParams) -> f64 {
    let table = roat_moments(config);
    let x = table
        .get(&PauliWord::new(&[Axis::X]).unwrap())
        .expect("single-site word");
    let n = config.n() as f64;
    0.5 * n * params.eta() * params.phi().sin() * x
}

/// `<J^2> = 3N/4 + N(N-1)/4 [eta^2 (<xx> + <yy>) + <zz>]`.
///
/// The equatorial pair sum `<xx> + <yy>` is invariant under the phase
/// rotation, so the mean is independent of `phi` — exactly, not just at the
/// operating point.
pub fn mean_j2(config: &SqueezingConfig, params: ChannelParams) -> f64 {
    let table = roat_moments(config);
    let xx = table
        .get(&PauliWord::parse("xx").unwrap())
        .expect("pair word");
    let yy = table
        .get(&PauliWord::parse("yy").unwrap())
        .expect("pair word");
    let zz = table
        .get(&PauliWord::parse("zz").unwrap())
        .expect("pair word");
    let n = config.n() as f64;
    let eta2 = params.eta() * params.eta();
    0.75 * n + 0.25 * n * (n - 1.0) * (eta2 * (xx + yy) + zz)
}

fn var_jy_generic<S: Scalar>(n: u64, chi: S, eta: S) -> S {
    let map = build_roat_map(n, chi);
    let yy = map[&PauliWord::parse("yy").unwrap()];
    let nn = S::from_f64(n as f64);
    let quarter = S::from_f64(0.25);
    quarter * (nn + eta * eta * nn * (nn - S::one()) * yy)
}

/// `Var(J_y) = [N + eta^2 N(N-1) <yy>] / 4` at `phi = 0`.
pub fn var_jy(config: &SqueezingConfig, params: ChannelParams) -> Result<f64> {
    require_phi_zero("var_jy", params)?;
    let v = if config.n() > tolerances::DD_THRESHOLD_N {
        var_jy_generic(config.n(), Dd::new(config.chi()), Dd::new(params.eta())).to_f64()
    } else {
        var_jy_generic(config.n(), config.chi(), params.eta())
    };
    Ok(v)
}

/// Power of `eta` acquired by a word under the `phi = 0` dual channel: one
/// factor per equatorial (x or y) label.
fn eta_power(word: &PauliWord) -> u32 {
    word.axes().iter().filter(|a| **a != Axis::Z).count() as u32
}

fn pow_small<S: Scalar>(base: S, k: u32) -> S {
    let mut acc = S::one();
    for _ in 0..k {
        acc = acc * base;
    }
    acc
}

/// Occurrence-count covariance of `(J_i^2, J_j^2)` from output-frame moments.
///
/// `lookup` returns the output-frame value of a word, or zero for words
/// longer than the register (their occurrence counts vanish identically).
fn cov_pair_generic<S: Scalar>(
    n: u64,
    i: Axis,
    j: Axis,
    lookup: &impl Fn(&PauliWord) -> Result<S>,
) -> Result<S> {
    let nn = S::from_f64(n as f64);
    let n2 = nn * nn;
    let n3 = n2 * nn;
    let n4 = n3 * nn;
    let sixteenth = S::from_f64(1.0 / 16.0);
    let c = |x: f64| S::from_f64(x);

    if i == j {
        let m2 = lookup(&PauliWord::new(&[i, i]).unwrap())?;
        let m4 = lookup(&PauliWord::new(&[i, i, i, i]).unwrap())?;
        let gauss = m4 - m2 * m2;
        Ok(sixteenth
            * (n4 * gauss
                + n3 * (c(4.0) * m2 + c(2.0) * m2 * m2 - c(6.0) * m4)
                + n2 * (c(2.0) - c(12.0) * m2 - m2 * m2 + c(11.0) * m4)
                + nn * (c(-2.0) + c(8.0) * m2 - c(6.0) * m4)))
    } else {
        let k = Axis::ALL.into_iter().find(|a| *a != i && *a != j).unwrap();
        let m2i = lookup(&PauliWord::new(&[i, i]).unwrap())?;
        let m2j = lookup(&PauliWord::new(&[j, j]).unwrap())?;
        let m2k = lookup(&PauliWord::new(&[k, k]).unwrap())?;
        let m4 = lookup(&PauliWord::new(&[i, i, j, j]).unwrap())?;
        let gauss = m4 - m2i * m2j;
        Ok(sixteenth
            * (n4 * gauss
                + n3 * (c(2.0) * m2i * m2j - c(6.0) * m4)
                + n2 * (c(11.0) * m4 - c(2.0) * m2k - m2i * m2j)
                + nn * (c(2.0) * m2k - c(6.0) * m4)))
    }
}

fn lookup_from_map<'a, S: Scalar>(
    map: &'a BTreeMap<PauliWord, S>,
    eta: S,
    n: u64,
) -> impl Fn(&PauliWord) -> Result<S> + 'a {
    move |word| match map.get(word) {
        Some(v) => Ok(pow_small(eta, eta_power(word)) * *v),
        None if (word.len() as u64) > n => Ok(S::zero()),
        None => Err(Error::IncompleteTable {
            word: word.to_string(),
        }),
    }
}

/// `Cov(J_i^2, J_j^2)` at any phase, from the full output-frame table.
pub fn cov_squared_components(
    i: Axis,
    j: Axis,
    config: &SqueezingConfig,
    params: ChannelParams,
) -> Result<f64> {
    if params.phi() == 0.0 {
        return cov_pair_phi0(config, params.eta(), i, j);
    }
    let out = output_moments(&roat_moments(config), params)?;
    let n = config.n();
    let lookup = |word: &PauliWord| match out.get(word) {
        Some(v) => Ok(v),
        None if (word.len() as u64) > n => Ok(0.0),
        None => Err(Error::IncompleteTable {
            word: word.to_string(),
        }),
    };
    cov_pair_generic(n, i, j, &lookup)
}

fn cov_pair_phi0(config: &SqueezingConfig, eta: f64, i: Axis, j: Axis) -> Result<f64> {
    let n = config.n();
    if n > tolerances::DD_THRESHOLD_N {
        let map = build_roat_map(n, Dd::new(config.chi()));
        let lookup = lookup_from_map(&map, Dd::new(eta), n);
        Ok(cov_pair_generic(n, i, j, &lookup)?.to_f64())
    } else {
        let map = build_roat_map(n, config.chi());
        let lookup = lookup_from_map(&map, eta, n);
        cov_pair_generic(n, i, j, &lookup)
    }
}

fn var_j2_generic<S: Scalar>(n: u64, chi: S, eta: S) -> Result<S> {
    let map = build_roat_map(n, chi);
    let lookup = lookup_from_map(&map, eta, n);
    let mut total = S::zero();
    for i in Axis::ALL {
        for j in Axis::ALL {
            total = total + cov_pair_generic(n, i, j, &lookup)?;
        }
    }
    Ok(total)
}

/// `Var(J^2) = sum_{i,j} Cov(J_i^2, J_j^2)` at `phi = 0`.
pub fn var_j2(config: &SqueezingConfig, params: ChannelParams) -> Result<f64> {
    require_phi_zero("var_j2", params)?;
    let v = if config.n() > tolerances::DD_THRESHOLD_N {
        var_j2_generic(config.n(), Dd::new(config.chi()), Dd::new(params.eta()))?.to_f64()
    } else {
        var_j2_generic(config.n(), config.chi(), params.eta())?
    };
    Ok(v)
}

fn clamp_variance(name: &str, value: f64, scale: f64, warnings: &mut Vec<String>) -> Result<f64> {
    if value >= 0.0 {
        return Ok(value);
    }
    let slack = tolerances::NEGATIVE_VAR_SLACK * scale;
    if value >= -slack {
        warnings.push(format!(
            "{name} = {value:.3e} clamped to 0 (rounding slack {slack:.1e})"
        ));
        Ok(0.0)
    } else {
        Err(Error::NegativeVariance { value, slack })
    }
}

/// Assemble the exact `phi = 0` covariance matrix of `(J^2, J_y)` and the
/// analytic Jacobian of the observable means.
pub fn observable_covariance(
    config: &SqueezingConfig,
    params: ChannelParams,
) -> Result<ObservableStats> {
    require_phi_zero("observable_covariance", params)?;
    let n = config.n() as f64;
    let eta = params.eta();
    let table = roat_moments(config);
    let x = table
        .get(&PauliWord::new(&[Axis::X]).unwrap())
        .expect("single-site word");
    let xx = table
        .get(&PauliWord::parse("xx").unwrap())
        .expect("pair word");
    let yy = table
        .get(&PauliWord::parse("yy").unwrap())
        .expect("pair word");

    let mut warnings = Vec::new();
    let raw_var_jy = var_jy(config, params)?;
    let raw_var_j2 = var_j2(config, params)?;
    let var_jy = clamp_variance("var_jy", raw_var_jy, n / 4.0, &mut warnings)?;
    let var_j2 = clamp_variance("var_j2", raw_var_j2, n.powi(3) / 4.0, &mut warnings)?;

    // d<J^2>/deta = N(N-1)/2 eta (<xx> + <yy>);   d<J^2>/dphi = 0 exactly.
    // d<J_y>/deta = (N/2) <y> = 0 at phi = 0;     d<J_y>/dphi = (N eta / 2) <x>.
    let d11 = 0.5 * n * (n - 1.0) * eta * (xx + yy);
    let d22 = 0.5 * n * eta * x;

    Ok(ObservableStats {
        mean_j2: mean_j2(config, params),
        mean_jy: 0.0,
        var_j2,
        var_jy,
        cov_j2_jy: 0.0,
        jacobian: [[d11, 0.0], [0.0, d22]],
        warnings,
    })
}

/// Occurrence counts of the index classes of `<J_i^4>`: all distinct, one
/// contracted pair, a contracted triple, two contracted pairs, all four equal.
pub fn occurrence_counts_same_axis(n: u64) -> [u64; 5] {
    let f = |k: u64| n.saturating_sub(k);
    [
        n * f(1) * f(2) * f(3),
        6 * n * f(1) * f(2),
        4 * n * f(1),
        3 * n * f(1),
        n,
    ]
}

/// Occurrence counts of the index classes of `<J_i^2 J_j^2>`, `i != j`.
pub fn occurrence_counts_cross_axis(n: u64) -> [u64; 6] {
    let f = |k: u64| n.saturating_sub(k);
    [
        n * f(1) * f(2) * f(3),
        4 * n * f(1) * f(2),
        n * n * f(1),
        n * n * f(1),
        2 * n * f(1),
        n * n,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(eta: f64) -> ChannelParams {
        ChannelParams::new(eta, 0.0).unwrap()
    }

    #[test]
    fn occurrence_counts_partition_the_hypercube() {
        for n in 4..=12u64 {
            let same: u64 = occurrence_counts_same_axis(n).iter().sum();
            let cross: u64 = occurrence_counts_cross_axis(n).iter().sum();
            assert_eq!(same, n.pow(4), "same-axis classes at n={n}");
            assert_eq!(cross, n.pow(4), "cross-axis classes at n={n}");
        }
    }

    #[test]
    fn mean_jy_vanishes_at_phi_zero() {
        let cfg = SqueezingConfig::new(6, 0.2).unwrap();
        assert_eq!(mean_jy(&cfg, params(0.8)), 0.0);
    }

    #[test]
    fn mean_jy_product_state_value() {
        // chi = 0, N = 4, eta = 0.5, phi = pi/2: (N eta / 2) <x> = 1.
        let cfg = SqueezingConfig::new(4, 0.0).unwrap();
        let p = ChannelParams::new(0.5, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((mean_jy(&cfg, p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mean_j2_values() {
        // Unitary channel keeps the symmetric sector: <J^2> = (N/2)(N/2 + 1).
        for n in [4u64, 7, 10] {
            let cfg = SqueezingConfig::new(n, 0.37).unwrap();
            let expected = (n as f64 / 2.0) * (n as f64 / 2.0 + 1.0);
            assert!((mean_j2(&cfg, params(1.0)) - expected).abs() < 1e-10);
        }
        // chi = 0, N = 4, eta = 0.5: 3 + 3 * 0.25 = 3.75.
        let cfg = SqueezingConfig::new(4, 0.0).unwrap();
        assert!((mean_j2(&cfg, params(0.5)) - 3.75).abs() < 1e-15);
    }

    #[test]
    fn mean_j2_is_phase_independent() {
        let cfg = SqueezingConfig::new(6, 0.2).unwrap();
        let base = mean_j2(&cfg, params(0.8));
        for phi in [0.7, 2.1] {
            let p = ChannelParams::new(0.8, phi).unwrap();
            assert!((mean_j2(&cfg, p) - base).abs() <= 1e-14);
        }
    }

    #[test]
    fn var_jy_reference_cases() {
        // Uncorrelated qubits: N/4.
        let cfg = SqueezingConfig::new(8, 0.0).unwrap();
        assert!((var_jy(&cfg, params(0.6)).unwrap() - 2.0).abs() < 1e-15);
        // Full dephasing restores N/4 regardless of squeezing.
        let cfg = SqueezingConfig::new(8, 0.25).unwrap();
        assert!((var_jy(&cfg, params(0.0)).unwrap() - 2.0).abs() < 1e-15);
        // Squeezing reduces the variance below N/4.
        assert!(var_jy(&cfg, params(0.8)).unwrap() < 2.0);
    }

    #[test]
    fn var_jy_requires_phi_zero() {
        let cfg = SqueezingConfig::new(8, 0.25).unwrap();
        let p = ChannelParams::new(0.8, 0.3).unwrap();
        assert!(matches!(
            var_jy(&cfg, p),
            Err(Error::RequiresPhiZero { .. })
        ));
    }

    #[test]
    fn var_j2_vanishes_on_unitary_channel() {
        for (n, chi) in [(6u64, 0.2), (10, 0.45), (9, 0.0)] {
            let cfg = SqueezingConfig::new(n, chi).unwrap();
            let v = var_j2(&cfg, params(1.0)).unwrap();
            assert!(v.abs() <= 1e-6 * (n as f64).powi(3), "n={n} chi={chi}: {v}");
        }
    }

    #[test]
    fn var_j2_sub_linear_variance_with_squeezing() {
        // Var(J_y) < N/4 along chi = N^{-2/3}.
        for n in (20..=200u64).step_by(45) {
            let cfg = SqueezingConfig::from_scaling(n, -2.0 / 3.0).unwrap();
            let v = var_jy(&cfg, params(1.0)).unwrap();
            assert!(v < n as f64 / 4.0, "n={n}: {v}");
        }
    }

    #[test]
    fn var_j2_leading_order_at_scale() {
        // Within 10% of N^3 eta^2 (1-eta^2) / 4 at N = 10^4, chi = N^{-5/6}.
        let n = 10_000u64;
        let cfg = SqueezingConfig::from_scaling(n, -5.0 / 6.0).unwrap();
        let eta = 0.8;
        let v = var_j2(&cfg, params(eta)).unwrap();
        let leading = (n as f64).powi(3) / 4.0 * eta * eta * (1.0 - eta * eta);
        assert!((v / leading - 1.0).abs() < 0.1, "ratio {}", v / leading);
    }

    #[test]
    fn dd_path_agrees_with_f64_path() {
        // Straddle the threshold with the same physical parameters.
        let chi = 1e-5;
        let eta = 0.8;
        let a = var_j2_generic(999_983, chi, eta).unwrap();
        let b = var_j2_generic::<Dd>(999_983, Dd::new(chi), Dd::new(eta))
            .unwrap()
            .to_f64();
        assert!((a / b - 1.0).abs() < 1e-9, "f64 {a} vs dd {b}");
    }

    #[test]
    fn observable_covariance_structure() {
        let cfg = SqueezingConfig::new(8, 0.25).unwrap();
        let stats = observable_covariance(&cfg, params(0.8)).unwrap();
        assert_eq!(stats.cov_j2_jy, 0.0);
        assert_eq!(stats.mean_jy, 0.0);
        assert_eq!(stats.jacobian[0][1], 0.0);
        assert_eq!(stats.jacobian[1][0], 0.0);
        assert!(stats.var_j2 > 0.0 && stats.var_jy > 0.0);
    }

    #[test]
    fn jacobian_product_state_values() {
        // chi = 0, N = 4, eta = 0.5: D = diag(3, 1).
        let cfg = SqueezingConfig::new(4, 0.0).unwrap();
        let stats = observable_covariance(&cfg, params(0.5)).unwrap();
        assert!((stats.jacobian[0][0] - 3.0).abs() < 1e-15);
        assert!((stats.jacobian[1][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eta_one_gives_zero_var_j2_in_stats() {
        let cfg = SqueezingConfig::new(6, 0.2).unwrap();
        let stats = observable_covariance(&cfg, params(1.0)).unwrap();
        assert!(
            stats.var_j2.abs() <= 1e-6 * 6f64.powi(3),
            "{}",
            stats.var_j2
        );
    }
}
