//! Error-propagation estimator covariance and its comparison with the
//! fundamental bounds.
//!
//! With the measured means `(<J^2>, <J_y>)` inverted locally around the true
//! parameters, the estimator covariance is
//!
//! ```text
//! Cov(eta~, phi~) = [ D' Cov(J^2, J_y)^{-1} D ]^{-1}
//! ```
//!
//! where `D` is the Jacobian of the means with respect to `(eta, phi)`. At the
//! operating point `phi = 0` everything is diagonal, so the two variances are
//! just `Var(J^2) / (d<J^2>/deta)^2` and `Var(J_y) / (d<J_y>/dphi)^2`.
//!
//! Plotted curves are normalized so the best covariance allowed for any
//! strategy is the horizontal line 1:
//!
//! ```text
//! norm_var_eta = N Var(eta~) / (1 - eta^2)
//! norm_var_phi = N eta^2 Var(phi~) / (1 - eta^2)
//! ```
//!
//! With the squeezing scaled as `chi = N^p`, the corrections to both
//! normalized variances are power laws: `N^{3+4p}` for `eta~` and
//! `N^{max(1+2p, -2-2p)}` for `phi~`. Only `p` strictly between -1 and -3/4
//! sends both to zero, and `p = -5/6` balances them.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::collective::{observable_covariance, ObservableStats};
use crate::moments::SqueezingConfig;
use crate::{Error, Result};

/// Scale-aware 2x2 inversion guard: the determinant must carry at least one
/// bit of the matrix scale.
const DET_GUARD: f64 = 1e-300;

fn invert_2x2(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m[0][0]
        .abs()
        .max(m[1][1].abs())
        .max(m[0][1].abs())
        .max(m[1][0].abs());
    if det.abs() <= DET_GUARD * scale.max(1.0) * scale.max(1.0) {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

/// Estimator covariance with flagged parameter edges.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimatorCovariance {
    /// `[[Var(eta~), Cov], [Cov, Var(phi~)]]`; diagonal at `phi = 0`.
    pub matrix: [[f64; 2]; 2],
    /// `eta = 1` makes `Var(J^2)` vanish; `Var(eta~) = 0` is the exact limit.
    pub eta_noiseless_limit: bool,
}

/// `[D' Cov(J^2,J_y)^{-1} D]^{-1}` from the exact `phi = 0` statistics.
pub fn estimator_covariance(
    config: &SqueezingConfig,
    params: ChannelParams,
) -> Result<EstimatorCovariance> {
    let stats = observable_covariance(config, params)?;
    estimator_covariance_from_stats(&stats, params)
}

/// Same propagation from precomputed statistics (used by the oracle's
/// Monte-Carlo prediction with finite-difference Jacobians).
pub fn estimator_covariance_from_stats(
    stats: &ObservableStats,
    params: ChannelParams,
) -> Result<EstimatorCovariance> {
    if params.eta() == 0.0 {
        return Err(Error::UnidentifiablePhase);
    }
    let d = stats.jacobian;
    let sigma = [
        [stats.var_j2, stats.cov_j2_jy],
        [stats.cov_j2_jy, stats.var_jy],
    ];

    if params.eta() == 1.0 {
        // Var(J^2) = 0 exactly: the observable covariance is singular, but the
        // limit of the propagated variance is 0 for eta and the plain ratio
        // for phi.
        let var_phi = stats.var_jy / (d[1][1] * d[1][1]);
        return Ok(EstimatorCovariance {
            matrix: [[0.0, 0.0], [0.0, var_phi]],
            eta_noiseless_limit: true,
        });
    }

    let sigma_inv = invert_2x2(sigma).ok_or_else(|| {
        Error::InvalidParam(format!(
            "observable covariance is singular: var_j2={}, var_jy={}",
            stats.var_j2, stats.var_jy
        ))
    })?;
    // D' Sigma^{-1} D
    let mut m = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut acc = 0.0;
            for r in 0..2 {
                for s in 0..2 {
                    acc += d[r][a] * sigma_inv[r][s] * d[s][b];
                }
            }
            m[a][b] = acc;
        }
    }
    let matrix = invert_2x2(m).ok_or(Error::UnidentifiablePhase)?;
    Ok(EstimatorCovariance {
        matrix,
        eta_noiseless_limit: false,
    })
}

/// Best covariance allowed for any strategy using `n` channel uses:
/// `diag(1 - eta^2, (1 - eta^2)/eta^2) / n`. The phase entry diverges at
/// `eta = 0` (encoded as infinity).
pub fn fundamental_bound(n: u64, eta: f64) -> [[f64; 2]; 2] {
    let n = n as f64;
    let phi_entry = if eta == 0.0 {
        f64::INFINITY
    } else {
        (1.0 - eta * eta) / (eta * eta) / n
    };
    [[(1.0 - eta * eta) / n, 0.0], [0.0, phi_entry]]
}

/// Asymptotic covariance of the best product-state strategy:
/// `diag(1 - eta^2, 1/eta^2) / n` — the phase entry is a factor
/// `1/(1 - eta^2)` above the fundamental bound.
pub fn product_bound(n: u64, eta: f64) -> [[f64; 2]; 2] {
    let n = n as f64;
    let phi_entry = if eta == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (eta * eta) / n
    };
    [[(1.0 - eta * eta) / n, 0.0], [0.0, phi_entry]]
}

/// Normalized variances: `(N Var(eta~)/(1-eta^2), N eta^2 Var(phi~)/(1-eta^2))`.
pub fn normalized_variances(n: u64, eta: f64, est: &EstimatorCovariance) -> (f64, f64) {
    let n = n as f64;
    let denom = 1.0 - eta * eta;
    (
        n * est.matrix[0][0] / denom,
        n * eta * eta * est.matrix[1][1] / denom,
    )
}

/// One sweep grid point. `p = -inf` is the sentinel for `chi = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: u64,
    pub p: f64,
    pub chi: f64,
    pub eta: f64,
    pub norm_var_eta: f64,
    pub norm_var_phi: f64,
}

/// Log-spaced integer grid from `n_min` to `n_max` inclusive, deduplicated.
pub fn log_spaced_grid(n_min: u64, n_max: u64, points: usize) -> Vec<u64> {
    assert!(n_min >= 2 && n_max >= n_min && points >= 2);
    let (a, b) = ((n_min as f64).ln(), (n_max as f64).ln());
    let mut grid: Vec<u64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .collect();
    grid.dedup();
    grid
}

/// Evaluate the protocol over a grid of scaling exponents and system sizes.
/// Records are sorted by `(p, n)` so parallel evaluation cannot change bytes.
pub fn sweep(eta: f64, p_list: &[f64], n_grid: &[u64]) -> Result<Vec<SweepRecord>> {
    let mut records = Vec::with_capacity(p_list.len() * n_grid.len());
    for &p in p_list {
        for &n in n_grid {
            let config = SqueezingConfig::from_scaling(n, p)?;
            let params = ChannelParams::new(eta, 0.0)?;
            let est = estimator_covariance(&config, params)?;
            let (norm_var_eta, norm_var_phi) = normalized_variances(n, eta, &est);
            records.push(SweepRecord {
                n,
                p,
                chi: config.chi(),
                eta,
                norm_var_eta,
                norm_var_phi,
            });
        }
    }
    records.sort_by(|a, b| a.p.partial_cmp(&b.p).unwrap().then(a.n.cmp(&b.n)));
    Ok(records)
}

/// Least-squares slope of `ln(y)` against `ln(x)`.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let k = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (k * sxy - sx * sy) / (k * sxx - sx * sx)
}

/// Measured vs predicted correction-decay exponents along `chi = N^p`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrectionFit {
    pub eta: f64,
    pub p: f64,
    /// Fitted slope of `|norm_var_eta - 1|` vs `N`; prediction `3 + 4p`.
    pub fitted_eta_slope: f64,
    pub predicted_eta_slope: f64,
    /// Fitted slope of `|norm_var_phi - 1|` vs `N`; prediction `max(1+2p, -2-2p)`.
    pub fitted_phi_slope: f64,
    pub predicted_phi_slope: f64,
    /// Fitted slope of `|Var(J_y)/(N(1-eta^2)/4) - 1|`; prediction
    /// `max(2+4p, -2-2p)`, balanced at `p = -2/3`.
    pub fitted_var_jy_slope: f64,
    pub predicted_var_jy_slope: f64,
}

/// Fit the correction-order power laws over `n_window` (log-spaced, large `N`).
///
/// Admissible exponents lie strictly between -1 and -1/2, where the moment
/// expansions converge.
pub fn expansion_diagnostics(eta: f64, p: f64, n_window: &[u64]) -> Result<CorrectionFit> {
    if p <= -1.0 || p >= -0.5 {
        return Err(Error::InvalidParam(format!(
            "correction fits need p in (-1, -1/2), got {p}"
        )));
    }
    let params = ChannelParams::new(eta, 0.0)?;
    let mut eta_pts = Vec::new();
    let mut phi_pts = Vec::new();
    let mut jy_pts = Vec::new();
    for &n in n_window {
        let config = SqueezingConfig::from_scaling(n, p)?;
        let est = estimator_covariance(&config, params)?;
        let (ne, np) = normalized_variances(n, eta, &est);
        eta_pts.push((n as f64, (ne - 1.0).abs()));
        phi_pts.push((n as f64, (np - 1.0).abs()));
        let vjy = crate::collective::var_jy(&config, params)?;
        let jy_ref = n as f64 * (1.0 - eta * eta) / 4.0;
        jy_pts.push((n as f64, (vjy / jy_ref - 1.0).abs()));
    }
    Ok(CorrectionFit {
        eta,
        p,
        fitted_eta_slope: log_log_slope(&eta_pts),
        predicted_eta_slope: 3.0 + 4.0 * p,
        fitted_phi_slope: log_log_slope(&phi_pts),
        predicted_phi_slope: (1.0 + 2.0 * p).max(-2.0 - 2.0 * p),
        fitted_var_jy_slope: log_log_slope(&jy_pts),
        predicted_var_jy_slope: (2.0 + 4.0 * p).max(-2.0 - 2.0 * p),
    })
}

/// Full single-point report: statistics, estimator covariance, bounds, and
/// normalized values, with parameter-edge flags.
#[derive(Clone, Debug, Serialize)]
pub struct ProtocolReport {
    pub version: String,
    pub n: u64,
    pub chi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub epsilon: f64,
    pub eta: f64,
    pub phi: f64,
    pub stats: ObservableStats,
    /// `[[Var(eta~), 0], [0, Var(phi~)]]`.
    pub est_cov: [[f64; 2]; 2],
    pub bound_general: [[f64; 2]; 2],
    pub bound_product: [[f64; 2]; 2],
    /// `(N Var(eta~)/(1-eta^2), N eta^2 Var(phi~)/(1-eta^2))`; at `eta = 1`
    /// both are 0/0 and reported as null.
    pub norm_var_eta: Option<f64>,
    pub norm_var_phi: Option<f64>,
    /// Names the normalization so plots are self-describing.
    pub normalization: String,
    pub flags: Vec<String>,
}

pub fn protocol_report(config: &SqueezingConfig, eta: f64) -> Result<ProtocolReport> {
    let params = ChannelParams::new(eta, 0.0)?;
    let mut flags = Vec::new();

    let stats = observable_covariance(config, params)?;
    let est = if eta == 0.0 {
        flags.push("eta_zero_unidentifiable".into());
        EstimatorCovariance {
            matrix: [[f64::INFINITY, 0.0], [0.0, f64::INFINITY]],
            eta_noiseless_limit: false,
        }
    } else {
        estimator_covariance(config, params)?
    };
    if est.eta_noiseless_limit {
        flags.push("eta_noiseless_limit".into());
    }
    flags.extend(stats.warnings.iter().cloned());

    let (norm_eta, norm_phi) = normalized_variances(config.n(), eta, &est);
    let wrap = |x: f64| if x.is_finite() { Some(x) } else { None };

    Ok(ProtocolReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        n: config.n(),
        chi: config.chi(),
        p: config.scaling_exponent(),
        epsilon: config.epsilon(),
        eta,
        phi: 0.0,
        est_cov: est.matrix,
        bound_general: fundamental_bound(config.n(), eta),
        bound_product: product_bound(config.n(), eta),
        norm_var_eta: wrap(norm_eta),
        norm_var_phi: wrap(norm_phi),
        normalization:
            "norm_var_eta = N Var(eta)/(1-eta^2); norm_var_phi = N eta^2 Var(phi)/(1-eta^2); \
             the fundamental bound is the line 1"
                .into(),
        stats,
        flags,
    })
}
