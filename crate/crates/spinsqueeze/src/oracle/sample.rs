//! Seeded measurement sampling and the method-of-moments estimation
//! experiment.
//!
//! Two exact routes produce the joint `(J^2, J_y)` outcome distribution:
//!
//! * the density path (`n <= 12`): evolve the dense density matrix and
//!   project onto the joint eigenbasis;
//! * the trajectory path (`n <= 16`): unravel the dephasing into per-site
//!   `sigma_z` flips with probability `(1-eta)/2`. Outcome statistics depend
//!   on a flip mask only through its weight, so the output distribution is a
//!   binomial mixture over `n+1` pure-state distributions, each extracted
//!   with polynomial spectral projectors — no eigendecomposition at all.
//!
//! Sampling is a cumulative search over the outcome table with a named,
//! counter-based generator, so experiments are bit-reproducible.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::collective;
use crate::estimation::estimator_covariance_from_stats;
use crate::moments::{roat_moments, Axis, PauliWord, SqueezingConfig};
use crate::oracle::basis::{
    j_values, joint_distribution, joint_measurement_basis, JointDistribution, JointOutcome,
};
use crate::oracle::state::{build_roat_state, evolve_density, j_squared_apply, oracle_jacobian};
use crate::rng::{SplitMix64, RNG_ALGORITHM};
use crate::tolerances;
use crate::{Error, Result};

/// Draw i.i.d. `(j, m)` outcomes from a distribution; deterministic per seed.
pub fn sample_shots(dist: &JointDistribution, m_shots: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = SplitMix64::new(seed);
    sample_shots_with(dist, m_shots, &mut rng)
}

fn sample_shots_with(
    dist: &JointDistribution,
    m_shots: usize,
    rng: &mut SplitMix64,
) -> Vec<(f64, f64)> {
    let outcomes = dist.outcomes();
    let mut cdf = Vec::with_capacity(outcomes.len());
    let mut acc = 0.0;
    for o in outcomes {
        acc += o.probability;
        cdf.push(acc);
    }
    (0..m_shots)
        .map(|_| {
            let u = rng.next_f64() * acc;
            let idx = cdf.partition_point(|&c| c <= u).min(outcomes.len() - 1);
            (outcomes[idx].j, outcomes[idx].m)
        })
        .collect()
}

/* Trajectory path ************************************************************/

/// Per-flip-weight conditional distributions plus the binomial weights.
#[derive(Clone, Debug)]
pub struct TrajectoryModel {
    pub weights: Vec<f64>,
    pub conditionals: Vec<JointDistribution>,
}

impl TrajectoryModel {
    /// The exact output distribution: the binomial mixture.
    pub fn mixture(&self) -> Result<JointDistribution> {
        let parts: Vec<(f64, &JointDistribution)> = self
            .weights
            .iter()
            .copied()
            .zip(self.conditionals.iter())
            .collect();
        JointDistribution::mixture(&parts)
    }
}

fn binomial_coefficient(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Joint distribution of a pure state by spectral projection.
///
/// The state is rotated so the `J_y` measurement becomes a magnetization
/// readout, then each `j` component is isolated by the Lagrange polynomial in
/// `J^2` that is 1 on `j(j+1)` and 0 on every other eigenvalue.
fn pure_state_distribution(n: u64, amps: &[C64]) -> Result<JointDistribution> {
    // J_y = R J_z R' with R = exp(i (pi/2) J_x); measure J_z on R' psi.
    let mut work = amps.to_vec();
    rotate_y_to_z(n, &mut work);

    let jvals = j_values(n);
    let mut outcomes = Vec::new();
    for (pos, &j) in jvals.iter().enumerate() {
        // chi_j = prod_{q != j} (J^2 - lambda_q) / (lambda_j - lambda_q) psi
        let lambda_j = j * (j + 1.0);
        let mut proj = work.clone();
        for (q, &jq) in jvals.iter().enumerate() {
            if q == pos {
                continue;
            }
            let lambda_q = jq * (jq + 1.0);
            let applied = j_squared_apply(n, &proj);
            let scale = 1.0 / (lambda_j - lambda_q);
            for (p, a) in proj.iter_mut().zip(&applied) {
                *p = (a - *p * C64::new(lambda_q, 0.0)) * C64::new(scale, 0.0);
            }
        }
        // p(j, m) = sum of |amplitudes|^2 over the magnetization-m sector.
        let mut by_m = std::collections::BTreeMap::<i64, f64>::new();
        for (b, a) in proj.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let m2 = n as i64 - 2 * b.count_ones() as i64; // 2 m_z
            *by_m.entry(m2).or_default() += p;
        }
        for (m2, p) in by_m {
            let m = m2 as f64 / 2.0;
            if m.abs() > j + 0.25 {
                // Projector rounding can deposit ~1e-28 of weight outside the
                // ladder; anything bigger is a real failure.
                if p > tolerances::PROB_NEG {
                    return Err(Error::InvalidParam(format!(
                        "spectral projection leaked {p:.3e} outside (j={j}, m={m})"
                    )));
                }
                continue;
            }
            outcomes.push(JointOutcome {
                j,
                m,
                probability: p,
            });
        }
    }
    JointDistribution::new(outcomes)
}

/// Site-wise rotation taking `J_y` to `J_z`: apply `exp(-i (pi/2) J_x)`.
fn rotate_y_to_z(n: u64, amps: &mut [C64]) {
    let theta = -std::f64::consts::FRAC_PI_2;
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new(0.0, (theta / 2.0).sin());
    for site in 0..n {
        let bit = 1usize << site;
        for b in 0..amps.len() {
            if b & bit == 0 {
                let lo = amps[b];
                let hi = amps[b | bit];
                amps[b] = c * lo + s * hi;
                amps[b | bit] = s * lo + c * hi;
            }
        }
    }
}

/// Build the trajectory model for `n <= 16` qubits.
///
/// Outcome statistics of a flipped probe depend only on the number of flipped
/// sites (everything else is permutation invariant), so one canonical mask
/// per weight suffices.
pub fn trajectory_model(n: u64, chi: f64, params: ChannelParams) -> Result<TrajectoryModel> {
    if n > tolerances::MAX_PURE_QUBITS {
        return Err(Error::TooLarge {
            what: "trajectory oracle",
            n,
            limit: tolerances::MAX_PURE_QUBITS,
        });
    }
    let base = build_roat_state(n, chi)?;
    let q = (1.0 - params.eta()) / 2.0;
    let mut weights = Vec::with_capacity(n as usize + 1);
    let mut conditionals = Vec::with_capacity(n as usize + 1);
    for w in 0..=n {
        weights
            .push(binomial_coefficient(n, w) * q.powi(w as i32) * (1.0 - q).powi((n - w) as i32));
        let mut state = base.clone();
        for site in 0..w {
            state.apply_z(site);
        }
        state.apply_phase_rotation(params.phi());
        conditionals.push(pure_state_distribution(n, state.amplitudes())?);
    }
    Ok(TrajectoryModel {
        weights,
        conditionals,
    })
}

/* Method-of-moments inversion ************************************************/

/// Estimate of `(eta, phi)` from empirical means, with clamp flags instead of
/// errors: statistical outcomes are data.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub eta_hat: f64,
    pub phi_hat: f64,
    /// The squared-eta root fell outside `[0, 1]` and was clamped.
    pub eta_clamped: bool,
    /// The arcsine argument fell outside `[-1, 1]` and was clamped.
    pub phi_clamped: bool,
    /// The eta root was negative (estimation failure; `eta_hat` clamps to 0).
    pub failed: bool,
}

/// Invert the mean maps: eta from the quadratic dependence of `<J^2>`, then
/// phi from `<J_y>` at that eta.
pub fn invert_moments(
    mean_j2_emp: f64,
    mean_jy_emp: f64,
    config: &SqueezingConfig,
) -> MomentEstimate {
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
    let zz = table
        .get(&PauliWord::parse("zz").unwrap())
        .expect("pair word");
    let n = config.n() as f64;

    // <J^2> = 3N/4 + N(N-1)/4 [eta^2 (xx + yy) + zz]
    let mut est = MomentEstimate::default();
    let eta_sq = ((mean_j2_emp - 0.75 * n) * 4.0 / (n * (n - 1.0)) - zz) / (xx + yy);
    let eta_hat = if eta_sq < 0.0 {
        est.failed = true;
        est.eta_clamped = true;
        0.0
    } else if eta_sq > 1.0 {
        est.eta_clamped = true;
        1.0
    } else {
        eta_sq.sqrt()
    };
    est.eta_hat = eta_hat;

    // <J_y> = (N eta / 2) sin(phi) <x>
    let denom = 0.5 * n * eta_hat * x;
    let arg = if denom == 0.0 {
        est.failed = true;
        0.0
    } else {
        2.0 * mean_jy_emp / (n * eta_hat * x)
    };
    let arg = if arg.abs() > 1.0 {
        est.phi_clamped = true;
        arg.clamp(-1.0, 1.0)
    } else {
        arg
    };
    est.phi_hat = arg.asin();
    est
}

/* Monte-Carlo experiment *****************************************************/

/// Which oracle route generated the outcome distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplePath {
    /// Choose density for `n <= 12`, trajectory above.
    Auto,
    Density,
    Trajectory,
}

/// Result of repeated method-of-moments experiments against the
/// error-propagation prediction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct McResult {
    pub n: u64,
    pub chi: f64,
    pub eta: f64,
    pub phi: f64,
    pub shots_per_experiment: usize,
    pub experiments: usize,
    /// Sample covariance of `(eta_hat, phi_hat)` over the experiments.
    pub empirical_cov: [[f64; 2]; 2],
    /// `[D' Sigma(J^2,J_y)^{-1} D]^{-1} / M` from oracle-exact observable
    /// statistics and a finite-difference Jacobian at the true parameters.
    pub predicted_cov: [[f64; 2]; 2],
    /// Mean estimate minus truth.
    pub bias: [f64; 2],
    pub seed: u64,
    pub rng_algorithm: String,
    pub path: String,
    /// Experiments whose inversion failed or clamped.
    pub estimation_failures: usize,
    pub clamped_estimates: usize,
}

/// Exact outcome distribution for the configured path.
pub fn outcome_distribution(
    n: u64,
    chi: f64,
    params: ChannelParams,
    path: SamplePath,
) -> Result<(JointDistribution, String)> {
    let use_density = match path {
        SamplePath::Density => true,
        SamplePath::Trajectory => false,
        SamplePath::Auto => n <= tolerances::MAX_DENSITY_QUBITS,
    };
    if use_density {
        let state = build_roat_state(n, chi)?;
        let rho = evolve_density(&state, params)?;
        let basis = joint_measurement_basis(n)?;
        Ok((joint_distribution(&rho, &basis)?, "density".into()))
    } else {
        Ok((
            trajectory_model(n, chi, params)?.mixture()?,
            "trajectory".into(),
        ))
    }
}

/// Run `repetitions` experiments of `m_shots` each and compare the empirical
/// estimator covariance with the error-propagation prediction.
pub fn mc_experiment(
    n: u64,
    chi: f64,
    params: ChannelParams,
    m_shots: usize,
    repetitions: usize,
    seed: u64,
    path: SamplePath,
) -> Result<McResult> {
    if m_shots == 0 || repetitions < 2 {
        return Err(Error::InvalidParam(
            "need at least one shot and two repetitions".into(),
        ));
    }
    let config = SqueezingConfig::new(n, chi)?;
    let (dist, path_name) = outcome_distribution(n, chi, params, path)?;

    // Prediction: oracle observable covariance + finite-difference Jacobian.
    let (stats, jac) = if path_name == "density" {
        let state = build_roat_state(n, chi)?;
        let rho = evolve_density(&state, params)?;
        let obs = crate::oracle::state::oracle_observables(&rho);
        (obs, oracle_jacobian(&state, params)?)
    } else {
        let obs = crate::oracle::state::OracleObservables {
            mean_j2: dist.mean_j2(),
            mean_jy: dist.mean_jy(),
            var_j2: dist.var_j2(),
            var_jy: dist.var_jy(),
            cov_j2_jy: dist.cov_j2_jy(),
        };
        let h = tolerances::FD_STEP;
        let mean_at = |eta: f64, phi: f64| -> Result<(f64, f64)> {
            let d = trajectory_model(n, chi, ChannelParams::new(eta, phi)?)?.mixture()?;
            Ok((d.mean_j2(), d.mean_jy()))
        };
        let (eta, phi) = (params.eta(), params.phi());
        let (ep, em) = ((eta + h).min(1.0), (eta - h).max(0.0));
        let (j2_ep, jy_ep) = mean_at(ep, phi)?;
        let (j2_em, jy_em) = mean_at(em, phi)?;
        let (j2_pp, jy_pp) = mean_at(eta, phi + h)?;
        let (j2_pm, jy_pm) = mean_at(eta, phi - h)?;
        let jac = [
            [(j2_ep - j2_em) / (ep - em), (j2_pp - j2_pm) / (2.0 * h)],
            [(jy_ep - jy_em) / (ep - em), (jy_pp - jy_pm) / (2.0 * h)],
        ];
        (obs, jac)
    };
    let pseudo_stats = collective::ObservableStats {
        mean_j2: stats.mean_j2,
        mean_jy: stats.mean_jy,
        var_j2: stats.var_j2,
        var_jy: stats.var_jy,
        cov_j2_jy: stats.cov_j2_jy,
        jacobian: jac,
        warnings: Vec::new(),
    };
    let est = estimator_covariance_from_stats(&pseudo_stats, params)?;
    let m = m_shots as f64;
    let predicted_cov = [
        [est.matrix[0][0] / m, est.matrix[0][1] / m],
        [est.matrix[1][0] / m, est.matrix[1][1] / m],
    ];

    // Experiments.
    let mut master = SplitMix64::new(seed);
    let mut estimates = Vec::with_capacity(repetitions);
    let mut failures = 0usize;
    let mut clamped = 0usize;
    for _ in 0..repetitions {
        let mut rng = master.fork();
        let shots = sample_shots_with(&dist, m_shots, &mut rng);
        let mean_j2 = shots.iter().map(|(j, _)| j * (j + 1.0)).sum::<f64>() / m;
        let mean_jy = shots.iter().map(|(_, mm)| mm).sum::<f64>() / m;
        let e = invert_moments(mean_j2, mean_jy, &config);
        if e.failed {
            failures += 1;
        }
        if e.eta_clamped || e.phi_clamped {
            clamped += 1;
        }
        estimates.push((e.eta_hat, e.phi_hat));
    }

    let r = repetitions as f64;
    let mean_eta = estimates.iter().map(|e| e.0).sum::<f64>() / r;
    let mean_phi = estimates.iter().map(|e| e.1).sum::<f64>() / r;
    let mut cov = [[0.0f64; 2]; 2];
    for (e, p) in &estimates {
        let de = e - mean_eta;
        let dp = p - mean_phi;
        cov[0][0] += de * de;
        cov[0][1] += de * dp;
        cov[1][1] += dp * dp;
    }
    cov[0][0] /= r - 1.0;
    cov[0][1] /= r - 1.0;
    cov[1][0] = cov[0][1];
    cov[1][1] /= r - 1.0;

    Ok(McResult {
        n,
        chi,
        eta: params.eta(),
        phi: params.phi(),
        shots_per_experiment: m_shots,
        experiments: repetitions,
        empirical_cov: cov,
        predicted_cov,
        bias: [mean_eta - params.eta(), mean_phi - params.phi()],
        seed,
        rng_algorithm: RNG_ALGORITHM.into(),
        path: path_name,
        estimation_failures: failures,
        clamped_estimates: clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_sampling_is_constant() {
        let dist = JointDistribution::new(vec![JointOutcome {
            j: 2.0,
            m: -1.0,
            probability: 1.0,
        }])
        .unwrap();
        let shots = sample_shots(&dist, 100, 7);
        assert!(shots.iter().all(|&(j, m)| j == 2.0 && m == -1.0));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let dist = JointDistribution::new(vec![
            JointOutcome {
                j: 1.0,
                m: 0.0,
                probability: 0.5,
            },
            JointOutcome {
                j: 1.0,
                m: 1.0,
                probability: 0.25,
            },
            JointOutcome {
                j: 0.0,
                m: 0.0,
                probability: 0.25,
            },
        ])
        .unwrap();
        assert_eq!(sample_shots(&dist, 1000, 3), sample_shots(&dist, 1000, 3));
        assert_ne!(sample_shots(&dist, 1000, 3), sample_shots(&dist, 1000, 4));
    }

    #[test]
    fn empirical_frequencies_match_multinomial_bounds() {
        let dist = JointDistribution::new(vec![
            JointOutcome {
                j: 1.0,
                m: -1.0,
                probability: 0.2,
            },
            JointOutcome {
                j: 1.0,
                m: 0.0,
                probability: 0.5,
            },
            JointOutcome {
                j: 1.0,
                m: 1.0,
                probability: 0.3,
            },
        ])
        .unwrap();
        let m = 100_000;
        let shots = sample_shots(&dist, m, 12345);
        for o in dist.outcomes() {
            let count = shots
                .iter()
                .filter(|&&(j, mm)| j == o.j && mm == o.m)
                .count();
            let p_hat = count as f64 / m as f64;
            let sigma = (o.probability * (1.0 - o.probability) / m as f64).sqrt();
            assert!(
                (p_hat - o.probability).abs() <= 4.0 * sigma,
                "outcome (j={}, m={}): {p_hat} vs {}",
                o.j,
                o.m,
                o.probability
            );
        }
    }

    #[test]
    fn trajectory_mixture_matches_density_distribution() {
        let n = 4;
        let chi = 0.3;
        let params = ChannelParams::new(0.8, 0.5).unwrap();
        let (density, _) = outcome_distribution(n, chi, params, SamplePath::Density).unwrap();
        let (traj, _) = outcome_distribution(n, chi, params, SamplePath::Trajectory).unwrap();
        assert_eq!(density.outcomes().len(), traj.outcomes().len());
        for (a, b) in density.outcomes().iter().zip(traj.outcomes()) {
            assert_eq!((a.j, a.m), (b.j, b.m));
            assert!(
                (a.probability - b.probability).abs() < 1e-10,
                "({}, {})",
                a.j,
                a.m
            );
        }
    }

    #[test]
    fn invert_moments_roundtrips_exact_means() {
        let config = SqueezingConfig::new(8, 0.2).unwrap();
        let params = ChannelParams::new(0.8, 0.05).unwrap();
        let mean_j2 = collective::mean_j2(&config, params);
        let mean_jy = collective::mean_jy(&config, params);
        let est = invert_moments(mean_j2, mean_jy, &config);
        assert!(!est.failed && !est.eta_clamped && !est.phi_clamped);
        assert!((est.eta_hat - 0.8).abs() < 1e-12, "eta {}", est.eta_hat);
        assert!((est.phi_hat - 0.05).abs() < 1e-12, "phi {}", est.phi_hat);
    }

    #[test]
    fn invert_moments_clamps_above_noiseless_mean() {
        let config = SqueezingConfig::new(8, 0.2).unwrap();
        let params = ChannelParams::new(1.0, 0.0).unwrap();
        let mean_j2 = collective::mean_j2(&config, params);
        let est = invert_moments(mean_j2 + 0.5, 0.0, &config);
        assert!(est.eta_clamped && !est.failed);
        assert_eq!(est.eta_hat, 1.0);
    }

    #[test]
    fn phi_zero_cross_covariance_consistent_with_zero() {
        let params = ChannelParams::new(0.8, 0.0).unwrap();
        let res = mc_experiment(6, 0.2, params, 20_000, 60, 11, SamplePath::Auto).unwrap();
        let se = ((res.predicted_cov[0][0] * res.predicted_cov[1][1]
            + res.predicted_cov[0][1] * res.predicted_cov[0][1])
            / (res.experiments as f64 - 1.0))
            .sqrt();
        assert!(
            res.empirical_cov[0][1].abs() <= 3.0 * se,
            "cross covariance {} vs 3 sigma {}",
            res.empirical_cov[0][1],
            3.0 * se
        );
    }

    /// Trajectory-path experiment beyond the density limit; slow in debug
    /// builds, run with `cargo test -- --ignored` (or in release).
    #[test]
    #[ignore]
    fn trajectory_path_runs_beyond_density_limit() {
        let params = ChannelParams::new(0.8, 0.05).unwrap();
        let res = mc_experiment(13, 0.1, params, 5_000, 20, 5, SamplePath::Auto).unwrap();
        assert_eq!(res.path, "trajectory");
        let ratio = res.empirical_cov[1][1] / res.predicted_cov[1][1];
        assert!((0.5..2.0).contains(&ratio), "phi variance ratio {ratio}");
    }

    #[test]
    fn noiseless_channel_has_zero_eta_variance() {
        let params = ChannelParams::new(1.0, 0.0).unwrap();
        let res = mc_experiment(4, 0.3, params, 2000, 20, 99, SamplePath::Density).unwrap();
        assert!(
            res.empirical_cov[0][0] <= 1e-20,
            "{}",
            res.empirical_cov[0][0]
        );
    }
}
