//! Cross-module consistency suite: every closed form against the brute-force
//! oracle, plus the structural identities the protocol relies on.
//!
//! Each check reports its worst deviation and threshold; the CLI `validate`
//! command serializes the results and fails with a nonzero exit code naming
//! the first failing check.

use serde::Serialize;

use crate::channel::{
    apply_channel, dual_pauli, kraus_ops, pauli_i, pauli_x, pauli_y, pauli_z, single_qubit_qfi,
    ChannelParams,
};
use crate::collective;
use crate::estimation::{estimator_covariance, fundamental_bound, normalized_variances};
use crate::moments::{
    epsilon_angle, oat_table, output_moments, roat_moments, Axis, MomentTable, PauliWord,
    SqueezingConfig,
};
use crate::oracle;
use crate::rng::SplitMix64;
use crate::tolerances;
use crate::Result;

const TAU: f64 = std::f64::consts::TAU;

/// Outcome of one named check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub max_error: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, max_error: f64, tolerance: f64, detail: String) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            pass: max_error <= tolerance,
            max_error,
            tolerance,
            detail,
        }
    }
}

/// Whole-suite report, serializable as machine-readable JSON.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub version: String,
    pub n_max: u64,
    pub tolerance: f64,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn failing(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// Options for the suite. `n_max` bounds the oracle sizes (`<= 12`).
#[derive(Clone, Copy, Debug)]
pub struct ValidateOptions {
    pub n_max: u64,
    pub tol: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            n_max: 8,
            tol: tolerances::ORACLE_MOMENT_ABS,
        }
    }
}

/// Run the full suite.
pub fn run_checks(opts: ValidateOptions) -> Result<ValidationReport> {
    run_checks_with_moment_override(opts, &|_, v| v)
}

/// Test hook: `override_fn(word, value)` is applied to every closed-form
/// moment before comparison, so the suite's sensitivity can be demonstrated
/// by corrupting a single constant.
#[doc(hidden)]
pub fn run_checks_with_moment_override(
    opts: ValidateOptions,
    override_fn: &dyn Fn(&PauliWord, f64) -> f64,
) -> Result<ValidationReport> {
    if opts.n_max > tolerances::MAX_DENSITY_QUBITS {
        return Err(crate::Error::TooLarge {
            what: "validation suite",
            n: opts.n_max,
            limit: tolerances::MAX_DENSITY_QUBITS,
        });
    }
    let n_grid: Vec<u64> = (4..=opts.n_max).collect();
    let chi_grid = [0.05, 0.3, 0.7];
    let eta_grid = [0.0, 0.5, 0.8, 1.0];

    let mut checks = Vec::new();
    checks.push(check_kraus_completeness());
    checks.push(check_dual_vs_kraus());
    checks.push(check_channel_matrix());
    checks.push(check_channel_order(&n_grid)?);
    checks.push(check_qfi_numeric());
    checks.push(check_commutator_trace());
    checks.push(check_moments_vs_oracle(
        "oat_moments_vs_oracle",
        &n_grid,
        &chi_grid,
        opts.tol,
        false,
        override_fn,
    )?);
    checks.push(check_moments_vs_oracle(
        "roat_moments_vs_oracle",
        &n_grid,
        &chi_grid,
        opts.tol,
        true,
        override_fn,
    )?);
    checks.push(check_output_moments(&n_grid, opts.tol)?);
    checks.push(check_epsilon_optimality(&n_grid)?);
    checks.push(check_collective_stats(&n_grid, &chi_grid, &eta_grid)?);
    checks.push(check_jacobian(&n_grid)?);
    checks.push(check_structural_zeros(&n_grid)?);
    checks.push(check_joint_distribution(opts.n_max.min(6))?);
    checks.push(check_bound_dominance());
    checks.push(report_gaussian_constant());

    let pass = checks.iter().all(|c| c.pass);
    Ok(ValidationReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        n_max: opts.n_max,
        tolerance: opts.tol,
        pass,
        checks,
    })
}

fn max_abs(m: &nalgebra::Matrix2<num_complex::Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_kraus_completeness() -> CheckResult {
    let mut rng = SplitMix64::new(0xC0FFEE);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let params = ChannelParams::new(rng.next_f64(), rng.next_f64() * TAU).unwrap();
        let [k0, k1] = kraus_ops(params);
        let sum = k0.adjoint() * k0 + k1.adjoint() * k1;
        worst = worst.max(max_abs(&(sum - pauli_i())));
    }
    CheckResult::new(
        "kraus_completeness",
        worst,
        tolerances::KRAUS_COMPLETENESS,
        "sum K'K = 1 over 100 seeded random parameter pairs".into(),
    )
}

fn check_dual_vs_kraus() -> CheckResult {
    let mut rng = SplitMix64::new(0xDA7A);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let params = ChannelParams::new(rng.next_f64(), rng.next_f64() * TAU).unwrap();
        let [k0, k1] = kraus_ops(params);
        for (axis, sigma) in [
            (Axis::X, pauli_x()),
            (Axis::Y, pauli_y()),
            (Axis::Z, pauli_z()),
        ] {
            let conj = k0.adjoint() * sigma * k0 + k1.adjoint() * sigma * k1;
            let combo = dual_pauli(axis, params).to_matrix();
            worst = worst.max(max_abs(&(conj - combo)));
        }
    }
    CheckResult::new(
        "dual_map_vs_kraus_conjugation",
        worst,
        tolerances::DUAL_VS_KRAUS,
        "Heisenberg rows against explicit sum K' sigma K".into(),
    )
}

fn check_channel_matrix() -> CheckResult {
    let mut rng = SplitMix64::new(0x0E11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let params = ChannelParams::new(rng.next_f64(), rng.next_f64() * TAU).unwrap();
        let a = rng.next_f64();
        let th = rng.next_f64() * TAU;
        let c = num_complex::Complex64::from_polar((a * (1.0 - a)).sqrt(), th);
        let rho = nalgebra::Matrix2::new(
            num_complex::Complex64::new(a, 0.0),
            c,
            c.conj(),
            num_complex::Complex64::new(1.0 - a, 0.0),
        );
        let direct = apply_channel(&rho, params).unwrap();
        let [k0, k1] = kraus_ops(params);
        let kraus = k0 * rho * k0.adjoint() + k1 * rho * k1.adjoint();
        worst = worst.max(max_abs(&(direct - kraus)));
    }
    CheckResult::new(
        "channel_matrix_action",
        worst,
        tolerances::CHANNEL_MATRIX,
        "coherence-scaling form against Kraus conjugation on random states".into(),
    )
}

fn check_channel_order(n_grid: &[u64]) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for &n in n_grid.iter().take(3) {
        let state = oracle::build_roat_state(n, 0.25)?;
        let dephase = ChannelParams::new(0.7, 0.0)?;
        let rotate = ChannelParams::new(1.0, 0.9)?;
        let mut a = state.to_density()?;
        let mut b = state.to_density()?;
        for site in 0..n {
            a.apply_site_channel(site, dephase);
            b.apply_site_channel(site, rotate);
        }
        for site in 0..n {
            a.apply_site_channel(site, rotate);
            b.apply_site_channel(site, dephase);
        }
        let diff = (a.matrix() - b.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    Ok(CheckResult::new(
        "channel_order_irrelevance",
        worst,
        tolerances::CHANNEL_ORDER,
        "dephase-then-rotate vs rotate-then-dephase on probe states".into(),
    ))
}

fn check_qfi_numeric() -> CheckResult {
    let mut worst: f64 = 0.0;
    for eta in [0.2, 0.5, 0.8] {
        for phi in [0.0, 0.7] {
            let params = ChannelParams::new(eta, phi).unwrap();
            let numeric = oracle::numeric_sld(params).unwrap();
            let closed = single_qubit_qfi(params);
            for a in 0..2 {
                for b in 0..2 {
                    worst = worst.max((numeric.f_matrix[a][b] - closed.f_matrix[a][b]).abs());
                }
            }
        }
    }
    CheckResult::new(
        "qfi_numeric_sld_solve",
        worst,
        tolerances::SLD_SOLVE,
        "brute-force SLD linear solve against diag(1/(1-eta^2), eta^2)".into(),
    )
}

fn check_commutator_trace() -> CheckResult {
    let mut rng = SplitMix64::new(0x77);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let params = ChannelParams::new(0.05 + 0.9 * rng.next_f64(), rng.next_f64() * TAU).unwrap();
        worst = worst.max(single_qubit_qfi(params).commutator_trace.abs());
    }
    CheckResult::new(
        "commutator_trace_saturability",
        worst,
        tolerances::COMMUTATOR_TRACE,
        "Tr(rho [L_eta, L_phi]) on equatorial inputs".into(),
    )
}

fn table_vs_state(
    table: &MomentTable,
    state: &oracle::DenseState,
    override_fn: &dyn Fn(&PauliWord, f64) -> f64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (word, value) in table.entries() {
        let value = override_fn(word, value);
        let reference = oracle::exact_moment_canonical(state, word)?;
        worst = worst.max((value - reference).abs());
    }
    Ok(worst)
}

fn check_moments_vs_oracle(
    name: &str,
    n_grid: &[u64],
    chi_grid: &[f64],
    tol: f64,
    rotated: bool,
    override_fn: &dyn Fn(&PauliWord, f64) -> f64,
) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for &n in n_grid {
        for &chi in chi_grid {
            let (table, state) = if rotated {
                let cfg = SqueezingConfig::new(n, chi)?;
                (roat_moments(&cfg), oracle::build_roat_state(n, chi)?)
            } else {
                let mut s = oracle::PureState::plus_product(n)?;
                s.apply_twist(chi);
                (oat_table(n, chi), s)
            };
            worst = worst.max(table_vs_state(
                &table,
                &oracle::DenseState::Pure(state),
                override_fn,
            )?);
        }
    }
    Ok(CheckResult::new(
        name,
        worst,
        tol,
        format!("all words up to 4 sites, N in {n_grid:?}, chi in {chi_grid:?}"),
    ))
}

fn check_output_moments(n_grid: &[u64], tol: f64) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for &n in n_grid.iter().filter(|&&n| n <= 6) {
        for (eta, phi) in [(0.8, 0.5), (0.5, 0.0), (0.0, 0.3), (1.0, 1.1)] {
            let cfg = SqueezingConfig::new(n, 0.3)?;
            let params = ChannelParams::new(eta, phi)?;
            let table = output_moments(&roat_moments(&cfg), params)?;
            let rho = oracle::evolve_density(&oracle::build_roat_state(n, 0.3)?, params)?;
            let state = oracle::DenseState::Mixed(rho);
            for (word, value) in table.entries() {
                let reference = oracle::exact_moment_canonical(&state, word)?;
                worst = worst.max((value - reference).abs());
            }
        }
    }
    Ok(CheckResult::new(
        "output_moments_vs_oracle",
        worst,
        tol,
        "dual-evolved tables against density-matrix expectations".into(),
    ))
}

fn check_epsilon_optimality(n_grid: &[u64]) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for &n in n_grid {
        for chi in [0.05, 0.3] {
            let scanned = oracle::scan_optimal_rotation(n, chi)?;
            let formula = epsilon_angle(n, chi) + std::f64::consts::FRAC_PI_2;
            worst = worst.max((scanned - formula).abs());
        }
    }
    Ok(CheckResult::new(
        "epsilon_minimizes_var_jy",
        worst,
        tolerances::EPSILON_SCAN,
        "grid + golden-section scan of the alignment rotation".into(),
    ))
}

fn check_collective_stats(
    n_grid: &[u64],
    chi_grid: &[f64],
    eta_grid: &[f64],
) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for &n in n_grid {
        for &chi in chi_grid {
            let cfg = SqueezingConfig::new(n, chi)?;
            let state = oracle::build_roat_state(n, chi)?;
            for &eta in eta_grid {
                let params = ChannelParams::new(eta, 0.0)?;
                let rho = oracle::evolve_density(&state, params)?;
                let obs = oracle::oracle_observables(&rho);
                let stats = collective::observable_covariance(&cfg, params)?;
                let rel = |a: f64, b: f64| {
                    let scale = b.abs().max(1.0);
                    (a - b).abs() / scale
                };
                worst = worst.max(rel(stats.mean_j2, obs.mean_j2));
                worst = worst.max(rel(stats.mean_jy, obs.mean_jy));
                worst = worst.max(rel(stats.var_j2, obs.var_j2));
                worst = worst.max(rel(stats.var_jy, obs.var_jy));
                worst = worst.max(rel(stats.cov_j2_jy, obs.cov_j2_jy));
                for i in Axis::ALL {
                    for j in Axis::ALL {
                        let closed = collective::cov_squared_components(i, j, &cfg, params)?;
                        let reference = oracle::oracle_cov_squared(&rho, i, j);
                        worst = worst.max(rel(closed, reference));
                    }
                }
            }
        }
    }
    Ok(CheckResult::new(
        "collective_stats_vs_oracle",
        worst,
        tolerances::ORACLE_COV_REL,
        "means, variances, and all 9 squared-component covariances".into(),
    ))
}

fn check_jacobian(n_grid: &[u64]) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for &n in n_grid {
        let cfg = SqueezingConfig::new(n, 0.2)?;
        let params = ChannelParams::new(0.8, 0.0)?;
        let analytic = collective::observable_covariance(&cfg, params)?.jacobian;
        let state = oracle::build_roat_state(n, 0.2)?;
        let fd = oracle::oracle_jacobian(&state, params)?;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((analytic[r][c] - fd[r][c]).abs());
            }
        }
    }
    Ok(CheckResult::new(
        "jacobian_vs_finite_differences",
        worst,
        tolerances::JACOBIAN_FD,
        "analytic mean-value Jacobian against central differences".into(),
    ))
}

fn check_structural_zeros(n_grid: &[u64]) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for &n in n_grid.iter().take(3) {
        let cfg = SqueezingConfig::new(n, 0.3)?;
        // Odd y+z moments vanish on the probe.
        let state = oracle::DenseState::Pure(oracle::build_roat_state(n, 0.3)?);
        let table = roat_moments(&cfg);
        for (word, value) in table.entries() {
            if word.yz_count() % 2 == 1 {
                worst = worst.max(value.abs());
                worst = worst.max(oracle::exact_moment_canonical(&state, word)?.abs());
            }
        }
        // Cov(J^2, J_y) = 0 at phi = 0 on the oracle.
        let params = ChannelParams::new(0.8, 0.0)?;
        let rho = oracle::evolve_density(&oracle::build_roat_state(n, 0.3)?, params)?;
        worst = worst.max(oracle::oracle_observables(&rho).cov_j2_jy.abs() / (n as f64));
        // <J^2> is phase independent.
        let base = collective::mean_j2(&cfg, params);
        for phi in [0.3, 1.1, 2.7] {
            let p = ChannelParams::new(0.8, phi)?;
            let rho = oracle::evolve_density(&oracle::build_roat_state(n, 0.3)?, p)?;
            worst = worst.max((oracle::oracle_observables(&rho).mean_j2 - base).abs() / (n as f64));
        }
    }
    Ok(CheckResult::new(
        "structural_zeros",
        worst,
        tolerances::ORACLE_MOMENT_ABS,
        "odd-parity moments, Cov(J^2, J_y) at phi = 0, phase independence of <J^2>".into(),
    ))
}

fn check_joint_distribution(n_max: u64) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for n in 4..=n_max {
        let params = ChannelParams::new(0.8, 0.3)?;
        let state = oracle::build_roat_state(n, 0.3)?;
        let rho = oracle::evolve_density(&state, params)?;
        let basis = oracle::joint_measurement_basis(n)?;
        let dist = oracle::joint_distribution(&rho, &basis)?;
        let obs = oracle::oracle_observables(&rho);
        worst = worst.max((dist.mean_j2() - obs.mean_j2).abs());
        worst = worst.max((dist.mean_jy() - obs.mean_jy).abs());
        for o in dist.outcomes() {
            if o.m.abs() > o.j {
                worst = worst.max(o.probability.abs());
            }
        }
    }
    Ok(CheckResult::new(
        "joint_distribution_consistency",
        worst,
        tolerances::PROB_SUM,
        "distribution means against operator means; ladder support".into(),
    ))
}

/// Informational: the measured constant of the pair-product factorization
/// `<iijj> - <ii><jj> = O(N^2 chi^4)` along `chi = N^{-3/4}`. No theory pins
/// the constant, so it is reported, never asserted.
fn report_gaussian_constant() -> CheckResult {
    let c = crate::moments::gaussian_factorization_constant(&[
        100, 1_000, 10_000, 100_000, 1_000_000,
    ]);
    CheckResult::new(
        "gaussian_factorization_constant",
        c,
        f64::INFINITY,
        format!("measured C = {c:.6} over N in 1e2..1e6, chi = N^(-3/4); informational"),
    )
}

fn check_bound_dominance() -> CheckResult {
    let mut worst: f64 = 0.0;
    for eta in [0.5, 0.8, 0.95] {
        for p in [f64::NEG_INFINITY, -2.0 / 3.0, -3.0 / 4.0, -5.0 / 6.0] {
            for exp10 in 2..=8 {
                let n = 10u64.pow(exp10);
                let cfg = SqueezingConfig::from_scaling(n, p).unwrap();
                let params = ChannelParams::new(eta, 0.0).unwrap();
                let est = estimator_covariance(&cfg, params).unwrap();
                let bound = fundamental_bound(n, eta);
                // Both matrices are diagonal: PSD of the difference is
                // entrywise dominance.
                for k in 0..2 {
                    let gap = est.matrix[k][k] - bound[k][k];
                    worst = worst.max(-gap / bound[k][k]);
                }
                let (ne, np) = normalized_variances(n, eta, &est);
                worst = worst.max(1.0 - ne);
                worst = worst.max(1.0 - np);
            }
        }
    }
    CheckResult::new(
        "estimator_bound_dominance",
        worst.max(0.0),
        tolerances::BOUND_SLACK,
        "estimator covariance dominates the fundamental bound on the sweep grid".into(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_at_small_n() {
        let report = run_checks(ValidateOptions {
            n_max: 5,
            tol: 1e-10,
        })
        .unwrap();
        assert!(report.pass, "failing: {:?}", report.failing());
    }

    #[test]
    fn corrupted_moment_constant_is_caught_by_name() {
        let target = PauliWord::parse("xx").unwrap();
        let report = run_checks_with_moment_override(
            ValidateOptions {
                n_max: 4,
                tol: 1e-10,
            },
            &move |word, value| if *word == target { value + 1e-6 } else { value },
        )
        .unwrap();
        assert!(!report.pass);
        let failing: Vec<&str> = report.failing().iter().map(|c| c.name.as_str()).collect();
        assert!(
            failing.contains(&"oat_moments_vs_oracle"),
            "failing = {failing:?}"
        );
        assert!(failing.contains(&"roat_moments_vs_oracle"));
    }

    #[test]
    fn oversized_request_is_rejected() {
        assert!(run_checks(ValidateOptions {
            n_max: 20,
            tol: 1e-10
        })
        .is_err());
    }
}
