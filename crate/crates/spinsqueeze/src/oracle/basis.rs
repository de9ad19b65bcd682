//! Simultaneous eigenstructure of the commuting pair `(J^2, J_y)`.
//!
//! `J^2` preserves the total magnetization, so its spectral decomposition is
//! built per magnetization block (real symmetric, dimension `C(n, k)`), with
//! eigenvalues clustered onto the exact ladder `j(j+1)`. Inside each `J^2`
//! eigenspace, `J_y` is projected (it only couples adjacent magnetization
//! blocks, so the projected matrix is block tridiagonal) and diagonalized; the
//! construction fails hard if the leakage of `J_y` out of any eigenspace
//! exceeds [`tolerances::BASIS_RESIDUAL`], or if any eigenvalue refuses to
//! snap to the exact `{-j..j}` ladder.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::oracle::state::{j_squared_apply, jy_apply, DensityMatrix};
use crate::tolerances;
use crate::{Error, Result};

/// A `J^2` eigenvector stored on its magnetization sector.
#[derive(Clone, Debug)]
struct SectorVector {
    /// Number of down spins (bits set); magnetization is `n/2 - k`.
    k: u32,
    /// Coefficients over the sector's basis states, in index order.
    coeffs: Vec<f64>,
}

/// One `J^2` eigenvalue sector with its `J_y` eigenstructure.
#[derive(Clone, Debug)]
pub struct JSector {
    /// Total angular momentum quantum number (integer or half-integer).
    pub j: f64,
    /// Multiplicity: independent copies of the spin-`j` ladder.
    pub multiplicity: usize,
    /// `J^2` eigenvectors spanning the eigenspace, sector-compact.
    vectors: Vec<SectorVector>,
    /// `J_y` eigenvectors as coefficient columns over `vectors`.
    jy_vectors: DMatrix<C64>,
    /// `J_y` eigenvalue of each column, snapped to the exact ladder.
    pub jy_eigenvalues: Vec<f64>,
}

/// Orthonormal basis of simultaneous `(J^2, J_y)` eigenvectors.
#[derive(Clone, Debug)]
pub struct JointBasis {
    n: u64,
    sectors: Vec<JSector>,
    /// Basis-state lists per magnetization sector (index = down-spin count).
    sector_idx: Vec<Vec<usize>>,
    /// Largest `J_y` leakage out of any `J^2` eigenspace (Frobenius).
    pub max_residual: f64,
}

/// Basis states of the `k` down-spin sector, ascending.
fn sector_indices(n: u64, k: u32) -> Vec<usize> {
    (0usize..1 << n).filter(|b| b.count_ones() == k).collect()
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Exact multiplicity of the spin-`j` sector of `n` qubits.
pub fn sector_multiplicity(n: u64, j: f64) -> u64 {
    let down = (n as f64 / 2.0 - j).round() as u64;
    binomial(n, down) - if down == 0 { 0 } else { binomial(n, down - 1) }
}

/// Allowed `j` values, descending from `n/2`.
pub fn j_values(n: u64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut j = n as f64 / 2.0;
    while j > -0.25 {
        out.push(j);
        j -= 1.0;
    }
    out
}

impl JointBasis {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn sectors(&self) -> &[JSector] {
        &self.sectors
    }

    /// Materialize the full `2^n`-dimensional eigenvector for column `col` of
    /// sector `sector`.
    pub fn eigenvector(&self, sector: usize, col: usize) -> Vec<C64> {
        let s = &self.sectors[sector];
        let dim = 1usize << self.n;
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (row, base) in s.vectors.iter().enumerate() {
            let w = s.jy_vectors[(row, col)];
            if w.norm_sqr() == 0.0 {
                continue;
            }
            for (&idx, &c) in self.sector_idx[base.k as usize].iter().zip(&base.coeffs) {
                out[idx] += w * C64::new(c, 0.0);
            }
        }
        out
    }
}

/// Build the joint eigenbasis for `n <= 12` qubits.
pub fn joint_measurement_basis(n: u64) -> Result<JointBasis> {
    if n > tolerances::MAX_DENSITY_QUBITS {
        return Err(Error::TooLarge {
            what: "joint measurement basis",
            n,
            limit: tolerances::MAX_DENSITY_QUBITS,
        });
    }
    let dim = 1usize << n;
    let jvals = j_values(n);
    // Basis-state lists per magnetization sector, computed once.
    let sector_idx: Vec<Vec<usize>> = (0..=n as u32).map(|k| sector_indices(n, k)).collect();

    // Spectral decomposition of J^2, one magnetization block at a time.
    let mut by_j: Vec<Vec<SectorVector>> = vec![Vec::new(); jvals.len()];
    for k in 0..=n as u32 {
        let idx = &sector_idx[k as usize];
        let d = idx.len();
        // Block matrix elements via the sparse application on embedded vectors.
        let mut block = DMatrix::<f64>::zeros(d, d);
        for (c, &bc) in idx.iter().enumerate() {
            let mut e = vec![C64::new(0.0, 0.0); dim];
            e[bc] = C64::new(1.0, 0.0);
            let je = j_squared_apply(n, &e);
            for (r, &br) in idx.iter().enumerate() {
                block[(r, c)] = je[br].re;
            }
        }
        let eig = SymmetricEigen::new(block);
        for (col, &lambda) in eig.eigenvalues.iter().enumerate() {
            let cluster = jvals.iter().position(|j| {
                (lambda - j * (j + 1.0)).abs() <= tolerances::J2_CLUSTER * (1.0 + lambda.abs())
            });
            let Some(pos) = cluster else {
                return Err(Error::DegeneracyResolution {
                    residual: lambda,
                    tol: tolerances::J2_CLUSTER,
                });
            };
            by_j[pos].push(SectorVector {
                k,
                coeffs: eig.eigenvectors.column(col).iter().copied().collect(),
            });
        }
    }

    let mut sectors = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (pos, j) in jvals.iter().enumerate() {
        let mut vectors = std::mem::take(&mut by_j[pos]);
        if vectors.is_empty() {
            continue;
        }
        // Order by magnetization so the projected J_y is block tridiagonal.
        vectors.sort_by_key(|v| v.k);
        let mult = sector_multiplicity(n, *j) as usize;
        let expected_dim = mult * (2.0 * j + 1.0).round() as usize;
        if vectors.len() != expected_dim {
            return Err(Error::DegeneracyResolution {
                residual: vectors.len() as f64 - expected_dim as f64,
                tol: 0.0,
            });
        }

        // Embed each J^2 eigenvector, apply J_y once, and take inner products
        // with vectors of adjacent magnetization.
        let d = vectors.len();
        let mut jy_images: Vec<Vec<C64>> = Vec::with_capacity(d);
        for v in &vectors {
            let mut e = vec![C64::new(0.0, 0.0); dim];
            for (&idx, &c) in sector_idx[v.k as usize].iter().zip(&v.coeffs) {
                e[idx] = C64::new(c, 0.0);
            }
            jy_images.push(jy_apply(n, &e));
        }
        let mut b = DMatrix::<C64>::zeros(d, d);
        for (c, vc) in vectors.iter().enumerate() {
            for (r, vr) in vectors.iter().enumerate() {
                if vr.k.abs_diff(vc.k) != 1 {
                    continue;
                }
                let mut acc = C64::new(0.0, 0.0);
                for (&idx, &coeff) in sector_idx[vr.k as usize].iter().zip(&vr.coeffs) {
                    acc += C64::new(coeff, 0.0) * jy_images[c][idx];
                }
                b[(r, c)] = acc;
            }
        }

        // Leakage of J_y out of the eigenspace: J_y v - sum_r B[r, col] v_r.
        for (c, image) in jy_images.iter().enumerate() {
            let mut residual = image.clone();
            for (r, vr) in vectors.iter().enumerate() {
                let w = b[(r, c)];
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                for (&idx, &coeff) in sector_idx[vr.k as usize].iter().zip(&vr.coeffs) {
                    residual[idx] -= w * C64::new(coeff, 0.0);
                }
            }
            let norm = residual.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            max_residual = max_residual.max(norm);
        }
        if max_residual > tolerances::BASIS_RESIDUAL {
            return Err(Error::DegeneracyResolution {
                residual: max_residual,
                tol: tolerances::BASIS_RESIDUAL,
            });
        }

        let eig = SymmetricEigen::new(b);
        let mut jy_eigenvalues = Vec::with_capacity(d);
        for &m in eig.eigenvalues.iter() {
            // Integer ladder for even n, half-integer for odd.
            let snapped = (m * 2.0).round() / 2.0;
            if (m - snapped).abs() > tolerances::J2_CLUSTER || snapped.abs() > *j + 0.25 {
                return Err(Error::DegeneracyResolution {
                    residual: (m - snapped).abs(),
                    tol: tolerances::J2_CLUSTER,
                });
            }
            jy_eigenvalues.push(snapped);
        }
        // Each ladder value must appear exactly `mult` times.
        let mut counts = std::collections::BTreeMap::<i64, usize>::new();
        for m in &jy_eigenvalues {
            *counts.entry((m * 2.0).round() as i64).or_default() += 1;
        }
        for (_, c) in counts {
            if c != mult {
                return Err(Error::DegeneracyResolution {
                    residual: c as f64,
                    tol: mult as f64,
                });
            }
        }

        sectors.push(JSector {
            j: *j,
            multiplicity: mult,
            vectors,
            jy_vectors: eig.eigenvectors,
            jy_eigenvalues,
        });
    }

    Ok(JointBasis {
        n,
        sectors,
        sector_idx,
        max_residual,
    })
}

/* Joint distribution *********************************************************/

/// One `(j, m)` outcome of the joint measurement.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JointOutcome {
    /// Total angular momentum quantum number; the `J^2` eigenvalue is `j(j+1)`.
    pub j: f64,
    /// `J_y` eigenvalue, in `{-j, ..., j}`.
    pub m: f64,
    pub probability: f64,
}

/// Probability table over simultaneous `(J^2, J_y)` outcomes.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct JointDistribution {
    outcomes: Vec<JointOutcome>,
}

impl JointDistribution {
    /// Validating constructor: clamps `[-1e-12, 0)` probabilities to zero,
    /// requires the total to be 1, and the support to satisfy `|m| <= j`.
    pub fn new(mut outcomes: Vec<JointOutcome>) -> Result<JointDistribution> {
        let mut sum = 0.0;
        for o in &mut outcomes {
            if o.probability < 0.0 {
                if o.probability < -tolerances::PROB_NEG {
                    return Err(Error::InvalidParam(format!(
                        "probability {:.3e} at (j={}, m={}) is negative beyond rounding",
                        o.probability, o.j, o.m
                    )));
                }
                o.probability = 0.0;
            }
            if o.m.abs() > o.j + 1e-9 {
                return Err(Error::InvalidParam(format!(
                    "outcome (j={}, m={}) outside the angular momentum ladder",
                    o.j, o.m
                )));
            }
            sum += o.probability;
        }
        if (sum - 1.0).abs() > tolerances::PROB_SUM {
            return Err(Error::InvalidParam(format!(
                "probabilities sum to {sum}, deviating beyond {:.1e}",
                tolerances::PROB_SUM
            )));
        }
        outcomes.sort_by(|a, b| {
            b.j.partial_cmp(&a.j)
                .unwrap()
                .then(a.m.partial_cmp(&b.m).unwrap())
        });
        Ok(JointDistribution { outcomes })
    }

    pub fn outcomes(&self) -> &[JointOutcome] {
        &self.outcomes
    }

    /// Mean of the `J^2` eigenvalue `j(j+1)`.
    pub fn mean_j2(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| o.probability * o.j * (o.j + 1.0))
            .sum()
    }

    pub fn mean_jy(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability * o.m).sum()
    }

    pub fn var_j2(&self) -> f64 {
        let m = self.mean_j2();
        self.outcomes
            .iter()
            .map(|o| {
                let v = o.j * (o.j + 1.0);
                o.probability * (v - m) * (v - m)
            })
            .sum()
    }

    pub fn var_jy(&self) -> f64 {
        let m = self.mean_jy();
        self.outcomes
            .iter()
            .map(|o| o.probability * (o.m - m) * (o.m - m))
            .sum()
    }

    pub fn cov_j2_jy(&self) -> f64 {
        let mj2 = self.mean_j2();
        let mjy = self.mean_jy();
        self.outcomes
            .iter()
            .map(|o| o.probability * (o.j * (o.j + 1.0) - mj2) * (o.m - mjy))
            .sum()
    }

    /// Mix distributions with the given weights.
    pub fn mixture(parts: &[(f64, &JointDistribution)]) -> Result<JointDistribution> {
        let mut acc = std::collections::BTreeMap::<(i64, i64), f64>::new();
        for (w, dist) in parts {
            for o in &dist.outcomes {
                *acc.entry(((o.j * 2.0).round() as i64, (o.m * 2.0).round() as i64))
                    .or_default() += w * o.probability;
            }
        }
        JointDistribution::new(
            acc.into_iter()
                .map(|((j2, m2), p)| JointOutcome {
                    j: j2 as f64 / 2.0,
                    m: m2 as f64 / 2.0,
                    probability: p,
                })
                .collect(),
        )
    }
}

/// Exact joint distribution of a mixed state in the given basis:
/// `p(j, m) = sum_mult <v|rho|v>`.
///
/// Worked per sector in blocked form: with `U` the sector-compact `J^2`
/// eigenvectors and `V` the `J_y` coefficient columns, the probabilities are
/// the diagonal of `V' (U' rho U) V`, which never touches the `2^n`-sized
/// eigenvectors.
pub fn joint_distribution(rho: &DensityMatrix, basis: &JointBasis) -> Result<JointDistribution> {
    if rho.n() != basis.n() {
        return Err(Error::InvalidParam(format!(
            "state has {} qubits, basis has {}",
            rho.n(),
            basis.n()
        )));
    }
    let dim = rho.dim();
    let mut acc = std::collections::BTreeMap::<(i64, i64), f64>::new();
    for sector in basis.sectors() {
        let d = sector.vectors.len();
        // T = rho U, one column per J^2 eigenvector, support-restricted on
        // the right and column-contiguous on the left.
        let mut t = DMatrix::<C64>::zeros(dim, d);
        for (beta, u) in sector.vectors.iter().enumerate() {
            let idx = &basis.sector_idx[u.k as usize];
            let mut col = t.column_mut(beta);
            for (&c, &coeff) in idx.iter().zip(&u.coeffs) {
                let scale = C64::new(coeff, 0.0);
                let rho_col = rho.matrix().column(c);
                for r in 0..dim {
                    col[r] += rho_col[r] * scale;
                }
            }
        }
        // R = U' T, again support-restricted.
        let mut r_small = DMatrix::<C64>::zeros(d, d);
        for (beta, u) in sector.vectors.iter().enumerate() {
            let idx = &basis.sector_idx[u.k as usize];
            for col in 0..d {
                let mut accum = C64::new(0.0, 0.0);
                for (&c, &coeff) in idx.iter().zip(&u.coeffs) {
                    accum += C64::new(coeff, 0.0) * t[(c, col)];
                }
                r_small[(beta, col)] = accum;
            }
        }
        // p_col = Re( v_col' R v_col ).
        let rv = &r_small * &sector.jy_vectors;
        for col in 0..d {
            let p: C64 = sector
                .jy_vectors
                .column(col)
                .iter()
                .zip(rv.column(col).iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            let key = (
                (sector.j * 2.0).round() as i64,
                (sector.jy_eigenvalues[col] * 2.0).round() as i64,
            );
            *acc.entry(key).or_default() += p.re;
        }
    }
    JointDistribution::new(
        acc.into_iter()
            .map(|((j2, m2), p)| JointOutcome {
                j: j2 as f64 / 2.0,
                m: m2 as f64 / 2.0,
                probability: p,
            })
            .collect(),
    )
}
