//! Exact permutation-invariant Pauli moments of the twisted probe state.
//!
//! The probe is prepared in two steps. Twisting a spin-coherent state by the
//! collective phase `exp(-i chi J_z^2)` produces correlations whose one- to
//! four-site moments have closed forms in `(N, chi)` — products of
//! `cos^{N-k}(m chi)` and low powers of `sin(chi)`. Rotating every qubit about
//! `x` by `epsilon + pi/2`, with `epsilon` chosen by [`epsilon_angle`], aligns
//! the minimal-variance direction with `y`. A moment table in the rotated
//! frame follows from the twisted-frame table by expanding each `y`/`z` label
//! multilinearly; evolving through the sensing channel replaces each label by
//! its dual image.
//!
//! By a `pi`-rotation symmetry about `x`, every word with an odd total number
//! of `y` and `z` labels has exactly zero expectation in both the twisted and
//! rotated frames; tables store those zeros exactly.
//!
//! Because both the state and the channel action are permutation invariant,
//! a word is identified by its sorted multiset of axis labels.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::numerics::Scalar;
use crate::{Error, Result};

/// Single-site Pauli axis label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn from_char(c: char) -> Result<Axis> {
        match c {
            'x' => Ok(Axis::X),
            'y' => Ok(Axis::Y),
            'z' => Ok(Axis::Z),
            other => Err(Error::InvalidParam(format!("unknown axis label {other:?}"))),
        }
    }
}

/// A product of one to four Pauli operators on distinct, unspecified sites,
/// stored in canonical sorted order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliWord {
    axes: Vec<Axis>,
}

impl PauliWord {
    pub const MAX_LEN: usize = 4;

    pub fn new(axes: &[Axis]) -> Result<PauliWord> {
        if axes.is_empty() || axes.len() > Self::MAX_LEN {
            return Err(Error::InvalidParam(format!(
                "pauli word must have 1..=4 labels, got {}",
                axes.len()
            )));
        }
        let mut axes = axes.to_vec();
        axes.sort();
        Ok(PauliWord { axes })
    }

    /// Parse labels like `"xxyy"`.
    pub fn parse(s: &str) -> Result<PauliWord> {
        let axes = s.chars().map(Axis::from_char).collect::<Result<Vec<_>>>()?;
        PauliWord::new(&axes)
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Number of `y` plus `z` labels; words where this is odd vanish by the
    /// `x`-rotation symmetry of the probe.
    pub fn yz_count(&self) -> usize {
        self.axes.iter().filter(|a| **a != Axis::X).count()
    }

    fn counts(&self) -> (usize, usize, usize) {
        let x = self.axes.iter().filter(|a| **a == Axis::X).count();
        let y = self.axes.iter().filter(|a| **a == Axis::Y).count();
        (x, y, self.axes.len() - x - y)
    }

    /// All canonical words of length 1..=max_len.
    pub fn enumerate(max_len: usize) -> Vec<PauliWord> {
        let mut out = Vec::new();
        // Sorted words are exactly the multisets (x^a y^b z^c).
        for len in 1..=max_len.min(Self::MAX_LEN) {
            for nx in (0..=len).rev() {
                for ny in (0..=(len - nx)).rev() {
                    let nz = len - nx - ny;
                    let mut axes = Vec::with_capacity(len);
                    axes.extend(std::iter::repeat_n(Axis::X, nx));
                    axes.extend(std::iter::repeat_n(Axis::Y, ny));
                    axes.extend(std::iter::repeat_n(Axis::Z, nz));
                    out.push(PauliWord { axes });
                }
            }
        }
        out
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.axes {
            write!(f, "{}", a.as_char())?;
        }
        Ok(())
    }
}

/// Which state a moment table describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    /// Twisted state, before the alignment rotation.
    Oat,
    /// Rotated twisted state (minimal variance along `y`).
    Roat,
    /// Channel output, `Lambda^{(x)N}` applied to the rotated state.
    Output,
}

/// Probe configuration: particle count, squeezing strength, optional scaling
/// exponent, and the derived alignment rotation angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezingConfig {
    n: u64,
    chi: f64,
    /// Set when `chi` was specified as `N^p`; `-inf` encodes `chi = 0`.
    p: Option<f64>,
    epsilon: f64,
}

impl SqueezingConfig {
    pub fn new(n: u64, chi: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParam(format!(
                "need at least 2 particles, got {n}"
            )));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&chi) {
            return Err(Error::InvalidParam(format!(
                "squeezing strength chi must be in [0, pi/2), got {chi}"
            )));
        }
        Ok(SqueezingConfig {
            n,
            chi,
            p: None,
            epsilon: epsilon_angle(n, chi),
        })
    }

    /// Power-law scaling `chi = N^p` with `p <= 0`; `p = -inf` encodes the
    /// unsqueezed probe `chi = 0`.
    pub fn from_scaling(n: u64, p: f64) -> Result<Self> {
        if p > 0.0 || p.is_nan() {
            return Err(Error::InvalidParam(format!(
                "scaling exponent must be <= 0, got {p}"
            )));
        }
        let chi = if p == f64::NEG_INFINITY {
            0.0
        } else {
            (n as f64).powf(p)
        };
        let mut cfg = SqueezingConfig::new(n, chi)?;
        cfg.p = Some(p);
        Ok(cfg)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn scaling_exponent(&self) -> Option<f64> {
        self.p
    }

    /// Rotation angle `epsilon`; the probe is rotated by `epsilon + pi/2`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// The alignment angle
/// `epsilon = atan(4 sin(chi) cos^{N-2}(chi) / (1 - cos^{N-2}(2 chi))) / 2`.
///
/// Both numerator and denominator are nonnegative on the domain, so
/// `epsilon` lies in `[0, pi/4]`. At `chi = 0` (and at `N = 2`, where the
/// denominator vanishes with a positive numerator) the continuous limit is
/// `pi/4`.
pub fn epsilon_angle(n: u64, chi: f64) -> f64 {
    if chi == 0.0 {
        return std::f64::consts::FRAC_PI_4;
    }
    let num = 4.0 * chi.sin() * crate::numerics::cos_pow(chi, n - 2);
    let den = crate::numerics::one_minus_cos_pow(2.0 * chi, n - 2);
    if den == 0.0 {
        return std::f64::consts::FRAC_PI_4;
    }
    0.5 * num.atan2(den)
}

/// `(sin eps, cos eps)` evaluated without an arctangent, so the same formula
/// runs at double-double precision: with `t = tan(2 eps) = num/den`,
/// `cos(2 eps) = den / hypot(num, den)` and half-angle square roots finish.
pub(crate) fn epsilon_trig<S: Scalar>(n: u64, chi: S) -> (S, S) {
    let half = S::from_f64(0.5);
    if chi.to_f64() == 0.0 || n == 2 {
        // epsilon = pi/4
        let s = half.sqrt();
        return (s, s);
    }
    let num = S::from_f64(4.0) * chi.sin() * S::cos_pow(chi, n - 2);
    let den = S::one_minus_cos_pow(chi + chi, n - 2);
    let r = (num * num + den * den).sqrt();
    let cos2e = den / r;
    let sin_e = ((S::one() - cos2e) * half).sqrt();
    let cos_e = ((S::one() + cos2e) * half).sqrt();
    (sin_e, cos_e)
}

/* Closed forms in the twisted frame ******************************************/

/// Closed-form moment of the twisted state for a canonical word, generic over
/// working precision. `None` when the word needs more sites than `n`.
fn oat_value<S: Scalar>(word: &PauliWord, n: u64, chi: S) -> Option<S> {
    let len = word.len() as u64;
    if n < len {
        return None;
    }
    if word.yz_count() % 2 == 1 {
        return Some(S::zero());
    }
    let m = n - len; // exponent N - k for a k-site word
    let two = S::from_f64(2.0);
    let half = S::from_f64(0.5);
    let quarter = S::from_f64(0.25);
    let eighth = S::from_f64(0.125);
    let chi2 = chi + chi;
    let chi3 = chi2 + chi;
    let chi4 = chi2 + chi2;
    let s1 = chi.sin();

    let (x, y, z) = word.counts();
    let value = match (x, y, z) {
        // one site
        (1, 0, 0) => S::cos_pow(chi, m),
        // two sites
        (2, 0, 0) => (S::one() + S::cos_pow(chi2, m)) * half,
        (0, 2, 0) => S::one_minus_cos_pow(chi2, m) * half,
        (0, 1, 1) => s1 * S::cos_pow(chi, m),
        (0, 0, 2) => S::zero(),
        // three sites
        (3, 0, 0) => (S::from_f64(3.0) * S::cos_pow(chi, m) + S::cos_pow(chi3, m)) * quarter,
        (1, 2, 0) => {
            // (cos^m(chi) - cos^m(3 chi)) / 4, via the one-minus forms
            (S::one_minus_cos_pow(chi3, m) - S::one_minus_cos_pow(chi, m)) * quarter
        }
        (1, 1, 1) => chi2.sin() * S::cos_pow(chi2, m) * half,
        // Sign fixed against the brute-force oracle (hand check at N = 3:
        // the contracted z pair contributes -sin^2(chi)).
        (1, 0, 2) => -(s1 * s1 * S::cos_pow(chi, m)),
        // four sites
        (4, 0, 0) => {
            (S::from_f64(3.0) + S::from_f64(4.0) * S::cos_pow(chi2, m) + S::cos_pow(chi4, m))
                * eighth
        }
        (2, 2, 0) => S::one_minus_cos_pow(chi4, m) * eighth,
        (2, 1, 1) => {
            // (sin(chi) cos^m(chi) + sin(3 chi) cos^m(3 chi)) / 4
            (s1 * S::cos_pow(chi, m) + chi3.sin() * S::cos_pow(chi3, m)) * quarter
        }
        (2, 0, 2) => {
            let s2 = chi2.sin();
            -(s2 * s2 * S::cos_pow(chi2, m)) * half
        }
        (0, 4, 0) => {
            // (3 - 4 cos^m(2 chi) + cos^m(4 chi)) / 8
            //   = (4 (1 - cos^m(2 chi)) - (1 - cos^m(4 chi))) / 8
            (S::from_f64(4.0) * S::one_minus_cos_pow(chi2, m) - S::one_minus_cos_pow(chi4, m))
                * eighth
        }
        (0, 3, 1) => {
            // (3 sin(chi) cos^m(chi) - sin(3 chi) cos^m(3 chi)) / 4
            //   = (3 sin(chi) (cos^m(chi) - cos^m(3 chi)) + 4 sin^3(chi) cos^m(3 chi)) / 4
            let diff = S::one_minus_cos_pow(chi3, m) - S::one_minus_cos_pow(chi, m);
            (S::from_f64(3.0) * s1 * diff + S::from_f64(4.0) * s1 * s1 * s1 * S::cos_pow(chi3, m))
                * quarter
        }
        (0, 2, 2) => {
            let s2 = chi2.sin();
            s2 * s2 * S::cos_pow(chi2, m) * half
        }
        (0, 1, 3) => -(s1 * s1 * s1 * S::cos_pow(chi, m)),
        (0, 0, 4) => S::zero(),
        _ => unreachable!("even-parity words of length <= 4 are all enumerated"),
    };
    let _ = two;
    Some(value)
}

/// Expansion of one axis label under the site-wise `x`-rotation.
fn rotation_row<S: Scalar>(axis: Axis, cos_t: S, sin_t: S) -> Vec<(S, Axis)> {
    match axis {
        Axis::X => vec![(S::one(), Axis::X)],
        Axis::Y => vec![(cos_t, Axis::Y), (sin_t, Axis::Z)],
        Axis::Z => vec![(-sin_t, Axis::Y), (cos_t, Axis::Z)],
    }
}

/// Expansion of one axis label under the dual channel.
fn dual_row<S: Scalar>(axis: Axis, eta: S, cos_phi: S, sin_phi: S) -> Vec<(S, Axis)> {
    match axis {
        Axis::X => vec![(eta * cos_phi, Axis::X), (-(eta * sin_phi), Axis::Y)],
        Axis::Y => vec![(eta * sin_phi, Axis::X), (eta * cos_phi, Axis::Y)],
        Axis::Z => vec![(S::one(), Axis::Z)],
    }
}

/// Multilinear expansion of a word through per-label substitution rows,
/// looked up in `source`. Errors if a needed entry is absent — a nonzero
/// family must never be silently treated as zero.
fn expand_word<S: Scalar>(
    word: &PauliWord,
    source: &BTreeMap<PauliWord, S>,
    row: impl Fn(Axis) -> Vec<(S, Axis)>,
) -> Result<S> {
    let rows: Vec<Vec<(S, Axis)>> = word.axes().iter().map(|a| row(*a)).collect();
    let mut total = S::zero();
    let mut choice = vec![0usize; rows.len()];
    'outer: loop {
        let mut coeff = S::one();
        let mut axes = Vec::with_capacity(rows.len());
        for (r, &c) in rows.iter().zip(&choice) {
            let (w, a) = r[c];
            coeff = coeff * w;
            axes.push(a);
        }
        if coeff.to_f64() != 0.0 {
            let key = PauliWord::new(&axes).expect("axes within bounds");
            let v = source.get(&key).ok_or(Error::IncompleteTable {
                word: key.to_string(),
            })?;
            total = total + coeff * *v;
        }
        // advance the mixed-radix counter
        for i in (0..rows.len()).rev() {
            choice[i] += 1;
            if choice[i] < rows[i].len() {
                continue 'outer;
            }
            choice[i] = 0;
            if i == 0 {
                break 'outer;
            }
        }
    }
    Ok(total)
}

pub(crate) fn build_oat_map<S: Scalar>(n: u64, chi: S) -> BTreeMap<PauliWord, S> {
    let max_len = (n.min(4)) as usize;
    PauliWord::enumerate(max_len)
        .into_iter()
        .map(|w| {
            let v = oat_value(&w, n, chi).expect("length limited to n");
            (w, v)
        })
        .collect()
}

pub(crate) fn rotate_map<S: Scalar>(
    map: &BTreeMap<PauliWord, S>,
    cos_t: S,
    sin_t: S,
) -> Result<BTreeMap<PauliWord, S>> {
    map.keys()
        .map(|w| {
            Ok((
                w.clone(),
                expand_word(w, map, |a| rotation_row(a, cos_t, sin_t))?,
            ))
        })
        .collect()
}

pub(crate) fn dual_map<S: Scalar>(
    map: &BTreeMap<PauliWord, S>,
    eta: S,
    cos_phi: S,
    sin_phi: S,
) -> Result<BTreeMap<PauliWord, S>> {
    map.keys()
        .map(|w| {
            Ok((
                w.clone(),
                expand_word(w, map, |a| dual_row(a, eta, cos_phi, sin_phi))?,
            ))
        })
        .collect()
}

/// Rotated-frame map at working precision `S`, with the `chi = 0` probe
/// short-circuited to the product table (the rotation is then a global phase).
pub(crate) fn build_roat_map<S: Scalar>(n: u64, chi: S) -> BTreeMap<PauliWord, S> {
    let oat = build_oat_map(n, chi);
    if chi.to_f64() == 0.0 {
        return oat;
    }
    let (sin_e, cos_e) = epsilon_trig(n, chi);
    // theta = epsilon + pi/2: cos(theta) = -sin(eps), sin(theta) = cos(eps).
    rotate_map(&oat, -sin_e, cos_e).expect("the twisted table is complete by construction")
}

/* Public f64 tables **********************************************************/

/// Exact moment table in a named frame.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    frame: Frame,
    n: u64,
    chi: f64,
    params: Option<ChannelParams>,
    entries: BTreeMap<PauliWord, f64>,
}

impl MomentTable {
    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn params(&self) -> Option<ChannelParams> {
        self.params
    }

    pub fn get(&self, word: &PauliWord) -> Option<f64> {
        self.entries.get(word).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&PauliWord, f64)> {
        self.entries.iter().map(|(w, v)| (w, *v))
    }

    /// Serialize to the documented JSON shape:
    /// `{"frame": ..., "n": ..., "chi": ..., "eta": ..., "phi": ..., "entries": [{"word": "xxyy", "value": ...}]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<_> = self
            .entries
            .iter()
            .map(|(w, v)| serde_json::json!({ "word": w.to_string(), "value": v }))
            .collect();
        serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "frame": match self.frame {
                Frame::Oat => "OAT",
                Frame::Roat => "ROAT",
                Frame::Output => "OUTPUT",
            },
            "n": self.n,
            "chi": self.chi,
            "eta": self.params.map(|p| p.eta()),
            "phi": self.params.map(|p| p.phi()),
            "entries": entries,
        })
    }
}

/// Closed-form moment of the twisted state.
pub fn oat_moment(word: &PauliWord, n: u64, chi: f64) -> Result<f64> {
    oat_value(word, n, chi).ok_or(Error::WordTooLong { len: word.len(), n })
}

/// Complete twisted-frame table for all words up to four sites (or `n`).
pub fn oat_table(n: u64, chi: f64) -> MomentTable {
    MomentTable {
        frame: Frame::Oat,
        n,
        chi,
        params: None,
        entries: build_oat_map(n, chi),
    }
}

/// Rotate a twisted-frame table site-wise about `x` by `theta`.
pub fn rotate_moments(table: &MomentTable, theta: f64) -> Result<MomentTable> {
    if table.frame != Frame::Oat {
        return Err(Error::WrongFrame {
            expected: Frame::Oat,
            found: table.frame,
        });
    }
    let entries = rotate_map(&table.entries, theta.cos(), theta.sin())?;
    Ok(MomentTable {
        frame: Frame::Roat,
        n: table.n,
        chi: table.chi,
        params: None,
        entries,
    })
}

/// Rotated-frame table with the sign convention that zeroes the `yz` moment
/// and makes `y` the minimal-variance direction.
pub fn roat_moments(config: &SqueezingConfig) -> MomentTable {
    MomentTable {
        frame: Frame::Roat,
        n: config.n(),
        chi: config.chi(),
        params: None,
        entries: build_roat_map(config.n(), config.chi()),
    }
}

/// Evolve a rotated-frame table through the dual channel.
pub fn output_moments(roat: &MomentTable, params: ChannelParams) -> Result<MomentTable> {
    if roat.frame != Frame::Roat {
        return Err(Error::WrongFrame {
            expected: Frame::Roat,
            found: roat.frame,
        });
    }
    let entries = dual_map(
        &roat.entries,
        params.eta(),
        params.phi().cos(),
        params.phi().sin(),
    )?;
    Ok(MomentTable {
        frame: Frame::Output,
        n: roat.n,
        chi: roat.chi,
        params: Some(params),
        entries,
    })
}

/* Diagnostics ****************************************************************/

/// Measured constant of the near-Gaussian factorization
/// `<ii jj> - <ii><jj> = O(N^2 chi^4)` along `chi = N^{-3/4}`.
///
/// Returns the largest `|<ii jj> - <ii><jj>| / (N^2 chi^4)` over the axis pairs
/// and the grid — reported, never asserted, since the constant is not pinned
/// by theory.
pub fn gaussian_factorization_constant(n_grid: &[u64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &n in n_grid {
        let chi = (n as f64).powf(-0.75);
        let map = build_roat_map(n, chi);
        let scale = (n as f64).powi(2) * chi.powi(4);
        for a in Axis::ALL {
            for b in Axis::ALL {
                let mut axes = vec![a, a, b, b];
                axes.sort();
                let m4 = map[&PauliWord::new(&axes).unwrap()];
                let m2a = map[&PauliWord::new(&[a, a]).unwrap()];
                let m2b = map[&PauliWord::new(&[b, b]).unwrap()];
                worst = worst.max((m4 - m2a * m2b).abs() / scale);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerances;
    use proptest::prelude::*;

    #[test]
    fn word_canonicalization() {
        let a = PauliWord::new(&[Axis::Z, Axis::X, Axis::Y]).unwrap();
        let b = PauliWord::parse("xyz").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "xyz");
        assert!(PauliWord::new(&[]).is_err());
        assert!(PauliWord::new(&[Axis::X; 5]).is_err());
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(PauliWord::enumerate(1).len(), 3);
        assert_eq!(PauliWord::enumerate(2).len(), 9);
        assert_eq!(PauliWord::enumerate(4).len(), 34);
    }

    #[test]
    fn epsilon_special_cases() {
        // N = 2: denominator vanishes, numerator positive.
        assert!((epsilon_angle(2, 0.4) - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        // chi -> 0 limit.
        assert!((epsilon_angle(7, 1e-6) - std::f64::consts::FRAC_PI_4).abs() < 1e-5);
        assert_eq!(epsilon_angle(7, 0.0), std::f64::consts::FRAC_PI_4);
        // Direct evaluation at n = 4, chi = 0.3.
        let expected =
            0.5 * (4.0 * 0.3f64.sin() * 0.3f64.cos().powi(2)).atan2(1.0 - 0.6f64.cos().powi(2));
        let got = epsilon_angle(4, 0.3);
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.6418).abs() < 5e-4);
    }

    #[test]
    fn epsilon_trig_matches_angle() {
        for &(n, chi) in &[(4u64, 0.3), (6, 0.2), (10, 0.7), (50, 0.05), (2, 0.9)] {
            let e = epsilon_angle(n, chi);
            let (s, c) = epsilon_trig::<f64>(n, chi);
            assert!((s - e.sin()).abs() < 1e-13, "sin eps at n={n} chi={chi}");
            assert!((c - e.cos()).abs() < 1e-13, "cos eps at n={n} chi={chi}");
        }
    }

    #[test]
    fn oat_reference_values() {
        // Product state along x at chi = 0.
        assert_eq!(
            oat_moment(&PauliWord::parse("xx").unwrap(), 7, 0.0).unwrap(),
            1.0
        );
        // (xx, n=4, chi=0.3) = (1 + cos^2(0.6)) / 2.
        let xx = oat_moment(&PauliWord::parse("xx").unwrap(), 4, 0.3).unwrap();
        assert!((xx - (1.0 + 0.6f64.cos().powi(2)) / 2.0).abs() < 1e-15);
        assert!((xx - 0.840589).abs() < 5e-7);
        // (yz, n=4, chi=0.3) = sin(0.3) cos^2(0.3).
        let yz = oat_moment(&PauliWord::parse("yz").unwrap(), 4, 0.3).unwrap();
        assert!((yz - 0.3f64.sin() * 0.3f64.cos().powi(2)).abs() < 1e-15);
        assert!((yz - 0.26971).abs() < 5e-6);
        // Odd y+z words vanish exactly.
        assert_eq!(
            oat_moment(&PauliWord::parse("yyy").unwrap(), 8, 0.4).unwrap(),
            0.0
        );
        assert_eq!(
            oat_moment(&PauliWord::parse("xy").unwrap(), 8, 0.4).unwrap(),
            0.0
        );
        // Word longer than the register.
        assert!(oat_moment(&PauliWord::parse("xxx").unwrap(), 2, 0.1).is_err());
    }

    #[test]
    fn rotation_identity_is_noop() {
        let table = oat_table(6, 0.2);
        let rotated = rotate_moments(&table, 0.0).unwrap();
        for (w, v) in table.entries() {
            assert!((rotated.get(w).unwrap() - v).abs() < 1e-15);
        }
    }

    #[test]
    fn roat_zeroes_yz_and_squeezes_y() {
        let cfg = SqueezingConfig::new(6, 0.2).unwrap();
        let table = roat_moments(&cfg);
        let yz = table.get(&PauliWord::parse("yz").unwrap()).unwrap();
        assert!(yz.abs() <= 1e-14, "cross moment must vanish, got {yz}");
        let yy = table.get(&PauliWord::parse("yy").unwrap()).unwrap();
        assert!(
            yy < 0.0,
            "pair correlation along y must be negative, got {yy}"
        );
        let zz = table.get(&PauliWord::parse("zz").unwrap()).unwrap();
        assert!(yy < zz, "y must be the minimal-variance direction");
    }

    #[test]
    fn roat_equals_explicit_rotation() {
        let cfg = SqueezingConfig::new(8, 0.25).unwrap();
        let direct = roat_moments(&cfg);
        let via_rotate = rotate_moments(
            &oat_table(8, 0.25),
            cfg.epsilon() + std::f64::consts::FRAC_PI_2,
        )
        .unwrap();
        for (w, v) in direct.entries() {
            assert!(
                (via_rotate.get(w).unwrap() - v).abs() < 1e-13,
                "mismatch at {w}: {} vs {v}",
                via_rotate.get(w).unwrap()
            );
        }
    }

    #[test]
    fn chi_zero_collapses_to_product_table() {
        let cfg = SqueezingConfig::new(9, 0.0).unwrap();
        let table = roat_moments(&cfg);
        for (w, v) in table.entries() {
            let expected = if w.yz_count() == 0 { 1.0 } else { 0.0 };
            assert_eq!(v, expected, "word {w}");
        }
    }

    #[test]
    fn output_identity_channel_is_noop() {
        let cfg = SqueezingConfig::new(6, 0.3).unwrap();
        let roat = roat_moments(&cfg);
        let out = output_moments(&roat, ChannelParams::new(1.0, 0.0).unwrap()).unwrap();
        for (w, v) in roat.entries() {
            assert!((out.get(w).unwrap() - v).abs() < 1e-15);
        }
    }

    #[test]
    fn output_full_dephasing_kills_equatorial_words() {
        let cfg = SqueezingConfig::new(6, 0.3).unwrap();
        let roat = roat_moments(&cfg);
        let out = output_moments(&roat, ChannelParams::new(0.0, 0.0).unwrap()).unwrap();
        for (w, v) in out.entries() {
            if w.axes().iter().any(|a| *a != Axis::Z) {
                assert_eq!(v, 0.0, "word {w} should vanish under full dephasing");
            } else {
                assert_eq!(v, roat.get(w).unwrap(), "z-only word {w} must be unchanged");
            }
        }
    }

    #[test]
    fn dd_table_agrees_with_f64_table() {
        for &(n, chi) in &[(10u64, 0.3), (1000, 0.01), (100_000, 2e-4)] {
            let f = build_roat_map::<f64>(n, chi);
            let d = build_roat_map(n, crate::numerics::Dd::new(chi));
            for (w, v) in &f {
                let dv = d[w].to_f64();
                // Structural zeros land at each path's own rounding level.
                assert!(
                    (dv - v).abs() <= 1e-13 * v.abs() + 1e-14,
                    "n={n} chi={chi} word {w}: {dv} vs {v}"
                );
            }
        }
    }

    #[test]
    fn gaussian_factorization_constant_is_reported() {
        // The pair-product factorization error is O(N^2 chi^4) along
        // chi = N^{-3/4}; the constant is measured, not assumed.
        let c = gaussian_factorization_constant(&[100, 1_000, 10_000, 100_000, 1_000_000]);
        println!("near-Gaussian factorization constant: {c:.6}");
        assert!(c.is_finite() && c > 0.0);
    }

    #[test]
    fn table_json_shape() {
        let cfg = SqueezingConfig::new(4, 0.3).unwrap();
        let out =
            output_moments(&roat_moments(&cfg), ChannelParams::new(0.8, 0.5).unwrap()).unwrap();
        let json = out.to_json();
        assert_eq!(json["frame"], "OUTPUT");
        assert_eq!(json["n"], 4);
        assert_eq!(json["eta"], 0.8);
        assert!(json["entries"].as_array().unwrap().len() == 34);
        assert!(json["entries"][0]["word"].is_string());
    }

    proptest! {
        #[test]
        fn moments_stay_in_unit_interval(
            n in 2u64..40,
            chi in 0.0..1.5f64,
            eta in 0.0..=1.0f64,
            phi in 0.0..6.28f64,
        ) {
            let cfg = SqueezingConfig::new(n, chi).unwrap();
            let roat = roat_moments(&cfg);
            for (_, v) in roat.entries() {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v));
            }
            let out = output_moments(&roat, ChannelParams::new(eta, phi).unwrap()).unwrap();
            for (_, v) in out.entries() {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v));
            }
        }

        #[test]
        fn odd_yz_words_vanish(
            n in 4u64..60,
            chi in 0.0..1.5f64,
        ) {
            let cfg = SqueezingConfig::new(n, chi).unwrap();
            let roat = roat_moments(&cfg);
            for (w, v) in roat.entries() {
                if w.yz_count() % 2 == 1 {
                    prop_assert!(v.abs() <= tolerances::STRUCTURAL_ZERO, "word {} -> {}", w, v);
                }
            }
        }
    }
}
