//! Floating-point machinery for moment evaluation at large `N`.
//!
//! Two ingredients keep the closed forms accurate over the full parameter
//! range (`N` up to 10^8, `chi` down to `N^{-5/6}`):
//!
//! * compensated forms for `cos^M(u)` and `1 - cos^M(u)`, which route the
//!   power through `ln_1p`/`exp_m1` so that neither `cos(u) ~ 1` nor
//!   `cos^M(u) ~ 1` loses relative precision, and
//! * a double-double scalar [`Dd`] (~106-bit significand) used by the
//!   collective statistics when fourth-minus-squared-second moment differences
//!   become many orders smaller than the O(1) terms they are built from.
//!
//! The [`Scalar`] trait lets the moment formulas be written once and run at
//! either precision.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// `cos(u) - 1` without cancellation: `-2 sin^2(u/2)`.
#[inline]
pub fn cos_minus_one(u: f64) -> f64 {
    let s = (0.5 * u).sin();
    -2.0 * s * s
}

/// `ln |cos u|`, accurate even when `|cos u|` is within an ulp of 1.
///
/// Near `cos u ~ +1` uses `ln_1p(-2 sin^2(u/2))`; near `cos u ~ -1` uses
/// `|cos u| = 1 - 2 cos^2(u/2)`. Elsewhere the plain logarithm is safe.
fn ln_abs_cos(u: f64) -> f64 {
    let c = u.cos();
    if c >= 0.5 {
        cos_minus_one(u).ln_1p()
    } else if c <= -0.5 {
        let h = (0.5 * u).cos();
        (-2.0 * h * h).ln_1p()
    } else {
        c.abs().ln()
    }
}

/// `cos^m(u)` via `exp(m ln|cos u|)` with explicit sign tracking.
///
/// Direct `powi` underflows in accuracy once `m ln cos` has to be resolved
/// from a `cos` that rounds to 1; this path keeps full relative precision.
pub fn cos_pow(u: f64, m: u64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let c = u.cos();
    if c == 0.0 {
        return 0.0;
    }
    let sign = if c < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
    sign * (m as f64 * ln_abs_cos(u)).exp()
}

/// `1 - cos^m(u)` with full relative precision.
///
/// For a positive power this is `-exp_m1(m ln|cos u|)`; a negative power makes
/// the subtraction benign.
pub fn one_minus_cos_pow(u: f64, m: u64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let c = u.cos();
    if c == 0.0 {
        return 1.0;
    }
    if c > 0.0 || m.is_multiple_of(2) {
        -(m as f64 * ln_abs_cos(u)).exp_m1()
    } else {
        1.0 + (m as f64 * ln_abs_cos(u)).exp()
    }
}

/* Double-double arithmetic ***************************************************/

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    (s, (a - (s - v)) + (b - v))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b| or a == 0
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Unevaluated sum of two doubles, `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// 2*pi to double-double precision (low word extends the f64 constant).
    pub const TWO_PI: Dd = Dd {
        hi: std::f64::consts::TAU,
        lo: 2.4492935982947064e-16,
    };

    #[inline]
    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        // One Newton step on top of the f64 square root doubles its precision.
        let s = self.hi.sqrt();
        let sd = Dd::new(s);
        let e = (self - sd * sd).hi / (2.0 * s);
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    /// Integer power by binary exponentiation.
    pub fn powi(self, mut m: u64) -> Dd {
        let mut base = self;
        let mut acc = Dd::ONE;
        while m > 0 {
            if m & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            m >>= 1;
        }
        acc
    }

    /// Fold into `[-pi, pi]`. Arguments here are bounded by `4 chi < 2 pi`,
    /// so a single subtraction suffices.
    fn fold(self) -> Dd {
        let mut x = self;
        while x.hi > std::f64::consts::PI {
            x = x - Dd::TWO_PI;
        }
        while x.hi < -std::f64::consts::PI {
            x = x + Dd::TWO_PI;
        }
        x
    }

    /// Taylor sine; converges to double-double precision for |x| <= pi.
    pub fn sin(self) -> Dd {
        let x = self.fold();
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 1u64;
        loop {
            term = -term * x2 / Dd::new(((2 * k) * (2 * k + 1)) as f64);
            let next = sum + term;
            if next == sum || k > 60 {
                return next;
            }
            sum = next;
            k += 1;
        }
    }

    /// Taylor cosine; converges to double-double precision for |x| <= pi.
    pub fn cos(self) -> Dd {
        let x = self.fold();
        let x2 = x * x;
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        let mut k = 1u64;
        loop {
            term = -term * x2 / Dd::new(((2 * k - 1) * (2 * k)) as f64);
            let next = sum + term;
            if next == sum || k > 60 {
                return next;
            }
            sum = next;
            k += 1;
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e } + Dd::new(q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, o: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            other => other,
        }
    }
}

/* Scalar abstraction *********************************************************/

/// Arithmetic needed by the moment closed forms, implemented by `f64` (with
/// the compensated power path) and by [`Dd`].
pub trait Scalar:
    Copy
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sin(self) -> Self;
    fn sqrt(self) -> Self;
    /// `cos^m(angle)`.
    fn cos_pow(angle: Self, m: u64) -> Self;
    /// `1 - cos^m(angle)` at full relative precision.
    fn one_minus_cos_pow(angle: Self, m: u64) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> f64 {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn sin(self) -> f64 {
        f64::sin(self)
    }
    #[inline]
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    #[inline]
    fn cos_pow(angle: f64, m: u64) -> f64 {
        cos_pow(angle, m)
    }
    #[inline]
    fn one_minus_cos_pow(angle: f64, m: u64) -> f64 {
        one_minus_cos_pow(angle, m)
    }
}

impl Scalar for Dd {
    #[inline]
    fn from_f64(x: f64) -> Dd {
        Dd::new(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    fn sin(self) -> Dd {
        Dd::sin(self)
    }
    fn sqrt(self) -> Dd {
        Dd::sqrt(self)
    }
    fn cos_pow(angle: Dd, m: u64) -> Dd {
        angle.cos().powi(m)
    }
    fn one_minus_cos_pow(angle: Dd, m: u64) -> Dd {
        Dd::ONE - angle.cos().powi(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cos_pow_matches_naive_at_moderate_m() {
        for &(u, m) in &[(0.3f64, 7u64), (1.2, 3), (2.9, 5), (0.05, 40)] {
            let naive = u.cos().powi(m as i32);
            let ours = cos_pow(u, m);
            assert!(
                (naive - ours).abs() <= 1e-14 * naive.abs().max(1e-30),
                "u={u} m={m}"
            );
        }
    }

    #[test]
    fn cos_pow_sign_for_negative_base() {
        // cos(2.5) < 0
        assert!(cos_pow(2.5, 3) < 0.0);
        assert!(cos_pow(2.5, 4) > 0.0);
    }

    #[test]
    fn one_minus_cos_pow_small_angle_large_m() {
        // 1 - cos^m(u) ~ m u^2 / 2 for tiny m u^2.
        let u = 1e-7;
        let m = 1_000u64;
        let expected = m as f64 * u * u / 2.0;
        let got = one_minus_cos_pow(u, m);
        assert!((got - expected).abs() <= 1e-10 * expected);
    }

    #[test]
    fn one_minus_cos_pow_edges() {
        assert_eq!(one_minus_cos_pow(0.3, 0), 0.0);
        assert_eq!(cos_pow(0.3, 0), 1.0);
        assert_eq!(one_minus_cos_pow(std::f64::consts::FRAC_PI_2, 5), 1.0);
    }

    #[test]
    fn dd_roundtrip_arithmetic() {
        let a = Dd::new(1.0) / Dd::new(3.0);
        let b = a * Dd::new(3.0);
        assert!((b - Dd::ONE).abs().to_f64() < 1e-31);

        let s = Dd::new(2.0).sqrt();
        assert!((s * s - Dd::new(2.0)).abs().to_f64() < 1e-31);
    }

    #[test]
    fn dd_trig_vs_f64() {
        for &x in &[0.0, 0.1, 0.7, 1.5, 3.0, 6.0] {
            assert!((Dd::new(x).sin().to_f64() - x.sin()).abs() < 1e-15);
            assert!((Dd::new(x).cos().to_f64() - x.cos()).abs() < 1e-15);
        }
    }

    /// References computed at 256-bit precision from the exact binary `chi`
    /// values (frozen as bit patterns), along `chi = N^{-5/6}`.
    #[test]
    fn compensated_path_matches_256bit_references() {
        let cases: [(u64, u64, &str); 7] = [
            (
                1e2 as u64,
                0x3F960FB8A566F626u64,
                "0.08698530786499797550163388168900626889097",
            ),
            (
                1e3 as u64,
                0x3F69E7C6E43390B5u64,
                "0.01976224840051319274397431442856985050401",
            ),
            (
                1e4 as u64,
                0x3F3E6B4B396428E5u64,
                "0.004298742068511154700879397024595051154836",
            ),
            (
                1e5 as u64,
                0x3F11DC12DCBC7F68u64,
                "0.0009278684668287738551099646729922765625699",
            ),
            (
                1e6 as u64,
                0x3EE4F8B588E368EDu64,
                "0.000199979601426588991880101274694731700108",
            ),
            (
                1e7 as u64,
                0x3EB8A0265CAB7A9Eu64,
                "0.00004308775687889854030592586001206437572469",
            ),
            (
                1e8 as u64,
                0x3E8CEA94CB5C6FEBu64,
                "0.000009283134393003534363276137146161448673366",
            ),
        ];
        for (n, chi_bits, reference) in cases {
            let chi = f64::from_bits(chi_bits);
            assert!((chi - (n as f64).powf(-5.0 / 6.0)).abs() <= 1e-18 * chi.abs());
            let expected: f64 = reference.parse().unwrap();
            let got = one_minus_cos_pow(2.0 * chi, n - 2);
            assert!(
                ((got - expected) / expected).abs() <= crate::tolerances::STABILITY_REL,
                "n={n}: {got:e} vs {expected:e}"
            );
        }
    }

    #[test]
    fn dd_powi_matches_compensated_f64() {
        let chi: f64 = 1e-4;
        let m = 100_000_000u64;
        let dd = Dd::new(2.0 * chi).cos().powi(m).to_f64();
        let f = cos_pow(2.0 * chi, m);
        assert!((dd - f).abs() <= 1e-13 * dd.abs());
    }
}
