//! Powers `N^α` and the lattices `N^{-α}ℤ`.
//!
//! `N^α` is rational exactly when it is an integer or the reciprocal of one.
//! For the exponents used here (dyadic or small-denominator rationals) and
//! `N` a power of two this is the common case, and every comparison against
//! the lattice can then be done in exact arithmetic.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
// `Float` supplies the f64 math methods without std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::rational::ratio_to_f64;

/// Largest denominator tried when recognising `alpha` as a rational.
const MAX_EXPONENT_DENOMINATOR: u64 = 720;

/// Recovers `alpha = p/q` (lowest terms, `q ≤ 720`) from a float, if `alpha`
/// is within `1e-12` of such a fraction.
pub fn exponent_as_fraction(alpha: f64) -> Option<(i64, u64)> {
    if !alpha.is_finite() {
        return None;
    }
    // Continued-fraction convergents.
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut x = alpha;
    for _ in 0..64 {
        let a = x.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > i128::from(MAX_EXPONENT_DENOMINATOR) {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (alpha - h1 as f64 / k1 as f64).abs() <= 1e-12 {
            return Some((h1 as i64, k1 as u64));
        }
        let frac = x - a;
        if frac == 0.0 {
            return None;
        }
        x = 1.0 / frac;
    }
    None
}

/// `n^alpha` as an exact rational, when it is one.
pub fn exact_power(n: u64, alpha: f64) -> Option<BigRational> {
    if n == 0 {
        return None;
    }
    let (p, q) = exponent_as_fraction(alpha)?;
    let nb = BigUint::from(n);
    let root = if q == 1 {
        nb
    } else {
        let r = nb.nth_root(u32::try_from(q).ok()?);
        if num_traits::pow(r.clone(), q as usize) != BigUint::from(n) {
            return None;
        }
        r
    };
    let mag = num_traits::pow(BigInt::from(root), p.unsigned_abs() as usize);
    Some(if p >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    })
}

/// `n^alpha` as a float, snapped to the exact value when one exists.
pub fn power_f64(n: u64, alpha: f64) -> f64 {
    match exact_power(n, alpha) {
        Some(r) => ratio_to_f64(&r),
        None => (n as f64).powf(alpha),
    }
}

/// `floor(n^alpha)`, exact whenever `n^alpha` is rational.
pub fn floor_power(n: u64, alpha: f64) -> u64 {
    match exact_power(n, alpha) {
        Some(r) => r.floor().to_integer().to_u64().unwrap_or(u64::MAX),
        None => (n as f64).powf(alpha).floor() as u64,
    }
}

/// The lattice `N^{-α}ℤ` for a given parameter `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    n: u64,
    alpha: f64,
    /// `N^α` when rational.
    inv_spacing: Option<BigRational>,
    inv_spacing_f64: f64,
}

impl Lattice {
    pub fn new(n: u64, alpha: f64) -> Self {
        let inv_spacing = exact_power(n, alpha);
        let inv_spacing_f64 = inv_spacing
            .as_ref()
            .map(ratio_to_f64)
            .unwrap_or_else(|| (n as f64).powf(alpha));
        Self {
            n,
            alpha,
            inv_spacing,
            inv_spacing_f64,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Lattice spacing `N^{-α}`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.inv_spacing_f64
    }

    /// `N^α` as a float.
    pub fn inv_spacing(&self) -> f64 {
        self.inv_spacing_f64
    }

    /// `N^α` when it is rational.
    pub fn exact_inv_spacing(&self) -> Option<&BigRational> {
        self.inv_spacing.as_ref()
    }

    /// The value `coord · N^{-α}` as a float.
    pub fn value_of(&self, coord: &BigRational) -> f64 {
        match &self.inv_spacing {
            Some(s) => ratio_to_f64(&(coord / s)),
            None => ratio_to_f64(coord) / self.inv_spacing_f64,
        }
    }

    /// Exact membership of a rational value. If `N^α` is irrational, only 0
    /// is a rational lattice point.
    pub fn contains_exact(&self, value: &BigRational) -> bool {
        match &self.inv_spacing {
            Some(s) => (value * s).is_integer(),
            None => value.is_zero(),
        }
    }

    /// Distance from `value` to the lattice, in absolute units.
    pub fn distance(&self, value: f64) -> f64 {
        let c = value * self.inv_spacing_f64;
        (c - c.round()).abs() / self.inv_spacing_f64
    }
}
