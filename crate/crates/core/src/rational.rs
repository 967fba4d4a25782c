//! Exact fractions: bounded-denominator enumeration, mediants and
//! denominator expansion.
//!
//! Two fraction types are used. [`ReducedRational`] is a value in lowest
//! terms; [`Fraction`] keeps the representative it was built with, because
//! the sequence construction needs non-reduced forms like `4/12` and `6/12`
//! whose numerators and denominators are added separately.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// A rational number in lowest terms with a positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedRational(BigRational);

impl ReducedRational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::NonPositiveDenominator(den.to_string()));
        }
        Ok(Self(BigRational::new(num.into(), den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.0)
    }
}

impl From<BigRational> for ReducedRational {
    fn from(r: BigRational) -> Self {
        // `Ratio::new` already normalises, but values built with `new_raw`
        // may not be.
        let (n, d) = r.into();
        Self(BigRational::new(n, d))
    }
}

impl fmt::Display for ReducedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for ReducedRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed = match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad_number(s))?;
                let d: BigInt = d.trim().parse().map_err(|_| bad_number(s))?;
                return Self::new(n, d);
            }
            None => parse_decimal(s),
        };
        parsed.map(Self).ok_or_else(|| bad_number(s))
    }
}

fn bad_number(s: &str) -> Error {
    Error::NonPositiveDenominator(alloc::format!("unparseable rational {s:?}"))
}

/// Parses `123`, `-4.25` or `1e3`-free decimals exactly.
fn parse_decimal(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = alloc::format!("{int}{frac}0").parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10u8), frac.len() + 1);
    let v = BigRational::new(digits, scale);
    Some(if neg { -v } else { v })
}

/// A fraction `num/den` with `den ≥ 1`, kept in the representation it was
/// built with.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: BigInt,
    den: BigInt,
}

impl Fraction {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if !den.is_positive() {
            return Err(Error::NonPositiveDenominator(den.to_string()));
        }
        Ok(Self {
            num: num.into(),
            den,
        })
    }

    pub fn num(&self) -> &BigInt {
        &self.num
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn value(&self) -> BigRational {
        BigRational::new(self.num.clone(), self.den.clone())
    }

    pub fn reduced(&self) -> ReducedRational {
        ReducedRational(self.value())
    }

    /// Compares the represented values (not the representations).
    pub fn cmp_value(&self, other: &Fraction) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&BigRational::new_raw(self.num.clone(), self.den.clone()))
    }
}

impl From<&ReducedRational> for Fraction {
    fn from(r: &ReducedRational) -> Self {
        Self {
            num: r.numer().clone(),
            den: r.denom().clone(),
        }
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Converts a big rational to the nearest-ish `f64` without overflowing on
/// huge numerators and denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
        if n.unsigned_abs() < (1 << 53) && d < (1 << 53) {
            return n as f64 / d as f64;
        }
    }
    r.to_f64().unwrap_or(f64::NAN)
}

fn check_interval(lo: &BigRational, hi: &BigRational, qmax: u64) -> Result<()> {
    if lo >= hi {
        return Err(Error::EmptyInterval {
            lo: lo.to_string(),
            hi: hi.to_string(),
        });
    }
    if qmax == 0 {
        return Err(Error::ZeroDenominatorBound);
    }
    Ok(())
}

/// Numerator range `ceil(lo·q) ..= floor(hi·q)` for denominator `q`.
fn numerator_range(lo: &BigRational, hi: &BigRational, q: u64) -> (BigInt, BigInt) {
    let q = BigRational::from_integer(BigInt::from(q));
    let pmin = (lo * &q).ceil().to_integer();
    let pmax = (hi * &q).floor().to_integer();
    (pmin, pmax)
}

/// All distinct rationals `r` with `lo ≤ r ≤ hi` whose reduced denominator is
/// at most `qmax`, in increasing order. Both endpoints are included.
pub fn enumerate_fractions(
    lo: &BigRational,
    hi: &BigRational,
    qmax: u64,
) -> Result<Vec<ReducedRational>> {
    check_interval(lo, hi, qmax)?;

    // Each rational shows up exactly once, at its reduced denominator, so
    // filtering on gcd(p, q) = 1 is the whole dedupe.
    let mut small: Vec<(i64, i64)> = Vec::new();
    let mut big: Vec<BigRational> = Vec::new();
    for q in 1..=qmax {
        let (pmin, pmax) = numerator_range(lo, hi, q);
        match (pmin.to_i64(), pmax.to_i64(), i64::try_from(q)) {
            (Some(a), Some(b), Ok(qi)) => {
                for p in a..=b {
                    if p.unsigned_abs().gcd(&q) == 1 {
                        small.push((p, qi));
                    }
                }
            }
            _ => {
                let qb = BigInt::from(q);
                let mut p = pmin;
                while p <= pmax {
                    if p.gcd(&qb).is_one() {
                        big.push(BigRational::new_raw(p.clone(), qb.clone()));
                    }
                    p += 1;
                }
            }
        }
    }

    small.sort_unstable_by(|&(p1, q1), &(p2, q2)| {
        (i128::from(p1) * i128::from(q2)).cmp(&(i128::from(p2) * i128::from(q1)))
    });
    let mut out: Vec<ReducedRational> = small
        .into_iter()
        .map(|(p, q)| ReducedRational(BigRational::new_raw(p.into(), q.into())))
        .collect();
    if !big.is_empty() {
        out.extend(big.into_iter().map(ReducedRational));
        out.sort_unstable();
    }
    Ok(out)
}

/// Number of rationals [`enumerate_fractions`] would return, without
/// materialising them.
pub fn count_fractions(lo: &BigRational, hi: &BigRational, qmax: u64) -> Result<u64> {
    check_interval(lo, hi, qmax)?;
    let mut count = 0u64;
    for q in 1..=qmax {
        let (pmin, pmax) = numerator_range(lo, hi, q);
        match (pmin.to_i64(), pmax.to_i64()) {
            (Some(a), Some(b)) => {
                for p in a..=b {
                    if p.unsigned_abs().gcd(&q) == 1 {
                        count += 1;
                    }
                }
            }
            _ => {
                let qb = BigInt::from(q);
                let mut p = pmin;
                while p <= pmax {
                    if p.gcd(&qb).is_one() {
                        count += 1;
                    }
                    p += 1;
                }
            }
        }
    }
    Ok(count)
}

/// `(n1 + n2)/(d1 + d2)`, unreduced. Requires `f1 < f2`; the result lies
/// strictly between them.
pub fn mediant(f1: &Fraction, f2: &Fraction) -> Result<Fraction> {
    if f1.cmp_value(f2) != Ordering::Less {
        return Err(Error::MediantOrder {
            f1: f1.to_string(),
            f2: f2.to_string(),
        });
    }
    Ok(Fraction {
        num: &f1.num + &f2.num,
        den: &f1.den + &f2.den,
    })
}

/// Rewrites `r` with a denominator in `[lo, hi]` that is a multiple of
/// `r.den`, picking the smallest such multiple.
pub fn expand_to_range(r: &ReducedRational, lo: f64, hi: f64) -> Result<Fraction> {
    let infeasible = || Error::ExpansionInfeasible {
        den: r.denom().to_string(),
        lo,
        hi,
    };
    let lo_exact = BigRational::from_float(lo).ok_or_else(infeasible)?;
    let hi_exact = BigRational::from_float(hi).ok_or_else(infeasible)?;
    expand_to_range_exact(r, &lo_exact, &hi_exact)
}

/// [`expand_to_range`] with exact bounds.
pub fn expand_to_range_exact(
    r: &ReducedRational,
    lo: &BigRational,
    hi: &BigRational,
) -> Result<Fraction> {
    let q = r.denom();
    let k = (lo / BigRational::from_integer(q.clone()))
        .ceil()
        .to_integer()
        .max(BigInt::one());
    let den = q * &k;
    if BigRational::from_integer(den.clone()) > *hi {
        return Err(Error::ExpansionInfeasible {
            den: q.to_string(),
            lo: ratio_to_f64(lo),
            hi: ratio_to_f64(hi),
        });
    }
    Ok(Fraction {
        num: r.numer() * &k,
        den,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn rr(n: i64, d: i64) -> ReducedRational {
        ReducedRational::new(n, d).unwrap()
    }

    #[test]
    fn enumerates_third_to_two_thirds() {
        let got = enumerate_fractions(&q(1, 3), &q(2, 3), 3).unwrap();
        assert_eq!(got, vec![rr(1, 3), rr(1, 2), rr(2, 3)]);
    }

    #[test]
    fn enumerates_one_to_two() {
        let got = enumerate_fractions(&q(1, 1), &q(2, 1), 3).unwrap();
        assert_eq!(got, vec![rr(1, 1), rr(4, 3), rr(3, 2), rr(5, 3), rr(2, 1)]);
        assert_eq!(count_fractions(&q(1, 1), &q(2, 1), 3).unwrap(), 5);
        assert_eq!(count_fractions(&q(1, 1), &q(2, 1), 1).unwrap(), 2);
    }

    #[test]
    fn no_integers_strictly_inside() {
        assert!(enumerate_fractions(&q(1, 3), &q(2, 3), 1).unwrap().is_empty());
    }

    #[test]
    fn rejects_empty_interval() {
        assert!(matches!(
            enumerate_fractions(&q(2, 3), &q(1, 3), 5),
            Err(Error::EmptyInterval { .. })
        ));
        assert!(count_fractions(&q(1, 2), &q(1, 2), 5).is_err());
        assert_eq!(
            enumerate_fractions(&q(0, 1), &q(1, 1), 0),
            Err(Error::ZeroDenominatorBound)
        );
    }

    #[test]
    fn negative_ranges() {
        let got = enumerate_fractions(&q(-1, 1), &q(0, 1), 2).unwrap();
        assert_eq!(got, vec![rr(-1, 1), rr(-1, 2), rr(0, 1)]);
    }

    #[test]
    fn mediant_examples() {
        let m = mediant(&Fraction::new(1, 2).unwrap(), &Fraction::new(2, 3).unwrap()).unwrap();
        assert_eq!((m.num().clone(), m.den().clone()), (3.into(), 5.into()));
        let m = mediant(&Fraction::new(4, 12).unwrap(), &Fraction::new(6, 12).unwrap()).unwrap();
        assert_eq!(m.to_string(), "10/24");
        let m = mediant(&Fraction::new(0, 1).unwrap(), &Fraction::new(1, 1).unwrap()).unwrap();
        assert_eq!(m.to_string(), "1/2");
    }

    #[test]
    fn mediant_rejects_misordered() {
        let a = Fraction::new(2, 3).unwrap();
        let b = Fraction::new(4, 6).unwrap();
        assert!(mediant(&a, &b).is_err());
        assert!(mediant(&b, &Fraction::new(1, 2).unwrap()).is_err());
    }

    #[test]
    fn expansion_examples() {
        assert_eq!(expand_to_range(&rr(1, 2), 4.0, 8.0).unwrap().to_string(), "2/4");
        assert_eq!(
            expand_to_range(&rr(1, 3), 10.67, 21.33).unwrap().to_string(),
            "4/12"
        );
        assert!(matches!(
            expand_to_range(&rr(2, 3), 2.0, 2.5),
            Err(Error::ExpansionInfeasible { .. })
        ));
    }

    #[test]
    fn expansion_exact_bound_is_inclusive() {
        let got = expand_to_range_exact(&rr(1, 2), &q(8, 1), &q(16, 1)).unwrap();
        assert_eq!(got.to_string(), "4/8");
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!("3/6".parse::<ReducedRational>().unwrap(), rr(1, 2));
        assert_eq!("-0.25".parse::<ReducedRational>().unwrap(), rr(-1, 4));
        assert_eq!("12".parse::<ReducedRational>().unwrap(), rr(12, 1));
        assert!("1/0".parse::<ReducedRational>().is_err());
        assert!("abc".parse::<ReducedRational>().is_err());
    }
}
