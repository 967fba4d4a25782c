//! Finite convex sequences, the uniform-convexity check, lattice hits, and
//! the two constructions of sequences with many lattice hits.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
// `Float` supplies the f64 math methods without std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::interp::{ConvexInterpolant, Knot};
use crate::lattice::{exact_power, floor_power, Lattice};
use crate::rational::{enumerate_fractions, expand_to_range_exact, ratio_to_f64};
use crate::{Error, Result};

/// Knots of a construction and, for each certified knot, its sample index and
/// integer lattice coordinate.
pub type KnotsAndHits = (Vec<Knot>, Vec<(usize, BigInt)>);

/// Certificate that `a_n = coord · N^{-alpha}`.
///
/// `coord` is kept exact; the value is a lattice point iff `coord` is an
/// integer.
#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub n: usize,
    pub alpha: f64,
    pub coord: BigRational,
}

impl Hit {
    pub fn new(n: usize, alpha: f64, coord: BigRational) -> Self {
        Self { n, alpha, coord }
    }

    pub fn is_lattice_member(&self) -> bool {
        self.coord.is_integer()
    }
}

/// How a sequence came to be.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Origin {
    Given,
    DirichletLike { alpha: f64 },
    SmallAlpha { alpha: f64 },
    Sheared { lambda: f64 },
    Restricted { beta: f64 },
}

/// Construction bookkeeping carried alongside the values.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SequenceMeta {
    pub origin: Origin,
    /// Integer factor applied to all sampled values.
    pub scale: u32,
    /// Number of knots the interpolant went through.
    pub knots: usize,
    /// Last knot index; samples past it come from the quadratic tail.
    pub last_knot_n: usize,
    /// Knot pairs dropped because they ran past `N`.
    pub trimmed: usize,
    /// Curvature floor of the interpolant.
    pub curvature_floor: f64,
}

impl SequenceMeta {
    fn given() -> Self {
        Self {
            origin: Origin::Given,
            scale: 1,
            knots: 0,
            last_knot_n: 0,
            trimmed: 0,
            curvature_floor: 0.0,
        }
    }
}

/// `a_1, …, a_N`. `values[0]` is `a_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSequence {
    values: Vec<f64>,
    exact: Option<Vec<BigRational>>,
    hits: Option<Vec<Hit>>,
    /// Second-difference window factor; 1 for ordinary sequences.
    theta: f64,
    meta: SequenceMeta,
}

/// Difference statistics. First differences are in units of `1/N`, second
/// differences in units of `θ/N²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvexityReport {
    pub n: usize,
    pub theta: f64,
    pub first_diff_min: f64,
    pub first_diff_max: f64,
    pub second_diff_min: f64,
    pub second_diff_max: f64,
    pub tightest_c: f64,
    pub pass: bool,
}

/// Smallest `C ≥ 1` with both windows `[1/C, C]` holding the given extremes.
fn tightest_c(fmin: f64, fmax: f64, smin: f64, smax: f64) -> f64 {
    if !(fmin > 0.0 && smin > 0.0) {
        return f64::INFINITY;
    }
    [1.0, 1.0 / fmin, fmax, 1.0 / smin, smax]
        .into_iter()
        .fold(1.0, f64::max)
}

/// Default float tolerance for lattice membership, `1e-9 · N^{-α}`.
pub fn default_tol(n: usize, alpha: f64) -> f64 {
    1e-9 * Lattice::new(n as u64, alpha).spacing()
}

fn same_level(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

impl ConvexSequence {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self {
            values,
            exact: None,
            hits: None,
            theta: 1.0,
            meta: SequenceMeta::given(),
        }
    }

    pub fn from_exact(exact: Vec<BigRational>) -> Self {
        let values = exact.iter().map(ratio_to_f64).collect();
        Self {
            values,
            exact: Some(exact),
            hits: None,
            theta: 1.0,
            meta: SequenceMeta::given(),
        }
    }

    pub fn with_hits(mut self, hits: Vec<Hit>) -> Self {
        self.hits = Some(hits);
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    /// The parameter `N`, equal to the length.
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exact_values(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    pub fn hits(&self) -> Option<&[Hit]> {
        self.hits.as_deref()
    }

    pub fn meta(&self) -> &SequenceMeta {
        &self.meta
    }

    /// Checks the difference windows `[1/(4N), 4/N]` and `[θ/(4N²), 4θ/N²]`.
    pub fn validate(&self) -> Result<ConvexityReport> {
        let n = self.n();
        if n < 3 {
            return Err(Error::SequenceTooShort { needed: 3, got: n });
        }
        let nf = n as f64;
        let (fmin, fmax, smin, smax, exact_pass) = match &self.exact {
            Some(a) => {
                let d1: Vec<BigRational> = a.windows(2).map(|w| &w[1] - &w[0]).collect();
                let d2: Vec<BigRational> = d1.windows(2).map(|w| &w[1] - &w[0]).collect();
                let nb = BigRational::from_integer(BigInt::from(n));
                let n2 = &nb * &nb;
                let min_max = |v: &[BigRational], unit: &BigRational| {
                    let lo = v.iter().min().cloned().unwrap_or_else(BigRational::zero) * unit;
                    let hi = v.iter().max().cloned().unwrap_or_else(BigRational::zero) * unit;
                    (lo, hi)
                };
                let (f_lo, f_hi) = min_max(&d1, &nb);
                let (s_lo, s_hi) = min_max(&d2, &n2);
                let quarter = BigRational::new(1.into(), 4.into());
                let four = BigRational::from_integer(4.into());
                let theta_is_one = self.theta == 1.0;
                let pass = theta_is_one
                    && f_lo >= quarter
                    && f_hi <= four
                    && s_lo >= quarter
                    && s_hi <= four;
                (
                    ratio_to_f64(&f_lo),
                    ratio_to_f64(&f_hi),
                    ratio_to_f64(&s_lo) / self.theta,
                    ratio_to_f64(&s_hi) / self.theta,
                    theta_is_one.then_some(pass),
                )
            }
            None => {
                let a = &self.values;
                let mut fmin = f64::INFINITY;
                let mut fmax = f64::NEG_INFINITY;
                let mut smin = f64::INFINITY;
                let mut smax = f64::NEG_INFINITY;
                let mut prev: Option<f64> = None;
                for w in a.windows(2) {
                    let d = w[1] - w[0];
                    fmin = fmin.min(d);
                    fmax = fmax.max(d);
                    if let Some(p) = prev {
                        let s = d - p;
                        smin = smin.min(s);
                        smax = smax.max(s);
                    }
                    prev = Some(d);
                }
                let su = nf * nf / self.theta;
                (fmin * nf, fmax * nf, smin * su, smax * su, None)
            }
        };
        let c = tightest_c(fmin, fmax, smin, smax);
        Ok(ConvexityReport {
            n,
            theta: self.theta,
            first_diff_min: fmin,
            first_diff_max: fmax,
            second_diff_min: smin,
            second_diff_max: smax,
            tightest_c: c,
            pass: exact_pass.unwrap_or(c <= 4.0),
        })
    }

    fn certified(&self, alpha: f64) -> Option<Vec<usize>> {
        let hits = self.hits.as_ref()?;
        let mut idx: Vec<usize> = hits
            .iter()
            .filter(|h| same_level(h.alpha, alpha) && h.is_lattice_member())
            .map(|h| h.n)
            .collect();
        if idx.is_empty() && !hits.iter().any(|h| same_level(h.alpha, alpha)) {
            return None;
        }
        idx.sort_unstable();
        idx.dedup();
        Some(idx)
    }

    /// Indices `n` (1-based) with `dist(a_n, N^{-α}ℤ) ≤ tol`.
    ///
    /// With `tol = 0` membership is decided exactly: from exact values when
    /// present, otherwise from the hit certificate at level `alpha`.
    /// With `tol > 0`, certified hits and exact members always count and the
    /// remaining values are tested in floating point.
    pub fn intersect_count(&self, alpha: f64, tol: f64) -> Result<(usize, Vec<usize>)> {
        if !(0.0..=2.0).contains(&alpha) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                range: "[0, 2]",
            });
        }
        if !(tol >= 0.0) {
            return Err(Error::OutOfRange {
                name: "tol",
                value: tol,
                range: "[0, inf)",
            });
        }
        let lat = Lattice::new(self.n() as u64, alpha);
        let exact_members = |a: &[BigRational]| -> Vec<usize> {
            a.iter()
                .enumerate()
                .filter(|(_, v)| lat.contains_exact(v))
                .map(|(i, _)| i + 1)
                .collect()
        };
        let idx = if tol == 0.0 {
            match (&self.exact, self.certified(alpha)) {
                (Some(a), _) => exact_members(a),
                (None, Some(c)) => c,
                (None, None) => return Err(Error::ExactValuesRequired),
            }
        } else {
            let mut flags = alloc::vec![false; self.n()];
            if let Some(c) = self.certified(alpha) {
                for n in c {
                    if (1..=self.n()).contains(&n) {
                        flags[n - 1] = true;
                    }
                }
            }
            if let Some(a) = &self.exact {
                for n in exact_members(a) {
                    flags[n - 1] = true;
                }
            }
            for (i, &v) in self.values.iter().enumerate() {
                if !flags[i] && lat.distance(v) <= tol {
                    flags[i] = true;
                }
            }
            flags
                .iter()
                .enumerate()
                .filter(|(_, &f)| f)
                .map(|(i, _)| i + 1)
                .collect()
        };
        Ok((idx.len(), idx))
    }

    /// `a_n + λ n`. Hits are dropped since the shift moves values off the
    /// lattice in general.
    pub fn shear(&self, lambda: f64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &a)| a + lambda * (i + 1) as f64)
            .collect();
        Self {
            values,
            exact: None,
            hits: None,
            theta: self.theta,
            meta: SequenceMeta {
                origin: Origin::Sheared { lambda },
                ..self.meta.clone()
            },
        }
    }

    /// Shear by an exact `λ`; exact values, when present, stay exact.
    pub fn shear_exact(&self, lambda: &BigRational) -> Self {
        let lf = ratio_to_f64(lambda);
        let mut out = self.shear(lf);
        if let Some(a) = &self.exact {
            let ex: Vec<BigRational> = a
                .iter()
                .enumerate()
                .map(|(i, v)| v + lambda * BigRational::from_integer(BigInt::from(i + 1)))
                .collect();
            out.values = ex.iter().map(ratio_to_f64).collect();
            out.exact = Some(ex);
        } else {
            out.values = self
                .values
                .iter()
                .enumerate()
                .map(|(i, &a)| a + lf * (i + 1) as f64)
                .collect();
        }
        out
    }

    /// `N^{1−β} a_n` for `n ≤ ⌈N^β⌉`, a generalized Dirichlet sequence with
    /// `θ = N^{β−1}`. Hits in range carry over at level `(α + β − 1)/β`.
    pub fn restrict_rescale(&self, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::OutOfRange {
                name: "beta",
                value: beta,
                range: "(0, 1]",
            });
        }
        let n = self.n();
        let nf = n as f64;
        if beta * nf.powf(beta) < 3.0 {
            return Err(Error::SequenceTooShort {
                needed: 3,
                got: (beta * nf.powf(beta)) as usize,
            });
        }
        let exact_len = exact_power(n as u64, beta);
        let len = match &exact_len {
            Some(r) => r.ceil().to_integer().to_usize().unwrap_or(n),
            None => nf.powf(beta).ceil() as usize,
        }
        .min(n);
        let factor_exact = exact_power(n as u64, 1.0 - beta);
        let factor = factor_exact
            .as_ref()
            .map(ratio_to_f64)
            .unwrap_or_else(|| nf.powf(1.0 - beta));
        let values: Vec<f64> = self.values[..len].iter().map(|&a| a * factor).collect();
        let exact = match (&self.exact, &factor_exact) {
            (Some(a), Some(f)) => Some(a[..len].iter().map(|v| v * f).collect()),
            _ => None,
        };
        let hits = self.hits.as_ref().map(|hs| {
            hs.iter()
                .filter(|h| h.n <= len)
                .map(|h| Hit::new(h.n, (h.alpha + beta - 1.0) / beta, h.coord.clone()))
                .collect()
        });
        Ok(Self {
            values,
            exact,
            hits,
            theta: nf.powf(beta - 1.0),
            meta: SequenceMeta {
                origin: Origin::Restricted { beta },
                ..self.meta.clone()
            },
        })
    }

    /// Checks every certificate: integer coordinate, and the stored value
    /// agrees with `coord · N^{-α}` to a few ulps.
    pub fn verify_hits(&self) -> bool {
        let Some(hits) = &self.hits else {
            return true;
        };
        hits.iter().all(|h| {
            if !h.is_lattice_member() || h.n == 0 || h.n > self.n() {
                return false;
            }
            let want = Lattice::new(self.n() as u64, h.alpha).value_of(&h.coord);
            let got = self.values[h.n - 1];
            (got - want).abs() <= 1e-13 * want.abs().max(1.0)
        })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 10 {
        return Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            range: "[10, inf)",
        });
    }
    Ok(())
}

fn to_rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::ConstructionInfeasible(format!("non-finite value {x}")))
}

/// `N^e` as an exact rational, or the rational value of its float.
fn power_rational(n: usize, e: f64) -> Result<BigRational> {
    match exact_power(n as u64, e) {
        Some(r) => Ok(r),
        None => to_rational((n as f64).powf(e)),
    }
}

/// Samples `f(n/N)` (times an integer scale), snaps the certified indices to
/// their exact lattice values, and packages the sequence.
fn finish(
    n: usize,
    alpha: f64,
    f: impl Fn(f64) -> f64,
    hits: Vec<(usize, BigInt)>,
    mut meta: SequenceMeta,
) -> ConvexSequence {
    let lat = Lattice::new(n as u64, alpha);
    let nf = n as f64;
    let mut base: Vec<f64> = (1..=n).map(|i| f(i as f64 / nf)).collect();
    for (i, c) in &hits {
        base[i - 1] = lat.value_of(&BigRational::from_integer(c.clone()));
    }

    // An integer scale keeps every hit on the lattice. Pick the one that
    // brings the differences closest to the [1/4, 4] windows.
    let report = ConvexSequence::from_values(base.clone())
        .validate()
        .expect("n >= 10");
    let c_at = |s: f64| {
        tightest_c(
            s * report.first_diff_min,
            s * report.first_diff_max,
            s * report.second_diff_min,
            s * report.second_diff_max,
        )
    };
    let scale = if c_at(1.0) <= 4.0 {
        1
    } else {
        (1..=3u32)
            .min_by(|&a, &b| c_at(a as f64).total_cmp(&c_at(b as f64)))
            .unwrap_or(1)
    };
    let sb = BigInt::from(scale);
    let hits: Vec<Hit> = hits
        .into_iter()
        .map(|(i, c)| Hit::new(i, alpha, BigRational::from_integer(c * &sb)))
        .collect();
    let mut values: Vec<f64> = base.iter().map(|&v| v * scale as f64).collect();
    for h in &hits {
        values[h.n - 1] = lat.value_of(&h.coord);
    }
    meta.scale = scale;
    ConvexSequence {
        values,
        exact: None,
        hits: Some(hits),
        theta: 1.0,
        meta,
    }
}

/// Knots and integer lattice coordinates of the Farey-mediant construction,
/// before trimming. Returns the knots (first one at the origin) and for each
/// later knot its sample index and coordinate.
pub fn dirichlet_knots(n: usize, alpha: f64) -> Result<KnotsAndHits> {
    check_n(n)?;
    if !(0.5..=2.0).contains(&alpha) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "[1/2, 2]",
        });
    }
    let nf = n as f64;
    let scale_r = power_rational(n, alpha - 1.0)?;
    let lo = &scale_r / BigRational::from_integer(3.into());
    let hi = &scale_r * BigRational::new(2.into(), 3.into());
    let qmax = floor_power(n as u64, (2.0 - alpha) / 3.0).max(1);
    let r = enumerate_fractions(&lo, &hi, qmax)?;
    if r.len() < 2 {
        return Err(Error::TooFewFractions { got: r.len() });
    }

    let spread = power_rational(n, 2.0 - alpha)?;
    // Slopes are N^{1-α} r; N^α y-values are the integer coordinates.
    let slope_unit = (n as f64).powf(1.0 - alpha);
    let slope_unit = exact_power(n as u64, 1.0 - alpha)
        .map(|r| ratio_to_f64(&r))
        .unwrap_or(slope_unit);
    let lat = Lattice::new(n as u64, alpha);

    let mut knots = alloc::vec![Knot::new(0.0, 0.0, slope_unit * r[0].to_f64())];
    let mut hits = Vec::new();
    let mut sum_k = BigInt::zero();
    let mut sum_m = BigInt::zero();
    for (i, w) in r.windows(2).enumerate() {
        let (ri, rj) = (&w[0], &w[1]);
        let delta = &spread * (rj.as_ratio() - ri.as_ratio());
        let two_delta = &delta * BigRational::from_integer(2.into());
        let left = expand_to_range_exact(ri, &delta, &two_delta)?;
        let right = expand_to_range_exact(rj, &delta, &two_delta)?;
        sum_m += left.num() + right.num();
        sum_k += left.den() + right.den();
        let idx = sum_k.to_usize().ok_or_else(|| {
            Error::ConstructionInfeasible(format!("knot index overflow at pair {i}"))
        })?;
        knots.push(Knot::new(
            idx as f64 / nf,
            lat.value_of(&BigRational::from_integer(sum_m.clone())),
            slope_unit * rj.to_f64(),
        ));
        hits.push((idx, sum_m.clone()));
    }
    Ok((knots, hits))
}

/// Sequence whose values meet `N^{-α}ℤ` about `N^{(α+1)/3}` times, built from
/// Farey fractions in `[N^{α−1}/3, 2N^{α−1}/3]` with denominator at most
/// `N^{(2−α)/3}` and their mediants, for `α ∈ [1/2, 2]`.
///
/// Knot `i` sits at `x_i = Σ_{j≤i} k_j / N` with value `Σ_{j≤i} M_j / N^α`,
/// and the segment ending there has slope `N^{1−α}` times the mediant.
pub fn construct_dirichlet_like(n: usize, alpha: f64) -> Result<ConvexSequence> {
    let (mut knots, mut hits) = dirichlet_knots(n, alpha)?;
    let before = hits.len();
    while hits.last().is_some_and(|(i, _)| *i > n) {
        hits.pop();
        knots.pop();
    }
    if knots.len() < 2 {
        return Err(Error::TooFewKnots {
            needed: 2,
            got: knots.len(),
        });
    }
    let interp = ConvexInterpolant::build_c2(&knots)?.with_extension(1.0);
    let meta = SequenceMeta {
        origin: Origin::DirichletLike { alpha },
        scale: 1,
        knots: knots.len(),
        last_knot_n: hits.last().map_or(0, |h| h.0),
        trimmed: before - hits.len(),
        curvature_floor: interp.d(),
    };
    Ok(finish(
        n,
        alpha,
        |x| interp.eval(x).map_or(f64::NAN, |v| v.0),
        hits,
        meta,
    ))
}

/// Knots of the grid walk used for `α ∈ [0, 1/2]`: starting from `a_1 = 0`
/// with slope `1/2`, each step takes the smallest sample gap `g` for which
/// some `m ≥ 1` lattice steps give a secant slope in the middle third of
/// `[p, p + g/N]`, then raises the slope by `g/N`.
pub fn small_alpha_knots(n: usize, alpha: f64) -> Result<KnotsAndHits> {
    check_n(n)?;
    if !(0.0..=0.5).contains(&alpha) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "[0, 1/2]",
        });
    }
    let nf = n as f64;
    let lat = Lattice::new(n as u64, alpha);
    let hn = lat.spacing() * nf;
    let mut at = 1usize;
    let mut coord = 0u64;
    let mut p = 0.5;
    let mut knots = alloc::vec![Knot::new(1.0 / nf, 0.0, p)];
    let mut hits = alloc::vec![(1usize, BigInt::zero())];
    'walk: loop {
        for g in 1..=(n - at) {
            let gf = g as f64;
            let step = gf / nf;
            let m_lo = gf * (p + step / 3.0) / hn;
            let m_hi = gf * (p + 2.0 * step / 3.0) / hn;
            let m = m_lo.ceil().max(1.0);
            if m <= m_hi {
                at += g;
                coord += m as u64;
                p += step;
                let c = BigRational::from_integer(BigInt::from(coord));
                knots.push(Knot::new(at as f64 / nf, lat.value_of(&c), p));
                hits.push((at, BigInt::from(coord)));
                continue 'walk;
            }
        }
        break;
    }
    Ok((knots, hits))
}

/// Sequence meeting `N^{-α}ℤ` about `N^α` times for `α ∈ [0, 1/2]`, via the
/// grid walk of [`small_alpha_knots`].
pub fn construct_small_alpha(n: usize, alpha: f64) -> Result<ConvexSequence> {
    let (knots, hits) = small_alpha_knots(n, alpha)?;
    let last_knot_n = hits.last().map_or(0, |h| h.0);
    let meta = |d: f64| SequenceMeta {
        origin: Origin::SmallAlpha { alpha },
        scale: 1,
        knots: knots.len(),
        last_knot_n,
        trimmed: 0,
        curvature_floor: d,
    };
    if knots.len() == 1 {
        let k = knots[0];
        let d = 0.5;
        let f = move |x: f64| {
            let h = x - k.x;
            k.y + h * (k.p + 0.5 * d * h)
        };
        return Ok(finish(n, alpha, f, hits, meta(d)));
    }
    let interp = ConvexInterpolant::build_c2(&knots)?.with_extension(1.0);
    let m = meta(interp.d());
    Ok(finish(
        n,
        alpha,
        |x| interp.eval(x).map_or(f64::NAN, |v| v.0),
        hits,
        m,
    ))
}

/// Exact rational `N^{α}` coordinate of `value`, if it is a lattice point.
pub fn lattice_coordinate(n: usize, alpha: f64, value: &BigRational) -> Option<BigInt> {
    let s = exact_power(n as u64, alpha)?;
    let c = value * s;
    c.is_integer().then(|| c.to_integer())
}

impl ConvexityReport {
    /// True when every difference is positive, so the sequence is at least
    /// strictly increasing and strictly convex.
    pub fn strictly_convex(&self) -> bool {
        self.first_diff_min > 0.0 && self.second_diff_min > 0.0
    }
}
