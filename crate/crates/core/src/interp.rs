//! Strictly convex interpolation through knots `(x_i, y_i, p_i)`.
//!
//! Between two knots the derivative `f′` is made of two linear pieces meeting
//! at an internal node `(x₀, p₀)` placed so that the area under `f′` equals
//! `y₂ − y₁`. The C² upgrade swaps every linear piece for a sinusoid with the
//! same endpoint values and area whose slope at both ends is a common floor
//! `D`, so `f″` is continuous.
//!
//! `f` itself is never integrated numerically: every piece carries the value
//! of `f` at its left end and a closed-form antiderivative.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

// `Float` supplies the f64 math methods without std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::convexseq::ConvexSequence;
use crate::{Error, Result};

/// Ratio bounds outside of which a knot pair is treated as degenerate.
const C_MIN: f64 = 1e-6;
const C_MAX: f64 = 1e6;

/// A point `(x, y)` with prescribed derivative `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Knot {
    pub x: f64,
    pub y: f64,
    pub p: f64,
}

impl Knot {
    pub const fn new(x: f64, y: f64, p: f64) -> Self {
        Self { x, y, p }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Mode {
    C1,
    C2,
}

/// One piece of `f′` on `[x_lo, x_hi]`, with `f(x_lo) = y_lo`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind"))]
pub enum DerivativePiece {
    Linear {
        x_lo: f64,
        x_hi: f64,
        y_lo: f64,
        p_lo: f64,
        p_hi: f64,
    },
    /// `f′(x) = mean + amplitude · sin(alpha · (x − center) / half_width)`.
    Sinusoid {
        x_lo: f64,
        x_hi: f64,
        y_lo: f64,
        mean: f64,
        amplitude: f64,
        center: f64,
        half_width: f64,
        alpha: f64,
    },
}

impl DerivativePiece {
    pub fn x_lo(&self) -> f64 {
        match *self {
            Self::Linear { x_lo, .. } | Self::Sinusoid { x_lo, .. } => x_lo,
        }
    }

    pub fn x_hi(&self) -> f64 {
        match *self {
            Self::Linear { x_hi, .. } | Self::Sinusoid { x_hi, .. } => x_hi,
        }
    }

    pub fn y_lo(&self) -> f64 {
        match *self {
            Self::Linear { y_lo, .. } | Self::Sinusoid { y_lo, .. } => y_lo,
        }
    }

    /// Average slope of `f′` over the piece.
    pub fn slope(&self) -> f64 {
        match *self {
            Self::Linear {
                x_lo,
                x_hi,
                p_lo,
                p_hi,
                ..
            } => (p_hi - p_lo) / (x_hi - x_lo),
            Self::Sinusoid {
                amplitude,
                half_width,
                alpha,
                ..
            } => amplitude * alpha.sin() / half_width,
        }
    }

    /// `(f, f′, f″)` at `x`, using the piece formula even outside its domain.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match *self {
            Self::Linear {
                x_lo,
                x_hi,
                y_lo,
                p_lo,
                p_hi,
            } => {
                let m = (p_hi - p_lo) / (x_hi - x_lo);
                let h = x - x_lo;
                (y_lo + h * (p_lo + 0.5 * m * h), p_lo + m * h, m)
            }
            Self::Sinusoid {
                x_lo,
                y_lo,
                mean,
                amplitude,
                center,
                half_width,
                alpha,
                ..
            } => {
                let u = alpha * (x - center) / half_width;
                let k = amplitude * half_width / alpha;
                let f = y_lo + mean * (x - x_lo) - k * (u.cos() - alpha.cos());
                let fp = mean + amplitude * u.sin();
                let fpp = amplitude * alpha / half_width * u.cos();
                (f, fp, fpp)
            }
        }
    }

    /// `f(x_hi) − f(x_lo)` in closed form.
    pub fn area(&self) -> f64 {
        match *self {
            Self::Linear {
                x_lo,
                x_hi,
                p_lo,
                p_hi,
                ..
            } => 0.5 * (p_lo + p_hi) * (x_hi - x_lo),
            Self::Sinusoid {
                x_lo, x_hi, mean, ..
            } => mean * (x_hi - x_lo),
        }
    }
}

/// Quadratic continuation `f″ ≡ D` to the right of the last knot.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Extension {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub p_lo: f64,
    pub d: f64,
}

impl Extension {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let h = x - self.x_lo;
        (
            self.y_lo + h * (self.p_lo + 0.5 * self.d * h),
            self.p_lo + self.d * h,
            self.d,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvexInterpolant {
    knots: Vec<Knot>,
    /// Internal node `(x₀, p₀)` of each knot pair.
    nodes: Vec<(f64, f64)>,
    pieces: Vec<DerivativePiece>,
    d: f64,
    mode: Mode,
    extension: Option<Extension>,
}

/// Internal node `(x₀, p₀)` of one knot pair.
fn pair_node(i: usize, k1: &Knot, k2: &Knot) -> Result<(f64, f64)> {
    let bad = |reason: alloc::string::String| Error::NotInterpolable { pair: i, reason };
    let dx = k2.x - k1.x;
    if !(dx > 0.0) {
        return Err(bad(format!("x not increasing ({} then {})", k1.x, k2.x)));
    }
    let s = (k2.y - k1.y) / dx;
    if !(k1.p < s && s < k2.p) {
        return Err(bad(format!(
            "secant slope {s} not strictly between {} and {}",
            k1.p, k2.p
        )));
    }
    let c = (s - k1.p) / (k2.p - s);
    if !(C_MIN..=C_MAX).contains(&c) {
        return Err(bad(format!("node ratio {c:e} is degenerate")));
    }
    let x0 = (k2.x + c * k1.x) / (1.0 + c);
    let p0 = k2.p + (k1.p - k2.p) * (x0 - k1.x) / dx;
    if !(k1.x < x0 && x0 < k2.x && k1.p < p0 && p0 < k2.p) {
        return Err(bad(format!("internal node ({x0}, {p0}) is not interior")));
    }
    Ok((x0, p0))
}

/// Solves `x cot x = y` for `x ∈ [π/4, π/2]`, `y ∈ [0, π/4]`, by bisection.
pub fn solve_x_cot_x(y: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_4).contains(&y) {
        return Err(Error::OutOfRange {
            name: "y",
            value: y,
            range: "[0, pi/4]",
        });
    }
    let g = |x: f64| x * x.cos() / x.sin() - y;
    if y == FRAC_PI_4 || g(FRAC_PI_4) <= 0.0 {
        return Ok(FRAC_PI_4);
    }
    if y == 0.0 {
        return Ok(FRAC_PI_2);
    }
    let (mut lo, mut hi) = (FRAC_PI_4, FRAC_PI_2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if g(lo).abs() <= g(hi).abs() { lo } else { hi })
}

/// `x cot x`, the quantity inverted by [`solve_x_cot_x`].
pub fn x_cot_x(x: f64) -> f64 {
    x * x.cos() / x.sin()
}

impl ConvexInterpolant {
    /// C¹ interpolant with piecewise-linear `f′`.
    pub fn build_c1(knots: &[Knot]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::TooFewKnots {
                needed: 2,
                got: knots.len(),
            });
        }
        let mut nodes = Vec::with_capacity(knots.len() - 1);
        let mut pieces = Vec::with_capacity(2 * (knots.len() - 1));
        for (i, w) in knots.windows(2).enumerate() {
            let (k1, k2) = (&w[0], &w[1]);
            let (x0, p0) = pair_node(i, k1, k2)?;
            nodes.push((x0, p0));
            let left = DerivativePiece::Linear {
                x_lo: k1.x,
                x_hi: x0,
                y_lo: k1.y,
                p_lo: k1.p,
                p_hi: p0,
            };
            pieces.push(left);
            pieces.push(DerivativePiece::Linear {
                x_lo: x0,
                x_hi: k2.x,
                y_lo: k1.y + left.area(),
                p_lo: p0,
                p_hi: k2.p,
            });
        }
        let min_slope = pieces
            .iter()
            .map(DerivativePiece::slope)
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            knots: knots.to_vec(),
            nodes,
            pieces,
            d: FRAC_PI_4 * min_slope,
            mode: Mode::C1,
            extension: None,
        })
    }

    /// Replaces every linear piece by a sinusoid with `f″ = D` at both ends.
    pub fn upgrade_c2(&self) -> Result<Self> {
        if self.mode == Mode::C2 {
            return Err(Error::AlreadyC2);
        }
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (j, piece) in self.pieces.iter().enumerate() {
            let DerivativePiece::Linear {
                x_lo,
                x_hi,
                p_lo,
                p_hi,
                ..
            } = *piece
            else {
                unreachable!("C1 interpolants only hold linear pieces")
            };
            let m = (p_hi - p_lo) / (x_hi - x_lo);
            if !(m > 0.0) {
                return Err(Error::NotInterpolable {
                    pair: j / 2,
                    reason: format!("flat derivative piece on [{x_lo}, {x_hi}]"),
                });
            }
            let alpha = solve_x_cot_x((self.d / m).min(FRAC_PI_4))?;
            // Pieces are re-anchored per knot pair so knot values stay exact.
            let y_lo = if j % 2 == 0 {
                self.knots[j / 2].y
            } else {
                pieces
                    .last()
                    .map(|p: &DerivativePiece| p.y_lo() + p.area())
                    .unwrap_or(0.0)
            };
            pieces.push(DerivativePiece::Sinusoid {
                x_lo,
                x_hi,
                y_lo,
                mean: 0.5 * (p_lo + p_hi),
                amplitude: 0.5 * (p_hi - p_lo) / alpha.sin(),
                center: 0.5 * (x_lo + x_hi),
                half_width: 0.5 * (x_hi - x_lo),
                alpha,
            });
        }
        Ok(Self {
            knots: self.knots.clone(),
            nodes: self.nodes.clone(),
            pieces,
            d: self.d,
            mode: Mode::C2,
            extension: self.extension,
        })
    }

    /// Builds the C² interpolant directly.
    pub fn build_c2(knots: &[Knot]) -> Result<Self> {
        Self::build_c1(knots)?.upgrade_c2()
    }

    /// Allows evaluation on `(x_n, x_max]` with `f″ ≡ D`.
    pub fn with_extension(mut self, x_max: f64) -> Self {
        let last = self.knots[self.knots.len() - 1];
        self.extension = (x_max > last.x).then_some(Extension {
            x_lo: last.x,
            x_hi: x_max,
            y_lo: last.y,
            p_lo: last.p,
            d: self.d,
        });
        self
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn pieces(&self) -> &[DerivativePiece] {
        &self.pieces
    }

    /// Curvature floor `D`.
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn extension(&self) -> Option<&Extension> {
        self.extension.as_ref()
    }

    /// Evaluation domain, including any extension.
    pub fn domain(&self) -> (f64, f64) {
        let lo = self.knots[0].x;
        let hi = match &self.extension {
            Some(e) => e.x_hi,
            None => self.knots[self.knots.len() - 1].x,
        };
        (lo, hi)
    }

    /// `(f(x), f′(x), f″(x))`. At a breakpoint the right-hand piece is used.
    pub fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        let (lo, hi) = self.domain();
        if !(lo <= x && x <= hi) {
            return Err(Error::OutsideDomain { x, lo, hi });
        }
        let x_end = self.knots[self.knots.len() - 1].x;
        if x > x_end {
            if let Some(e) = &self.extension {
                return Ok(e.eval(x));
            }
        }
        let idx = self.pieces.partition_point(|p| p.x_lo() <= x);
        let piece = &self.pieces[idx.saturating_sub(1)];
        Ok(piece.eval(x))
    }

    /// Range `[min, max]` of `Δp_i / Δx_i` over knot pairs; the interpolation
    /// hypotheses ask for this to be bounded above and below.
    pub fn knot_slope_range(&self) -> (f64, f64) {
        self.knots
            .windows(2)
            .map(|w| (w[1].p - w[0].p) / (w[1].x - w[0].x))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
                (a.min(r), b.max(r))
            })
    }
}

/// Knots `(i/N, a_i, (N/2)(a_{i+1} − a_{i−1}))`, `i = 1..N`, after extending
/// the values by `a_0 = 2a_1 − a_2 + 1/N²` and the mirror term at the end.
pub fn knots_from_values(values: &[f64]) -> Result<Vec<Knot>> {
    let n = values.len();
    if n < 2 {
        return Err(Error::SequenceTooShort { needed: 2, got: n });
    }
    let nf = n as f64;
    let bump = 1.0 / (nf * nf);
    let a0 = 2.0 * values[0] - values[1] + bump;
    let an1 = 2.0 * values[n - 1] - values[n - 2] + bump;
    let at = |i: usize| match i {
        0 => a0,
        i if i == n + 1 => an1,
        i => values[i - 1],
    };
    Ok((1..=n)
        .map(|i| Knot::new(i as f64 / nf, at(i), 0.5 * nf * (at(i + 1) - at(i - 1))))
        .collect())
}

/// [`knots_from_values`] for a sequence that passes the convexity check.
pub fn knots_from_sequence(seq: &ConvexSequence) -> Result<Vec<Knot>> {
    let report = seq.validate()?;
    if !report.pass {
        return Err(Error::NotUniformlyConvex {
            tightest_c: report.tightest_c,
        });
    }
    knots_from_values(seq.values())
}
