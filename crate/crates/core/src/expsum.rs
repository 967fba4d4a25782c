//! Exponential sums `f(x, t) = Σ b_n e(x ξ_n + t η_n)` with `e(x) = e^{2πix}`.
//!
//! Phases are reduced modulo 1 with error-free products before the
//! exponential is taken, so `t` of size `N²` does not eat the precision.
//! Sums run in ascending `n` with compensated accumulation.
//!
//! The row kernels and the per-row/per-column reductions here are the pieces
//! a grid sweep is made of; they are written so that the reduced result does
//! not depend on how rows are partitioned among workers.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
// `Float` supplies the f64 math methods without std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Number of dyadic levels tracked below the top level.
pub const LEVELS: u32 = 40;

/// `x ξ`-frequencies.
#[derive(Debug, Clone, PartialEq)]
pub enum Frequencies {
    /// `ξ_n = n/N`.
    Canonical,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumSpec {
    n: usize,
    xi: Frequencies,
    eta: Vec<f64>,
    b: Vec<Complex64>,
    /// Indices with `b_n ≠ 0`, ascending.
    support: Vec<usize>,
}

impl ExpSumSpec {
    /// `eta[i]` and `b[i]` belong to `n = i + 1`.
    pub fn new(xi: Frequencies, eta: Vec<f64>, b: Vec<Complex64>) -> Result<Self> {
        let n = b.len();
        if eta.len() != n {
            return Err(Error::LengthMismatch(alloc::format!(
                "eta has {} entries, b has {n}",
                eta.len()
            )));
        }
        if let Frequencies::Custom(x) = &xi {
            if x.len() != n {
                return Err(Error::LengthMismatch(alloc::format!(
                    "xi has {} entries, b has {n}",
                    x.len()
                )));
            }
        }
        let support: Vec<usize> = (0..n).filter(|&i| b[i] != Complex64::new(0.0, 0.0)).collect();
        if support.is_empty() {
            return Err(Error::ZeroCoefficients);
        }
        Ok(Self {
            n,
            xi,
            eta,
            b,
            support,
        })
    }

    pub fn canonical(eta: Vec<f64>, b: Vec<Complex64>) -> Result<Self> {
        Self::new(Frequencies::Canonical, eta, b)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frequencies(&self) -> &Frequencies {
        &self.xi
    }

    pub fn is_canonical(&self) -> bool {
        matches!(self.xi, Frequencies::Canonical)
    }

    pub fn xi(&self, i: usize) -> f64 {
        match &self.xi {
            Frequencies::Canonical => (i + 1) as f64 / self.n as f64,
            Frequencies::Custom(x) => x[i],
        }
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn l1_norm(&self) -> f64 {
        let mut s = Neumaier::default();
        for z in &self.b {
            s.add(z.norm());
        }
        s.sum()
    }

    pub fn l2_norm(&self) -> f64 {
        let mut s = Neumaier::default();
        for z in &self.b {
            s.add(z.norm_sqr());
        }
        s.sum().sqrt()
    }

    /// Same frequencies, coefficients multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(
            self.xi.clone(),
            self.eta.clone(),
            self.b.iter().map(|z| z * k).collect(),
        )
    }

    /// `x ξ_i mod 1`, in `[-1/2, 1/2]`.
    fn x_phase(&self, i: usize, x: f64) -> f64 {
        match &self.xi {
            Frequencies::Canonical => canonical_phase(x, i + 1, self.n),
            Frequencies::Custom(xi) => mul_mod1(x, xi[i]),
        }
    }

    /// `f(x, t)`.
    pub fn eval_point(&self, x: f64, t: f64) -> Complex64 {
        let mut re = Neumaier::default();
        let mut im = Neumaier::default();
        for &i in &self.support {
            let ph = reduce(self.x_phase(i, x) + mul_mod1(t, self.eta[i]));
            let z = self.b[i] * e(ph);
            re.add(z.re);
            im.add(z.im);
        }
        Complex64::new(re.sum(), im.sum())
    }

    /// `b_n e(t η_n)` over the support, in support order.
    pub fn row_coefficients(&self, t: f64) -> Vec<Complex64> {
        self.support
            .iter()
            .map(|&i| self.b[i] * e(mul_mod1(t, self.eta[i])))
            .collect()
    }

    /// If `ξ_n = n/N` and the x-grid is `x_k = k L N / M` for an integer `L`,
    /// returns `L`: then `f(x_k, t) = Σ_n c_n e(k (nL mod M) / M)` is one
    /// inverse DFT of length `M`.
    pub fn fft_stride(&self, grid: &GridSpec) -> Option<usize> {
        if !self.is_canonical() || grid.x_lo != 0.0 {
            return None;
        }
        let l = grid.x_hi / self.n as f64;
        (l >= 1.0 && l == l.round() && l < 1e15).then_some(l as usize)
    }

    /// Inverse-DFT input for one row: `v[(nL) mod M] += b_n e(t η_n)`.
    pub fn fold_row(&self, coeffs: &[Complex64], stride: usize, m: usize, out: &mut [Complex64]) {
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (&i, &c) in self.support.iter().zip(coeffs) {
            let k = (((i + 1) as u128 * stride as u128) % m as u128) as usize;
            out[k] += c;
        }
    }
}

/// `e(θ) = e^{2πiθ}`.
pub fn e(theta: f64) -> Complex64 {
    let (s, c) = (TAU * theta).sin_cos();
    Complex64::new(c, s)
}

fn reduce(p: f64) -> f64 {
    p - p.round()
}

/// `a b mod 1` in `[-1/2, 1/2]`, using the rounding error of the product.
pub fn mul_mod1(a: f64, b: f64) -> f64 {
    let p = a * b;
    let err = a.mul_add(b, -p);
    reduce(reduce(p) + err)
}

/// `x n / N mod 1`, reducing `x n` modulo `N` before dividing.
pub fn canonical_phase(x: f64, n: usize, big_n: usize) -> f64 {
    let nf = n as f64;
    let bn = big_n as f64;
    let p = x * nf;
    let err = x.mul_add(nf, -p);
    let r = p - bn * (p / bn).round();
    reduce((r + err) / bn)
}

/// Kahan–Babuška–Neumaier running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Which variable the supremum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    /// `sup_t`, outer variable `x`.
    T,
    /// `sup_x`, outer variable `t`.
    X,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::T => "t",
            Self::X => "x",
        }
    }
}

impl core::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" | "T" => Ok(Self::T),
            "x" | "X" => Ok(Self::X),
            _ => Err(Error::InvalidGrid(alloc::format!("unknown direction {s:?}"))),
        }
    }
}

/// Uniform half-open grid: `x_k = x_lo + k (x_hi − x_lo)/M_x`, `k < M_x`,
/// and likewise in `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub mx: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub mt: usize,
}

impl GridSpec {
    pub fn new(x_lo: f64, x_hi: f64, mx: usize, t_lo: f64, t_hi: f64, mt: usize) -> Result<Self> {
        let g = Self {
            x_lo,
            x_hi,
            mx,
            t_lo,
            t_hi,
            mt,
        };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        if self.mx == 0 || self.mt == 0 {
            return Err(Error::InvalidGrid("grid needs at least one node per axis".to_string()));
        }
        for (lo, hi, name) in [(self.x_lo, self.x_hi, "x"), (self.t_lo, self.t_hi, "t")] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidGrid(alloc::format!(
                    "{name} range [{lo}, {hi}] is empty or not finite"
                )));
            }
        }
        Ok(())
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x_lo + (k as f64 * (self.x_hi - self.x_lo)) / self.mx as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t_lo + (k as f64 * (self.t_hi - self.t_lo)) / self.mt as f64
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.mx as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t_hi - self.t_lo) / self.mt as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.mx).map(|k| self.x(k)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.mt).map(|k| self.t(k)).collect()
    }

    pub fn nodes(&self) -> u128 {
        self.mx as u128 * self.mt as u128
    }

    /// Outer-variable cell count and width for a sweep in `dir`.
    pub fn outer(&self, dir: Direction) -> (usize, f64) {
        match dir {
            Direction::T => (self.mx, self.dx()),
            Direction::X => (self.mt, self.dt()),
        }
    }
}

/// `e(x_k ξ_n)` for every x-node and every support index.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    width: usize,
    table: Vec<Complex64>,
}

impl PhaseTable {
    pub fn new(spec: &ExpSumSpec, xs: &[f64]) -> Self {
        let width = spec.support().len();
        let mut table = Vec::with_capacity(xs.len() * width);
        for &x in xs {
            for &i in spec.support() {
                table.push(e(spec.x_phase(i, x)));
            }
        }
        Self { width, table }
    }

    pub fn len(&self) -> usize {
        self.table.len() / self.width.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// `out[k] = Σ_j coeffs[j] e(x_k ξ_j)`, compensated, ascending `j`.
    pub fn row(&self, coeffs: &[Complex64], out: &mut [Complex64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let w = &self.table[k * self.width..(k + 1) * self.width];
            let mut re = Neumaier::default();
            let mut im = Neumaier::default();
            for (c, z) in coeffs.iter().zip(w) {
                let p = c * z;
                re.add(p.re);
                im.add(p.im);
            }
            *o = Complex64::new(re.sum(), im.sum());
        }
    }
}

/// Dyadic level bookkeeping: a value `v` sits at level `k` when
/// `v ∈ [2^{top−k−1}, 2^{top−k})`, with `2^top` above every possible `|f|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub top: i32,
}

/// `floor(log2 v)` for positive normal `v`.
pub fn floor_log2(v: f64) -> Option<i32> {
    if !(v.is_finite() && v >= f64::MIN_POSITIVE) {
        return None;
    }
    Some(((v.to_bits() >> 52) & 0x7ff) as i32 - 1023)
}

impl Ladder {
    /// Ladder whose top level lies above `bound` (typically `‖b‖₁`).
    pub fn above(bound: f64) -> Self {
        Self {
            top: floor_log2(bound).unwrap_or(0) + 1,
        }
    }

    /// Level index of `v`, if it lies within the 128 tracked levels.
    pub fn level(&self, v: f64) -> Option<u32> {
        // Rounding can push |f| a hair past the bound; it still goes on top.
        let k = (self.top - 1 - floor_log2(v)?).max(0);
        (k < 128).then_some(k as u32)
    }

    pub fn mask(&self, v: f64) -> u128 {
        self.level(v).map_or(0, |k| 1u128 << k)
    }

    /// Upper end `α` of level `k`.
    pub fn alpha(&self, k: u32) -> f64 {
        2f64.powi(self.top - k as i32)
    }
}

/// Reduction over the rows of a sweep.
///
/// For `Direction::T` each outer cell is an x-column; rows fold in with
/// [`OuterStats::absorb_column_row`]. For `Direction::X` each outer cell is
/// one row and is set once with [`OuterStats::set_row`]. `merge` is
/// associative and commutative with index tie-breaks, so the result does not
/// depend on how rows were split up.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterStats {
    pub max: Vec<f64>,
    /// Inner-grid index of the maximum (smallest on ties).
    pub argmax: Vec<usize>,
    pub masks: Vec<u128>,
}

impl OuterStats {
    pub fn new(len: usize) -> Self {
        Self {
            max: vec![f64::NEG_INFINITY; len],
            argmax: vec![usize::MAX; len],
            masks: vec![0; len],
        }
    }

    fn offer(&mut self, cell: usize, v: f64, at: usize) {
        let m = self.max[cell];
        if v > m || (v == m && at < self.argmax[cell]) {
            self.max[cell] = v;
            self.argmax[cell] = at;
        }
    }

    /// Folds in row `row` of `|f|` values (one per x-column).
    pub fn absorb_column_row(&mut self, row: usize, abs: &[f64], ladder: &Ladder) {
        for (k, &v) in abs.iter().enumerate() {
            self.offer(k, v, row);
            self.masks[k] |= ladder.mask(v);
        }
    }

    /// Sets outer cell `row` from a whole row of `|f|` values.
    pub fn set_row(&mut self, row: usize, abs: &[f64], ladder: &Ladder) {
        for (k, &v) in abs.iter().enumerate() {
            self.offer(row, v, k);
            self.masks[row] |= ladder.mask(v);
        }
    }

    pub fn merge(mut self, other: &Self) -> Self {
        for i in 0..self.max.len() {
            self.offer(i, other.max[i], other.argmax[i]);
            self.masks[i] |= other.masks[i];
        }
        self
    }
}

/// Riemann-sum `L^p` norm of cell values with common width.
pub fn lp_norm(values: &[f64], width: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "[1, inf)",
        });
    }
    let mut s = Neumaier::default();
    for &v in values {
        s.add(v.abs().powf(p));
    }
    Ok((s.sum() * width).powf(1.0 / p))
}

/// One rung of the dyadic ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelEntry {
    pub alpha: f64,
    /// `|π U_α|`, the measure of the projection onto the outer axis.
    pub measure: f64,
    /// `α⁴ |π U_α| / (N^{7/3} ‖b‖⁴)` for `Direction::T`, `N^{8/3}` for `X`.
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelSetReport {
    pub n: usize,
    pub direction: Direction,
    pub b_l2: f64,
    pub levels: Vec<LevelEntry>,
}

impl LevelSetReport {
    /// Builds the ladder from the populated top level down [`LEVELS`] rungs.
    pub fn from_masks(
        n: usize,
        direction: Direction,
        b_l2: f64,
        ladder: &Ladder,
        masks: &[u128],
        width: f64,
    ) -> Self {
        let any = masks.iter().fold(0u128, |a, m| a | m);
        let levels = if any == 0 {
            Vec::new()
        } else {
            let first = any.trailing_zeros();
            let last = (first + LEVELS).min(127);
            let power = match direction {
                Direction::T => 7.0 / 3.0,
                Direction::X => 8.0 / 3.0,
            };
            let denom = (n as f64).powf(power) * b_l2.powi(4);
            (first..=last)
                .map(|k| {
                    let count = masks.iter().filter(|&&m| m >> k & 1 == 1).count();
                    let alpha = ladder.alpha(k);
                    let measure = count as f64 * width;
                    LevelEntry {
                        alpha,
                        measure,
                        statistic: alpha.powi(4) * measure / denom,
                    }
                })
                .collect()
        };
        Self {
            n,
            direction,
            b_l2,
            levels,
        }
    }

    pub fn max_statistic(&self) -> f64 {
        self.levels.iter().map(|l| l.statistic).fold(0.0, f64::max)
    }
}
