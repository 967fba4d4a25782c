//! The three witness experiments and the hit-count scaling scan.
//!
//! Each experiment builds a sequence, puts `b_n = 1` on its lattice hits,
//! checks an exact integer identity for `f` at special points, and measures
//! an `L⁴` norm of a maximal function on a grid.

use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use uniconvex::convexseq::{construct_dirichlet_like, construct_small_alpha, ConvexSequence};
use uniconvex::expsum::{Direction, ExpSumSpec, Frequencies, GridSpec};
use uniconvex::lattice::power_f64;
use uniconvex::regress::regress;
use uniconvex::{Error, Result};

use crate::grid::{level_report_from_sweep, norm_from_sweep, refine, sweep, FastPath, NormRecord};

/// Default cap on grid nodes per sweep.
pub const DEFAULT_GRID_BUDGET: u64 = 1 << 30;

/// Identity checks use this many seeded `j` when the full range is large.
pub const SAMPLED_J: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum ExperimentId {
    A,
    B,
    C,
}

impl ExperimentId {
    pub fn predicted_exponent(self) -> f64 {
        match self {
            Self::A => 7.0 / 12.0,
            Self::B => 5.0 / 8.0,
            Self::C => 5.0 / 6.0,
        }
    }

    pub fn alpha(self) -> f64 {
        match self {
            Self::A | Self::C => 1.0,
            Self::B => 0.5,
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Self::A => Direction::T,
            Self::B | Self::C => Direction::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub grid_budget: u64,
    pub seed: u64,
    pub fast_path: FastPath,
    pub p: f64,
}

impl ExperimentConfig {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            grid_budget: DEFAULT_GRID_BUDGET,
            seed: 0,
            fast_path: FastPath::Auto,
            p: 4.0,
        }
    }
}

/// Sequence, coefficients and spec of one experiment.
#[derive(Debug, Clone)]
pub struct Setup {
    pub id: ExperimentId,
    pub sequence: ConvexSequence,
    /// 1-based indices carrying `b_n = 1`.
    pub hits: Vec<usize>,
    pub spec: ExpSumSpec,
}

impl Setup {
    pub fn hit_count(&self) -> usize {
        self.hits.len()
    }
}

fn indicator(n: usize, hits: &[usize]) -> Vec<Complex64> {
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    for &i in hits {
        b[i - 1] = Complex64::new(1.0, 0.0);
    }
    b
}

fn check_n(n: usize) -> Result<()> {
    if n < 64 {
        return Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            range: "[64, inf)",
        });
    }
    Ok(())
}

/// Builds the sequence and spec for an experiment.
pub fn setup(id: ExperimentId, n: usize) -> Result<Setup> {
    check_n(n)?;
    let nf = n as f64;
    let (sequence, xi, eta) = match id {
        ExperimentId::A => {
            let c = construct_dirichlet_like(n, 1.0)?;
            let a = c.shear(-1.0 / (nf * nf));
            (c, Frequencies::Canonical, a.values().to_vec())
        }
        ExperimentId::B => {
            let c = construct_small_alpha(n, 0.5)?;
            let eta = c.values().to_vec();
            (c, Frequencies::Canonical, eta)
        }
        ExperimentId::C => {
            let c = construct_dirichlet_like(n, 1.0)?;
            let xi = c
                .values()
                .iter()
                .enumerate()
                .map(|(i, &a)| ((i + 1) as f64 - a) / nf)
                .collect();
            let eta = c.values().to_vec();
            (c, Frequencies::Custom(xi), eta)
        }
    };
    let (_, hits) = sequence.intersect_count(id.alpha(), 0.0)?;
    let spec = ExpSumSpec::new(xi, eta, indicator(n, &hits))?;
    Ok(Setup {
        id,
        sequence,
        hits,
        spec,
    })
}

/// The point where the identity says `f = hit count`, for integer `j`.
pub fn identity_point(id: ExperimentId, n: usize, j: u64) -> (f64, f64) {
    let nf = n as f64;
    let jf = j as f64;
    match id {
        ExperimentId::A => (jf, jf * nf),
        ExperimentId::B => (0.0, jf * power_f64(n as u64, 0.5)),
        ExperimentId::C => (jf * nf, jf),
    }
}

/// Identity-check values of `j`: all of `1..=N` for A, otherwise
/// [`SAMPLED_J`] distinct seeded values in `1..=N^{3/2}` (B) or `1..=N²` (C).
pub fn identity_js(id: ExperimentId, n: usize, seed: u64) -> Vec<u64> {
    let upper = match id {
        ExperimentId::A => return (1..=n as u64).collect(),
        ExperimentId::B => power_f64(n as u64, 1.5).floor() as usize,
        ExperimentId::C => n * n,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut js: Vec<u64> = rand::seq::index::sample(&mut rng, upper, SAMPLED_J.min(upper))
        .into_iter()
        .map(|i| i as u64 + 1)
        .collect();
    js.sort_unstable();
    js
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub checked_j: Vec<u64>,
    /// `max_j |f − H| / H`.
    pub max_rel_err: f64,
    pub pass: bool,
}

/// Relative tolerance of the identity checks.
pub const IDENTITY_TOL: f64 = 1e-6;

pub fn check_identity(s: &Setup, seed: u64) -> IdentityCheck {
    let n = s.spec.n();
    let h = s.hit_count() as f64;
    let js = identity_js(s.id, n, seed);
    let max_rel_err = js
        .iter()
        .map(|&j| {
            let (x, t) = identity_point(s.id, n, j);
            (s.spec.eval_point(x, t) - Complex64::new(h, 0.0)).norm() / h
        })
        .fold(0.0, f64::max);
    IdentityCheck {
        checked_j: js,
        max_rel_err,
        pass: max_rel_err <= IDENTITY_TOL,
    }
}

/// Grid for an experiment and the refinement factor used when the full grid
/// would exceed the budget.
///
/// The full grid has `4N` outer-axis points over `[0, N)` (A, B) or
/// `[0, N²)` (C) and `4N²` points over `[0, N²)` on the other axis.
pub fn experiment_grid(id: ExperimentId, n: usize, budget: u64) -> Result<(GridSpec, usize)> {
    let nf = n as f64;
    let mx = 4 * n;
    let full = 4 * n * n;
    let cap = ((budget / mx as u64) as usize).max(1);
    let mt = full.min(cap);
    let refine = if mt < full { full.div_ceil(mt) } else { 1 };
    let x_hi = match id {
        ExperimentId::A | ExperimentId::B => nf,
        ExperimentId::C => nf * nf,
    };
    let grid = GridSpec::new(0.0, x_hi, mx, 0.0, nf * nf, mt)?;
    // Refinement only helps when the coarse axis is the sup axis.
    Ok((grid, if id == ExperimentId::A { refine } else { 1 }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionRecord {
    pub tightest_c: f64,
    pub scale: u32,
    pub knots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: ExperimentId,
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    pub hit_count: usize,
    pub identity: IdentityCheck,
    pub norm: NormRecord,
    pub b_l2: f64,
    pub predicted_exponent: f64,
    /// `norm / (N^exponent ‖b‖₂)`.
    pub ratio: f64,
    /// `max_α α⁴ |π U_α| / (N^{7/3 or 8/3} ‖b‖⁴)` from the same sweep.
    pub level_statistic: f64,
    pub seed: u64,
    pub construction: ConstructionRecord,
    /// Wall-clock time; left out of serialized reports so they stay
    /// reproducible byte for byte.
    #[serde(skip)]
    pub runtime_ms: u128,
}

pub fn run_experiment(id: ExperimentId, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let s = setup(id, cfg.n)?;
    let identity = check_identity(&s, cfg.seed);
    let (grid, factor) = experiment_grid(id, cfg.n, cfg.grid_budget)?;
    let mut sw = sweep(&s.spec, &grid, id.direction(), cfg.fast_path)?;
    refine(&s.spec, &mut sw, factor, cfg.fast_path)?;
    let norm = norm_from_sweep(&sw, cfg.n, cfg.p, factor)?;
    let levels = level_report_from_sweep(&s.spec, &sw);
    let b_l2 = s.spec.l2_norm();
    let exponent = id.predicted_exponent();
    let rep = s.sequence.validate()?;
    Ok(ExperimentReport {
        id,
        n: cfg.n,
        alpha: id.alpha(),
        hit_count: s.hit_count(),
        identity,
        ratio: norm.value / ((cfg.n as f64).powf(exponent) * b_l2),
        norm,
        b_l2,
        predicted_exponent: exponent,
        level_statistic: levels.max_statistic(),
        seed: cfg.seed,
        construction: ConstructionRecord {
            tightest_c: rep.tightest_c,
            scale: s.sequence.meta().scale,
            knots: s.sequence.meta().knots,
        },
        runtime_ms: start.elapsed().as_millis(),
    })
}

/// Slope of `log(norm/‖b‖₂)` against `log N` over a set of reports.
pub fn norm_slope(reports: &[ExperimentReport]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| (r.n as f64, r.norm.value / r.b_l2))
        .collect();
    Ok(regress(&pts)?.slope)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub alpha: f64,
    /// `dirichlet` for `α > 1/2`, `small_alpha` otherwise.
    pub construction: String,
    /// `(N, exact hit count)`.
    pub counts: Vec<(usize, usize)>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// `(α + 1)/3` above `1/2`, `α` below.
    pub target: f64,
}

/// Exact hit counts of the matching construction for every `(N, α)` and the
/// log-log slope per `α`.
pub fn intersection_scan(ns: &[usize], alphas: &[f64]) -> Result<Vec<ScanResult>> {
    for &n in ns {
        check_n(n)?;
    }
    alphas
        .iter()
        .map(|&alpha| {
            let small = alpha <= 0.5;
            let counts = ns
                .iter()
                .map(|&n| {
                    let seq = if small {
                        construct_small_alpha(n, alpha)?
                    } else {
                        construct_dirichlet_like(n, alpha)?
                    };
                    Ok((n, seq.intersect_count(alpha, 0.0)?.0))
                })
                .collect::<Result<Vec<_>>>()?;
            let pts: Vec<(f64, f64)> = counts.iter().map(|&(n, c)| (n as f64, c as f64)).collect();
            let r = regress(&pts)?;
            Ok(ScanResult {
                alpha,
                construction: if small { "small_alpha" } else { "dirichlet" }.into(),
                counts,
                slope: r.slope,
                intercept: r.intercept,
                residual: r.residual,
                target: if small { alpha } else { (alpha + 1.0) / 3.0 },
            })
        })
        .collect()
}
