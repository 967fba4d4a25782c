//! Parallel sweeps of `f(x, t)` over uniform grids.
//!
//! Rows are fixed-`t` slices. A row is either one inverse FFT (canonical
//! frequencies on a commensurate x-grid) or a phase-table product. Rows are
//! split into fixed chunks; chunk results combine with order-independent
//! reductions, so the output does not depend on the number of threads.

use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use uniconvex::expsum::{
    Direction, ExpSumSpec, GridSpec, Ladder, LevelSetReport, OuterStats, PhaseTable,
};
use uniconvex::{Error, Result};

/// Rows handled by one task.
const CHUNK_ROWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FastPath {
    /// FFT rows whenever the grid allows it.
    #[default]
    Auto,
    /// FFT rows, or an error if the grid does not allow it.
    On,
    /// Phase-table rows only.
    Off,
}

impl FromStr for FastPath {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(Self::Auto),
            "on" => Ok(Self::On),
            "off" => Ok(Self::Off),
            _ => Err(format!("expected auto, on or off, got {s:?}")),
        }
    }
}

enum Kernel {
    Fft { plan: Arc<dyn Fft<f64>>, stride: usize },
    Table(PhaseTable),
}

/// Evaluates whole rows of a grid.
pub struct RowEvaluator<'a> {
    spec: &'a ExpSumSpec,
    grid: GridSpec,
    kernel: Kernel,
}

impl<'a> RowEvaluator<'a> {
    pub fn new(spec: &'a ExpSumSpec, grid: &GridSpec, fast: FastPath) -> Result<Self> {
        grid.check()?;
        let stride = spec.fft_stride(grid);
        let kernel = match (fast, stride) {
            (FastPath::On, None) => {
                return Err(Error::InvalidGrid(
                    "fast path needs xi_n = n/N and an x-grid [0, L*N) with integer L".into(),
                ))
            }
            (FastPath::On | FastPath::Auto, Some(stride)) => Kernel::Fft {
                plan: FftPlanner::new().plan_fft_inverse(grid.mx),
                stride,
            },
            _ => Kernel::Table(PhaseTable::new(spec, &grid.xs())),
        };
        Ok(Self {
            spec,
            grid: *grid,
            kernel,
        })
    }

    pub fn uses_fft(&self) -> bool {
        matches!(self.kernel, Kernel::Fft { .. })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Scratch buffer for [`RowEvaluator::row_at`].
    pub fn scratch(&self) -> Vec<Complex64> {
        match &self.kernel {
            Kernel::Fft { plan, .. } => {
                vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()]
            }
            Kernel::Table(_) => Vec::new(),
        }
    }

    /// `out[k] = f(x_k, t)`.
    pub fn row_at(&self, t: f64, out: &mut [Complex64], scratch: &mut [Complex64]) {
        let coeffs = self.spec.row_coefficients(t);
        match &self.kernel {
            Kernel::Fft { plan, stride } => {
                self.spec.fold_row(&coeffs, *stride, self.grid.mx, out);
                plan.process_with_scratch(out, scratch);
            }
            Kernel::Table(table) => table.row(&coeffs, out),
        }
    }

    /// Maps every chunk of rows `t` in `ts` to an accumulator and reduces
    /// them in row order.
    pub fn map_reduce<A, M, F, R>(&self, ts: &[f64], make: M, absorb: F, merge: R) -> A
    where
        A: Send,
        M: Fn() -> A + Sync + Send,
        F: Fn(&mut A, usize, &[f64]) + Sync + Send,
        R: Fn(A, A) -> A + Sync + Send,
    {
        let chunks = ts.len().div_ceil(CHUNK_ROWS);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = make();
                let mut row = vec![Complex64::new(0.0, 0.0); self.grid.mx];
                let mut abs = vec![0.0; self.grid.mx];
                let mut scratch = self.scratch();
                let end = ((c + 1) * CHUNK_ROWS).min(ts.len());
                for (r, &t) in ts.iter().enumerate().take(end).skip(c * CHUNK_ROWS) {
                    self.row_at(t, &mut row, &mut scratch);
                    for (a, z) in abs.iter_mut().zip(&row) {
                        *a = z.norm();
                    }
                    absorb(&mut acc, r, &abs);
                }
                acc
            })
            .reduce_with(merge)
            .unwrap_or_else(make)
    }
}

/// All grid values, row-major `Mt × Mx`.
pub fn eval_grid(spec: &ExpSumSpec, grid: &GridSpec, fast: FastPath) -> Result<Vec<Complex64>> {
    let ev = RowEvaluator::new(spec, grid, fast)?;
    let mut out = vec![Complex64::new(0.0, 0.0); grid.mx * grid.mt];
    out.par_chunks_mut(grid.mx)
        .enumerate()
        .for_each(|(r, row)| {
            let mut scratch = ev.scratch();
            ev.row_at(grid.t(r), row, &mut scratch);
        });
    Ok(out)
}

/// Sup over the inner direction for every outer cell, plus dyadic level masks.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub direction: Direction,
    pub grid: GridSpec,
    pub ladder: Ladder,
    /// Per outer cell: the maximum of `|f|`.
    pub max: Vec<f64>,
    /// Per outer cell: inner coordinate of the maximum (smallest on ties).
    pub inner: Vec<f64>,
    /// Per outer cell: OR of the level bits seen.
    pub masks: Vec<u128>,
    pub fft: bool,
    /// Extra evaluations spent on refinement.
    pub refined_nodes: u64,
}

impl Sweep {
    /// Outer coordinate of cell `i`.
    pub fn outer_coord(&self, i: usize) -> f64 {
        match self.direction {
            Direction::T => self.grid.x(i),
            Direction::X => self.grid.t(i),
        }
    }

    fn from_stats(
        direction: Direction,
        grid: GridSpec,
        ladder: Ladder,
        stats: OuterStats,
        fft: bool,
    ) -> Self {
        let inner = stats
            .argmax
            .iter()
            .map(|&k| match direction {
                Direction::T => grid.t(k),
                Direction::X => grid.x(k),
            })
            .collect();
        Self {
            direction,
            grid,
            ladder,
            max: stats.max,
            inner,
            masks: stats.masks,
            fft,
            refined_nodes: 0,
        }
    }
}

/// Sweeps the whole grid.
pub fn sweep(spec: &ExpSumSpec, grid: &GridSpec, dir: Direction, fast: FastPath) -> Result<Sweep> {
    let ev = RowEvaluator::new(spec, grid, fast)?;
    let ladder = Ladder::above(spec.l1_norm());
    let ts = grid.ts();
    let stats = match dir {
        Direction::T => ev.map_reduce(
            &ts,
            || OuterStats::new(grid.mx),
            |acc, r, abs| acc.absorb_column_row(r, abs, &ladder),
            |a, b| a.merge(&b),
        ),
        Direction::X => {
            let rows = ev.map_reduce(
                &ts,
                Vec::new,
                |acc: &mut Vec<(usize, OuterStats)>, r, abs| {
                    let mut one = OuterStats::new(1);
                    one.set_row(0, abs, &ladder);
                    acc.push((r, one));
                },
                |mut a, b| {
                    a.extend(b);
                    a
                },
            );
            let mut stats = OuterStats::new(grid.mt);
            for (r, one) in rows {
                stats.max[r] = one.max[0];
                stats.argmax[r] = one.argmax[0];
                stats.masks[r] = one.masks[0];
            }
            stats
        }
    };
    Ok(Sweep::from_stats(dir, *grid, ladder, stats, ev.uses_fft()))
}

/// Refines the inner direction around the current maxima: `factor − 1`
/// extra points on each side of the argmax, spaced `1/factor` of a grid step.
/// Only adds nodes, so every maximum is non-decreasing.
pub fn refine(spec: &ExpSumSpec, sw: &mut Sweep, factor: usize, fast: FastPath) -> Result<()> {
    if factor < 2 {
        return Ok(());
    }
    let g = sw.grid;
    let ladder = sw.ladder;
    match sw.direction {
        Direction::T => {
            // Fine t-rows around every distinct argmax, over the full x-grid.
            let step = g.dt() / factor as f64;
            let mut centers = sw.inner.clone();
            centers.sort_by(f64::total_cmp);
            centers.dedup();
            let mut ts: Vec<f64> = Vec::new();
            for &t0 in &centers {
                for j in 1..factor {
                    ts.push(t0 - step * j as f64);
                    ts.push(t0 + step * j as f64);
                }
            }
            ts.retain(|&t| t >= g.t_lo && t <= g.t_hi);
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            let ev = RowEvaluator::new(spec, &g, fast)?;
            let fine = ev.map_reduce(
                &ts,
                || OuterStats::new(g.mx),
                |acc, r, abs| acc.absorb_column_row(r, abs, &ladder),
                |a, b| a.merge(&b),
            );
            for i in 0..g.mx {
                if fine.max[i] > sw.max[i] {
                    sw.max[i] = fine.max[i];
                    sw.inner[i] = ts[fine.argmax[i]];
                }
                sw.masks[i] |= fine.masks[i];
            }
            sw.refined_nodes += (ts.len() * g.mx) as u64;
        }
        Direction::X => {
            let step = g.dx() / factor as f64;
            let updates: Vec<(f64, f64, u128)> = (0..g.mt)
                .into_par_iter()
                .map(|r| {
                    let t = g.t(r);
                    let x0 = sw.inner[r];
                    let mut best = (f64::NEG_INFINITY, x0);
                    let mut mask = 0u128;
                    for j in 1..factor {
                        for x in [x0 - step * j as f64, x0 + step * j as f64] {
                            if x < g.x_lo || x > g.x_hi {
                                continue;
                            }
                            let v = spec.eval_point(x, t).norm();
                            mask |= ladder.mask(v);
                            if v > best.0 || (v == best.0 && x < best.1) {
                                best = (v, x);
                            }
                        }
                    }
                    (best.0, best.1, mask)
                })
                .collect();
            for (r, (v, x, mask)) in updates.into_iter().enumerate() {
                if v > sw.max[r] {
                    sw.max[r] = v;
                    sw.inner[r] = x;
                }
                sw.masks[r] |= mask;
            }
            sw.refined_nodes += (g.mt * 2 * (factor - 1)) as u64;
        }
    }
    Ok(())
}

/// Result of an `L^p` norm of a maximal function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    #[serde(rename = "N")]
    pub n: usize,
    pub direction: String,
    pub p: f64,
    pub value: f64,
    pub grid: GridRecord,
    /// Largest cell maxima as `[outer, inner, value]`.
    pub peaks: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub x_lo: f64,
    pub x_hi: f64,
    pub mx: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub mt: usize,
    pub fft: bool,
    pub refine: usize,
    pub refined_nodes: u64,
}

impl GridRecord {
    pub fn spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.x_lo, self.x_hi, self.mx, self.t_lo, self.t_hi, self.mt)
    }
}

/// `‖ sup_inner |f| ‖_{L^p(outer)}` from a finished sweep.
pub fn norm_from_sweep(sw: &Sweep, n: usize, p: f64, refine_factor: usize) -> Result<NormRecord> {
    let (_, width) = sw.grid.outer(sw.direction);
    let value = uniconvex::expsum::lp_norm(&sw.max, width, p)?;
    let mut order: Vec<usize> = (0..sw.max.len()).collect();
    order.sort_by(|&a, &b| sw.max[b].total_cmp(&sw.max[a]).then(a.cmp(&b)));
    let peaks = order
        .iter()
        .take(8)
        .map(|&i| [sw.outer_coord(i), sw.inner[i], sw.max[i]])
        .collect();
    let g = sw.grid;
    Ok(NormRecord {
        n,
        direction: sw.direction.as_str().to_string(),
        p,
        value,
        grid: GridRecord {
            x_lo: g.x_lo,
            x_hi: g.x_hi,
            mx: g.mx,
            t_lo: g.t_lo,
            t_hi: g.t_hi,
            mt: g.mt,
            fft: sw.fft,
            refine: refine_factor,
            refined_nodes: sw.refined_nodes,
        },
        peaks,
    })
}

/// `‖ sup_inner |f| ‖_{L^p(outer)}` on `grid`, refining the inner direction
/// by `refine_factor` around each maximum (1 = no refinement).
pub fn sup_norm_lp(
    spec: &ExpSumSpec,
    grid: &GridSpec,
    dir: Direction,
    p: f64,
    refine_factor: usize,
    fast: FastPath,
) -> Result<NormRecord> {
    if !(p >= 1.0) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "[1, inf)",
        });
    }
    let mut sw = sweep(spec, grid, dir, fast)?;
    refine(spec, &mut sw, refine_factor, fast)?;
    norm_from_sweep(&sw, spec.n(), p, refine_factor)
}

/// Measure of outer cells holding at least one node with `|f| ∈ [α/2, α)`.
pub fn level_set_projection(
    spec: &ExpSumSpec,
    grid: &GridSpec,
    alpha: f64,
    dir: Direction,
    fast: FastPath,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "(0, inf)",
        });
    }
    let ev = RowEvaluator::new(spec, grid, fast)?;
    let in_band = |v: f64| v >= alpha / 2.0 && v < alpha;
    let ts = grid.ts();
    let (cells, width) = grid.outer(dir);
    let hit: Vec<bool> = match dir {
        Direction::T => ev.map_reduce(
            &ts,
            || vec![false; grid.mx],
            |acc, _, abs| {
                for (h, &v) in acc.iter_mut().zip(abs) {
                    *h |= in_band(v);
                }
            },
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x |= y;
                }
                a
            },
        ),
        Direction::X => {
            let rows = ev.map_reduce(
                &ts,
                Vec::new,
                |acc: &mut Vec<(usize, bool)>, r, abs| {
                    acc.push((r, abs.iter().any(|&v| in_band(v))))
                },
                |mut a, b| {
                    a.extend(b);
                    a
                },
            );
            let mut h = vec![false; cells];
            for (r, b) in rows {
                h[r] = b;
            }
            h
        }
    };
    Ok(hit.iter().filter(|&&h| h).count() as f64 * width)
}

/// Dyadic ladder of projected level-set measures and their normalized
/// statistics.
pub fn dyadic_level_report(
    spec: &ExpSumSpec,
    grid: &GridSpec,
    dir: Direction,
    fast: FastPath,
) -> Result<LevelSetReport> {
    let sw = sweep(spec, grid, dir, fast)?;
    Ok(level_report_from_sweep(spec, &sw))
}

pub fn level_report_from_sweep(spec: &ExpSumSpec, sw: &Sweep) -> LevelSetReport {
    let (_, width) = sw.grid.outer(sw.direction);
    LevelSetReport::from_masks(
        spec.n(),
        sw.direction,
        spec.l2_norm(),
        &sw.ladder,
        &sw.masks,
        width,
    )
}
