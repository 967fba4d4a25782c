//! Numerical invariant suite for interpolants.

use serde::{Deserialize, Serialize};

use uniconvex::interp::{ConvexInterpolant, Mode};
use uniconvex::Result;

/// Interior sample points for the convexity and finite-difference checks.
pub const SAMPLES: usize = 10_000;
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Worst observed error (or, for `convexity`, the smallest `f″`).
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub mode: Mode,
    pub knots: usize,
    pub d: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn check(name: &str, value: f64, tol: f64, pass: bool) -> Check {
    Check {
        name: name.into(),
        value,
        tol,
        pass,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Runs every check over the knot range `[x_1, x_n]`.
pub fn interpolant_invariants(f: &ConvexInterpolant) -> Result<InvariantReport> {
    let knots = f.knots();
    let pieces = f.pieces();
    let c2 = f.mode() == Mode::C2;
    let d = f.d();
    let mut checks = Vec::new();

    // Area per knot pair, from the closed-form piece areas.
    let area = knots
        .windows(2)
        .enumerate()
        .map(|(i, w)| rel(pieces[2 * i].area() + pieces[2 * i + 1].area(), w[1].y - w[0].y))
        .fold(0.0, f64::max);
    checks.push(check("area", area, 1e-12, area <= 1e-12));

    let knot_fit = knots
        .iter()
        .map(|k| {
            let (y, p, _) = f.eval(k.x)?;
            Ok(rel(y, k.y).max(rel(p, k.p)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(check("knot_values", knot_fit, 1e-10, knot_fit <= 1e-10));

    // One-sided limits at every breakpoint.
    let mut jump1: f64 = 0.0;
    let mut jump2: f64 = 0.0;
    for w in pieces.windows(2) {
        let (_, pl, ql) = w[0].eval(w[0].x_hi());
        let (_, pr, qr) = w[1].eval(w[1].x_lo());
        jump1 = jump1.max(rel(pl, pr));
        jump2 = jump2.max((ql - qr).abs() / ql.abs().max(qr.abs()));
    }
    checks.push(check("c1_continuity", jump1, 1e-12, jump1 <= 1e-12));
    if c2 {
        checks.push(check("c2_continuity", jump2, 1e-9, jump2 <= 1e-9));
        let at_knots = knots
            .iter()
            .map(|k| f.eval(k.x).map(|(_, _, q)| (q - d).abs() / d))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(check("curvature_at_knots", at_knots, 1e-9, at_knots <= 1e-9));
    }

    let colin = f
        .knots()
        .windows(2)
        .zip(f.nodes())
        .map(|(w, &(x0, p0))| {
            let lhs = (w[1].p - p0) / (p0 - w[0].p);
            let rhs = (x0 - w[0].x) / (w[1].x - x0);
            (lhs - rhs).abs() / rhs.abs()
        })
        .fold(0.0, f64::max);
    checks.push(check("collinearity", colin, 1e-9, colin <= 1e-9));

    let (lo, hi) = (knots[0].x, knots[knots.len() - 1].x);
    let breaks: Vec<f64> = pieces.iter().map(|p| p.x_lo()).collect();
    let near_break = |x: f64| {
        let i = breaks.partition_point(|&b| b <= x);
        let left = if i > 0 { x - breaks[i - 1] } else { f64::INFINITY };
        let right = breaks.get(i).map_or(hi - x, |&b| b - x);
        left.min(right) <= 2.0 * FD_STEP
    };
    let mut min_fpp = f64::INFINITY;
    let mut fd1: f64 = 0.0;
    let mut fd2: f64 = 0.0;
    for k in 0..SAMPLES {
        let x = lo + (hi - lo) * (k as f64 + 0.5) / SAMPLES as f64;
        let (_, p, q) = f.eval(x)?;
        min_fpp = min_fpp.min(q);
        if near_break(x) {
            continue;
        }
        let (ym, pm, _) = f.eval(x - FD_STEP)?;
        let (yp, pp, _) = f.eval(x + FD_STEP)?;
        fd1 = fd1.max(((yp - ym) / (2.0 * FD_STEP) - p).abs() / p.abs().max(1e-300));
        fd2 = fd2.max(((pp - pm) / (2.0 * FD_STEP) - q).abs() / q.abs().max(1e-300));
    }
    if c2 {
        let floor = d * (1.0 - 1e-9);
        checks.push(check("convexity", min_fpp, floor, min_fpp >= floor));
    } else {
        checks.push(check("convexity", min_fpp, 0.0, min_fpp > 0.0));
    }
    checks.push(check("finite_difference_f", fd1, 1e-4, fd1 <= 1e-4));
    checks.push(check("finite_difference_fp", fd2, 1e-4, fd2 <= 1e-4));

    let pass = checks.iter().all(|c| c.pass);
    Ok(InvariantReport {
        mode: f.mode(),
        knots: knots.len(),
        d,
        checks,
        pass,
    })
}
