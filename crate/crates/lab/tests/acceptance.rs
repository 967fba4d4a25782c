//! Acceptance criteria, one `PASS`/`FAIL` line each.
//!
//! Runs without the libtest harness so every criterion reports even when an
//! earlier one fails. The process exits 0 regardless, unless
//! `ACCEPTANCE_STRICT=1` is set, in which case any failure exits 1.

use std::f64::consts::FRAC_PI_4;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uniconvex::convexseq::construct_dirichlet_like;
use uniconvex::expsum::{ExpSumSpec, GridSpec};
use uniconvex::interp::{x_cot_x, ConvexInterpolant, DerivativePiece, Knot, Mode};
use uniconvex::lattice::power_f64;
use uniconvex::rational::enumerate_fractions;
use uniconvex_lab::experiments::{
    check_identity, intersection_scan, norm_slope, run_experiment, setup, ExperimentConfig,
    ExperimentId, ExperimentReport,
};
use uniconvex_lab::grid::{eval_grid, FastPath};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let pass = out.pass && took <= limit;
    let verdict = if pass { "PASS" } else { "FAIL" };
    let timing = if took <= limit { "" } else { " over time limit" };
    println!(
        "{verdict} criterion {id} ({name}): {} [{:.1}s / {}s{timing}]",
        out.detail,
        took.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

fn identities() -> Outcome {
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    for n in [64, 128, 256] {
        for id in [ExperimentId::A, ExperimentId::B, ExperimentId::C] {
            match setup(id, n) {
                Ok(s) => {
                    let c = check_identity(&s, 0);
                    worst = worst.max(c.max_rel_err);
                    if !c.pass {
                        failed.push(format!("{id:?}@{n}"));
                    }
                }
                Err(e) => failed.push(format!("{id:?}@{n}: {e}")),
            }
        }
    }
    Outcome {
        pass: failed.is_empty(),
        detail: format!("max relative error {worst:.2e}, failures {failed:?}"),
    }
}

fn convexity() -> Outcome {
    let mut worst_c = 0.0f64;
    let mut failed = Vec::new();
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        for n in [256usize, 1024, 4096] {
            let s = match construct_dirichlet_like(n, alpha) {
                Ok(s) => s,
                Err(e) => {
                    failed.push(format!("alpha {alpha}, N {n}: {e}"));
                    continue;
                }
            };
            let c = s.validate().map(|r| r.tightest_c).unwrap_or(f64::INFINITY);
            worst_c = worst_c.max(c);
            if c > 8.0 {
                failed.push(format!("alpha {alpha}, N {n}: C = {c}"));
            }
            // Membership in N^{-α}ℤ: the certificate coordinate is an
            // integer and the sample equals coord · N^{-α}.
            let scale = power_f64(n as u64, alpha);
            let hits = s.hits().unwrap_or(&[]);
            let bad = hits.iter().filter(|h| {
                let v = h.coord.to_f64().unwrap() / scale;
                !h.coord.is_integer() || (s.values()[h.n - 1] - v).abs() > 1e-12 * v.abs()
            });
            let bad = bad.count();
            if bad > 0 || !s.verify_hits() {
                failed.push(format!("alpha {alpha}, N {n}: {bad} bad hits"));
            }
        }
    }
    Outcome {
        pass: failed.is_empty(),
        detail: format!("worst tightest_C {worst_c:.3}, failures {failed:?}"),
    }
}

fn random_knots(rng: &mut ChaCha8Rng) -> Vec<Knot> {
    let k = rng.gen_range(2..=40);
    let (mut x, mut y, mut p) = (0.0, 0.0, rng.gen_range(0.2..2.0));
    let mut out = vec![Knot::new(x, y, p)];
    for _ in 1..k {
        let dx = rng.gen_range(0.5..1.5) / k as f64;
        let dp = dx * rng.gen_range(0.5..2.0);
        y += dx * (p + rng.gen_range(0.2..0.8) * dp);
        x += dx;
        p += dp;
        out.push(Knot::new(x, y, p));
    }
    out
}

/// Worst violations of the interpolation checks for one knot set:
/// `[area, knot fit, f″ = D, convexity, x cot x]`.
fn interp_errors(knots: &[Knot]) -> [f64; 5] {
    let Ok(c1) = ConvexInterpolant::build_c1(knots) else {
        return [f64::INFINITY; 5];
    };
    let Ok(c2) = c1.upgrade_c2() else {
        return [f64::INFINITY; 5];
    };
    let mut e = [0.0f64; 5];
    for f in [&c1, &c2] {
        let pieces = f.pieces();
        for (i, w) in knots.windows(2).enumerate() {
            let area = pieces[2 * i].area() + pieces[2 * i + 1].area();
            e[0] = e[0].max((area - (w[1].y - w[0].y)).abs());
        }
        for k in knots {
            let (y, p, q) = f.eval(k.x).unwrap();
            e[1] = e[1].max((y - k.y).abs()).max((p - k.p).abs());
            if f.mode() == Mode::C2 {
                e[2] = e[2].max((q - f.d()).abs() / f.d());
            }
        }
        let (lo, hi) = (knots[0].x, knots[knots.len() - 1].x);
        for s in 0..10_000 {
            let x = lo + (hi - lo) * (s as f64 + 0.5) / 1e4;
            if f.eval(x).unwrap().2 <= 0.0 {
                e[3] = 1.0;
            }
        }
    }
    for (lin, sin) in c1.pieces().iter().zip(c2.pieces()) {
        let (DerivativePiece::Linear { x_lo, x_hi, p_lo, p_hi, .. }, DerivativePiece::Sinusoid { alpha, .. }) =
            (*lin, *sin)
        else {
            return [f64::INFINITY; 5];
        };
        let target = (c2.d() * (x_hi - x_lo) / (p_hi - p_lo)).min(FRAC_PI_4);
        e[4] = e[4].max((x_cot_x(alpha) - target).abs());
    }
    e
}

fn interpolation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut sets: Vec<Vec<Knot>> = (0..100).map(|_| random_knots(&mut rng)).collect();
    sets.push(vec![Knot::new(0.0, 0.0, 0.0), Knot::new(1.0, 0.5, 1.0)]);
    sets.push(vec![Knot::new(0.0, 0.0, 0.0), Knot::new(1.0, 1.0 / 3.0, 1.0)]);
    let mut worst = [0.0f64; 5];
    for s in &sets {
        for (w, e) in worst.iter_mut().zip(interp_errors(s)) {
            *w = w.max(e);
        }
    }
    let tol = [1e-12, 1e-10, 1e-6, 0.5, 1e-12];
    Outcome {
        pass: worst.iter().zip(tol).all(|(w, t)| *w <= t),
        detail: format!(
            "{} knot sets; area {:.1e}, knot fit {:.1e}, f''=D {:.1e}, non-convex samples {}, x cot x {:.1e}",
            sets.len(),
            worst[0],
            worst[1],
            worst[2],
            if worst[3] > 0.0 { "yes" } else { "none" },
            worst[4]
        ),
    }
}

fn farey_brute(lo: (i64, i64), hi: (i64, i64), qmax: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for d in 1..=qmax {
        let pmin = Integer::div_ceil(&(lo.0 * d), &lo.1);
        let pmax = Integer::div_floor(&(hi.0 * d), &hi.1);
        for p in pmin..=pmax {
            let g = p.gcd(&d);
            out.push((p / g, d / g));
        }
    }
    out.sort_by(|a, b| (a.0 as i128 * b.1 as i128).cmp(&(b.0 as i128 * a.1 as i128)));
    out.dedup();
    out
}

fn farey() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    let (mut dmin, mut dmax, mut dense) = (f64::INFINITY, 0.0f64, 0);
    for _ in 0..200 {
        // Intervals [x, 2x], so the density band applies whenever xy ≥ 100.
        let den = rng.gen_range(1..=20i64);
        let num = rng.gen_range(1..=20 * den);
        let qmax = rng.gen_range(1..=200i64);
        let lo = BigRational::new(num.into(), den.into());
        let hi = BigRational::new((2 * num).into(), den.into());
        let got: Vec<(i64, i64)> = enumerate_fractions(&lo, &hi, qmax as u64)
            .unwrap()
            .iter()
            .map(|r| (r.numer().try_into().unwrap(), r.denom().try_into().unwrap()))
            .collect();
        if got != farey_brute((num, den), (2 * num, den), qmax) {
            mismatches += 1;
        }
        let x = num as f64 / den as f64;
        if x * qmax as f64 >= 100.0 {
            let d = got.len() as f64 / (x * (qmax * qmax) as f64);
            dmin = dmin.min(d);
            dmax = dmax.max(d);
            dense += 1;
        }
    }
    Outcome {
        pass: mismatches == 0 && dense > 0 && dmin >= 0.15 && dmax <= 0.6,
        detail: format!(
            "200 cases, {mismatches} mismatches; density over {dense} cases in [{dmin:.3}, {dmax:.3}]"
        ),
    }
}

fn scaling() -> Outcome {
    match intersection_scan(&[256, 1024, 4096], &[1.0, 1.5, 2.0, 0.25]) {
        Ok(res) => {
            let pass = res.iter().all(|r| (r.slope - r.target).abs() <= 0.15);
            let detail = res
                .iter()
                .map(|r| format!("alpha {} slope {:.3} (target {:.3})", r.alpha, r.slope, r.target))
                .collect::<Vec<_>>()
                .join("; ");
            Outcome { pass, detail }
        }
        Err(e) => Outcome {
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn runs(id: ExperimentId) -> Result<Vec<ExperimentReport>, String> {
    [64, 128, 256]
        .iter()
        .map(|&n| run_experiment(id, &ExperimentConfig::new(n)).map_err(|e| e.to_string()))
        .collect()
}

fn norm_brackets(a: &Result<Vec<ExperimentReport>, String>, b: &Result<Vec<ExperimentReport>, String>) -> Outcome {
    let slope = |r: &Result<Vec<ExperimentReport>, String>| match r {
        Ok(v) => norm_slope(v).map_err(|e| e.to_string()),
        Err(e) => Err(e.clone()),
    };
    let (sa, sb) = (slope(a), slope(b));
    let a_range = (7.0 / 12.0 - 0.1, 7.0 / 12.0 + 0.12);
    let b_range = (5.0 / 8.0 - 0.1, 2.0 / 3.0 + 0.1);
    let within = |s: &Result<f64, String>, (lo, hi): (f64, f64)| matches!(s, Ok(v) if (lo..=hi).contains(v));
    Outcome {
        pass: within(&sa, a_range) && within(&sb, b_range),
        detail: format!(
            "A slope {sa:?} in [{:.3}, {:.3}]; B slope {sb:?} in [{:.3}, {:.3}]",
            a_range.0, a_range.1, b_range.0, b_range.1
        ),
    }
}

fn random_spec(seed: u64, n: usize) -> ExpSumSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eta = (0..n).map(|_| rng.gen_range(0.0..4.0)).collect();
    let b = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ExpSumSpec::canonical(eta, b).unwrap()
}

fn evaluator() -> Outcome {
    let n = 256;
    let spec = random_spec(77, n);
    let l1 = spec.l1_norm();
    let b2: f64 = spec.b().iter().map(|z| z.norm_sqr()).sum();
    let grid = GridSpec::new(0.0, n as f64, 4 * n, 0.0, (n * n) as f64, 512).unwrap();
    let fast = eval_grid(&spec, &grid, FastPath::On).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let mut fft_err = 0.0f64;
    let mut period_err = 0.0f64;
    for _ in 0..1000 {
        let (k, r) = (rng.gen_range(0..grid.mx), rng.gen_range(0..grid.mt));
        let naive = spec.eval_point(grid.x(k), grid.t(r));
        fft_err = fft_err.max((fast[r * grid.mx + k] - naive).norm() / l1);
        let x = rng.gen_range(0.0..n as f64);
        let t = rng.gen_range(0.0..(n * n) as f64);
        let d = spec.eval_point(x + n as f64, t) - spec.eval_point(x, t);
        period_err = period_err.max(d.norm() / l1);
    }
    let parseval_err = fast
        .chunks(grid.mx)
        .map(|row| {
            let mean = row.iter().map(|z| z.norm_sqr()).sum::<f64>() / grid.mx as f64;
            (mean - b2).abs() / b2
        })
        .fold(0.0, f64::max);
    let report_in = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let r = run_experiment(ExperimentId::A, &ExperimentConfig::new(64)).unwrap();
            serde_json::to_string(&r).unwrap()
        })
    };
    let base = report_in(1);
    let deterministic = [2, 4, 7].iter().all(|&t| report_in(t) == base);
    Outcome {
        pass: fft_err <= 1e-9 && period_err <= 1e-9 && parseval_err <= 1e-9 && deterministic,
        detail: format!(
            "fft vs naive {fft_err:.1e}, periodicity {period_err:.1e}, Parseval {parseval_err:.1e}, \
             reports identical across 1/2/4/7 threads: {deterministic}"
        ),
    }
}

fn level_statistic(a: &Result<Vec<ExperimentReport>, String>) -> Outcome {
    match a {
        Ok(v) => {
            let stats: Vec<f64> = v.iter().map(|r| r.level_statistic).collect();
            let lo = stats.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = stats.iter().copied().fold(0.0, f64::max);
            Outcome {
                pass: lo > 0.0 && hi <= 2.0 * lo,
                detail: format!(
                    "statistics {stats:.4?} for N = 64, 128, 256 (hit counts {:?}); spread {:.2}x",
                    v.iter().map(|r| r.hit_count).collect::<Vec<_>>(),
                    hi / lo
                ),
            }
        }
        Err(e) => Outcome {
            pass: false,
            detail: e.clone(),
        },
    }
}

fn main() {
    let mut results = vec![
        report(1, "exact identities", minutes(5), identities),
        report(2, "convexity validator", minutes(2), convexity),
        report(3, "interpolation", minutes(1), interpolation),
        report(4, "Farey oracle", minutes(1), farey),
        report(5, "intersection scaling", minutes(3), scaling),
    ];
    let mut sweeps_a = Err("not run".to_string());
    results.push(report(6, "norm scaling brackets", minutes(15), || {
        let a = runs(ExperimentId::A);
        let b = runs(ExperimentId::B);
        let out = norm_brackets(&a, &b);
        sweeps_a = a;
        out
    }));
    results.push(report(7, "evaluator equivalence", minutes(2), evaluator));
    // Reuses the experiment A sweeps from criterion 6.
    results.push(report(8, "level-set diagnostic", minutes(5), || level_statistic(&sweeps_a)));
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed < results.len() && std::env::var("ACCEPTANCE_STRICT").as_deref() == Ok("1") {
        std::process::exit(1);
    }
}
