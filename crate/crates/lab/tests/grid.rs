use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uniconvex::expsum::{Direction, ExpSumSpec, Frequencies, GridSpec};
use uniconvex_lab::grid::{
    dyadic_level_report, eval_grid, level_set_projection, sup_norm_lp, sweep, FastPath,
    RowEvaluator,
};

fn random_spec(seed: u64, n: usize) -> ExpSumSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eta = (0..n).map(|_| rng.gen_range(0.0..4.0)).collect();
    let b = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ExpSumSpec::canonical(eta, b).unwrap()
}

fn constant_one(len: f64) -> (ExpSumSpec, GridSpec) {
    let spec = ExpSumSpec::new(
        Frequencies::Custom(vec![0.0]),
        vec![0.0],
        vec![Complex64::new(1.0, 0.0)],
    )
    .unwrap();
    (spec, GridSpec::new(0.0, len, 64, 0.0, 10.0, 16).unwrap())
}

#[test]
fn geometric_row() {
    let spec = ExpSumSpec::canonical(vec![0.0; 4], vec![Complex64::new(1.0, 0.0); 4]).unwrap();
    let grid = GridSpec::new(0.0, 4.0, 4, 0.0, 1.0, 1).unwrap();
    let row = eval_grid(&spec, &grid, FastPath::On).unwrap();
    let want = [4.0, 0.0, 0.0, 0.0];
    for (z, w) in row.iter().zip(want) {
        assert!((z - Complex64::new(w, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn fast_path_matches_naive() {
    for &(n, seed) in &[(64, 1), (256, 2)] {
        let spec = random_spec(seed, n);
        let grid = GridSpec::new(0.0, n as f64, 4 * n, 0.0, (n * n) as f64, 256).unwrap();
        let fast = eval_grid(&spec, &grid, FastPath::On).unwrap();
        let table = eval_grid(&spec, &grid, FastPath::Off).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let tol = 1e-9 * spec.l1_norm();
        for _ in 0..1000 {
            let (k, r) = (rng.gen_range(0..grid.mx), rng.gen_range(0..grid.mt));
            let naive = spec.eval_point(grid.x(k), grid.t(r));
            let i = r * grid.mx + k;
            assert!((fast[i] - naive).norm() <= tol, "N = {n}, node ({k}, {r})");
            assert!((table[i] - naive).norm() <= tol, "N = {n}, node ({k}, {r})");
        }
    }
}

#[test]
fn fast_path_on_rejects_incompatible_grid() {
    let spec = random_spec(3, 32);
    let grid = GridSpec::new(0.5, 32.5, 128, 0.0, 1.0, 4).unwrap();
    assert!(RowEvaluator::new(&spec, &grid, FastPath::On).is_err());
    let ev = RowEvaluator::new(&spec, &grid, FastPath::Auto).unwrap();
    assert!(!ev.uses_fft());
}

#[test]
fn periodic_in_x() {
    let n = 128;
    let spec = random_spec(4, n);
    let one = GridSpec::new(0.0, n as f64, 2 * n, 0.0, 1000.0, 8).unwrap();
    let two = GridSpec::new(0.0, 2.0 * n as f64, 4 * n, 0.0, 1000.0, 8).unwrap();
    let a = eval_grid(&spec, &one, FastPath::Auto).unwrap();
    let b = eval_grid(&spec, &two, FastPath::Auto).unwrap();
    for r in 0..8 {
        for k in 0..2 * n {
            let lo = b[r * 4 * n + k];
            let hi = b[r * 4 * n + k + 2 * n];
            assert!((lo - hi).norm() <= 1e-9 * spec.l1_norm());
            assert!((lo - a[r * 2 * n + k]).norm() <= 1e-9 * spec.l1_norm());
        }
    }
}

#[test]
fn grid_parseval() {
    let n = 256;
    let spec = random_spec(5, n);
    let b2: f64 = spec.b().iter().map(|z| z.norm_sqr()).sum();
    for &mx in &[n, 4 * n] {
        let grid = GridSpec::new(0.0, n as f64, mx, 0.0, (n * n) as f64, 32).unwrap();
        let v = eval_grid(&spec, &grid, FastPath::Auto).unwrap();
        for row in v.chunks(mx) {
            let mean = row.iter().map(|z| z.norm_sqr()).sum::<f64>() / mx as f64;
            assert!((mean - b2).abs() <= 1e-9 * b2, "Mx = {mx}: {mean} vs {b2}");
        }
    }
}

#[test]
fn refinement_is_monotone() {
    let n = 64;
    let spec = random_spec(6, n);
    for dir in [Direction::T, Direction::X] {
        // Nested grids, doubled along the inner axis.
        let mut last = 0.0;
        for m in [64, 128, 256, 512] {
            let grid = match dir {
                Direction::T => GridSpec::new(0.0, n as f64, 4 * n, 0.0, (n * n) as f64, m),
                Direction::X => GridSpec::new(0.0, n as f64, m, 0.0, (n * n) as f64, 64),
            }
            .unwrap();
            let v = sup_norm_lp(&spec, &grid, dir, 4.0, 1, FastPath::Auto)
                .unwrap()
                .value;
            assert!(v >= last, "{dir:?}, {m} inner points");
            last = v;
        }
        let grid = GridSpec::new(0.0, n as f64, 4 * n, 0.0, (n * n) as f64, 128).unwrap();
        let mut last = 0.0;
        for factor in [1, 2, 4, 8] {
            let v = sup_norm_lp(&spec, &grid, dir, 4.0, factor, FastPath::Auto)
                .unwrap()
                .value;
            assert!(v >= last, "{dir:?}, factor {factor}");
            last = v;
        }
    }
}

#[test]
fn homogeneity() {
    let spec = random_spec(7, 64);
    let grid = GridSpec::new(0.0, 64.0, 256, 0.0, 4096.0, 128).unwrap();
    let a = sup_norm_lp(&spec, &grid, Direction::T, 4.0, 1, FastPath::Auto).unwrap();
    let b = sup_norm_lp(&spec.scaled(2.0).unwrap(), &grid, Direction::T, 4.0, 1, FastPath::Auto)
        .unwrap();
    assert!((b.value - 2.0 * a.value).abs() <= 1e-12 * b.value);
    assert!(sup_norm_lp(&spec, &grid, Direction::T, 0.5, 1, FastPath::Auto).is_err());
}

#[test]
fn constant_sum_levels() {
    let (spec, grid) = constant_one(8.0);
    let m = level_set_projection(&spec, &grid, 2.0, Direction::T, FastPath::Auto).unwrap();
    assert_eq!(m, 8.0);
    let m = level_set_projection(&spec, &grid, 0.5, Direction::T, FastPath::Auto).unwrap();
    assert_eq!(m, 0.0);
    assert!(level_set_projection(&spec, &grid, 0.0, Direction::T, FastPath::Auto).is_err());

    let norm = sup_norm_lp(&spec, &grid, Direction::T, 4.0, 1, FastPath::Auto).unwrap();
    assert!((norm.value - 8f64.powf(0.25)).abs() < 1e-12);

    let rep = dyadic_level_report(&spec, &grid, Direction::T, FastPath::Auto).unwrap();
    let populated: Vec<_> = rep.levels.iter().filter(|l| l.measure > 0.0).collect();
    assert_eq!(populated.len(), 1);
    // N = 1 here, so the bound is 16 · |domain|.
    assert!(populated[0].statistic <= 16.0 * 8.0);
}

#[test]
fn deterministic_across_pools() {
    let n = 128;
    let spec = random_spec(8, n);
    let grid = GridSpec::new(0.0, n as f64, 4 * n, 0.0, (n * n) as f64, 1000).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let t = sup_norm_lp(&spec, &grid, Direction::T, 4.0, 4, FastPath::Auto).unwrap();
            let x = sup_norm_lp(&spec, &grid, Direction::X, 4.0, 4, FastPath::Auto).unwrap();
            let s = sweep(&spec, &grid, Direction::T, FastPath::Auto).unwrap();
            (
                serde_json::to_string(&t).unwrap(),
                serde_json::to_string(&x).unwrap(),
                s,
            )
        })
    };
    let one = run(1);
    for threads in [2, 3, 8] {
        assert_eq!(run(threads), one, "{threads} threads");
    }
}
