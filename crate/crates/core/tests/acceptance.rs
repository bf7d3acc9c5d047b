//! Acceptance gate: one test per criterion, each ending in a single
//! `ACCEPTANCE <n> (...): PASS` line. Tolerances are pinned here and are
//! not to be loosened; timing-sensitive criteria are serialized through a
//! global lock so they never compete for cores.

use geostat_core::likelihood::{default_config, LN_2PI};
use geostat_core::scheduler::build_dag;
use geostat_core::simulate::standard_normals;
use geostat_core::tilealg::{cholesky_stream, log_det_from_factor, tile_cholesky_traced};
use geostat_core::{
    bessel_k, distance_matrix, gen_cov_matrix, generate_locations, ind_mask, k_fold_cv, krige,
    log_likelihood, matern, mle_fit, simulate_field, tile_cholesky, tile_posv, tile_trsm,
    Approximation, KrigingConfig, LikelihoodProblem, MaternParams, Metric, SimulationSpec,
    SuperTileConfig, Symmetry, TileMatrix, TileVector,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::sync::Mutex;
use std::time::Instant;

/// Serializes the criteria: wall-clock comparisons are meaningless when
/// another test is saturating the cores.
static GATE: Mutex<()> = Mutex::new(());

fn gate() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn host_cores() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Stated runtime budgets assume a 4-core host; scale them up on smaller
/// machines instead of silently relaxing the assertion.
fn scaled_budget(secs: f64) -> f64 {
    secs * 4.0 / host_cores().min(4) as f64
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

// ---------------------------------------------------------------- oracles

/// Unblocked three-loop Cholesky.
fn dense_cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut s = a[j * n + j];
        for t in 0..j {
            s -= l[j * n + t] * l[j * n + t];
        }
        if s <= 0.0 {
            return None;
        }
        let d = s.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut v = a[i * n + j];
            for t in 0..j {
                v -= l[i * n + t] * l[j * n + t];
            }
            l[i * n + j] = v / d;
        }
    }
    Some(l)
}

fn dense_forward(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        for j in 0..i {
            y[i] -= l[i * n + j] * y[j];
        }
        y[i] /= l[i * n + i];
    }
    y
}

fn dense_backward(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            y[i] -= l[j * n + i] * y[j];
        }
        y[i] /= l[i * n + i];
    }
    y
}

fn frob(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn random_spd(n: usize, rng: &mut StdRng) -> Vec<f64> {
    let m: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += m[i * n + k] * m[j * n + k];
            }
            a[i * n + j] = s + if i == j { n as f64 } else { 0.0 };
        }
    }
    a
}

/// Integral representation K_ν(x) = ∫₀^∞ e^{−x·cosh t}·cosh(νt) dt by
/// composite Simpson on a truncated range (the tail is below 1e−300).
fn bessel_k_quadrature(nu: f64, x: f64) -> f64 {
    let t_max = ((750.0 + 50.0 * nu) / x).acosh() + 1.0;
    let n = 200_000usize; // even
    let h = t_max / n as f64;
    let f = |t: f64| (-x * t.cosh()).exp() * (nu * t).cosh();
    let mut acc = f(0.0) + f(t_max);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}

// --------------------------------------------------------------- criteria

#[test]
fn criterion_01_matern_limit_cases() {
    let _g = gate();
    let t0 = Instant::now();
    for (theta1, theta2) in [(1.0, 0.1), (2.5, 1.0)] {
        let exp_model = MaternParams::new(theta1, theta2, 0.5, 0.0).unwrap();
        let whittle = MaternParams::new(theta1, theta2, 1.0, 0.0).unwrap();
        for i in 0..200 {
            let r = 1e-4 * (10.0f64 / 1e-4).powf(i as f64 / 199.0);
            let x = r / theta2;

            let want = theta1 * (-x).exp();
            let got = matern(r, &exp_model);
            assert!(
                (got - want).abs() <= 1e-10 * want.abs(),
                "exponential limit r={r}: {got} vs {want}"
            );

            let want = theta1 * x * bessel_k(1.0, x).unwrap();
            let got = matern(r, &whittle);
            let scale = if want == 0.0 { 1.0 } else { want.abs() };
            assert!(
                (got - want).abs() <= 1e-10 * scale,
                "whittle limit r={r}: {got} vs {want}"
            );
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 1.0, "runtime {secs} s exceeds 1 s");
    println!("ACCEPTANCE 1 (matern limit cases): PASS ({secs:.2} s)");
}

#[test]
fn criterion_02_bessel_vs_quadrature_oracle() {
    let _g = gate();
    let t0 = Instant::now();
    for nu in [0.3, 0.5, 1.0, 1.7, 2.5] {
        for i in 0..10 {
            let x = 1e-3 * (30.0f64 / 1e-3).powf(i as f64 / 9.0);
            let oracle = bessel_k_quadrature(nu, x);
            let got = bessel_k(nu, x).unwrap();
            assert!(
                (got - oracle).abs() <= 1e-8 * oracle.abs(),
                "nu={nu} x={x}: {got} vs {oracle} (rel {:.2e})",
                ((got - oracle) / oracle).abs()
            );
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 10.0, "runtime {secs} s exceeds 10 s");
    println!("ACCEPTANCE 2 (bessel vs integral oracle): PASS ({secs:.2} s)");
}

#[test]
fn criterion_03_tile_algebra_oracle_suite() {
    let _g = gate();
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xACCE);
    for case in 0..50 {
        let n = rng.gen_range(32..=512);
        let nb = [16, 64, 128][case % 3];
        let sigma_dense = random_spd(n, &mut rng);
        let l0 = dense_cholesky(&sigma_dense, n).expect("oracle PD");

        // factorization residual
        let a = TileMatrix::from_dense(&sigma_dense, n, n, nb, Symmetry::SymmetricLowerPd);
        tile_cholesky(&a, 4).unwrap();
        let l = a.to_dense_lower();
        let mut resid = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for t in 0..=i.min(j) {
                    s += l[i * n + t] * l[j * n + t];
                }
                resid[i * n + j] = s - sigma_dense[i * n + j];
            }
        }
        let rel = frob(&resid) / frob(&sigma_dense);
        assert!(rel <= 1e-12, "case {case} n={n} nb={nb}: residual {rel:.2e}");

        // log-determinant against the oracle factor's diagonal
        let ld_oracle: f64 = 2.0 * (0..n).map(|i| l0[i * n + i].ln()).sum::<f64>();
        let ld = log_det_from_factor(&a).unwrap();
        assert!(
            (ld - ld_oracle).abs() <= 1e-10 * ld_oracle.abs().max(1.0),
            "case {case}: log det {ld} vs {ld_oracle}"
        );

        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

        // forward solve
        let x = TileVector::from_slice(&b, nb);
        tile_trsm(&a, &x, 4).unwrap();
        let want = dense_forward(&l0, n, &b);
        let diff: Vec<f64> = x.to_vec().iter().zip(&want).map(|(g, w)| g - w).collect();
        assert!(frob(&diff) <= 1e-12 * frob(&want), "case {case}: trsm");

        // triangular multiply (round-trips the forward solve)
        geostat_core::tilealg::tile_trmm(&a, &x, 4).unwrap();
        let diff: Vec<f64> = x.to_vec().iter().zip(&b).map(|(g, w)| g - w).collect();
        assert!(frob(&diff) <= 1e-12 * frob(&b), "case {case}: trmm");

        // full SPD solve
        let a2 = TileMatrix::from_dense(&sigma_dense, n, n, nb, Symmetry::SymmetricLowerPd);
        let x = TileVector::from_slice(&b, nb);
        tile_posv(&a2, &x, 4).unwrap();
        let want = dense_backward(&l0, n, &dense_forward(&l0, n, &b));
        let diff: Vec<f64> = x.to_vec().iter().zip(&want).map(|(g, w)| g - w).collect();
        assert!(frob(&diff) <= 1e-12 * frob(&want), "case {case}: posv");

        // general multiply, smaller operands to keep the naive oracle cheap
        let m = rng.gen_range(8..=96);
        let av: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bv: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ta = TileMatrix::from_dense(&av, m, m, nb.min(m), Symmetry::General);
        let tb = TileMatrix::from_dense(&bv, m, m, nb.min(m), Symmetry::General);
        let c = geostat_core::tilealg::tile_gemm(&ta, &tb, 4).unwrap().to_dense();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let mut s = 0.0;
                for t in 0..m {
                    s += av[i * m + t] * bv[t * m + j];
                }
                worst = worst.max((c[i * m + j] - s).abs());
            }
        }
        assert!(worst <= 1e-12 * frob(&av) * frob(&bv), "case {case}: gemm");
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 120.0, "runtime {secs} s exceeds 2 min");
    println!("ACCEPTANCE 3 (tile algebra oracle suite): PASS ({secs:.2} s)");
}

#[test]
fn criterion_04_scheduler_determinism() {
    let _g = gate();
    let t0 = Instant::now();
    let n = 256;
    let nb = 32;
    let params = MaternParams::new(1.0, 0.1, 0.5, 1e-6).unwrap();
    let locations = generate_locations(n, 7);
    let d = distance_matrix(&locations, &locations).unwrap();
    let base = gen_cov_matrix(&d, &params, nb, 1).unwrap();

    let mut factors: Vec<Vec<u64>> = Vec::new();
    for workers in [1usize, 2, 8] {
        let sigma = base.deep_clone();
        let graph = build_dag(cholesky_stream(&sigma).unwrap());
        let edges = graph.edges();
        let (result, trace) = graph.execute_traced(workers);
        result.unwrap();

        // every execution must be a linear extension of the DAG
        let mut begin = vec![0u64; trace.len()];
        let mut end = vec![0u64; trace.len()];
        for e in &trace {
            begin[e.task] = e.begin_ns;
            end[e.task] = e.end_ns;
        }
        for &(u, v) in &edges {
            assert!(
                begin[v] >= end[u],
                "workers={workers}: task {v} started before its predecessor {u} finished"
            );
        }

        factors.push(sigma.to_dense_lower().iter().map(|v| v.to_bits()).collect());
    }
    assert_eq!(factors[0], factors[1], "1 vs 2 workers differ");
    assert_eq!(factors[0], factors[2], "1 vs 8 workers differ");
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 30.0, "runtime {secs} s exceeds 30 s");
    println!("ACCEPTANCE 4 (scheduler determinism): PASS ({secs:.2} s)");
}

#[test]
fn criterion_05_loglik_vs_dense_oracle() {
    let _g = gate();
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(55);
    for case in 0..20 {
        let n = rng.gen_range(16..=128);
        let nb = [8, 16, 32][case % 3];
        let theta = MaternParams::new(
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.05..0.3),
            rng.gen_range(0.3..1.5),
            0.0,
        )
        .unwrap();
        let locations = generate_locations(n, 1000 + case as u64);
        let z = standard_normals(2000 + case as u64, n);

        // oracle: dense Σ, unblocked factor, explicit triangular solves
        let mut sigma = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                sigma[i * n + j] = if i == j {
                    theta.sill()
                } else {
                    matern(locations.distance(i, j), &theta)
                };
            }
        }
        let l = dense_cholesky(&sigma, n).expect("oracle PD");
        let y = dense_forward(&l, n, &z);
        let quad: f64 = y.iter().map(|v| v * v).sum();
        let logdet: f64 = 2.0 * (0..n).map(|i| l[i * n + i].ln()).sum::<f64>();
        let oracle = -0.5 * quad - 0.5 * logdet - 0.5 * n as f64 * LN_2PI;

        let p = LikelihoodProblem::new(locations, z, nb, Approximation::Exact, 4).unwrap();
        let got = log_likelihood(&p, &theta).unwrap();
        assert!(
            (got - oracle).abs() <= 1e-8,
            "case {case} n={n}: {got} vs {oracle}"
        );
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 60.0, "runtime {secs} s exceeds 1 min");
    println!("ACCEPTANCE 5 (log-likelihood vs dense oracle): PASS ({secs:.2} s)");
}

#[test]
fn criterion_06_monte_carlo_recovery() {
    let _g = gate();
    let t0 = Instant::now();
    let truth = MaternParams::new(1.0, 0.1, 0.5, 0.0).unwrap();
    let (mut t1, mut t2, mut t3) = (Vec::new(), Vec::new(), Vec::new());
    for rep in 0..20u64 {
        let (locations, z) = simulate_field(&SimulationSpec {
            n: 1600,
            params: truth,
            seed: 9000 + rep,
            metric: Metric::Euclidean,
            nb: 128,
            workers: 4,
        })
        .unwrap();
        let p = LikelihoodProblem::new(locations, z, 128, Approximation::Exact, 4).unwrap();
        let mut cfg = default_config(&p);
        cfg.lower = vec![0.1, 0.02, 0.2];
        cfg.upper = vec![3.0, 0.6, 1.2];
        cfg.start = cfg.lower.iter().zip(&cfg.upper).map(|(l, u)| (l * u).sqrt()).collect();
        cfg.xtol_rel = 1e-3;
        cfg.max_evals = 100;
        let fit = mle_fit(&p, &cfg).unwrap();
        t1.push(fit.theta_hat.theta1);
        t2.push(fit.theta_hat.theta2);
        t3.push(fit.theta_hat.theta3);
    }
    let (m1, m2, m3) = (median(&mut t1), median(&mut t2), median(&mut t3));
    assert!((0.7..=1.3).contains(&m1), "median theta1 {m1}");
    assert!((0.05..=0.2).contains(&m2), "median theta2 {m2}");
    assert!((0.4..=0.6).contains(&m3), "median theta3 {m3}");
    let secs = t0.elapsed().as_secs_f64();
    let budget = scaled_budget(900.0);
    assert!(secs < budget, "runtime {secs} s exceeds {budget} s");
    println!(
        "ACCEPTANCE 6 (monte carlo recovery): PASS (medians {m1:.3}/{m2:.3}/{m3:.3}, {secs:.0} s on {} cores)",
        host_cores()
    );
}

#[test]
fn criterion_07_prediction_mse_trend() {
    let _g = gate();
    let t0 = Instant::now();
    let truth = MaternParams::new(1.0, 0.1, 0.5, 0.0).unwrap();
    let cfg = KrigingConfig { params: truth, nb: 128, workers: 4, approx: Approximation::Exact };
    let mut mse_small = Vec::new();
    let mut mse_large = Vec::new();
    for seed in 0..10u64 {
        for (n, out) in [(400usize, &mut mse_small), (1600, &mut mse_large)] {
            let (locations, z) = simulate_field(&SimulationSpec {
                n,
                params: truth,
                seed: 7000 + seed,
                metric: Metric::Euclidean,
                nb: 128,
                workers: 4,
            })
            .unwrap();
            out.push(k_fold_cv(&locations, &z, 10, seed, &cfg).unwrap().mse);
        }
    }
    let (small, large) = (median(&mut mse_small), median(&mut mse_large));
    assert!(
        large < small,
        "median CV MSE at n=1600 ({large}) not below n=400 ({small})"
    );
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 1200.0, "runtime {secs} s exceeds 20 min");
    println!("ACCEPTANCE 7 (prediction mse trend): PASS (mse {large:.4} < {small:.4}, {secs:.0} s)");
}

#[test]
fn criterion_08_ind_consistency() {
    let _g = gate();
    let t0 = Instant::now();
    let theta = MaternParams::new(1.0, 0.1, 0.5, 0.0).unwrap();

    // (a) a single super tile reproduces the exact likelihood
    let locations = generate_locations(96, 17);
    let z = standard_normals(18, 96);
    let exact = LikelihoodProblem::new(locations.clone(), z.clone(), 16, Approximation::Exact, 2).unwrap();
    let single = LikelihoodProblem::new(
        locations.clone(),
        z.clone(),
        16,
        Approximation::Ind { super_tile: 6 },
        2,
    )
    .unwrap();
    let le = log_likelihood(&exact, &theta).unwrap();
    let ls = log_likelihood(&single, &theta).unwrap();
    assert!((le - ls).abs() <= 1e-10, "s >= p: {le} vs {ls}");

    // (b) block-sum identity for s = 2 (blocks 0..32, 32..64, 64..96)
    let ind = LikelihoodProblem::new(
        locations.clone(),
        z.clone(),
        16,
        Approximation::Ind { super_tile: 2 },
        2,
    )
    .unwrap();
    let li = log_likelihood(&ind, &theta).unwrap();
    let mut sum = 0.0;
    for range in [0..32usize, 32..64, 64..96] {
        let idx: Vec<usize> = range.clone().collect();
        let p = LikelihoodProblem::new(
            locations.subset(&idx),
            z[range].to_vec(),
            16,
            Approximation::Exact,
            2,
        )
        .unwrap();
        sum += log_likelihood(&p, &theta).unwrap();
    }
    assert!((li - sum).abs() <= 1e-10, "block sum: {li} vs {sum}");

    // (c) masked stream kernel counts match an independent enumeration
    for (p, s) in [(6usize, 2usize), (5, 2), (7, 3)] {
        let n = p * 8;
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            dense[i * n + i] = 2.0;
        }
        let a = TileMatrix::from_dense(&dense, n, n, 8, Symmetry::SymmetricLowerPd);
        let masked = ind_mask(&a, SuperTileConfig::new(s).unwrap()).unwrap();
        let got = cholesky_stream(&masked).unwrap().len();
        // enumerate the right-looking stream over the kept tiles
        let keep = |i: usize, j: usize| i / s == j / s;
        let mut want = 0usize;
        for k in 0..p {
            want += 1; // potrf
            for i in (k + 1)..p {
                if keep(i, k) {
                    want += 2; // trsm + syrk
                    for j in (k + 1)..i {
                        if keep(j, k) && keep(i, j) {
                            want += 1; // gemm
                        }
                    }
                }
            }
        }
        assert_eq!(got, want, "p={p} s={s}");
        let full = cholesky_stream(&a).unwrap().len();
        assert_eq!(full, p * (p + 1) * (p + 2) / 6);
        assert!(got < full);
    }

    // (d) IND s=2 evaluates the n=4096 likelihood strictly faster
    let n = 4096;
    let (locations, z) = simulate_field(&SimulationSpec {
        n,
        params: theta,
        seed: 44,
        metric: Metric::Euclidean,
        nb: 128,
        workers: 4,
    })
    .unwrap();
    let exact = LikelihoodProblem::new(locations.clone(), z.clone(), 128, Approximation::Exact, 4).unwrap();
    let ind = LikelihoodProblem::new(locations, z, 128, Approximation::Ind { super_tile: 2 }, 4).unwrap();
    let tw = Instant::now();
    log_likelihood(&exact, &theta).unwrap();
    let exact_secs = tw.elapsed().as_secs_f64();
    let tw = Instant::now();
    log_likelihood(&ind, &theta).unwrap();
    let ind_secs = tw.elapsed().as_secs_f64();
    assert!(
        ind_secs < exact_secs,
        "IND ({ind_secs} s) not faster than exact ({exact_secs} s)"
    );

    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 300.0, "runtime {secs} s exceeds 5 min");
    println!(
        "ACCEPTANCE 8 (ind consistency): PASS (n=4096 exact {exact_secs:.1} s vs ind {ind_secs:.1} s, total {secs:.0} s)"
    );
}

#[test]
fn criterion_09_ind_vs_exact_accuracy_trend() {
    let _g = gate();
    let t0 = Instant::now();
    let truth = MaternParams::new(1.0, 0.1, 0.5, 0.0).unwrap();
    let mut exact_mse = Vec::new();
    let mut ind_mse = Vec::new();
    for seed in 0..10u64 {
        let (locations, z) = simulate_field(&SimulationSpec {
            n: 1600,
            params: truth,
            seed: 5000 + seed,
            metric: Metric::Euclidean,
            nb: 128,
            workers: 4,
        })
        .unwrap();
        for (approx, out) in [
            (Approximation::Exact, &mut exact_mse),
            (Approximation::Ind { super_tile: 1 }, &mut ind_mse),
        ] {
            let cfg = KrigingConfig { params: truth, nb: 128, workers: 4, approx };
            out.push(k_fold_cv(&locations, &z, 10, seed, &cfg).unwrap().mse);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (me, mi) = (mean(&exact_mse), mean(&ind_mse));
    assert!(me <= mi, "exact mean CV MSE {me} exceeds IND {mi}");
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 1500.0, "runtime {secs} s exceeds 25 min");
    println!("ACCEPTANCE 9 (ind vs exact accuracy trend): PASS (exact {me:.4} <= ind {mi:.4}, {secs:.0} s)");
}

#[test]
fn criterion_10_parallel_speedup() {
    let _g = gate();
    let t0 = Instant::now();
    let n = 2048;
    let params = MaternParams::new(1.0, 0.1, 0.5, 1e-6).unwrap();
    let locations = generate_locations(n, 21);
    let d = distance_matrix(&locations, &locations).unwrap();
    let base = gen_cov_matrix(&d, &params, 128, host_cores()).unwrap();

    let time_with = |workers: usize| {
        let sigma = base.deep_clone();
        let tw = Instant::now();
        let (result, _) = tile_cholesky_traced(&sigma, workers);
        result.unwrap();
        (tw.elapsed().as_secs_f64(), sigma.to_dense_lower())
    };
    // warm up once so page faults don't land in the 1-worker measurement
    let _ = time_with(1);
    let (secs1, l1) = time_with(1);
    let (secs4, l4) = time_with(4);
    assert_eq!(
        l1.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        l4.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        "factors differ between worker counts"
    );

    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 120.0, "runtime {secs} s exceeds 2 min");
    let ratio = secs4 / secs1;
    if host_cores() >= 4 {
        assert!(
            ratio <= 0.6,
            "4-worker wall time is {ratio:.2}x the 1-worker time (needs <= 0.6x)"
        );
        println!("ACCEPTANCE 10 (parallel speedup): PASS (ratio {ratio:.2}, {secs:.1} s)");
    } else {
        // the criterion is scoped to >= 4-core hosts and cannot be verified here
        println!(
            "ACCEPTANCE 10 (parallel speedup): SKIP (host has {} core(s), criterion requires >= 4; measured ratio {ratio:.2})",
            host_cores()
        );
    }
}

#[test]
fn criterion_11_kriging_exactness() {
    let _g = gate();
    let t0 = Instant::now();
    let truth = MaternParams::new(1.0, 0.1, 0.5, 0.0).unwrap();
    let (locations, z) = simulate_field(&SimulationSpec {
        n: 50,
        params: truth,
        seed: 31,
        metric: Metric::Euclidean,
        nb: 16,
        workers: 2,
    })
    .unwrap();
    let cfg = KrigingConfig { params: truth, nb: 16, workers: 2, approx: Approximation::Exact };
    let pred = krige(&locations, &z, &locations, &cfg).unwrap();
    for i in 0..50 {
        assert!(
            (pred[i] - z[i]).abs() <= 1e-6 * z[i].abs().max(1e-30),
            "site {i}: {} vs {}",
            pred[i],
            z[i]
        );
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 5.0, "runtime {secs} s exceeds 5 s");
    println!("ACCEPTANCE 11 (kriging exactness): PASS ({secs:.2} s)");
}
