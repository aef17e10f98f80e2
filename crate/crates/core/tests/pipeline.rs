//! End-to-end properties of the oracle, Grover operator and estimation stack.

use std::f64::consts::PI;

use num_complex::Complex64;
use qae_credit::circuit::StateVector;
use qae_credit::distributions::{Asset, LatentGrid, Portfolio, DEFAULT_Z_MAX};
use qae_credit::model::{build_a, build_c, build_q, build_s, build_u_gci, LoadingMode};
use qae_credit::qae::run_qae;
use qae_credit::risk::{exact_loss_distribution, qae_tolerance, DiscreteDistribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_portfolio(rng: &mut ChaCha8Rng) -> Portfolio {
    let k = rng.random_range(1..=3);
    let assets = (0..k)
        .map(|_| {
            Asset::new(
                rng.random_range(1..=3),
                rng.random_range(0.02..0.4),
                rng.random_range(0.0..0.5),
            )
            .unwrap()
        })
        .collect();
    Portfolio::new(assets).unwrap()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[test]
fn qae_tracks_exact_cdf() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut cases = vec![(Portfolio::two_asset_example(), 2usize, 1u64)];
    for _ in 0..20 {
        let p = random_portfolio(&mut rng);
        let n_z = rng.random_range(1..=2);
        let x = rng.random_range(0..1u64 << p.n_sum_qubits());
        cases.push((p, n_z, x));
    }
    for (i, (portfolio, n_z, x)) in cases.iter().enumerate() {
        let grid = LatentGrid::new(*n_z, DEFAULT_Z_MAX).unwrap();
        let exact = exact_loss_distribution(portfolio, Some(&grid))
            .unwrap()
            .cdf_at(*x);
        let oracle = build_a(portfolio, Some(&grid), *x, LoadingMode::Exact).unwrap();
        let m = 4 + i % 3;
        let r = run_qae(&oracle, m).unwrap();
        let tol = qae_tolerance(exact, m);
        assert!(
            (r.estimate - exact).abs() <= tol,
            "case {i}: estimate {} vs exact {exact}, tolerance {tol}",
            r.estimate
        );

        // Success mass on the two grid points bracketing θ_a, with mirrors.
        let big_m = 1usize << m;
        let t = exact.sqrt().asin() * big_m as f64 / PI;
        let lo = t.floor() as usize;
        let mut ys: Vec<usize> = [lo, lo + 1]
            .iter()
            .flat_map(|&y| [y % big_m, (big_m - y % big_m) % big_m])
            .collect();
        ys.sort_unstable();
        ys.dedup();
        let mass: f64 = ys.iter().map(|&y| r.outcome_probs[y]).sum();
        assert!(mass >= 8.0 / (PI * PI) - 1e-12, "case {i}: mass {mass}");

        // Outcomes y and M − y are equally likely.
        for y in 1..big_m {
            assert!((r.outcome_probs[y] - r.outcome_probs[big_m - y]).abs() < 1e-10);
        }
    }
}

#[test]
fn grover_operator_rotates_by_twice_theta() {
    let portfolio = Portfolio::two_asset_example();
    let grid = LatentGrid::new(2, DEFAULT_Z_MAX).unwrap();
    for (x, mode) in [
        (0, LoadingMode::Linear),
        (1, LoadingMode::Exact),
        (2, LoadingMode::Linear),
    ] {
        let oracle = build_a(&portfolio, Some(&grid), x, mode).unwrap();
        let theta = oracle.amplitude().unwrap().sqrt().asin();
        let q = build_q(&oracle).unwrap();
        let n = q.n_qubits();
        let psi = oracle
            .operator
            .embed(n, &(0..q.n_state).collect::<Vec<_>>())
            .unwrap()
            .apply(&StateVector::zero(n))
            .unwrap();

        let split = |good: bool| -> Vec<Complex64> {
            let mut v: Vec<Complex64> = psi
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    if (i >> q.objective & 1 == 1) == good {
                        *a
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            let norm = inner(&v, &v).re.sqrt();
            v.iter_mut().for_each(|a| *a /= norm);
            v
        };
        let basis = [split(false), split(true)];
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for c in 0..2 {
            let image = q
                .operator
                .apply(&StateVector::from_amplitudes(basis[c].clone()).unwrap())
                .unwrap();
            let img = image.amplitudes();
            for r in 0..2 {
                m[r][c] = inner(&basis[r], img);
            }
            // The image stays in span{ψ₀, ψ₁}.
            let captured = m[0][c].norm_sqr() + m[1][c].norm_sqr();
            assert!(
                (captured - 1.0).abs() < 1e-8,
                "x = {x}: leaked {}",
                1.0 - captured
            );
        }
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = (tr * tr - det * 4.0).sqrt();
        let mut phases: Vec<f64> = [(tr + disc) / 2.0, (tr - disc) / 2.0]
            .iter()
            .map(|l| l.arg())
            .collect();
        phases.sort_by(f64::total_cmp);
        assert!(
            (phases[0] + 2.0 * theta).abs() < 1e-8,
            "x = {x}: {phases:?} vs ±{}",
            2.0 * theta
        );
        assert!(
            (phases[1] - 2.0 * theta).abs() < 1e-8,
            "x = {x}: {phases:?} vs ±{}",
            2.0 * theta
        );
    }
}

#[test]
fn independent_and_uncorrelated_models_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let portfolio = random_portfolio(&mut rng);
        let flat = portfolio.without_correlation();
        let grid = LatentGrid::new(2, DEFAULT_Z_MAX).unwrap();
        let n_s = portfolio.n_sum_qubits();
        for x in 0..1u64 << n_s {
            let a = build_a(&flat, None, x, LoadingMode::Exact)
                .unwrap()
                .amplitude()
                .unwrap();
            let b = build_a(&flat, Some(&grid), x, LoadingMode::Exact)
                .unwrap()
                .amplitude()
                .unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        let oracle = build_a(&flat, Some(&grid), 0, LoadingMode::Exact).unwrap();
        let from_state = DiscreteDistribution::new(
            oracle
                .prepared_state()
                .unwrap()
                .register_distribution(&oracle.layout.sum_qubits())
                .unwrap(),
        )
        .unwrap();
        let independent = exact_loss_distribution(&flat, None).unwrap();
        assert!(from_state.total_variation(&independent) < 1e-12);
    }
}

#[test]
fn linear_loading_stays_close_to_exact_loading() {
    let portfolio = Portfolio::two_asset_example();
    let grid = LatentGrid::new(2, DEFAULT_Z_MAX).unwrap();
    let loss = |mode| {
        let o = build_a(&portfolio, Some(&grid), 0, mode).unwrap();
        let probs = o
            .prepared_state()
            .unwrap()
            .register_distribution(&o.layout.sum_qubits())
            .unwrap();
        (
            DiscreteDistribution::new(probs).unwrap(),
            o.max_fit_residual(),
        )
    };
    let (lin, residual) = loss(LoadingMode::Linear);
    let (ex, _) = loss(LoadingMode::Exact);
    // Each asset's default probability moves by at most |Δθ|/2.
    let allowed = portfolio.len() as f64 * residual / 2.0;
    assert!(
        lin.total_variation(&ex) <= allowed + 1e-12,
        "{} > {allowed}",
        lin.total_variation(&ex)
    );
}

#[test]
fn every_building_block_is_inverted_by_its_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let portfolio = Portfolio::two_asset_example();
    let grid = LatentGrid::new(2, DEFAULT_Z_MAX).unwrap();
    let oracle = build_a(&portfolio, Some(&grid), 1, LoadingMode::Linear).unwrap();
    let q = build_q(&oracle).unwrap();
    let ops = [
        build_u_gci(&portfolio, &grid, &oracle.fits, LoadingMode::Linear).unwrap(),
        build_u_gci(&portfolio, &grid, &[], LoadingMode::Exact).unwrap(),
        build_s(&portfolio).unwrap(),
        build_c(1, portfolio.n_sum_qubits()).unwrap(),
        oracle.operator.clone(),
        q.operator.clone(),
    ];
    for op in &ops {
        let n = op.arity();
        let amps: Vec<Complex64> = (0..1usize << n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let start = StateVector::from_amplitudes(amps.iter().map(|a| a / norm).collect()).unwrap();
        let back = op.adjoint().apply(&op.apply(&start).unwrap()).unwrap();
        let overlap = inner(start.amplitudes(), back.amplitudes()).norm();
        assert!(
            (overlap - 1.0).abs() < 1e-10,
            "{}: overlap {overlap}",
            op.name()
        );
    }
}
