//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use qae_credit::circuit::{Gate, Operator, StateVector};
use qae_credit::distributions::{conditional_pd, Asset, LatentGrid, Portfolio, DEFAULT_Z_MAX};
use qae_credit::model::{build_a, build_q, LoadingMode};
use qae_credit::qae::{error_bound, estimate_amplitude};
use qae_credit::resources::{estimate, ResourceParams};
use qae_credit::risk::{
    discretization_error_bound, exact_loss_distribution, expected_loss_gci,
    expected_loss_independent, loglog_slope, mc_convergence, var_bisection_qae, var_exact,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_budget(start: Instant, budget: Duration, detail: String) -> Outcome {
    let took = start.elapsed();
    check(
        took < budget,
        format!(
            "{detail}; {:.2}s of {}s budget",
            took.as_secs_f64(),
            budget.as_secs()
        ),
    )
}

/// Two-asset example: QAE bisection VaR equals the exact VaR, at most two
/// probes, 12 simulated qubits, under 10 s.
fn two_asset_reproduction() -> Outcome {
    let start = Instant::now();
    let portfolio = Portfolio::two_asset_example();
    let grid = LatentGrid::new(2, DEFAULT_Z_MAX).map_err(|e| e.to_string())?;
    let (alpha, m) = (0.95, 4);
    let exact = exact_loss_distribution(&portfolio, Some(&grid)).map_err(|e| e.to_string())?;
    let exact_var = var_exact(&exact, alpha).map_err(|e| e.to_string())?;

    let mut details = Vec::new();
    for mode in [LoadingMode::Linear, LoadingMode::Exact] {
        let report = var_bisection_qae(&portfolio, Some(&grid), alpha, m, mode)
            .map_err(|e| e.to_string())?;
        details.push(format!(
            "{mode:?}: VaR {} in {} probes",
            report.var,
            report.probes()
        ));
        if report.var != exact_var || report.probes() > 2 {
            return Err(format!("exact VaR {exact_var}; {}", details.join(", ")));
        }
    }

    let oracle =
        build_a(&portfolio, Some(&grid), 1, LoadingMode::Linear).map_err(|e| e.to_string())?;
    let state_qubits = oracle.layout.n_qubits();
    let qae = estimate_amplitude(&oracle.operator, oracle.layout.objective, m)
        .map_err(|e| e.to_string())?;
    if state_qubits != 7 || qae.n_qubits != 12 {
        return Err(format!(
            "{state_qubits} state qubits, {} total",
            qae.n_qubits
        ));
    }
    within_budget(
        start,
        Duration::from_secs(10),
        format!(
            "exact VaR {exact_var}; {}; 7 + 4 + 1 = {} qubits",
            details.join(", "),
            qae.n_qubits
        ),
    )
}

fn ry_oracle(a: f64) -> Operator {
    let mut op = Operator::identity(1, "A");
    op.push(Gate::Ry(2.0 * a.sqrt().asin()), 0)
        .expect("valid qubit");
    op
}

/// Synthetic single-qubit oracles: bound on the most probable estimate and
/// success mass on the bracketing grid points.
fn qae_error_bound() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2019);
    let floor = 8.0 / (PI * PI);
    let (mut runs, mut worst_mass, mut worst_slack) = (0, 1.0f64, f64::INFINITY);
    for m in [3usize, 4, 5] {
        let big_m = (1usize << m) as f64;
        for _ in 0..50 {
            let a: f64 = rng.random_range(1e-6..1.0 - 1e-6);
            let r = estimate_amplitude(&ry_oracle(a), 0, m).map_err(|e| e.to_string())?;
            let allowed = 2.0 * PI * (a * (1.0 - a)).sqrt() / big_m
                + PI * PI / (big_m * big_m)
                + PI / (2.0 * big_m);
            let err = (r.estimate - a).abs();
            worst_slack = worst_slack.min(allowed - err);

            let theta_y = a.sqrt().asin() * big_m / PI;
            let lo = theta_y.floor() as usize;
            let mut ys: Vec<usize> = [lo, lo + 1]
                .iter()
                .flat_map(|&y| [y % (1 << m), ((1 << m) - y % (1 << m)) % (1 << m)])
                .collect();
            ys.sort_unstable();
            ys.dedup();
            let mass: f64 = ys.iter().map(|&y| r.outcome_probs[y]).sum();
            worst_mass = worst_mass.min(mass);
            runs += 1;
            if err > allowed || mass < floor {
                return Err(format!(
                    "a = {a}, m = {m}: error {err:.4} vs {allowed:.4}, mass {mass:.4}"
                ));
            }
        }
    }
    within_budget(
        start,
        Duration::from_secs(60),
        format!("{runs} runs; min slack {worst_slack:.4}; min mass {worst_mass:.4} ≥ {floor:.4}"),
    )
}

fn random_portfolio(rng: &mut ChaCha8Rng) -> Portfolio {
    let k = rng.random_range(1..=3);
    let assets = (0..k)
        .map(|_| {
            Asset::new(
                rng.random_range(1..=4),
                rng.random_range(0.01..0.5),
                rng.random_range(0.0..0.6),
            )
            .expect("valid asset")
        })
        .collect();
    Portfolio::new(assets).expect("non-empty")
}

/// Statevector of A (exact loading) against brute-force enumeration of the
/// full joint law of (latent index, defaults, loss, objective).
fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let portfolio = random_portfolio(&mut rng);
        let n_z = rng.random_range(1..=3);
        let grid = LatentGrid::new(n_z, DEFAULT_Z_MAX).map_err(|e| e.to_string())?;
        let n_s = portfolio.n_sum_qubits();
        let threshold = rng.random_range(0..1u64 << n_s);
        let oracle = build_a(&portfolio, Some(&grid), threshold, LoadingMode::Exact)
            .map_err(|e| e.to_string())?;
        let probs = oracle
            .prepared_state()
            .map_err(|e| e.to_string())?
            .probabilities();

        let k = portfolio.len();
        let mut brute = vec![0.0; probs.len()];
        for (i, (z, q)) in grid.iter().enumerate() {
            for x in 0..1usize << k {
                let mut p = q;
                let mut loss = 0;
                for (j, asset) in portfolio.assets().iter().enumerate() {
                    let pd = conditional_pd(asset, z).map_err(|e| e.to_string())?;
                    if x >> j & 1 == 1 {
                        p *= pd;
                        loss += asset.lgd as usize;
                    } else {
                        p *= 1.0 - pd;
                    }
                }
                let flag = usize::from(loss as u64 <= threshold);
                let index = i | x << n_z | loss << (n_z + k) | flag << (n_z + k + n_s);
                brute[index] += p;
            }
        }
        let tv = 0.5
            * probs
                .iter()
                .zip(&brute)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
        worst = worst.max(tv);

        let loss_tv = {
            let sv = oracle
                .prepared_state()
                .map_err(|e| e.to_string())?
                .register_distribution(&oracle.layout.sum_qubits())
                .map_err(|e| e.to_string())?;
            let ex = exact_loss_distribution(&portfolio, Some(&grid)).map_err(|e| e.to_string())?;
            0.5 * sv
                .iter()
                .zip(ex.probs())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
        };
        worst = worst.max(loss_tv);
    }
    let ok = worst <= 1e-10;
    if !ok {
        return Err(format!("worst total variation {worst:.3e}"));
    }
    within_budget(
        start,
        Duration::from_secs(60),
        format!("20 portfolios; worst total variation {worst:.3e}"),
    )
}

/// P[objective = 1] after Q^j A|0⟩ is sin²((2j+1)θ_a).
fn amplification_identity() -> Outcome {
    let portfolio = Portfolio::two_asset_example();
    let grid = LatentGrid::new(2, DEFAULT_Z_MAX).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for threshold in 0..3 {
        let oracle = build_a(&portfolio, Some(&grid), threshold, LoadingMode::Linear)
            .map_err(|e| e.to_string())?;
        let theta = oracle.amplitude().map_err(|e| e.to_string())?.sqrt().asin();
        let q = build_q(&oracle).map_err(|e| e.to_string())?;
        let n = q.n_qubits();
        let a_wide = oracle
            .operator
            .embed(n, &(0..q.n_state).collect::<Vec<_>>())
            .map_err(|e| e.to_string())?;
        let mut s = a_wide
            .apply(&StateVector::zero(n))
            .map_err(|e| e.to_string())?;
        for j in 1..=3 {
            s.apply(&q.operator).map_err(|e| e.to_string())?;
            let p = s
                .probability_of(q.objective, true)
                .map_err(|e| e.to_string())?;
            let want = ((2 * j + 1) as f64 * theta).sin().powi(2);
            worst = worst.max((p - want).abs());
        }
    }
    check(
        worst <= 1e-8,
        format!("x ∈ {{0,1,2}}, j ∈ {{1,2,3}}; worst deviation {worst:.2e}"),
    )
}

/// Million-asset resource numbers.
fn resource_headline() -> Outcome {
    let base = ResourceParams::million_asset_example();
    let r = estimate(&base).map_err(|e| e.to_string())?;
    let h = estimate(&ResourceParams {
        qft_free_halving: true,
        ..base
    })
    .map_err(|e| e.to_string())?;
    let rel = |x: f64, target: f64| (x - target).abs() / target;
    let exact_ok = r.depth_u == 306
        && r.depth_s == 280
        && r.depth_c == 17
        && r.depth_a == 603
        && r.rounded_total_depth == 36_846_000;
    let approx_ok = rel(r.total_depth as f64, 37e6) <= 0.05
        && rel(r.rounded_total_depth as f64, 37e6) <= 0.05
        && rel(r.runtime_s, 3600.0) <= 0.05
        && rel(h.runtime_s, 1800.0) <= 0.05;
    check(
        exact_ok && approx_ok,
        format!(
            "U {} S {} C {} A {}; total {} (rounded {}); {:.3} h; halved {:.1} min",
            r.depth_u,
            r.depth_s,
            r.depth_c,
            r.depth_a,
            r.total_depth,
            r.rounded_total_depth,
            r.runtime_s / 3600.0,
            h.runtime_s / 60.0
        ),
    )
}

/// Expected loss in both models.
fn expected_loss() -> Outcome {
    let portfolio = Portfolio::two_asset_example();
    let independent = expected_loss_independent(&portfolio);
    let grid = LatentGrid::new(4, 3.0).map_err(|e| e.to_string())?;
    let gci = expected_loss_gci(&portfolio, &grid).map_err(|e| e.to_string())?;
    let mean = exact_loss_distribution(&portfolio, Some(&grid))
        .map_err(|e| e.to_string())?
        .mean();

    // Trapezoid on [-10, 10] with 10⁶ nodes, written out independently.
    let n = 1_000_000;
    let h = 20.0 / (n - 1) as f64;
    let mut continuous = 0.0;
    for j in 0..n {
        let z = -10.0 + j as f64 * h;
        let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
        let cond: f64 = portfolio
            .assets()
            .iter()
            .map(|a| a.lgd as f64 * conditional_pd(a, z).expect("finite"))
            .sum();
        continuous += w * cond * (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    }
    continuous *= h;
    let bound = discretization_error_bound(&portfolio, &grid).map_err(|e| e.to_string())?;
    check(
        independent == 0.65 && (gci - mean).abs() <= 1e-12 && (gci - continuous).abs() <= bound,
        format!(
            "independent {independent}; GCI {gci:.10} vs mean {mean:.10}; continuous {continuous:.6}, gap {:.2e} ≤ bound {bound:.2e}",
            (gci - continuous).abs()
        ),
    )
}

/// Monte Carlo RMSE decays like M^{-1/2}.
fn mc_convergence_rate() -> Outcome {
    let start = Instant::now();
    let portfolio = Portfolio::two_asset_example();
    let grid = LatentGrid::new(2, DEFAULT_Z_MAX).map_err(|e| e.to_string())?;
    let rows = mc_convergence(&portfolio, Some(&grid), 1, &[100, 1_000, 10_000], 200, 42)
        .map_err(|e| e.to_string())?;
    let slope = loglog_slope(&rows);
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("M={} rmse={:.2e}", r.samples, r.rmse))
        .collect();
    let ok = (slope + 0.5).abs() <= 0.1;
    if !ok {
        return Err(format!("slope {slope:.3}; {}", table.join(", ")));
    }
    within_budget(
        start,
        Duration::from_secs(120),
        format!("slope {slope:.3}; {}", table.join(", ")),
    )
}

/// Error-bound coefficient at α = 99.9%.
fn bound_constant() -> Outcome {
    let alpha: f64 = 0.999;
    let coeff = 2.0 * (alpha * (1.0 - alpha)).sqrt() * PI;
    // error_bound(a, M)·M − π²/M is the same coefficient.
    let via_bound = error_bound(alpha, 1000) * 1000.0 - PI * PI / 1000.0;
    check(
        (coeff - 0.1986).abs() <= 1e-4
            && (coeff - 0.2).abs() / 0.2 <= 0.01
            && (via_bound - coeff).abs() < 1e-12,
        format!(
            "2π√(α(1−α)) = {coeff:.5}, {:.2}% from 1/5",
            100.0 * (coeff - 0.2).abs() / 0.2
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 two-asset VaR reproduction", two_asset_reproduction),
        ("2 QAE error bound", qae_error_bound),
        ("3 oracle equivalence", oracle_equivalence),
        ("4 amplitude amplification identity", amplification_identity),
        ("5 resource headline numbers", resource_headline),
        ("6 expected loss", expected_loss),
        ("7 Monte Carlo convergence", mc_convergence_rate),
        ("8 error-bound constant at 99.9%", bound_constant),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("[PASS] criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
