//! Classical ground truth and the end-to-end VaR / economic capital pipeline.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{conditional_pd, normal_cdf, normal_pdf, LatentGrid, Portfolio};
use crate::error::{Error, Result};
use crate::model::LoadingMode;
use crate::qae::{error_bound, estimate_cdf_point};

/// Largest number of enumerated bits (assets plus latent qubits).
pub const MAX_ENUMERATION_BITS: usize = 24;

/// Law of an integer-valued loss on `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| p.is_nan() || *p < 0.0) {
            return Err(Error::validation(
                "probs",
                "need non-negative probabilities",
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::validation("probs", format!("sum to {total}, not 1")));
        }
        Ok(DiscreteDistribution { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn cdf(&self) -> Vec<f64> {
        self.probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    /// `ℙ[loss ≤ x]`.
    pub fn cdf_at(&self, x: u64) -> f64 {
        self.probs.iter().take(x as usize + 1).sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(l, p)| l as f64 * p)
            .sum()
    }

    /// Half the L1 distance to `other`, padding the shorter support with zeros.
    pub fn total_variation(&self, other: &DiscreteDistribution) -> f64 {
        let n = self.len().max(other.len());
        let get = |d: &DiscreteDistribution, i: usize| d.probs.get(i).copied().unwrap_or(0.0);
        0.5 * (0..n)
            .map(|i| (get(self, i) - get(other, i)).abs())
            .sum::<f64>()
    }
}

/// Default probabilities per scenario with scenario weights.
fn scenarios(portfolio: &Portfolio, grid: Option<&LatentGrid>) -> Result<Vec<(f64, Vec<f64>)>> {
    match grid {
        None => Ok(vec![(
            1.0,
            portfolio.assets().iter().map(|a| a.pd0).collect(),
        )]),
        Some(grid) => grid
            .iter()
            .map(|(z, q)| {
                let pds = portfolio
                    .assets()
                    .iter()
                    .map(|a| conditional_pd(a, z))
                    .collect::<Result<Vec<_>>>()?;
                Ok((q, pds))
            })
            .collect(),
    }
}

/// Exact loss law by enumerating every default pattern (and every grid
/// point of the latent factor when `grid` is given).
pub fn exact_loss_distribution(
    portfolio: &Portfolio,
    grid: Option<&LatentGrid>,
) -> Result<DiscreteDistribution> {
    let k = portfolio.len();
    let bits = k + grid.map_or(0, |g| g.n_z());
    if bits > MAX_ENUMERATION_BITS {
        return Err(Error::SizeGuard {
            what: "exact loss enumeration".into(),
            required: bits,
            limit: MAX_ENUMERATION_BITS,
        });
    }
    let lgds: Vec<usize> = portfolio.assets().iter().map(|a| a.lgd as usize).collect();
    let mut probs = vec![0.0; 1 << portfolio.n_sum_qubits()];
    for (weight, pds) in scenarios(portfolio, grid)? {
        for x in 0..1usize << k {
            let mut p = weight;
            let mut loss = 0;
            for j in 0..k {
                if x >> j & 1 == 1 {
                    p *= pds[j];
                    loss += lgds[j];
                } else {
                    p *= 1.0 - pds[j];
                }
            }
            probs[loss] += p;
        }
    }
    Ok(DiscreteDistribution { probs })
}

/// `Σ λ_k p⁰_k`.
pub fn expected_loss_independent(portfolio: &Portfolio) -> f64 {
    portfolio
        .assets()
        .iter()
        .map(|a| a.lgd as f64 * a.pd0)
        .sum()
}

/// `Σ_i q_i Σ_k λ_k p_k(z_i)` on the discretized latent factor.
pub fn expected_loss_gci(portfolio: &Portfolio, grid: &LatentGrid) -> Result<f64> {
    Ok(scenarios(portfolio, Some(grid))?
        .iter()
        .map(|(q, pds)| {
            q * portfolio
                .assets()
                .iter()
                .zip(pds)
                .map(|(a, p)| a.lgd as f64 * p)
                .sum::<f64>()
        })
        .sum())
}

/// `∫ Σ λ_k p_k(z) φ(z) dz` over the untruncated normal, by the trapezoid
/// rule on `[-10, 10]` with `points` nodes.
pub fn expected_loss_continuous(portfolio: &Portfolio, points: usize) -> Result<f64> {
    let (lo, hi) = (-10.0, 10.0);
    let h = (hi - lo) / (points - 1) as f64;
    let mut sum = 0.0;
    for n in 0..points {
        let z = lo + n as f64 * h;
        let w = if n == 0 || n == points - 1 { 0.5 } else { 1.0 };
        let loss: f64 = portfolio
            .assets()
            .iter()
            .map(|a| Ok(a.lgd as f64 * conditional_pd(a, z)?))
            .sum::<Result<f64>>()?;
        sum += w * loss * normal_pdf(z);
    }
    Ok(sum * h)
}

/// Upper bound on `|expected_loss_gci − expected_loss_continuous|`.
///
/// The conditional expected loss is Lipschitz in z with constant
/// `Σ λ_k √(ρ_k/(1−ρ_k)) / √(2π)`, so the gap is at most that constant
/// times the Wasserstein-1 distance between the grid law and N(0, 1).
pub fn discretization_error_bound(portfolio: &Portfolio, grid: &LatentGrid) -> Result<f64> {
    let lipschitz: f64 = portfolio
        .assets()
        .iter()
        .map(|a| a.lgd as f64 * (a.rho / (1.0 - a.rho)).sqrt())
        .sum::<f64>()
        * normal_pdf(0.0);
    // W1 = ∫ |F_grid(t) − Φ(t)| dt, integrated exactly between grid points
    // up to a fine midpoint rule.
    let (lo, hi, steps) = (-12.0, 12.0, 240_000);
    let h = (hi - lo) / steps as f64;
    let mut w1 = 0.0;
    let mut idx = 0;
    let mut grid_cdf = 0.0;
    for s in 0..steps {
        let t = lo + (s as f64 + 0.5) * h;
        while idx < grid.len() && grid.points()[idx] <= t {
            grid_cdf += grid.probs()[idx];
            idx += 1;
        }
        w1 += (grid_cdf - normal_cdf(t)?).abs() * h;
    }
    Ok(lipschitz * w1)
}

/// Smallest `x` with `ℙ[loss ≤ x] ≥ alpha`.
pub fn var_exact(dist: &DiscreteDistribution, alpha: f64) -> Result<u64> {
    check_alpha(alpha)?;
    let cdf = dist.cdf();
    // Cumulative sums may land a hair under 1 at the top.
    let hit = cdf
        .iter()
        .position(|&c| c >= alpha || (alpha == 1.0 && c >= 1.0 - 1e-12));
    Ok(hit.unwrap_or(cdf.len() - 1) as u64)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::validation(
            "alpha",
            format!("{alpha} is not in (0, 1]"),
        ));
    }
    Ok(())
}

/// How a risk figure was computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Exact,
    Qae { m: usize, mode: LoadingMode },
    Mc { samples: usize, seed: u64 },
}

/// One probe of the bisection search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BisectionStep {
    pub threshold: u64,
    /// Raw estimate of `ℙ[loss ≤ threshold]`.
    pub estimate: f64,
    /// Estimate after projection onto the monotone envelope of earlier probes.
    pub effective_estimate: f64,
    pub bound: f64,
    /// Bracket after this probe; `lower = -1` is the virtual point below 0.
    pub lower: i64,
    pub upper: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub alpha: f64,
    pub expected_loss: f64,
    pub var: u64,
    pub ecr: f64,
    pub method: Method,
    pub trace: Vec<BisectionStep>,
    /// Set when probe estimates were not monotone in the threshold.
    pub non_monotone: bool,
}

impl RiskReport {
    fn new(alpha: f64, expected_loss: f64, var: u64, method: Method) -> Self {
        RiskReport {
            alpha,
            expected_loss,
            var,
            ecr: var as f64 - expected_loss,
            method,
            trace: Vec::new(),
            non_monotone: false,
        }
    }

    pub fn probes(&self) -> usize {
        self.trace.len()
    }
}

/// Expected loss under the model in use, always computed classically.
pub fn expected_loss(portfolio: &Portfolio, grid: Option<&LatentGrid>) -> Result<f64> {
    match grid {
        None => Ok(expected_loss_independent(portfolio)),
        Some(g) => expected_loss_gci(portfolio, g),
    }
}

/// Integer bisection for the smallest `x ∈ [0, 2^n_s − 1]` whose estimated
/// CDF reaches `alpha`.
///
/// The bracket `(lower, upper]` starts at `(-1, 2^n_s − 1]`, where the CDF
/// is 0 below and 1 at the top by construction. `probe(x)` returns an
/// estimate of `ℙ[loss ≤ x]` and its error bound. Returns the final upper
/// end, the trace and whether any probe contradicted monotonicity.
pub fn bisection_search(
    n_s: usize,
    alpha: f64,
    mut probe: impl FnMut(u64) -> Result<(f64, f64)>,
) -> Result<(u64, Vec<BisectionStep>, bool)> {
    check_alpha(alpha)?;
    let mut lower: i64 = -1;
    let mut upper: i64 = (1i64 << n_s) - 1;
    let mut trace: Vec<BisectionStep> = Vec::new();
    let mut non_monotone = false;
    while upper - lower > 1 {
        let mid = (lower + upper).div_euclid(2);
        let (estimate, bound) = probe(mid as u64)?;
        let floor = trace
            .iter()
            .filter(|s| (s.threshold as i64) < mid)
            .map(|s| s.effective_estimate)
            .fold(0.0, f64::max);
        let ceil = trace
            .iter()
            .filter(|s| (s.threshold as i64) > mid)
            .map(|s| s.effective_estimate)
            .fold(1.0, f64::min);
        let effective = estimate.clamp(floor, ceil.max(floor));
        if effective != estimate {
            non_monotone = true;
        }
        if effective >= alpha {
            upper = mid;
        } else {
            lower = mid;
        }
        trace.push(BisectionStep {
            threshold: mid as u64,
            estimate,
            effective_estimate: effective,
            bound,
            lower,
            upper,
        });
    }
    Ok((upper as u64, trace, non_monotone))
}

/// VaR by bisection over amplitude-estimated CDF values.
pub fn var_bisection_qae(
    portfolio: &Portfolio,
    grid: Option<&LatentGrid>,
    alpha: f64,
    m: usize,
    mode: LoadingMode,
) -> Result<RiskReport> {
    var_bisection_qae_sampled(portfolio, grid, alpha, m, mode, None, None)
}

/// [`var_bisection_qae`] with each probe read out from `shots` seeded samples.
pub fn var_bisection_qae_sampled(
    portfolio: &Portfolio,
    grid: Option<&LatentGrid>,
    alpha: f64,
    m: usize,
    mode: LoadingMode,
    shots: Option<usize>,
    seed: Option<u64>,
) -> Result<RiskReport> {
    let (var, trace, non_monotone) = bisection_search(portfolio.n_sum_qubits(), alpha, |x| {
        let point = estimate_cdf_point(portfolio, grid, x, m, mode, shots, seed)?;
        Ok((point.estimate, point.qae.error_bound))
    })?;
    let mut report = RiskReport::new(
        alpha,
        expected_loss(portfolio, grid)?,
        var,
        Method::Qae { m, mode },
    );
    report.trace = trace;
    report.non_monotone = non_monotone;
    Ok(report)
}

/// Economic capital `VaR_α − 𝔼[loss]` with VaR from `method`.
pub fn ecr(
    portfolio: &Portfolio,
    grid: Option<&LatentGrid>,
    alpha: f64,
    method: Method,
) -> Result<RiskReport> {
    match method {
        Method::Exact => {
            let dist = exact_loss_distribution(portfolio, grid)?;
            let var = var_exact(&dist, alpha)?;
            Ok(RiskReport::new(
                alpha,
                expected_loss(portfolio, grid)?,
                var,
                method,
            ))
        }
        Method::Qae { m, mode } => var_bisection_qae(portfolio, grid, alpha, m, mode),
        Method::Mc { samples, seed } => Ok(mc_simulate(portfolio, grid, alpha, samples, seed)?.1),
    }
}

fn loss_sampler(
    portfolio: &Portfolio,
    grid: Option<&LatentGrid>,
) -> Result<impl Fn(&mut ChaCha8Rng) -> usize + Sync> {
    let table = scenarios(portfolio, grid)?;
    let weights: Vec<f64> = table.iter().map(|(q, _)| *q).collect();
    let pick =
        WeightedIndex::new(&weights).map_err(|e| Error::validation("grid", e.to_string()))?;
    let lgds: Vec<usize> = portfolio.assets().iter().map(|a| a.lgd as usize).collect();
    Ok(move |rng: &mut ChaCha8Rng| {
        let pds = &table[if table.len() > 1 { pick.sample(rng) } else { 0 }].1;
        pds.iter()
            .zip(&lgds)
            .filter(|(p, _)| rng.random::<f64>() < **p)
            .map(|(_, l)| l)
            .sum()
    })
}

/// Loss histogram from `samples` draws split across `partitions` independent
/// ChaCha8 streams of `seed`. Deterministic in `(seed, partitions)`.
pub fn mc_histogram(
    portfolio: &Portfolio,
    grid: Option<&LatentGrid>,
    samples: usize,
    seed: u64,
    partitions: usize,
) -> Result<Vec<u64>> {
    if samples < 1 {
        return Err(Error::validation("samples", "need at least one sample"));
    }
    let partitions = partitions.clamp(1, samples);
    let sampler = loss_sampler(portfolio, grid)?;
    let bins = 1usize << portfolio.n_sum_qubits();
    let per = samples / partitions;
    let extra = samples % partitions;
    let parts: Vec<Vec<u64>> = (0..partitions)
        .into_par_iter()
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            let mut counts = vec![0u64; bins];
            for _ in 0..per + usize::from(p < extra) {
                counts[sampler(&mut rng)] += 1;
            }
            counts
        })
        .collect();
    Ok(parts.into_iter().fold(vec![0; bins], |mut acc, c| {
        acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        acc
    }))
}

/// Monte Carlo loss distribution, VaR and ECR on a single stream.
pub fn mc_simulate(
    portfolio: &Portfolio,
    grid: Option<&LatentGrid>,
    alpha: f64,
    samples: usize,
    seed: u64,
) -> Result<(DiscreteDistribution, RiskReport)> {
    mc_simulate_partitioned(portfolio, grid, alpha, samples, seed, 1)
}

pub fn mc_simulate_partitioned(
    portfolio: &Portfolio,
    grid: Option<&LatentGrid>,
    alpha: f64,
    samples: usize,
    seed: u64,
    partitions: usize,
) -> Result<(DiscreteDistribution, RiskReport)> {
    check_alpha(alpha)?;
    let counts = mc_histogram(portfolio, grid, samples, seed, partitions)?;
    let probs = counts.iter().map(|&c| c as f64 / samples as f64).collect();
    let dist = DiscreteDistribution { probs };
    let var = var_exact(&dist, alpha)?;
    let report = RiskReport::new(
        alpha,
        expected_loss(portfolio, grid)?,
        var,
        Method::Mc { samples, seed },
    );
    Ok((dist, report))
}

/// Root-mean-square error of the Monte Carlo CDF estimate at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub samples: usize,
    pub trials: usize,
    pub rmse: f64,
}

/// RMSE of the empirical `ℙ[loss ≤ threshold]` over `trials` independent
/// runs (stream `t` of `seed` for trial `t`) at every sample size.
pub fn mc_convergence(
    portfolio: &Portfolio,
    grid: Option<&LatentGrid>,
    threshold: u64,
    sample_sizes: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    let exact = exact_loss_distribution(portfolio, grid)?.cdf_at(threshold);
    let sampler = loss_sampler(portfolio, grid)?;
    sample_sizes
        .iter()
        .enumerate()
        .map(|(row, &samples)| {
            if samples == 0 {
                return Err(Error::validation(
                    "samples",
                    "sample sizes must be positive",
                ));
            }
            let sq: f64 = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(row as u64));
                    rng.set_stream(t as u64);
                    let hits = (0..samples)
                        .filter(|_| sampler(&mut rng) as u64 <= threshold)
                        .count();
                    (hits as f64 / samples as f64 - exact).powi(2)
                })
                .collect::<Vec<_>>()
                .iter()
                .sum();
            Ok(ConvergenceRow {
                samples,
                trials,
                rmse: (sq / trials as f64).sqrt(),
            })
        })
        .collect()
}

/// Least-squares slope of log(rmse) against log(samples).
pub fn loglog_slope(rows: &[ConvergenceRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.samples as f64).ln(), r.rmse.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Amplitude-estimation error allowance used when comparing a QAE CDF value
/// against the exact one: the analytic bound at the exact value plus one
/// grid step `π/2^m`.
pub fn qae_tolerance(exact: f64, m: usize) -> f64 {
    error_bound(exact, 1 << m) + std::f64::consts::PI / (1u64 << m) as f64
}
