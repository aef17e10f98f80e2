//! Phase-estimation amplitude estimation.
//!
//! Layout of the simulated register: the state qubits of `A`, one ancilla
//! used by the zero-state reflection, then `m` evaluation qubits. Evaluation
//! qubit `j` controls `Q^(2^j)`; after the inverse QFT the evaluation
//! register reads an integer `y` whose grid value is `sin²(yπ/2^m)`.

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{Control, Gate, Operator, StateVector};
use crate::distributions::{LatentGrid, Portfolio};
use crate::error::{Error, Result};
use crate::model::{build_a, CdfOracle, GroverOperator, LoadingMode};

/// Largest register the statevector engine will allocate.
pub const MAX_QUBITS: usize = 22;

/// Exact outcome distribution of one amplitude-estimation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QaeResult {
    /// Evaluation qubits.
    pub m: usize,
    /// Probability of reading `y` from the evaluation register.
    pub outcome_probs: Vec<f64>,
    /// Grid value of the most probable outcome.
    pub estimate: f64,
    /// `grid[y] = sin²(yπ/2^m)`.
    pub grid: Vec<f64>,
    /// [`error_bound`] at the estimate.
    pub error_bound: f64,
    /// Quantum samples `2^m` used in the bound.
    pub samples_m: usize,
    /// Qubits simulated, evaluation register and ancilla included.
    pub n_qubits: usize,
}

impl QaeResult {
    /// Index `y` of the most probable outcome. Ties go to the smaller grid value.
    pub fn most_likely(&self) -> usize {
        argmax_by_grid(&self.outcome_probs, &self.grid)
    }
}

fn argmax_by_grid(weights: &[f64], grid: &[f64]) -> usize {
    let mut best = 0;
    for y in 1..weights.len() {
        let (w, bw) = (weights[y], weights[best]);
        let tie = (w - bw).abs() <= 1e-12 * bw.max(1e-300);
        if (w > bw && !tie) || (tie && grid[y] < grid[best]) {
            best = y;
        }
    }
    best
}

/// `2π√(a(1−a))/M + π²/M²`.
pub fn error_bound(a: f64, samples: usize) -> f64 {
    let a = a.clamp(0.0, 1.0);
    let m = samples.max(1) as f64;
    2.0 * PI * (a * (1.0 - a)).sqrt() / m + PI * PI / (m * m)
}

/// Lower median of a list of estimates.
pub fn median_estimate(estimates: &[f64]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::validation(
            "estimates",
            "cannot take the median of nothing",
        ));
    }
    let mut sorted = estimates.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[(sorted.len() - 1) / 2])
}

/// Quantum Fourier transform on `qubits` (qubits[j] has weight 2^j):
/// `|x⟩ ↦ 2^{-n/2} Σ_k e^{2πi·xk/2^n} |k⟩`.
pub fn qft(n_qubits: usize, qubits: &[usize]) -> Result<Operator> {
    let n = qubits.len();
    let mut op = Operator::identity(n_qubits, "QFT");
    for i in (0..n).rev() {
        op.push(Gate::H, qubits[i])?;
        for j in (0..i).rev() {
            let angle = PI / (1u64 << (i - j)) as f64;
            op.push_controlled(Gate::Phase(angle), qubits[i], &[Control::on(qubits[j])])?;
        }
    }
    for i in 0..n / 2 {
        let (a, b) = (qubits[i], qubits[n - 1 - i]);
        op.push_controlled(Gate::X, b, &[Control::on(a)])?
            .push_controlled(Gate::X, a, &[Control::on(b)])?
            .push_controlled(Gate::X, b, &[Control::on(a)])?;
    }
    Ok(op)
}

pub fn inverse_qft(n_qubits: usize, qubits: &[usize]) -> Result<Operator> {
    Ok(qft(n_qubits, qubits)?.adjoint().with_name("QFT†"))
}

/// Runs amplitude estimation with `m` evaluation qubits on a preparation
/// operator `a` whose good states have `objective` set.
pub fn estimate_amplitude(a: &Operator, objective: usize, m: usize) -> Result<QaeResult> {
    if m < 1 {
        return Err(Error::validation("m", "need at least one evaluation qubit"));
    }
    let n_state = a.arity();
    let total = n_state + 1 + m;
    if total > MAX_QUBITS {
        return Err(Error::SizeGuard {
            what: "amplitude estimation register".into(),
            required: total,
            limit: MAX_QUBITS,
        });
    }
    let grover = GroverOperator::new(a, objective)?;
    let wide_map: Vec<usize> = (0..=n_state).collect();
    let q = grover.operator.embed(total, &wide_map)?;
    let eval: Vec<usize> = (n_state + 1..total).collect();

    let mut state = StateVector::zero(total);
    state.apply(&a.embed(total, &(0..n_state).collect::<Vec<_>>())?)?;
    let mut hadamards = Operator::identity(total, "H^m");
    for &e in &eval {
        hadamards.push(Gate::H, e)?;
    }
    state.apply(&hadamards)?;
    for (j, &e) in eval.iter().enumerate() {
        let cq = q.controlled(&[e])?;
        for _ in 0..1usize << j {
            state.apply(&cq)?;
        }
    }
    state.apply(&inverse_qft(total, &eval)?)?;

    let outcome_probs = state.register_distribution(&eval)?;
    let samples = 1usize << m;
    let grid: Vec<f64> = (0..samples)
        .map(|y| (y as f64 * PI / samples as f64).sin().powi(2))
        .collect();
    let estimate = grid[argmax_by_grid(&outcome_probs, &grid)];
    Ok(QaeResult {
        m,
        outcome_probs,
        estimate,
        error_bound: error_bound(estimate, samples),
        grid,
        samples_m: samples,
        n_qubits: total,
    })
}

/// Amplitude estimation of `ℙ[loss ≤ threshold]` for a built oracle.
pub fn run_qae(oracle: &CdfOracle, m: usize) -> Result<QaeResult> {
    estimate_amplitude(&oracle.operator, oracle.layout.objective, m)
}

/// Draws `shots` outcomes from `result` and returns the grid value seen
/// most often (ties go to the smaller value). ChaCha8 seeded with `seed`.
pub fn sample_estimate(result: &QaeResult, shots: usize, seed: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::validation("shots", "need at least one shot"));
    }
    let dist = WeightedIndex::new(&result.outcome_probs)
        .map_err(|e| Error::validation("outcome_probs", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // y and 2^m − y share a grid value; count them together.
    let mut counts = vec![0.0; result.samples_m];
    for _ in 0..shots {
        let y = dist.sample(&mut rng);
        let canonical = y.min((result.samples_m - y) % result.samples_m);
        counts[canonical] += 1.0;
    }
    Ok(result.grid[argmax_by_grid(&counts, &result.grid)])
}

/// One amplitude-estimated CDF value.
#[derive(Debug, Clone, Serialize)]
pub struct CdfPointEstimate {
    pub threshold: u64,
    pub estimate: f64,
    pub qae: QaeResult,
}

/// Builds the oracle for `threshold` and estimates `ℙ[loss ≤ threshold]`.
/// With `shots`, the estimate is the empirical mode of seeded samples
/// (seed defaults to 0); otherwise the most probable outcome.
pub fn estimate_cdf_point(
    portfolio: &Portfolio,
    grid: Option<&LatentGrid>,
    threshold: u64,
    m: usize,
    mode: LoadingMode,
    shots: Option<usize>,
    seed: Option<u64>,
) -> Result<CdfPointEstimate> {
    let oracle = build_a(portfolio, grid, threshold, mode)?;
    let qae = run_qae(&oracle, m)?;
    let estimate = match shots {
        Some(shots) => sample_estimate(&qae, shots, seed.unwrap_or(0))?,
        None => qae.estimate,
    };
    Ok(CdfPointEstimate {
        threshold,
        estimate,
        qae,
    })
}
