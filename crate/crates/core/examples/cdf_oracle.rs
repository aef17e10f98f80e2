//! Builds the CDF oracle A = C·S·U, reads ℙ[loss ≤ x] off the objective
//! qubit and shows the Grover operator amplifying it as sin²((2j+1)θ).
//!
//!     cargo run --release --example cdf_oracle

use qae_credit::circuit::StateVector;
use qae_credit::distributions::{LatentGrid, Portfolio, DEFAULT_Z_MAX};
use qae_credit::model::{build_a, build_q, LoadingMode};
use qae_credit::risk::exact_loss_distribution;

fn main() -> qae_credit::Result<()> {
    let portfolio = Portfolio::two_asset_example();
    let grid = LatentGrid::new(2, DEFAULT_Z_MAX)?;
    let exact = exact_loss_distribution(&portfolio, Some(&grid))?;

    for x in 0..4 {
        let oracle = build_a(&portfolio, Some(&grid), x, LoadingMode::Exact)?;
        println!(
            "x = {x}: {} qubits, P[objective = 1] = {:.6}, exact CDF = {:.6}",
            oracle.layout.n_qubits(),
            oracle.amplitude()?,
            exact.cdf_at(x)
        );
    }

    let oracle = build_a(&portfolio, Some(&grid), 0, LoadingMode::Linear)?;
    let theta = oracle.amplitude()?.sqrt().asin();
    let q = build_q(&oracle)?;
    let n = q.n_qubits();
    let mut s = oracle
        .operator
        .embed(n, &(0..q.n_state).collect::<Vec<_>>())?
        .apply(&StateVector::zero(n))?;
    println!("\namplification at x = 0 (θ = {theta:.4}):");
    for j in 0..=4 {
        if j > 0 {
            s.apply(&q.operator)?;
        }
        let want = ((2 * j + 1) as f64 * theta).sin().powi(2);
        println!(
            "  Q^{j}: P[objective = 1] = {:.6}, sin²({}θ) = {want:.6}, ancilla clean: {}",
            s.probability_of(q.objective, true)?,
            2 * j + 1,
            s.probability_of(q.ancilla, true)? < 1e-12
        );
    }
    Ok(())
}
