//! Canonical amplitude estimation on a one-qubit oracle: outcome
//! distribution, grid estimate, error bound and a shot-based readout.
//!
//!     cargo run --release --example amplitude_estimation

use qae_credit::circuit::{Gate, Operator};
use qae_credit::qae::{estimate_amplitude, sample_estimate};

fn main() -> qae_credit::Result<()> {
    let a: f64 = 0.3;
    let mut oracle = Operator::identity(1, "A");
    oracle.push(Gate::Ry(2.0 * a.sqrt().asin()), 0)?;

    println!("true a = {a}");
    for m in 2..=8 {
        let r = estimate_amplitude(&oracle, 0, m)?;
        let shots = sample_estimate(&r, 100, 7)?;
        println!(
            "m = {m}: {} qubits, estimate {:.6}, |error| {:.4} ≤ bound {:.4}, 100-shot readout {:.6}",
            r.n_qubits,
            r.estimate,
            (r.estimate - a).abs(),
            r.error_bound,
            shots
        );
    }

    let r = estimate_amplitude(&oracle, 0, 4)?;
    println!("\nm = 4 outcome distribution:");
    for (y, (p, g)) in r.outcome_probs.iter().zip(&r.grid).enumerate() {
        println!(
            "  y = {y:2}  sin²(yπ/16) = {g:.4}  P = {p:.4} {}",
            "#".repeat((p * 60.0) as usize)
        );
    }
    Ok(())
}
