//! Two-asset portfolio: exact CDF, amplitude-estimated CDF and the
//! bisection search for the 95% VaR with four evaluation qubits.
//!
//!     cargo run --release --example two_asset_var

use qae_credit::distributions::{LatentGrid, Portfolio, DEFAULT_Z_MAX};
use qae_credit::model::LoadingMode;
use qae_credit::qae::estimate_cdf_point;
use qae_credit::risk::{exact_loss_distribution, var_bisection_qae, var_exact};

fn main() -> qae_credit::Result<()> {
    let portfolio = Portfolio::two_asset_example();
    let grid = LatentGrid::new(2, DEFAULT_Z_MAX)?;
    let (alpha, m) = (0.95, 4);

    let dist = exact_loss_distribution(&portfolio, Some(&grid))?;
    println!("x   exact CDF   QAE (linear)  QAE (exact)  bound");
    for (x, exact) in dist.cdf().iter().enumerate() {
        let lin = estimate_cdf_point(
            &portfolio,
            Some(&grid),
            x as u64,
            m,
            LoadingMode::Linear,
            None,
            None,
        )?;
        let ex = estimate_cdf_point(
            &portfolio,
            Some(&grid),
            x as u64,
            m,
            LoadingMode::Exact,
            None,
            None,
        )?;
        println!(
            "{x}   {exact:.6}    {:.6}      {:.6}     {:.4}",
            lin.estimate, ex.estimate, lin.qae.error_bound
        );
    }

    let report = var_bisection_qae(&portfolio, Some(&grid), alpha, m, LoadingMode::Linear)?;
    println!("\nbisection (alpha = {alpha}, m = {m}):");
    for step in &report.trace {
        println!(
            "  probe x = {}: estimate {:.4} -> bracket ({}, {}]",
            step.threshold, step.estimate, step.lower, step.upper
        );
    }
    println!("VaR (QAE)   = {}", report.var);
    println!("VaR (exact) = {}", var_exact(&dist, alpha)?);
    println!("E[loss]     = {:.6}", report.expected_loss);
    println!("ECR         = {:.6}", report.ecr);
    Ok(())
}
