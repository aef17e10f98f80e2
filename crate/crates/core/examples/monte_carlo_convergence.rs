//! Classical Monte Carlo baseline: VaR from sampling and the M^{-1/2}
//! decay of the CDF estimation error, next to the 1/M scaling of QAE.
//!
//!     cargo run --release --example monte_carlo_convergence

use qae_credit::distributions::{LatentGrid, Portfolio, DEFAULT_Z_MAX};
use qae_credit::qae::error_bound;
use qae_credit::risk::{
    exact_loss_distribution, loglog_slope, mc_convergence, mc_simulate_partitioned, var_exact,
};

fn main() -> qae_credit::Result<()> {
    let portfolio = Portfolio::two_asset_example();
    let grid = LatentGrid::new(2, DEFAULT_Z_MAX)?;
    let alpha = 0.95;
    let exact = exact_loss_distribution(&portfolio, Some(&grid))?;
    let var = var_exact(&exact, alpha)?;

    for samples in [1_000, 100_000, 1_000_000] {
        let (_, report) = mc_simulate_partitioned(&portfolio, Some(&grid), alpha, samples, 1, 8)?;
        println!(
            "M = {samples:>9}: VaR = {} (exact {var}), ECR = {:.4}",
            report.var, report.ecr
        );
    }

    let sizes = [100, 1_000, 10_000, 100_000];
    let rows = mc_convergence(&portfolio, Some(&grid), var, &sizes, 200, 3)?;
    let p = exact.cdf_at(var);
    println!("\nCDF at x = {var} (exact {p:.6}), 200 trials per size:");
    for r in &rows {
        println!(
            "  M = {:>7}: MC rmse {:.2e}   QAE bound with M samples {:.2e}",
            r.samples,
            r.rmse,
            error_bound(p, r.samples)
        );
    }
    println!("log-log slope of MC rmse: {:.3}", loglog_slope(&rows));
    Ok(())
}
