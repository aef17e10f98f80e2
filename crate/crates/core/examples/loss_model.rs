//! The classical side of the credit model: conditional default
//! probabilities, the latent-factor grid, the exact loss distribution and
//! expected loss with its discretization bound.
//!
//!     cargo run --release --example loss_model

use qae_credit::distributions::{conditional_pd, fit_linear_angles, LatentGrid, Portfolio};
use qae_credit::risk::{
    discretization_error_bound, exact_loss_distribution, expected_loss_continuous,
    expected_loss_gci, expected_loss_independent, var_exact,
};

fn main() -> qae_credit::Result<()> {
    let portfolio = Portfolio::two_asset_example();
    println!(
        "independent E[loss] = {}",
        expected_loss_independent(&portfolio)
    );

    for n_z in [2, 3, 4, 6] {
        let grid = LatentGrid::new(n_z, 3.0)?;
        let el = expected_loss_gci(&portfolio, &grid)?;
        let bound = discretization_error_bound(&portfolio, &grid)?;
        let dist = exact_loss_distribution(&portfolio, Some(&grid))?;
        println!(
            "n_z = {n_z}: E[loss] = {el:.6} (bound {bound:.2e}), VaR 95% = {}, P[loss] = {:?}",
            var_exact(&dist, 0.95)?,
            dist.probs()
                .iter()
                .map(|p| format!("{p:.4}"))
                .collect::<Vec<_>>()
        );
    }
    println!(
        "continuous E[loss] = {:.6}",
        expected_loss_continuous(&portfolio, 100_001)?
    );

    let grid = LatentGrid::new(2, 3.0)?;
    for (k, asset) in portfolio.assets().iter().enumerate() {
        let fit = fit_linear_angles(asset, &grid)?;
        let pds: Vec<String> = grid
            .points()
            .iter()
            .map(|&z| conditional_pd(asset, z).map(|p| format!("{p:.4}")))
            .collect::<Result<_, _>>()?;
        println!(
            "asset {k}: p(z) on grid = [{}], angle fit slope {:.4}, intercept {:.4}, residual {:.2e}",
            pds.join(", "),
            fit.slope,
            fit.intercept,
            fit.residual
        );
    }
    Ok(())
}
