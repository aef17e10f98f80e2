//! Fault-tolerant depth and runtime for a million-asset portfolio, plus a
//! small sweep over the number of evaluation qubits.
//!
//!     cargo run --release --example resource_estimate

use qae_credit::resources::{estimate, ResourceParams};

fn main() -> qae_credit::Result<()> {
    let params = ResourceParams::million_asset_example();
    let r = estimate(&params)?;
    println!(
        "K = {}, n_z = {}, n_s = {}, m = {}",
        params.k, params.n_z, params.n_s, params.m
    );
    println!(
        "rotation T-depth: single {}, controlled {}",
        r.rotation_single, r.rotation_controlled
    );
    println!(
        "depth U = {}, S = {}, C = {}, A = {}",
        r.depth_u, r.depth_s, r.depth_c, r.depth_a
    );
    println!(
        "oracle calls = {}, total depth = {}",
        r.oracle_calls, r.total_depth
    );
    println!(
        "runtime = {:.1} s ({:.3} h)",
        r.runtime_s,
        r.runtime_s / 3600.0
    );
    println!(
        "with depth(A) rounded to 600: {} layers, {:.1} s",
        r.rounded_total_depth, r.rounded_runtime_s
    );
    for e in &r.excluded {
        println!("  not counted: {} ({})", e.name, e.reason);
    }

    let halved = estimate(&ResourceParams {
        qft_free_halving: true,
        ..params
    })?;
    println!("QFT-free variant: {:.1} min", halved.runtime_s / 60.0);

    println!("\nm sweep:");
    for m in 6..=12 {
        let r = estimate(&ResourceParams { m, ..params })?;
        println!(
            "  m = {m:2}: total depth {:>11}, runtime {:>9.1} s",
            r.total_depth, r.runtime_s
        );
    }
    Ok(())
}
