//! Solve one user's compression-offloading subproblem with the SCA loop,
//! then verify the rounded decision against the exact enumeration oracle.
//!
//! ```sh
//! cargo run --example compression_sca
//! ```

use mecsim::compression::{
    exact_user_oracle, init_anchor, round_user, sca_iterate, CompressionInstance,
};
use mecsim::taskmodel::FitParams;

fn main() -> anyhow::Result<()> {
    // A user whose local computing misses the 20 ms deadline: offloading
    // with compression is the only way out, and the solver balances the
    // accuracy floor against the transmission bottleneck.
    let instance = CompressionInstance {
        local_delay: 0.035,
        offload_unit_delay: 0.180,
        offload_fixed_delay: 0.0008,
        raw_volume: 800.0,
        fit: FitParams::default(),
        delay_limit: 0.020,
        accuracy_limit: 85.0,
        weight: 1.0,
    };

    let anchor = init_anchor(&instance).expect("user must be feasible somewhere");
    println!("init anchor: x = {}, eta = {:.5}", anchor.x, anchor.eta);

    let state = sca_iterate(std::slice::from_ref(&instance), &[anchor], 1e-4, 20)?;
    println!("SCA objective trace:");
    for (j, v) in state.trace.iter().enumerate() {
        println!("  iter {j}: {v:.6}");
    }
    let relaxed = state.points[0].unwrap();
    println!("relaxed point: x = {:.4}, eta = {:.5}", relaxed.x, relaxed.eta);

    let rounded = round_user(&instance, relaxed.eta)?;
    println!(
        "rounded: offload = {}, ratio = {:.2}, accuracy = {:.2} %, objective = {:.6}",
        rounded.offload,
        rounded.ratio,
        instance.accuracy_at(rounded.eta),
        rounded.objective
    );

    let oracle = exact_user_oracle(&instance)?;
    println!(
        "oracle:  offload = {}, ratio = {:.2}, objective = {:.6} (gap {:.2e})",
        oracle.offload,
        oracle.ratio,
        oracle.objective,
        oracle.objective - rounded.objective
    );
    Ok(())
}
