//! Allocate one MEC server's capacity across heterogeneous offloaders and
//! compare the KKT split against an even split.
//!
//! ```sh
//! cargo run --example capacity_allocation
//! ```

use mecsim::capacity::{min_capacities, objective, solve_capacity, CapacityInstance, CapacityUser};

fn main() -> anyhow::Result<()> {
    // Four offloaders with different fixed (transmission) delays, workloads
    // and deadlines, competing for a 200 Gcycle/s server.
    let instance = CapacityInstance {
        users: vec![
            CapacityUser {
                accuracy_const: 85.0,
                fixed_delay: 0.004,
                work: 2.1e7,
                delay_limit: 0.020,
                offload: true,
            },
            CapacityUser {
                accuracy_const: 90.0,
                fixed_delay: 0.012,
                work: 2.3e7,
                delay_limit: 0.040,
                offload: true,
            },
            CapacityUser {
                accuracy_const: 95.0,
                fixed_delay: 0.030,
                work: 2.8e7,
                delay_limit: 0.060,
                offload: true,
            },
            CapacityUser {
                accuracy_const: 90.0,
                fixed_delay: 0.002,
                work: 2.2e7,
                delay_limit: 0.040,
                offload: true,
            },
        ],
        budget: 200e9,
    };

    println!("deadline minimums:");
    for (u, m) in min_capacities(&instance).iter().enumerate() {
        println!("  user {u}: {m:?}");
    }

    let shares = solve_capacity(&instance)?;
    let even = vec![instance.budget / 4.0; 4];
    println!("\nKKT shares (Gcycle/s):");
    for (u, f) in shares.iter().enumerate() {
        let user = &instance.users[u];
        println!(
            "  user {u}: {:7.2}  -> total delay {:.3} ms",
            f / 1e9,
            (user.fixed_delay + user.work / f) * 1e3
        );
    }
    println!("\nobjective: KKT {:.6} vs even split {:.6}", objective(&instance, &shares), objective(&instance, &even));
    println!("allocated {:.6} of the budget", shares.iter().sum::<f64>() / instance.budget);
    Ok(())
}
