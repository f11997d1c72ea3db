//! Arrival-sampling checks on simulated queues: relative age seen just after
//! arrivals against the time-average receiver age, and the idle fraction
//! arrivals see against the stationary idle probability.
//!
//! ```sh
//! cargo run --release --example sampling_checks
//! ```

use raoi::analytic;
use raoi::sim::{self, arrival_sampling_check, server_state_fraction};
use raoi::{Discipline, ServiceFamily, ServiceModel, SimConfig};

fn main() -> raoi::Result<()> {
    let lambda = 1.0;
    for d in [
        Discipline::PreemptiveDrop,
        Discipline::BlockingSingle,
        Discipline::ReplaceBuffer,
    ] {
        for family in ServiceFamily::ALL {
            let service = ServiceModel::new(family, 1.0)?;
            let out = sim::run(&SimConfig::new(d, service, lambda, 500_000, 3))?;
            let check = arrival_sampling_check(&out.trace, out.window, 100)?;
            let states = server_state_fraction(&out.records, out.window, 100)?;
            let p_idle = match d {
                Discipline::BlockingSingle => Some(analytic::blocking_stationary_probs(service, lambda)?.0),
                Discipline::ReplaceBuffer => Some(analytic::replace_stationary_probs(service, lambda)?.0),
                _ => None,
            };
            println!("{d} {family}:");
            println!(
                "  gamma after arrivals {:.4}  time-average delta_R {:.4}  (z = {:+.2})",
                check.arrival_mean,
                check.time_average_delta_r,
                check.discrepancy() / check.combined_se()
            );
            print!(
                "  idle seen by arrivals {:.4}  idle in time {:.4}",
                states.arrival_idle, states.time_idle
            );
            match p_idle {
                Some(p) => println!("  p_I formula {p:.4}"),
                None => println!(),
            }
        }
    }
    Ok(())
}
