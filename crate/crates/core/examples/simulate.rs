//! Simulates one queue and prints the four time-average moments.
//!
//! ```sh
//! cargo run --release --example simulate -- replace det 0.8 1000000
//! ```

use std::env;
use std::time::Instant;

use raoi::{Discipline, Metric, Outcome, ServiceFamily, ServiceModel, SimConfig};

fn main() -> raoi::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let discipline: Discipline = arg(0, "blocking").parse()?;
    let family: ServiceFamily = arg(1, "exp").parse()?;
    let lambda: f64 = arg(2, "0.5")
        .parse()
        .map_err(|e| raoi::Error::Parse(format!("lambda: {e}")))?;
    let packets: usize = arg(3, "1000000")
        .parse()
        .map_err(|e| raoi::Error::Parse(format!("packets: {e}")))?;

    let config = SimConfig::new(discipline, ServiceModel::new(family, 1.0)?, lambda, packets, 7);
    let clock = Instant::now();
    let out = raoi::sim::run(&config)?;
    println!(
        "{discipline} {family} lambda={lambda} packets={packets} ({:.2?})",
        clock.elapsed()
    );
    for m in &out.moments {
        println!("  E[{}^{}] = {:.5} +/- {:.5}", m.metric, m.k, m.value, m.std_error);
    }
    let delivered = out.outcome_count(Outcome::Delivered);
    println!("  delivered {delivered} of {packets} packets");
    let g = out.moment(Metric::Gamma, 1).expect("always estimated");
    let d = out.moment(Metric::DeltaR, 1).expect("always estimated");
    println!(
        "  E[Delta_R] - 1/lambda = {:.5} (vs E[Gamma] = {:.5})",
        d.value - 1.0 / lambda,
        g.value
    );
    Ok(())
}
