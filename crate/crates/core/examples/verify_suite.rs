//! Runs the default verification suite and prints the per-row report.
//!
//! ```sh
//! cargo run --release --example verify_suite -- 300000
//! ```

use raoi::bench::{self, Tolerance};

fn main() -> raoi::Result<()> {
    let packets: usize = match std::env::args().nth(1) {
        Some(p) => p.parse().map_err(|e| raoi::Error::Parse(format!("packets: {e}")))?,
        None => 300_000,
    };
    let report = bench::verify(&bench::default_suite(packets, 1), Tolerance::default())?;
    print!("{}", report.render_text());
    std::process::exit(report.exit_code());
}
