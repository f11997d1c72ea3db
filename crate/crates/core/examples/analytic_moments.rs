//! Tabulates the cataloged closed forms over a few arrival rates, including
//! the combinations with no closed form.
//!
//! ```sh
//! cargo run --release --example analytic_moments
//! ```

use raoi::analytic::{self, EvalOptions};
use raoi::{AnalyticQuery, Discipline, Error, Metric, ServiceFamily, ServiceModel};

fn main() -> raoi::Result<()> {
    let lambdas = [0.1, 0.5, 1.0, 2.0, 10.0];
    let options = EvalOptions::default();
    for metric in [Metric::Gamma, Metric::DeltaR] {
        for k in [1, 2] {
            println!("\nE[{metric}^{k}] with mu = 1");
            print!("{:<22}", "");
            for l in lambdas {
                print!("{:>13}", format!("lambda={l}"));
            }
            println!();
            for d in Discipline::ALL {
                for family in ServiceFamily::ALL {
                    let service = ServiceModel::new(family, 1.0)?;
                    print!("{:<22}", format!("{d} {family}"));
                    for l in lambdas {
                        let cell = match analytic::evaluate(&AnalyticQuery::new(d, service, l, metric, k), &options) {
                            Ok(r) if r.value < 1e5 => format!("{:.5}", r.value),
                            Ok(r) => format!("{:.4e}", r.value),
                            Err(Error::Uncataloged(_)) => "-".into(),
                            Err(Error::Unstable { .. }) => "unstable".into(),
                            Err(Error::MissingInput(_)) => "needs sim".into(),
                            Err(e) => return Err(e),
                        };
                        print!("{cell:>13}");
                    }
                    println!();
                }
            }
        }
    }
    Ok(())
}
