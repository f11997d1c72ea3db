//! Compares the two area constructions behind the M/GI/1/1 and M/GI/1/2*
//! second moments of relative age with a direct simulation.
//!
//! The replace-buffer assembly needs `E[Delta_R^2]`, which has no closed form;
//! it is taken from the same simulation run.
//!
//! ```sh
//! cargo run --release --example area_arbitration -- 2000000
//! ```

use raoi::analytic::{self, EvalOptions};
use raoi::bench::Tolerance;
use raoi::{AnalyticQuery, AreaMethod, Discipline, Metric, ServiceFamily, ServiceModel, SimConfig};

fn main() -> raoi::Result<()> {
    let packets: usize = std::env::args()
        .nth(1)
        .map(|a| a.parse().map_err(|e| raoi::Error::Parse(format!("packets: {e}"))))
        .transpose()?
        .unwrap_or(1_000_000);
    let tolerance = Tolerance {
        rel_tol: 0.02,
        z_max: 5.0,
    };
    for d in [Discipline::BlockingSingle, Discipline::ReplaceBuffer] {
        for family in ServiceFamily::ALL {
            for lambda in [0.5, 2.0] {
                let service = ServiceModel::new(family, 1.0)?;
                let out = raoi::sim::run(&SimConfig::new(d, service, lambda, packets, 17))?;
                let sim = out.moment(Metric::Gamma, 2).expect("always estimated");
                let delta_r2 = out.moment(Metric::DeltaR, 2).expect("always estimated").value;
                println!(
                    "{d} {family} lambda={lambda}: simulated E[gamma^2] = {:.4} +/- {:.4}",
                    sim.value, sim.std_error
                );
                let query = AnalyticQuery::new(d, service, lambda, Metric::Gamma, 2);
                for method in [AreaMethod::Printed, AreaMethod::Quadrature] {
                    let options = EvalOptions {
                        area_method: Some(method),
                        delta_r2: analytic::needs_delta_r2(&query).then(|| (delta_r2, "same run".to_string())),
                    };
                    let r = analytic::evaluate(&query, &options)?;
                    let (z, verdict) = tolerance.judge(r.value, sim.value, sim.std_error);
                    println!(
                        "  {:<28} {:>9.4}  rel {:+.2}%  z {:+6.1}  {verdict:?}",
                        r.formula_id.to_string(),
                        r.value,
                        100.0 * (r.value - sim.value) / sim.value,
                        z
                    );
                }
            }
        }
    }
    Ok(())
}
