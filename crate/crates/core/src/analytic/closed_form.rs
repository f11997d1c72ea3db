//! First moments, classical age moments, stationary probabilities and the
//! preemptive second moment.

use super::{uncataloged, AnalyticQuery, AnalyticResult, ExternalInput, FormulaId};
use crate::age::Metric;
use crate::error::{Error, Result};
use crate::service::{ServiceFamily, ServiceModel};
use crate::sim::{check_stability, Discipline};

use Discipline::*;
use ServiceFamily::*;

/// `E[Gamma]` in closed form.
pub fn raoi_first_moment(query: &AnalyticQuery) -> Result<AnalyticResult> {
    if query.metric != Metric::Gamma || query.k != 1 {
        return Err(Error::Domain("raoi_first_moment answers E[Gamma] (k = 1) only".into()));
    }
    check_stability(query.discipline, &query.service, query.lambda)?;
    let l = query.lambda;
    let m = query.mu();
    let rho = l / m;
    let (value, id) = match (query.discipline, query.service.family()) {
        (PreemptiveDrop, Exponential) => (1.0 / m, FormulaId::PrmpExpG1),
        (PreemptiveDrop, Deterministic) => (rho.exp_m1() / l, FormulaId::PrmpDetG1),
        (BlockingSingle, Exponential) => ((2.0 * l * l + l * m) / (l * m * (l + m)), FormulaId::BlkExpG1),
        (BlockingSingle, Deterministic) => (
            (3.0 * l * l + 2.0 * l * m) / (2.0 * l * m * (l + m)),
            FormulaId::BlkDetG1,
        ),
        (ReplaceBuffer, Exponential) => (
            2.0 / m + l / (l + m).powi(2) + 1.0 / (l + m) - 2.0 * (l + m) / (l * l + l * m + m * m),
            FormulaId::RepExpG1,
        ),
        (ReplaceBuffer, Deterministic) => {
            // E[Delta_R] - 1/lambda with the 1/lambda cancelled by hand
            let e = (-rho).exp();
            (
                1.5 / m - (l + m) * e / (l * m) + (l + 2.0 * m) * e / (2.0 * l * (m * e + l)),
                FormulaId::RepDetG1,
            )
        }
        (FcfsUnbounded, Exponential) => (1.0 / m + rho * rho / (m * (1.0 - rho)), FormulaId::FcfsExpG1),
        (FcfsUnbounded, Deterministic) => return Err(uncataloged(query)),
    };
    AnalyticResult::new(value, id, *query)
}

/// `E[Delta_R^k]` of classical age, `k` in {1, 2}, where a closed form exists.
pub fn classical_aoi_moment(
    discipline: Discipline,
    service: ServiceModel,
    lambda: f64,
    k: u32,
) -> Result<AnalyticResult> {
    let query = AnalyticQuery::new(discipline, service, lambda, Metric::DeltaR, k);
    check_stability(discipline, &service, lambda)?;
    let l = lambda;
    let m = service.rate();
    let rho = l / m;
    let (value, id) = match (k, discipline, service.family()) {
        (1, PreemptiveDrop, Exponential) => ((l + m) / (l * m), FormulaId::PrmpExpD1),
        (1, PreemptiveDrop, Deterministic) => (rho.exp() / l, FormulaId::PrmpDetD1),
        (1, BlockingSingle, Exponential) => (
            (2.0 * l * l + 2.0 * l * m + m * m) / (l * m * (l + m)),
            FormulaId::BlkExpD1,
        ),
        (1, BlockingSingle, Deterministic) => (
            (3.0 * l * l + 4.0 * l * m + 2.0 * m * m) / (2.0 * l * m * (l + m)),
            FormulaId::BlkDetD1,
        ),
        (1, ReplaceBuffer, Exponential) => (
            1.0 / l + 2.0 / m + l / (l + m).powi(2) + 1.0 / (l + m) - 2.0 * (l + m) / (l * l + l * m + m * m),
            FormulaId::RepExpD1,
        ),
        (1, ReplaceBuffer, Deterministic) => {
            // (1/mu)(3/2 + (mu e^rho - l - mu)/(l e^rho) + (l + 2mu)mu / (2l(mu + l e^rho))),
            // multiplied through by e^-rho so large rho does not overflow
            let e = (-rho).exp();
            (
                (1.5 + (m - (l + m) * e) / l + (l + 2.0 * m) * m * e / (2.0 * l * (m * e + l))) / m,
                FormulaId::RepDetD1,
            )
        }
        (1, FcfsUnbounded, Exponential) => ((1.0 + 1.0 / rho + rho * rho / (1.0 - rho)) / m, FormulaId::FcfsExpD1),
        (2, PreemptiveDrop, Exponential) => (2.0 * (l * l + l * m + m * m) / (l * l * m * m), FormulaId::PrmpExpD2),
        (2, PreemptiveDrop, Deterministic) => {
            let g = rho.exp();
            (2.0 * (m * g - l) * g / (l * l * m), FormulaId::PrmpDetD2)
        }
        (2, BlockingSingle, _) => return classical_second_moment_blocking_result(service, lambda),
        _ => return Err(uncataloged(&query)),
    };
    AnalyticResult::new(value, id, query)
}

fn classical_second_moment_blocking_result(service: ServiceModel, lambda: f64) -> Result<AnalyticResult> {
    let query = AnalyticQuery::new(BlockingSingle, service, lambda, Metric::DeltaR, 2);
    let id = match service.family() {
        Exponential => FormulaId::BlkExpD2,
        Deterministic => FormulaId::BlkDetD2,
    };
    AnalyticResult::new(super::classical_second_moment_blocking(service, lambda)?, id, query)
}

/// `(p_I, p_B)` seen by arrivals to M/GI/1/1: `p_I = 1 / (1 + lambda E[S])`.
pub fn blocking_stationary_probs(service: ServiceModel, lambda: f64) -> Result<(f64, f64)> {
    check_stability(BlockingSingle, &service, lambda)?;
    let load = lambda * service.mean();
    Ok((1.0 / (1.0 + load), load / (1.0 + load)))
}

/// `(p_I, p_B)` seen by arrivals to M/GI/1/2*:
/// `p_I = MGF(lambda) / (MGF(lambda) + lambda E[S])`.
pub fn replace_stationary_probs(service: ServiceModel, lambda: f64) -> Result<(f64, f64)> {
    check_stability(ReplaceBuffer, &service, lambda)?;
    let g = service.mgf(lambda)?;
    let load = lambda * service.mean();
    Ok((g / (g + load), load / (g + load)))
}

/// `E[Gamma^2]` under preemption in closed form.
pub fn raoi_second_moment_preemptive(service: ServiceModel, lambda: f64) -> Result<AnalyticResult> {
    check_stability(PreemptiveDrop, &service, lambda)?;
    let query = AnalyticQuery::new(PreemptiveDrop, service, lambda, Metric::Gamma, 2);
    let l = lambda;
    let m = service.rate();
    let (value, id) = match service.family() {
        Exponential => (
            2.0 * (l * l + l * m + m * m) / (l * m * m * (l + m)),
            FormulaId::PrmpExpG2,
        ),
        Deterministic => {
            let g = (l / m).exp();
            (2.0 * (m * g - l) * (g - 1.0) / (l * l * m), FormulaId::PrmpDetG2)
        }
    };
    AnalyticResult::new(value, id, query)
}

/// `E[Gamma^k] = E[Delta_R^k] (1 - MGF(lambda))` under preemption, for an
/// externally supplied `E[Delta_R^k]`.
pub fn preemptive_second_moment_from(
    service: ServiceModel,
    lambda: f64,
    delta_r_moment: f64,
) -> Result<AnalyticResult> {
    check_stability(PreemptiveDrop, &service, lambda)?;
    if !(delta_r_moment.is_finite() && delta_r_moment > 0.0) {
        return Err(Error::Domain(format!(
            "E[Delta_R^k] must be positive, got {delta_r_moment}"
        )));
    }
    let query = AnalyticQuery::new(PreemptiveDrop, service, lambda, Metric::Gamma, 2);
    let mut result = AnalyticResult::new(
        delta_r_moment * (1.0 - service.mgf(lambda)?),
        FormulaId::PrmpG2FromDeltaR2,
        query,
    )?;
    result.external_inputs.push(ExternalInput {
        name: "E[Delta_R^2]",
        value: delta_r_moment,
        source: "caller".into(),
    });
    Ok(result)
}
