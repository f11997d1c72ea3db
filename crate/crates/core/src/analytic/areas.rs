//! Conditional areas `A` and `K` and the second moments that use them.

use std::cell::RefCell;

use super::{
    blocking_stationary_probs, missing_delta_r2, replace_stationary_probs, AnalyticQuery, AnalyticResult, AreaMethod,
    ExternalInput, FormulaId, INNER_QUAD_TOL, QUAD_TOL,
};
use crate::age::Metric;
use crate::error::{Error, Result};
use crate::quad::{self, DensityLaw};
use crate::service::{ServiceFamily, ServiceModel};
use crate::sim::{check_stability, Discipline};

/// `E[Delta_R^2]` of M/GI/1/1 from the moments of the idle time `X ~ Exp(lambda)`
/// and the service time `S`, with update rate `1 / (E[X] + E[S])`.
pub fn classical_second_moment_blocking(service: ServiceModel, lambda: f64) -> Result<f64> {
    check_stability(Discipline::BlockingSingle, &service, lambda)?;
    let x1 = 1.0 / lambda;
    let x2 = 2.0 / (lambda * lambda);
    let x3 = 6.0 / (lambda * lambda * lambda);
    let s1 = service.moment(1)?;
    let s2 = service.moment(2)?;
    let s3 = service.moment(3)?;
    let num = x3 + s3 + 6.0 * x2 * s1 + 6.0 * x1 * s2 + 6.0 * x1 * s1 * s1 + 6.0 * s1 * s2;
    Ok(num / (3.0 * (x1 + s1)))
}

fn require_k2(k: u32) -> Result<()> {
    if k == 2 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "conditional areas are defined for k = 2 only, got k = {k}"
        )))
    }
}

/// `(1/lambda) int int_{s >= r} e^{-lambda r} (s - r)^2 f_S(s) f_eta(r) ds dr`.
fn area_quadrature<L: DensityLaw>(
    inner: &L,
    outer_residual: &ServiceModel,
    lambda: f64,
    prefactor: f64,
) -> Result<f64> {
    let residual = outer_residual.residual();
    let inner_err = RefCell::new(None);
    let value = quad::expect(
        &residual,
        0.0,
        |r| match quad::expect(inner, r, |s| (s - r) * (s - r), INNER_QUAD_TOL) {
            Ok(v) => (-lambda * r).exp() * v,
            Err(e) => {
                inner_err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        QUAD_TOL,
    )?;
    if let Some(e) = inner_err.into_inner() {
        return Err(e);
    }
    Ok(prefactor * value)
}

/// The area `A` of M/GI/1/1 for `k = 2`.
pub fn blocking_area_a(service: ServiceModel, lambda: f64, k: u32, method: AreaMethod) -> Result<AnalyticResult> {
    require_k2(k)?;
    check_stability(Discipline::BlockingSingle, &service, lambda)?;
    let query = AnalyticQuery::new(Discipline::BlockingSingle, service, lambda, Metric::Gamma, k);
    let l = lambda;
    let m = service.rate();
    let rho = l / m;
    let (value, id) = match (method, service.family()) {
        (AreaMethod::Printed, ServiceFamily::Exponential) => {
            (2.0 * m / (l.powi(3) * (l + 2.0 * m)), FormulaId::BlkExpAPrinted)
        }
        (AreaMethod::Printed, ServiceFamily::Deterministic) => (
            (m / l.powi(4)) * (rho * rho - 2.0 * rho + 2.0 - 2.0 * (-rho).exp()),
            FormulaId::BlkDetAPrinted,
        ),
        (AreaMethod::Quadrature, family) => {
            let id = match family {
                ServiceFamily::Exponential => FormulaId::BlkExpAQuadrature,
                ServiceFamily::Deterministic => FormulaId::BlkDetAQuadrature,
            };
            (area_quadrature(&service, &service, l, 1.0 / l)?, id)
        }
    };
    AnalyticResult::new(value, id, query)
}

/// `E[Gamma^2]` of M/GI/1/1, assembled from `E[Delta_R^2]` and `A`.
pub fn blocking_second_moment(service: ServiceModel, lambda: f64, method: AreaMethod) -> Result<AnalyticResult> {
    let query = AnalyticQuery::new(Discipline::BlockingSingle, service, lambda, Metric::Gamma, 2);
    let area = blocking_area_a(service, lambda, 2, method)?.value;
    let d2 = classical_second_moment_blocking(service, lambda)?;
    let l = lambda;
    let m = service.rate();
    let (value, id) = match service.family() {
        ServiceFamily::Exponential => {
            let id = match method {
                AreaMethod::Printed => FormulaId::BlkExpG2Printed,
                AreaMethod::Quadrature => FormulaId::BlkExpG2Quadrature,
            };
            ((d2 + l * area) * l / (l + m), id)
        }
        ServiceFamily::Deterministic => {
            let id = match method {
                AreaMethod::Printed => FormulaId::BlkDetG2Printed,
                AreaMethod::Quadrature => FormulaId::BlkDetG2Quadrature,
            };
            let (p_i, p_b) = blocking_stationary_probs(service, lambda)?;
            (det_assembly(d2, area, l, m, p_i, p_b), id)
        }
    };
    AnalyticResult::new(value, id, query)
}

/// Deterministic-service combination shared by M/D/1/1 and M/D/1/2*.
fn det_assembly(d2: f64, area: f64, l: f64, m: f64, p_i: f64, p_b: f64) -> f64 {
    let one_minus_e = -(-l / m).exp_m1();
    d2 * (one_minus_e * p_i + (1.0 - m * one_minus_e / l) * p_b) + l * area * p_b
}

/// Law of the system time `T` of a packet delivered by M/GI/1/2*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemTimeLaw {
    /// `f_T(t) = c1 e^{-mu t} - c2 e^{-(lambda + mu) t}` on `t >= 0`.
    TwoExponential { lambda: f64, mu: f64, c1: f64, c2: f64 },
    /// Atom `e^{-lambda/mu}` at `1/mu` plus `lambda e^{-lambda (t - 1/mu)}` on `[1/mu, 2/mu]`.
    AtomAndTruncatedExponential { lambda: f64, mu: f64 },
}

impl SystemTimeLaw {
    pub fn coefficients(&self) -> Option<(f64, f64)> {
        match *self {
            SystemTimeLaw::TwoExponential { c1, c2, .. } => Some((c1, c2)),
            SystemTimeLaw::AtomAndTruncatedExponential { .. } => None,
        }
    }

    /// Mass of the atom at `1/mu`; zero for exponential service.
    pub fn atom_mass(&self) -> f64 {
        match *self {
            SystemTimeLaw::TwoExponential { .. } => 0.0,
            SystemTimeLaw::AtomAndTruncatedExponential { lambda, mu } => (-lambda / mu).exp(),
        }
    }
}

impl DensityLaw for SystemTimeLaw {
    fn density(&self, t: f64) -> f64 {
        match *self {
            SystemTimeLaw::TwoExponential { lambda, mu, c1, c2 } if t >= 0.0 => {
                c1 * (-mu * t).exp() - c2 * (-(lambda + mu) * t).exp()
            }
            SystemTimeLaw::AtomAndTruncatedExponential { lambda, mu } if t >= 1.0 / mu && t <= 2.0 / mu => {
                lambda * (-lambda * (t - 1.0 / mu)).exp()
            }
            _ => 0.0,
        }
    }

    fn continuous_support(&self) -> Option<(f64, f64)> {
        match *self {
            SystemTimeLaw::TwoExponential { .. } => Some((0.0, f64::INFINITY)),
            SystemTimeLaw::AtomAndTruncatedExponential { mu, .. } => Some((1.0 / mu, 2.0 / mu)),
        }
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        match *self {
            SystemTimeLaw::TwoExponential { .. } => Vec::new(),
            SystemTimeLaw::AtomAndTruncatedExponential { mu, .. } => vec![(1.0 / mu, self.atom_mass())],
        }
    }

    fn decay_rate(&self) -> f64 {
        match *self {
            SystemTimeLaw::TwoExponential { mu, .. } => mu,
            SystemTimeLaw::AtomAndTruncatedExponential { lambda, .. } => lambda,
        }
    }
}

/// Printed `(c1, c2)` of the exponential-service system-time density:
/// `c1 = mu p_I (1 + mu/lambda) / D`, `c2 = (mu^3/lambda)(1 - p_I) / D`,
/// `D = p_I + (mu/(lambda+mu))(1 - p_I)`.
///
/// With these values `f_T` does not integrate to one (mass 1/2 at
/// `lambda = mu = 1`), so [`system_time_density`] does not use them.
pub fn printed_exponential_coefficients(service: ServiceModel, lambda: f64) -> Result<(f64, f64)> {
    if service.family() != ServiceFamily::Exponential {
        return Err(Error::Domain(
            "the two-exponential coefficients need exponential service".into(),
        ));
    }
    let (p_i, _) = replace_stationary_probs(service, lambda)?;
    let (l, m) = (lambda, service.rate());
    let d = p_i + (m / (l + m)) * (1.0 - p_i);
    Ok((m * p_i * (1.0 + m / l) / d, m.powi(3) / l * (1.0 - p_i) / d))
}

/// System-time law of a delivered packet under M/GI/1/2*.
///
/// For exponential service a delivered packet either found the server idle
/// (probability `p_I / D`, then `T ~ Exp(mu)`) or waited in the buffer until
/// the residual service ended before the next arrival (then
/// `T ~ Exp(lambda + mu) + Exp(mu)`). The coefficients follow from that
/// mixture: `c2 = (mu^2/lambda)(1 - p_I)/D`, `c1 = mu p_I / D + c2`.
pub fn system_time_density(discipline: Discipline, service: ServiceModel, lambda: f64) -> Result<SystemTimeLaw> {
    if discipline != Discipline::ReplaceBuffer {
        return Err(Error::Domain(format!(
            "system-time density is provided for replace only, not {discipline}"
        )));
    }
    let (p_i, _) = replace_stationary_probs(service, lambda)?;
    let (l, m) = (lambda, service.rate());
    Ok(match service.family() {
        ServiceFamily::Exponential => {
            let d = p_i + (m / (l + m)) * (1.0 - p_i);
            let c2 = m * m / l * (1.0 - p_i) / d;
            SystemTimeLaw::TwoExponential {
                lambda: l,
                mu: m,
                c1: m * p_i / d + c2,
                c2,
            }
        }
        ServiceFamily::Deterministic => SystemTimeLaw::AtomAndTruncatedExponential { lambda: l, mu: m },
    })
}

/// The area `K` of M/GI/1/2* for `k = 2`.
pub fn replace_area_k(service: ServiceModel, lambda: f64, k: u32, method: AreaMethod) -> Result<AnalyticResult> {
    require_k2(k)?;
    check_stability(Discipline::ReplaceBuffer, &service, lambda)?;
    let query = AnalyticQuery::new(Discipline::ReplaceBuffer, service, lambda, Metric::Gamma, k);
    let l = lambda;
    let m = service.rate();
    let (value, id) = match (method, service.family()) {
        (AreaMethod::Printed, ServiceFamily::Exponential) => {
            let (c1, c2) = printed_exponential_coefficients(service, lambda)?;
            let k1 = 2.0 * c1 / ((l + m) * m * m * (l + 2.0 * m));
            let k2 = c2 * m / ((l + m) * (l + m).powi(3) * (l + m));
            (k1 - k2, FormulaId::RepExpKPrinted)
        }
        (AreaMethod::Printed, ServiceFamily::Deterministic) => {
            let rho = l / m;
            let e = (-rho).exp();
            let k1 = ((1.0 - e) * e * m / l.powi(4)) * (rho * rho - 2.0 * rho + 2.0 - 2.0 * e);
            let k2 = ((1.0 - e) * m / l.powi(5))
                * (2.0 + rho * rho - e * (2.0 + 4.0 * rho * rho) + e * e * (rho * rho + 2.0));
            (k1 + k2, FormulaId::RepDetKPrinted)
        }
        (AreaMethod::Quadrature, family) => {
            let law = system_time_density(Discipline::ReplaceBuffer, service, lambda)?;
            let prefactor = (1.0 - service.mgf(l)?) / l;
            let id = match family {
                ServiceFamily::Exponential => FormulaId::RepExpKQuadrature,
                ServiceFamily::Deterministic => FormulaId::RepDetKQuadrature,
            };
            (area_quadrature(&law, &service, l, prefactor)?, id)
        }
    };
    AnalyticResult::new(value, id, query)
}

/// `E[Gamma^2]` of M/GI/1/2* from a supplied `E[Delta_R^2]` and `K`.
pub fn replace_second_moment(
    service: ServiceModel,
    lambda: f64,
    delta_r2: Option<f64>,
    method: AreaMethod,
) -> Result<AnalyticResult> {
    let d2 = delta_r2.ok_or_else(missing_delta_r2)?;
    if !(d2.is_finite() && d2 > 0.0) {
        return Err(Error::Domain(format!("E[Delta_R^2] must be positive, got {d2}")));
    }
    let area = replace_area_k(service, lambda, 2, method)?.value;
    let query = AnalyticQuery::new(Discipline::ReplaceBuffer, service, lambda, Metric::Gamma, 2);
    let l = lambda;
    let m = service.rate();
    let (value, id) = match service.family() {
        ServiceFamily::Exponential => {
            let id = match method {
                AreaMethod::Printed => FormulaId::RepExpG2Printed,
                AreaMethod::Quadrature => FormulaId::RepExpG2Quadrature,
            };
            (assemble_replace_exponential(d2, area, l, m), id)
        }
        ServiceFamily::Deterministic => {
            let id = match method {
                AreaMethod::Printed => FormulaId::RepDetG2Printed,
                AreaMethod::Quadrature => FormulaId::RepDetG2Quadrature,
            };
            let (p_i, p_b) = replace_stationary_probs(service, lambda)?;
            (det_assembly(d2, area, l, m, p_i, p_b), id)
        }
    };
    let mut result = AnalyticResult::new(value, id, query)?;
    result.external_inputs.push(ExternalInput {
        name: "E[Delta_R^2]",
        value: d2,
        source: "caller".into(),
    });
    Ok(result)
}

/// `(E[Delta_R^2] + lambda K) lambda / (lambda + mu)`.
pub(crate) fn assemble_replace_exponential(d2: f64, area: f64, lambda: f64, mu: f64) -> f64 {
    (d2 + lambda * area) * lambda / (lambda + mu)
}
