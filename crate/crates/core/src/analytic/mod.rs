//! Closed-form moments of relative and classical age.
//!
//! Every value carries a [`FormulaId`] from a closed catalog. Combinations
//! without a closed form fail with [`Error::Uncataloged`] instead of being
//! extrapolated. The conditional-area terms of the second moments (`A` for
//! M/GI/1/1, `K` for M/GI/1/2*) exist in two variants: the printed closed
//! forms, kept verbatim, and adaptive quadrature of their defining double
//! integrals. Neither is assumed correct; the simulator arbitrates.

mod areas;
mod closed_form;

use std::fmt;
use std::str::FromStr;

pub use areas::{
    blocking_area_a, blocking_second_moment, classical_second_moment_blocking, printed_exponential_coefficients,
    replace_area_k, replace_second_moment, system_time_density, SystemTimeLaw,
};
pub use closed_form::{
    blocking_stationary_probs, classical_aoi_moment, preemptive_second_moment_from, raoi_first_moment,
    raoi_second_moment_preemptive, replace_stationary_probs,
};

use crate::age::Metric;
use crate::error::{Error, Result};
use crate::service::ServiceModel;
use crate::sim::Discipline;

/// Absolute tolerance of the outer quadrature axis.
pub const QUAD_TOL: f64 = 1e-10;
/// Absolute tolerance of the inner quadrature axis.
pub const INNER_QUAD_TOL: f64 = 1e-12;

/// How the conditional-area terms `A` and `K` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AreaMethod {
    /// Closed forms exactly as printed, kept for comparison.
    Printed,
    /// Adaptive quadrature of the defining double integral.
    Quadrature,
}

impl AreaMethod {
    pub fn tag(self) -> &'static str {
        match self {
            AreaMethod::Printed => "printed",
            AreaMethod::Quadrature => "quadrature",
        }
    }
}

impl FromStr for AreaMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "printed" => Ok(AreaMethod::Printed),
            "quadrature" | "quad" => Ok(AreaMethod::Quadrature),
            other => Err(Error::Parse(format!("unknown area method `{other}`"))),
        }
    }
}

macro_rules! formula_catalog {
    ($($variant:ident => $id:literal,)+) => {
        /// Registered formula identifiers.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum FormulaId {
            $($variant,)+
        }

        impl FormulaId {
            pub const ALL: &'static [FormulaId] = &[$(FormulaId::$variant,)+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(FormulaId::$variant => $id,)+
                }
            }
        }
    };
}

formula_catalog! {
    PrmpExpG1 => "prmp-exp-G1",
    PrmpDetG1 => "prmp-det-G1",
    BlkExpG1 => "blk-exp-G1",
    BlkDetG1 => "blk-det-G1",
    RepExpG1 => "rep-exp-G1",
    RepDetG1 => "rep-det-G1",
    FcfsExpG1 => "fcfs-exp-G1",
    PrmpExpD1 => "prmp-exp-D1",
    PrmpDetD1 => "prmp-det-D1",
    BlkExpD1 => "blk-exp-D1",
    BlkDetD1 => "blk-det-D1",
    RepExpD1 => "rep-exp-D1",
    RepDetD1 => "rep-det-D1",
    FcfsExpD1 => "fcfs-exp-D1",
    PrmpExpD2 => "prmp-exp-D2",
    PrmpDetD2 => "prmp-det-D2",
    BlkExpD2 => "blk-exp-D2",
    BlkDetD2 => "blk-det-D2",
    PrmpExpG2 => "prmp-exp-G2",
    PrmpDetG2 => "prmp-det-G2",
    PrmpG2FromDeltaR2 => "prmp-G2-from-D2",
    BlkExpG2Printed => "blk-exp-G2-printed",
    BlkExpG2Quadrature => "blk-exp-G2-quadrature",
    BlkDetG2Printed => "blk-det-G2-printed",
    BlkDetG2Quadrature => "blk-det-G2-quadrature",
    RepExpG2Printed => "rep-exp-G2-printed",
    RepExpG2Quadrature => "rep-exp-G2-quadrature",
    RepDetG2Printed => "rep-det-G2-printed",
    RepDetG2Quadrature => "rep-det-G2-quadrature",
    BlkExpAPrinted => "blk-exp-A-printed",
    BlkExpAQuadrature => "blk-exp-A-quadrature",
    BlkDetAPrinted => "blk-det-A-printed",
    BlkDetAQuadrature => "blk-det-A-quadrature",
    RepExpKPrinted => "rep-exp-K-printed",
    RepExpKQuadrature => "rep-exp-K-quadrature",
    RepDetKPrinted => "rep-det-K-printed",
    RepDetKQuadrature => "rep-det-K-quadrature",
}

impl FormulaId {
    /// Printed area variants are reported but never fail a verification.
    pub fn is_authoritative(self) -> bool {
        !self.as_str().ends_with("-printed")
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormulaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FormulaId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unregistered formula id `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticQuery {
    pub discipline: Discipline,
    pub service: ServiceModel,
    pub lambda: f64,
    pub metric: Metric,
    pub k: u32,
}

impl AnalyticQuery {
    pub fn new(discipline: Discipline, service: ServiceModel, lambda: f64, metric: Metric, k: u32) -> Self {
        AnalyticQuery {
            discipline,
            service,
            lambda,
            metric,
            k,
        }
    }

    pub fn mu(&self) -> f64 {
        self.service.rate()
    }
}

/// A named external input that entered a result.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalInput {
    pub name: &'static str,
    pub value: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticResult {
    pub value: f64,
    pub formula_id: FormulaId,
    pub query: AnalyticQuery,
    pub external_inputs: Vec<ExternalInput>,
}

impl AnalyticResult {
    pub(crate) fn new(value: f64, formula_id: FormulaId, query: AnalyticQuery) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Overflow(format!(
                "{formula_id} is not finite at lambda = {}",
                query.lambda
            )));
        }
        Ok(AnalyticResult {
            value,
            formula_id,
            query,
            external_inputs: Vec::new(),
        })
    }
}

/// Options for [`evaluate`].
#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// Area method for M/GI/1/1 and M/GI/1/2* second moments (default quadrature).
    pub area_method: Option<AreaMethod>,
    /// `E[Delta_R^2]` for M/GI/1/2* second moments, with a provenance note.
    pub delta_r2: Option<(f64, String)>,
}

/// Area variants that apply to a query; empty when the formula has a single form.
pub fn area_variants(query: &AnalyticQuery) -> Vec<AreaMethod> {
    match (query.discipline, query.metric, query.k) {
        (Discipline::BlockingSingle | Discipline::ReplaceBuffer, Metric::Gamma, 2) => {
            vec![AreaMethod::Printed, AreaMethod::Quadrature]
        }
        _ => Vec::new(),
    }
}

/// Whether the query needs a supplied `E[Delta_R^2]`.
pub fn needs_delta_r2(query: &AnalyticQuery) -> bool {
    query.discipline == Discipline::ReplaceBuffer && query.metric == Metric::Gamma && query.k == 2
}

/// Dispatches a query to the catalog.
pub fn evaluate(query: &AnalyticQuery, options: &EvalOptions) -> Result<AnalyticResult> {
    let method = options.area_method.unwrap_or(AreaMethod::Quadrature);
    match (query.metric, query.k) {
        (Metric::Gamma, 1) => raoi_first_moment(query),
        (Metric::DeltaR, 1 | 2) => classical_aoi_moment(query.discipline, query.service, query.lambda, query.k),
        (Metric::Gamma, 2) => match query.discipline {
            Discipline::PreemptiveDrop => raoi_second_moment_preemptive(query.service, query.lambda),
            Discipline::BlockingSingle => blocking_second_moment(query.service, query.lambda, method),
            Discipline::ReplaceBuffer => {
                let (value, source) = options.delta_r2.clone().ok_or_else(missing_delta_r2)?;
                let mut result = replace_second_moment(query.service, query.lambda, Some(value), method)?;
                if let Some(input) = result.external_inputs.first_mut() {
                    input.source = source;
                }
                Ok(result)
            }
            Discipline::FcfsUnbounded => Err(uncataloged(query)),
        },
        _ => Err(uncataloged(query)),
    }
}

pub(crate) fn missing_delta_r2() -> Error {
    Error::MissingInput(
        "E[Delta_R^2] for M/GI/1/2* has no closed form here; run the simulation estimator \
         (`raoi simulate ... --metric deltaR --k 2`) or pass --delta-r2"
            .into(),
    )
}

pub(crate) fn uncataloged(query: &AnalyticQuery) -> Error {
    Error::Uncataloged(format!(
        "no closed form for {} of order {} under {} with {} service; use the simulator",
        query.metric,
        query.k,
        query.discipline,
        query.service.family()
    ))
}
