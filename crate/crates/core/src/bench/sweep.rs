//! Lambda sweeps pairing catalog values with simulation estimates.

use rayon::prelude::*;

use super::rows::{Row, Verdict};
use crate::age::Metric;
use crate::analytic::{self, AnalyticQuery, AreaMethod, EvalOptions};
use crate::error::{Error, Result};
use crate::service::{ServiceFamily, ServiceModel};
use crate::sim::{self, Discipline, SimConfig};

pub const DEFAULT_GRID_LOW: f64 = 0.05;
pub const DEFAULT_GRID_HIGH: f64 = 50.0;
pub const DEFAULT_GRID_POINTS: usize = 40;
pub const DEFAULT_PACKETS: usize = 1_000_000;

/// Match rule: `|analytic - sim| <= max(rel_tol |analytic|, z_max stderr)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel_tol: f64,
    pub z_max: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel_tol: 0.01,
            z_max: 5.0,
        }
    }
}

impl Tolerance {
    /// Returns the z-score and the verdict.
    pub fn judge(&self, analytic: f64, sim: f64, stderr: f64) -> (f64, Verdict) {
        let gap = (analytic - sim).abs();
        let z = (sim - analytic) / stderr;
        let allowed = (self.rel_tol * analytic.abs()).max(self.z_max * stderr);
        let verdict = if gap <= allowed {
            Verdict::Match
        } else {
            Verdict::Discrepant
        };
        (z, verdict)
    }
}

/// `n` log-spaced points from `low` to `high` inclusive.
pub fn log_grid(low: f64, high: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![low],
        _ => {
            let step = (high / low).ln() / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        high
                    } else {
                        low * (step * i as f64).exp()
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub lambdas: Vec<f64>,
    pub mu: f64,
    pub disciplines: Vec<Discipline>,
    pub families: Vec<ServiceFamily>,
    /// `(metric, k)` pairs reported at each point.
    pub quantities: Vec<(Metric, u32)>,
    /// Packets per simulation; zero skips simulation.
    pub n_packets: usize,
    /// The simulation at grid index `i` uses seed `base_seed + i`.
    pub base_seed: u64,
    pub warmup: Option<usize>,
    /// Fixed `E[Delta_R^2]` for replace second moments instead of the
    /// same-run simulation estimate.
    pub delta_r2: Option<f64>,
    /// Free-text description of the grid, written into the CSV header.
    pub grid_note: String,
}

impl SweepSpec {
    /// Default grid, `mu = 1`, every discipline and family, first moment of `Gamma`.
    pub fn new() -> Self {
        SweepSpec {
            lambdas: log_grid(DEFAULT_GRID_LOW, DEFAULT_GRID_HIGH, DEFAULT_GRID_POINTS),
            mu: 1.0,
            disciplines: Discipline::ALL.to_vec(),
            families: ServiceFamily::ALL.to_vec(),
            quantities: vec![(Metric::Gamma, 1)],
            n_packets: DEFAULT_PACKETS,
            base_seed: 1,
            warmup: None,
            delta_r2: None,
            grid_note: format!(
                "log-spaced lambda grid {DEFAULT_GRID_LOW}..{DEFAULT_GRID_HIGH}, {DEFAULT_GRID_POINTS} points"
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            return Err(Error::Domain("empty lambda grid".into()));
        }
        if let Some(bad) = self.lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::Domain(format!("grid value {bad} is not a positive rate")));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::Domain(format!("mu must be positive, got {}", self.mu)));
        }
        if self.disciplines.is_empty() || self.families.is_empty() || self.quantities.is_empty() {
            return Err(Error::Domain(
                "sweep needs at least one discipline, family and quantity".into(),
            ));
        }
        if let Some((m, k)) = self
            .quantities
            .iter()
            .find(|(m, k)| *m == Metric::DeltaT || !(1..=2).contains(k))
        {
            return Err(Error::Domain(format!(
                "unsupported quantity {m}^{k}; use gamma or deltaR with k in 1..=2"
            )));
        }
        Ok(())
    }

    /// Comment lines recorded at the top of the CSV.
    pub fn header_comments(&self) -> Vec<String> {
        vec![
            format!("grid: {}", self.grid_note),
            format!(
                "mu={} n_packets={} base_seed={} warmup={}",
                self.mu,
                self.n_packets,
                self.base_seed,
                self.warmup.map_or_else(|| "default".to_string(), |w| w.to_string())
            ),
        ]
    }
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec::new()
    }
}

/// Runs every grid point; rows come back in grid order whatever the
/// parallel schedule.
pub fn run_sweep(spec: &SweepSpec, tolerance: &Tolerance) -> Result<Vec<Row>> {
    spec.validate()?;
    let mut jobs = Vec::new();
    let mut skipped = 0;
    for (i, &lambda) in spec.lambdas.iter().enumerate() {
        for &discipline in &spec.disciplines {
            for &family in &spec.families {
                if discipline.requires_stability() && lambda >= spec.mu {
                    log::debug!(
                        "skipping {discipline} {family} at lambda = {lambda}: unstable for mu = {}",
                        spec.mu
                    );
                    skipped += 1;
                    continue;
                }
                jobs.push((i, lambda, discipline, family));
            }
        }
    }
    if skipped > 0 {
        log::warn!(
            "skipped {skipped} grid points where the queue is unstable (lambda >= mu = {})",
            spec.mu
        );
    }
    let chunks: Vec<Vec<Row>> = jobs
        .into_par_iter()
        .map(|(i, lambda, discipline, family)| point_rows(spec, i, lambda, discipline, family, tolerance))
        .collect::<Result<_>>()?;
    let rows: Vec<Row> = chunks.into_iter().flatten().collect();
    let blank = rows
        .iter()
        .filter(|r| r.analytic_value.is_none() && r.verdict != Some(Verdict::Uncataloged))
        .count();
    if blank > 0 {
        log::warn!(
            "{blank} rows have no analytic value (missing external input or overflow); RUST_LOG=debug lists them"
        );
    }
    Ok(rows)
}

fn point_rows(
    spec: &SweepSpec,
    index: usize,
    lambda: f64,
    discipline: Discipline,
    family: ServiceFamily,
    tolerance: &Tolerance,
) -> Result<Vec<Row>> {
    let service = ServiceModel::new(family, spec.mu)?;
    let seed = spec.base_seed.wrapping_add(index as u64);
    let sim = if spec.n_packets > 0 {
        let mut config = SimConfig::new(discipline, service, lambda, spec.n_packets, seed);
        if let Some(w) = spec.warmup {
            config = config.with_warmup(w);
        }
        let out = sim::run(&config)?;
        log::info!("simulated {discipline} {family} lambda = {lambda} with seed {seed}");
        Some(out.moments)
    } else {
        None
    };
    let sim_moment = |metric: Metric, k: u32| {
        sim.as_ref()
            .and_then(|ms| ms.iter().find(|m| m.metric == metric && m.k == k))
            .map(|m| (m.value, m.std_error))
    };
    let delta_r2 = match (spec.delta_r2, sim_moment(Metric::DeltaR, 2)) {
        (Some(v), _) => Some((v, "fixed".to_string())),
        (None, Some((v, _))) => Some((v, format!("simulation seed {seed}"))),
        (None, None) => None,
    };

    let mut rows = Vec::new();
    for &(metric, k) in &spec.quantities {
        let simulated = sim_moment(metric, k);
        let base = Row {
            discipline,
            service: family,
            lambda,
            mu: spec.mu,
            metric,
            k,
            analytic_value: None,
            formula_id: None,
            sim_value: simulated.map(|s| s.0),
            sim_stderr: simulated.map(|s| s.1),
            n_packets: simulated.map(|_| spec.n_packets),
            seed: simulated.map(|_| seed),
            z_score: None,
            verdict: None,
        };
        let query = AnalyticQuery::new(discipline, service, lambda, metric, k);
        let methods: Vec<Option<AreaMethod>> = match analytic::area_variants(&query) {
            v if v.is_empty() => vec![None],
            v => v.into_iter().map(Some).collect(),
        };
        for method in methods {
            let options = EvalOptions {
                area_method: method,
                delta_r2: delta_r2.clone(),
            };
            let mut row = base.clone();
            match analytic::evaluate(&query, &options) {
                Ok(result) => {
                    row.analytic_value = Some(result.value);
                    row.formula_id = Some(result.formula_id);
                    if let Some((value, se)) = simulated {
                        let (z, verdict) = tolerance.judge(result.value, value, se);
                        row.z_score = Some(z);
                        row.verdict = Some(verdict);
                    }
                }
                Err(Error::Uncataloged(_)) => {
                    row.verdict = Some(Verdict::Uncataloged);
                    rows.push(row);
                    break;
                }
                Err(e @ (Error::MissingInput(_) | Error::Overflow(_))) => {
                    log::debug!("{discipline} {family} lambda = {lambda} {metric}^{k}: {e}");
                }
                Err(e) => return Err(e),
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_are_exact() {
        let g = log_grid(0.05, 50.0, 40);
        assert_eq!(g.len(), 40);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[39], 50.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(log_grid(1.0, 2.0, 0).is_empty());
    }

    #[test]
    fn judge_uses_the_looser_bound() {
        let t = Tolerance::default();
        assert_eq!(t.judge(1.0, 1.009, 0.0001).1, Verdict::Match);
        assert_eq!(t.judge(1.0, 1.04, 0.01).1, Verdict::Match);
        assert_eq!(t.judge(1.0, 1.06, 0.01).1, Verdict::Discrepant);
        let (z, _) = t.judge(2.0, 2.5, 0.25);
        assert_eq!(z, 2.0);
    }

    #[test]
    fn analytic_only_sweep_skips_unstable_fcfs() {
        let spec = SweepSpec {
            lambdas: vec![0.5, 2.0],
            n_packets: 0,
            ..SweepSpec::new()
        };
        let rows = run_sweep(&spec, &Tolerance::default()).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 2 + 2);
        assert!(rows.iter().all(|r| r.sim_value.is_none()));
        let fcfs_det = rows
            .iter()
            .find(|r| r.discipline == Discipline::FcfsUnbounded && r.service == ServiceFamily::Deterministic)
            .unwrap();
        assert_eq!(fcfs_det.verdict, Some(Verdict::Uncataloged));
        assert!(rows
            .iter()
            .all(|r| r.discipline != Discipline::FcfsUnbounded || r.lambda < 1.0));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let spec = SweepSpec {
            lambdas: vec![],
            ..SweepSpec::new()
        };
        assert!(matches!(run_sweep(&spec, &Tolerance::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn second_moment_rows_list_both_area_variants() {
        let spec = SweepSpec {
            lambdas: vec![1.0],
            disciplines: vec![Discipline::BlockingSingle, Discipline::ReplaceBuffer],
            families: vec![ServiceFamily::Exponential],
            quantities: vec![(Metric::Gamma, 2)],
            n_packets: 20_000,
            ..SweepSpec::new()
        };
        let rows = run_sweep(&spec, &Tolerance::default()).unwrap();
        let ids: Vec<String> = rows.iter().map(|r| r.formula_id.unwrap().to_string()).collect();
        assert_eq!(
            ids,
            [
                "blk-exp-G2-printed",
                "blk-exp-G2-quadrature",
                "rep-exp-G2-printed",
                "rep-exp-G2-quadrature"
            ]
        );
        assert!(rows.iter().all(|r| r.verdict.is_some() && r.sim_value.is_some()));
    }
}
