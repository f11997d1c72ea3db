//! Analytic-versus-simulation verification with per-row verdicts.

use std::fmt::Write as _;

use super::rows::{Row, Verdict};
use super::sweep::{run_sweep, SweepSpec, Tolerance};
use crate::age::Metric;
use crate::error::Result;
use crate::service::ServiceFamily;
use crate::sim::Discipline;

/// Arrival rates of the default verification suite.
pub const DEFAULT_SUITE_LAMBDAS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 10.0];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerdictCounts {
    pub matched: usize,
    pub discrepant: usize,
    pub uncataloged: usize,
    /// Discrepant rows whose formula is authoritative.
    pub fatal: usize,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub rows: Vec<Row>,
    pub tolerance: Tolerance,
}

impl VerificationReport {
    pub fn counts(&self) -> VerdictCounts {
        let mut c = VerdictCounts::default();
        for row in &self.rows {
            match row.verdict {
                Some(Verdict::Match) => c.matched += 1,
                Some(Verdict::Discrepant) => c.discrepant += 1,
                Some(Verdict::Uncataloged) => c.uncataloged += 1,
                None => {}
            }
            c.fatal += usize::from(row.is_fatal());
        }
        c
    }

    pub fn passed(&self) -> bool {
        self.counts().fatal == 0
    }

    /// 0 when no authoritative formula is discrepant, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// One line per row plus a summary line.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let verdict = match r.verdict {
                Some(Verdict::Match) => "match",
                Some(Verdict::Discrepant) if r.is_authoritative() => "DISCREPANT",
                Some(Verdict::Discrepant) => "discrepant (printed, non-fatal)",
                Some(Verdict::Uncataloged) => "not-in-paper",
                None => "-",
            };
            let analytic = match (r.analytic_value, r.formula_id) {
                (Some(v), Some(id)) => format!("{v:.6} [{id}]"),
                _ => "n/a".into(),
            };
            let sim = match (r.sim_value, r.sim_stderr) {
                (Some(v), Some(se)) => format!("{v:.6} +/- {se:.6}"),
                _ => "n/a".into(),
            };
            let z = r.z_score.map_or_else(String::new, |z| format!(" z={z:+.2}"));
            let _ = writeln!(
                out,
                "{:<10} {:<3} lambda={:<8} {}^{}  analytic={}  sim={}{}  -> {}",
                r.discipline, r.service, r.lambda, r.metric, r.k, analytic, sim, z, verdict
            );
        }
        let c = self.counts();
        let _ = writeln!(
            out,
            "summary: {} match, {} discrepant ({} authoritative), {} not in catalog; rel_tol={} z_max={}",
            c.matched, c.discrepant, c.fatal, c.uncataloged, self.tolerance.rel_tol, self.tolerance.z_max
        );
        out
    }
}

/// First moments of `Gamma` and `Delta_R` for the three managed disciplines,
/// both families, at [`DEFAULT_SUITE_LAMBDAS`] and `mu = 1`.
pub fn default_suite(n_packets: usize, base_seed: u64) -> SweepSpec {
    SweepSpec {
        lambdas: DEFAULT_SUITE_LAMBDAS.to_vec(),
        mu: 1.0,
        disciplines: Discipline::MANAGED.to_vec(),
        families: ServiceFamily::ALL.to_vec(),
        quantities: vec![(Metric::Gamma, 1), (Metric::DeltaR, 1)],
        n_packets,
        base_seed,
        warmup: None,
        delta_r2: None,
        grid_note: format!("verification lambdas {DEFAULT_SUITE_LAMBDAS:?}"),
    }
}

/// Runs the sweep and wraps the verdicts. Simulation is required: with
/// `n_packets = 0` every row has an empty verdict.
pub fn verify(spec: &SweepSpec, tolerance: Tolerance) -> Result<VerificationReport> {
    Ok(VerificationReport {
        rows: run_sweep(spec, &tolerance)?,
        tolerance,
    })
}
