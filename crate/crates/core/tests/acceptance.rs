//! Acceptance suite: one test per criterion, numbered as in the build
//! contract. Each test prints its measured numbers to stderr.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use raoi::age::{AgeTrace, Outcome, PacketRecord};
use raoi::analytic::{self, classical_aoi_moment, raoi_first_moment, AnalyticQuery, EvalOptions};
use raoi::bench::{self, read_rows, Row, SweepSpec, Tolerance, Verdict};
use raoi::sim::{self, Discipline, SimConfig, SimOutput};
use raoi::{Metric, ServiceFamily, ServiceModel};

use Discipline::*;

const PACKETS: usize = 1_000_000;

fn exp(mu: f64) -> ServiceModel {
    ServiceModel::exponential(mu).unwrap()
}

fn det(mu: f64) -> ServiceModel {
    ServiceModel::deterministic(mu).unwrap()
}

fn simulate(d: Discipline, s: ServiceModel, lambda: f64, n: usize, seed: u64) -> SimOutput {
    sim::run(&SimConfig::new(d, s, lambda, n, seed)).unwrap()
}

fn within(analytic: f64, sim: f64, se: f64, rel: f64, z: f64) -> bool {
    (analytic - sim).abs() <= (rel * analytic.abs()).max(z * se)
}

fn gamma1(d: Discipline, s: ServiceModel, lambda: f64) -> f64 {
    raoi_first_moment(&AnalyticQuery::new(d, s, lambda, Metric::Gamma, 1))
        .unwrap()
        .value
}

/// Collects failures so one test can report every sub-case before failing.
#[derive(Default)]
struct Ledger {
    failures: Vec<String>,
}

impl Ledger {
    fn check(&mut self, ok: bool, line: String) {
        eprintln!("  [{}] {line}", if ok { "ok" } else { "FAIL" });
        if !ok {
            self.failures.push(line);
        }
    }

    fn finish(self, criterion: &str) {
        if self.failures.is_empty() {
            eprintln!("{criterion}: PASS");
        } else {
            eprintln!("{criterion}: FAIL");
            panic!(
                "{criterion}: {} sub-case(s) failed:\n{}",
                self.failures.len(),
                self.failures.join("\n")
            );
        }
    }
}

#[test]
fn criterion_01_preemptive_exponential_mean_is_one_over_mu() {
    let mut ledger = Ledger::default();
    for (i, lambda) in [0.2, 1.0, 5.0, 25.0].into_iter().enumerate() {
        let analytic = gamma1(PreemptiveDrop, exp(1.0), lambda);
        ledger.check(analytic == 1.0, format!("lambda = {lambda}: analytic {analytic}"));
        let start = Instant::now();
        let out = simulate(PreemptiveDrop, exp(1.0), lambda, PACKETS, 100 + i as u64);
        let elapsed = start.elapsed();
        let m = out.moment(Metric::Gamma, 1).unwrap();
        ledger.check(
            within(1.0, m.value, m.std_error, 0.01, 5.0),
            format!("lambda = {lambda}: sim {:.5} +/- {:.5}", m.value, m.std_error),
        );
        ledger.check(
            elapsed < Duration::from_secs(5),
            format!("lambda = {lambda}: runtime {elapsed:.2?}"),
        );
    }
    ledger.finish("criterion 1");
}

#[test]
fn criterion_02_relative_age_is_receiver_age_minus_mean_interarrival() {
    let mut ledger = Ledger::default();
    let mut seed = 200;
    for d in Discipline::ALL {
        for s in [exp(1.0), det(1.0)] {
            for lambda in [0.1, 1.0, 10.0] {
                if d.requires_stability() && lambda >= s.rate() {
                    eprintln!("  [skip] {d} {s} lambda = {lambda}: unstable");
                    continue;
                }
                seed += 1;
                let out = simulate(d, s, lambda, PACKETS, seed);
                let g = out.moment(Metric::Gamma, 1).unwrap();
                let r = out.moment(Metric::DeltaR, 1).unwrap();
                let gap = g.value - (r.value - 1.0 / lambda);
                let se = g.std_error.hypot(r.std_error);
                ledger.check(
                    gap.abs() <= 5.0 * se,
                    format!("{d} {s} lambda = {lambda}: gap {gap:.3e}, 5 se = {:.3e}", 5.0 * se),
                );
            }
        }
    }
    let mut pairs = 0;
    for d in Discipline::ALL {
        for s in [exp(1.0), det(1.0)] {
            for lambda in bench::log_grid(0.05, 50.0, 40) {
                let g = raoi_first_moment(&AnalyticQuery::new(d, s, lambda, Metric::Gamma, 1));
                let r = classical_aoi_moment(d, s, lambda, 1);
                if let (Ok(g), Ok(r)) = (g, r) {
                    pairs += 1;
                    let err = (g.value - (r.value - 1.0 / lambda)).abs();
                    if err > 1e-12 * r.value.abs().max(1.0) {
                        ledger.check(
                            false,
                            format!("formula level {d} {s} lambda = {lambda}: error {err:.3e}"),
                        );
                    }
                }
            }
        }
    }
    ledger.check(
        pairs > 200,
        format!("formula level identity on {pairs} cataloged pairs"),
    );
    ledger.finish("criterion 2");
}

#[test]
fn criterion_03_arrival_samples_of_relative_age_see_time_average_receiver_age() {
    let mut ledger = Ledger::default();
    for d in Discipline::ALL {
        for s in [exp(1.0), det(1.0)] {
            for lambda in [0.5, 2.0] {
                if d.requires_stability() && lambda >= s.rate() {
                    eprintln!("  [skip] {d} {s} lambda = {lambda}: unstable");
                    continue;
                }
                let out = simulate(d, s, lambda, PACKETS, 300);
                let check = sim::arrival_sampling_check(&out.trace, out.window, 100).unwrap();
                ledger.check(
                    check.discrepancy().abs() <= 5.0 * check.combined_se(),
                    format!(
                        "{d} {s} lambda = {lambda}: arrival mean {:.5}, time average {:.5}, 5 se = {:.2e}",
                        check.arrival_mean,
                        check.time_average_delta_r,
                        5.0 * check.combined_se()
                    ),
                );
            }
        }
    }
    ledger.finish("criterion 3");
}

#[test]
fn criterion_04_arrivals_find_the_server_idle_at_the_stationary_rate() {
    let mut ledger = Ledger::default();
    let expected = [
        (BlockingSingle, exp(1.0), 0.5),
        (BlockingSingle, det(1.0), 0.5),
        (ReplaceBuffer, exp(1.0), 1.0 / 3.0),
        (ReplaceBuffer, det(1.0), 0.26894),
    ];
    for (d, s, target) in expected {
        let formula = match d {
            BlockingSingle => analytic::blocking_stationary_probs(s, 1.0).unwrap().0,
            _ => analytic::replace_stationary_probs(s, 1.0).unwrap().0,
        };
        ledger.check(
            (formula - target).abs() < 1e-5,
            format!("{d} {s}: p_I formula {formula:.6} vs {target}"),
        );
        let out = simulate(d, s, 1.0, PACKETS, 400);
        let fractions = sim::server_state_fraction(&out.records, out.window, 100).unwrap();
        ledger.check(
            (fractions.arrival_idle - formula).abs() <= 0.01 * formula,
            format!(
                "{d} {s}: arrivals finding idle {:.5} vs {formula:.5}",
                fractions.arrival_idle
            ),
        );
    }
    ledger.finish("criterion 4");
}

#[test]
fn criterion_05_heavy_load_limits() {
    let mut ledger = Ledger::default();
    let cases = [
        (BlockingSingle, exp(1.0), 2.0),
        (ReplaceBuffer, exp(1.0), 2.0),
        (BlockingSingle, det(1.0), 1.5),
        (ReplaceBuffer, det(1.0), 1.5),
    ];
    for (d, s, limit) in cases {
        let at_large = gamma1(d, s, 1e4);
        ledger.check(
            (at_large - limit).abs() < 1e-3,
            format!("{d} {s}: E[Gamma](1e4) = {at_large:.6}, limit {limit}"),
        );
        let analytic = gamma1(d, s, 50.0);
        let out = simulate(d, s, 50.0, PACKETS, 500);
        let m = out.moment(Metric::Gamma, 1).unwrap();
        ledger.check(
            (m.value - analytic).abs() <= 0.02 * analytic,
            format!("{d} {s} lambda = 50: sim {:.5} vs analytic {analytic:.5}", m.value),
        );
    }
    ledger.finish("criterion 5");
}

#[test]
fn criterion_06_replace_beats_blocking_at_light_load_and_loses_at_heavy_load() {
    let mut ledger = Ledger::default();
    for (lambda, replace_lower) in [(0.1, true), (10.0, false)] {
        let rep = gamma1(ReplaceBuffer, exp(1.0), lambda);
        let blk = gamma1(BlockingSingle, exp(1.0), lambda);
        ledger.check(
            (rep < blk) == replace_lower,
            format!("analytic lambda = {lambda}: replace {rep:.5}, blocking {blk:.5}"),
        );
        let rep = simulate(ReplaceBuffer, exp(1.0), lambda, PACKETS, 600);
        let blk = simulate(BlockingSingle, exp(1.0), lambda, PACKETS, 600);
        let (r, b) = (
            rep.moment(Metric::Gamma, 1).unwrap(),
            blk.moment(Metric::Gamma, 1).unwrap(),
        );
        ledger.check(
            (r.value < b.value) == replace_lower,
            format!(
                "sim lambda = {lambda}: replace {:.5} +/- {:.1e}, blocking {:.5} +/- {:.1e}",
                r.value, r.std_error, b.value, b.std_error
            ),
        );
    }
    ledger.finish("criterion 6");
}

#[test]
fn criterion_07_preemptive_second_moments() {
    let mut ledger = Ledger::default();
    for lambda in [0.5, 1.0, 2.0] {
        let mu: f64 = 1.0;
        let e = (lambda / mu).exp();
        let oracles = [
            (
                exp(mu),
                2.0 * (lambda * lambda + lambda * mu + mu * mu) / (lambda * mu * mu * (lambda + mu)),
            ),
            (det(mu), 2.0 * (mu * e - lambda) * (e - 1.0) / (lambda * lambda * mu)),
        ];
        for (s, oracle) in oracles {
            let lib = analytic::evaluate(
                &AnalyticQuery::new(PreemptiveDrop, s, lambda, Metric::Gamma, 2),
                &EvalOptions::default(),
            )
            .unwrap()
            .value;
            ledger.check(
                (lib - oracle).abs() <= 1e-12 * oracle,
                format!("{s} lambda = {lambda}: library {lib} vs expression {oracle}"),
            );
            let out = simulate(PreemptiveDrop, s, lambda, PACKETS, 700);
            let m = out.moment(Metric::Gamma, 2).unwrap();
            ledger.check(
                within(oracle, m.value, m.std_error, 0.02, 5.0),
                format!(
                    "{s} lambda = {lambda}: sim {:.5} +/- {:.1e} vs {oracle:.5}",
                    m.value, m.std_error
                ),
            );
        }
    }
    ledger.finish("criterion 7");
}

fn arbitration(ledger: &mut Ledger, label: &str, rows: &[Row]) {
    let mut lambdas: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    lambdas.dedup();
    let mut families: Vec<ServiceFamily> = rows.iter().map(|r| r.service).collect();
    families.sort_by_key(|f| f.tag());
    families.dedup();
    for family in families {
        for &lambda in &lambdas {
            let group: Vec<&Row> = rows
                .iter()
                .filter(|r| r.lambda == lambda && r.service == family)
                .collect();
            let mut matched = Vec::new();
            for row in &group {
                let id = row.formula_id.map(|f| f.to_string()).unwrap_or_default();
                eprintln!(
                    "    {label} {family} lambda = {lambda}: {id} analytic {:.5} sim {:.5} +/- {:.1e} -> {:?}",
                    row.analytic_value.unwrap_or(f64::NAN),
                    row.sim_value.unwrap_or(f64::NAN),
                    row.sim_stderr.unwrap_or(f64::NAN),
                    row.verdict
                );
                if row.verdict == Some(Verdict::Match) {
                    matched.push(id);
                }
            }
            ledger.check(
                group.len() == 2 && !matched.is_empty(),
                format!(
                    "{label} {family} lambda = {lambda}: {} variants, matching: {:?}",
                    group.len(),
                    matched
                ),
            );
        }
    }
}

#[test]
fn criterion_08_area_arbitration_report() {
    let mut ledger = Ledger::default();
    let lambdas = vec![0.5, 2.0];

    let mut blocking = SweepSpec::new();
    blocking.lambdas = lambdas.clone();
    blocking.disciplines = vec![BlockingSingle];
    blocking.families = vec![ServiceFamily::Exponential];
    blocking.quantities = vec![(Metric::Gamma, 2)];
    blocking.n_packets = PACKETS;
    blocking.base_seed = 800;
    let report = bench::verify(
        &blocking,
        Tolerance {
            rel_tol: 0.02,
            z_max: 5.0,
        },
    )
    .unwrap();
    arbitration(&mut ledger, "blocking A", &report.rows);

    let mut replace = blocking.clone();
    replace.disciplines = vec![ReplaceBuffer];
    replace.families = vec![ServiceFamily::Exponential, ServiceFamily::Deterministic];
    let report = bench::verify(
        &replace,
        Tolerance {
            rel_tol: 0.03,
            z_max: 5.0,
        },
    )
    .unwrap();
    arbitration(&mut ledger, "replace K (closed loop)", &report.rows);

    ledger.finish("criterion 8");
}

fn hand_trace() -> AgeTrace {
    let log = [
        PacketRecord {
            id: 0,
            arrival: 1.0,
            service_start: Some(1.0),
            departure: Some(2.0),
            outcome: Outcome::Delivered,
        },
        PacketRecord {
            id: 1,
            arrival: 3.0,
            service_start: Some(3.0),
            departure: Some(4.0),
            outcome: Outcome::Delivered,
        },
    ];
    AgeTrace::build(&log, Some(5.0)).unwrap()
}

/// Midpoint sum over `[from, to]` split into cells no wider than `step`.
fn midpoint(trace: &AgeTrace, metric: Metric, k: u32, from: f64, to: f64, step: f64) -> f64 {
    let n = ((to - from) / step).ceil().max(1.0) as usize;
    let dx = (to - from) / n as f64;
    (0..n)
        .map(|i| trace.value_at(metric, from + (i as f64 + 0.5) * dx).powi(k as i32) * dx)
        .sum()
}

/// Riemann sum with mesh `step` whose partition contains every arrival and
/// departure time read from the packet log.
fn riemann(trace: &AgeTrace, log: &[PacketRecord], metric: Metric, k: u32, step: f64) -> f64 {
    let mut cuts: Vec<f64> = log
        .iter()
        .flat_map(|p| [Some(p.arrival), p.departure])
        .flatten()
        .collect();
    cuts.extend([0.0, trace.horizon()]);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| midpoint(trace, metric, k, w[0], w[1], step))
        .sum()
}

#[test]
fn criterion_09_exact_integration_oracle() {
    let mut ledger = Ledger::default();
    let trace = hand_trace();
    let exact = [
        (Metric::Gamma, 1, 3.0),
        (Metric::Gamma, 2, 5.0),
        (Metric::DeltaR, 1, 7.5),
    ];
    for (metric, k, expected) in exact {
        let got = trace.integrate_power(metric, k);
        ledger.check(got == expected, format!("hand trace {metric}^{k}: {got} vs {expected}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut worst_uniform: f64 = 0.0;
    for case in 0..1000 {
        let d = Discipline::ALL[rng.gen_range(0..4)];
        let family = ServiceFamily::ALL[rng.gen_range(0..2)];
        let mu = rng.gen_range(0.5..3.0);
        let lambda = if d.requires_stability() {
            rng.gen_range(0.1..0.9) * mu
        } else {
            rng.gen_range(0.5..3.0)
        };
        let n = rng.gen_range(2..=6);
        let config = SimConfig::new(d, ServiceModel::new(family, mu).unwrap(), lambda, n, case)
            .with_warmup(0)
            .with_batches(2);
        let out = sim::run(&config).unwrap();
        for metric in [Metric::Gamma, Metric::DeltaR] {
            for k in [1, 2] {
                let exact = out.trace.integrate_power(metric, k);
                let err = (exact - riemann(&out.trace, &out.records, metric, k, 1e-4)).abs();
                worst = worst.max(err);
                // a uniform grid straddles jumps and misses up to step/2 times each jump of f^k
                let uniform = midpoint(&out.trace, metric, k, 0.0, out.trace.horizon(), 1e-4);
                worst_uniform = worst_uniform.max((exact - uniform).abs());
                if err > 1e-3 {
                    ledger.check(
                        false,
                        format!("log {case} ({d} {family} lambda = {lambda:.3}) {metric}^{k}: error {err:.2e}"),
                    );
                }
            }
        }
    }
    ledger.check(
        worst <= 1e-3,
        format!("1000 random logs: worst absolute error {worst:.2e}"),
    );
    eprintln!("  uniform grid without event cuts: worst absolute error {worst_uniform:.2e}");
    ledger.finish("criterion 9");
}

fn figure_rows(dir: &Path, preset: &str) -> Vec<Row> {
    let out = Command::new(env!("CARGO_BIN_EXE_raoi"))
        .args(["figure", preset, "--svg", "--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{preset}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    read_rows(std::fs::File::open(dir.join(format!("{preset}.csv"))).unwrap()).unwrap()
}

fn series(rows: &[Row], d: Discipline, f: ServiceFamily, metric: Metric) -> Vec<&Row> {
    rows.iter()
        .filter(|r| r.discipline == d && r.service == f && r.metric == metric && r.k == 1)
        .collect()
}

#[test]
fn criterion_10_figure_presets() {
    let mut ledger = Ledger::default();
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();

    let fig6 = figure_rows(dir.path(), "fig6");
    let gamma = series(&fig6, FcfsUnbounded, ServiceFamily::Exponential, Metric::Gamma);
    let analytic: Vec<f64> = gamma.iter().map(|r| r.analytic_value.unwrap()).collect();
    ledger.check(
        analytic.windows(2).all(|w| w[1] > w[0]),
        format!("fig6 analytic rAoI strictly increasing over {} points", analytic.len()),
    );
    let simulated_monotone = gamma.windows(2).all(|w| {
        let (a, b) = (w[0], w[1]);
        b.sim_value.unwrap() + 5.0 * b.sim_stderr.unwrap().hypot(a.sim_stderr.unwrap()) > a.sim_value.unwrap()
    });
    ledger.check(
        simulated_monotone,
        "fig6 simulated rAoI non-decreasing within 5 se".into(),
    );
    let aoi: Vec<f64> = series(&fig6, FcfsUnbounded, ServiceFamily::Exponential, Metric::DeltaR)
        .iter()
        .map(|r| r.analytic_value.unwrap())
        .collect();
    let argmin = aoi
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let u_shaped = argmin > 0
        && argmin + 1 < aoi.len()
        && aoi[..=argmin].windows(2).all(|w| w[1] < w[0])
        && aoi[argmin..].windows(2).all(|w| w[1] > w[0]);
    ledger.check(
        u_shaped,
        format!("fig6 AoI U-shaped, minimum at grid index {argmin} of {}", aoi.len()),
    );

    let fig7 = figure_rows(dir.path(), "fig7");
    ledger.check(!fig7.is_empty(), format!("fig7 rows: {}", fig7.len()));

    let fig8 = figure_rows(dir.path(), "fig8");
    let prmp_det = series(&fig8, PreemptiveDrop, ServiceFamily::Deterministic, Metric::Gamma);
    let by_five = prmp_det
        .iter()
        .filter(|r| r.lambda <= 5.0 + 1e-9)
        .filter_map(|r| r.analytic_value)
        .fold(0.0, f64::max);
    ledger.check(
        by_five > 20.0,
        format!("fig8 prmp-det analytic max over lambda <= 5: {by_five:.3}"),
    );
    let prmp_exp = series(&fig8, PreemptiveDrop, ServiceFamily::Exponential, Metric::Gamma);
    ledger.check(
        prmp_exp.iter().all(|r| r.analytic_value == Some(1.0)),
        format!("fig8 prmp-exp analytic identically 1 over {} points", prmp_exp.len()),
    );
    let sim_ok = prmp_exp
        .iter()
        .all(|r| within(1.0, r.sim_value.unwrap(), r.sim_stderr.unwrap(), 0.01, 5.0));
    ledger.check(sim_ok, "fig8 prmp-exp simulation within max(1%, 5 se) of 1".into());

    let fig9 = figure_rows(dir.path(), "fig9");
    ledger.check(!fig9.is_empty(), format!("fig9 rows: {}", fig9.len()));

    let elapsed = start.elapsed();
    ledger.check(
        elapsed < Duration::from_secs(600),
        format!("all four presets in {elapsed:.1?}"),
    );
    ledger.finish("criterion 10");
}
