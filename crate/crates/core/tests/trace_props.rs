//! Pathwise invariants of age traces and bit-exact file round trips.

use proptest::prelude::*;

use raoi::age::{AgeTrace, Outcome, PacketRecord};
use raoi::analytic::FormulaId;
use raoi::bench::{read_rows, write_rows, Row, Verdict};
use raoi::eventlog;
use raoi::sim::{self, Discipline, SimConfig};
use raoi::{Metric, ServiceFamily, ServiceModel};

fn discipline() -> impl Strategy<Value = Discipline> {
    prop::sample::select(Discipline::ALL.to_vec())
}

fn family() -> impl Strategy<Value = ServiceFamily> {
    prop::sample::select(vec![ServiceFamily::Exponential, ServiceFamily::Deterministic])
}

fn small_run(d: Discipline, f: ServiceFamily, lambda: f64, mu: f64, n: usize, seed: u64) -> sim::SimOutput {
    let service = ServiceModel::new(f, mu).unwrap();
    let config = SimConfig::new(d, service, lambda, n, seed)
        .with_warmup(0)
        .with_batches(2);
    sim::run(&config).unwrap()
}

/// Midpoint sum over `[from, to]` split into cells no wider than `step`.
fn midpoint(trace: &AgeTrace, metric: Metric, k: u32, from: f64, to: f64, step: f64) -> f64 {
    let n = ((to - from) / step).ceil().max(1.0) as usize;
    let dx = (to - from) / n as f64;
    (0..n)
        .map(|i| trace.value_at(metric, from + (i as f64 + 0.5) * dx).powi(k as i32) * dx)
        .sum()
}

/// Riemann sum with mesh `step` cut at every event time of the log, so no
/// cell straddles a jump.
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exact_integrals_agree_with_riemann_sums(
        d in discipline(),
        f in family(),
        lambda in 0.5f64..3.0,
        mu in 0.5f64..3.0,
        n in 2usize..=6,
        seed in any::<u64>(),
    ) {
        prop_assume!(!d.requires_stability() || lambda < mu);
        let out = small_run(d, f, lambda, mu, n, seed);
        for metric in [Metric::Gamma, Metric::DeltaR, Metric::DeltaT] {
            for k in [1, 2, 3] {
                let exact = out.trace.integrate_power(metric, k);
                let approx = riemann(&out.trace, &out.records, metric, k, 1e-4);
                prop_assert!(
                    (exact - approx).abs() <= 1e-3,
                    "{metric:?} k={k}: exact {exact} vs riemann {approx}"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn relative_age_is_the_gap_between_the_two_ages(
        d in discipline(),
        f in family(),
        lambda in 0.05f64..20.0,
        mu in 0.2f64..5.0,
        n in 2usize..200,
        seed in any::<u64>(),
    ) {
        prop_assume!(!d.requires_stability() || lambda < mu);
        let out = small_run(d, f, lambda, mu, n, seed);
        let trace = &out.trace;
        let g = trace.integrate_power(Metric::Gamma, 1);
        let r = trace.integrate_power(Metric::DeltaR, 1);
        let t = trace.integrate_power(Metric::DeltaT, 1);
        prop_assert!((g - (r - t)).abs() <= 1e-9 * r.max(1.0), "{g} vs {r} - {t}");
        for seg in trace.segments() {
            prop_assert!(seg.gamma() >= 0.0);
        }
        for (time, gamma) in trace.samples_at_arrivals() {
            prop_assert_eq!(gamma, trace.value_at(Metric::DeltaR, time));
            prop_assert_eq!(trace.value_at(Metric::DeltaT, time), 0.0);
        }
    }

    #[test]
    fn event_log_round_trip_is_bit_exact(
        d in discipline(),
        f in family(),
        lambda in 0.05f64..20.0,
        mu in 0.2f64..5.0,
        n in 2usize..100,
        seed in any::<u64>(),
        with_horizon in any::<bool>(),
    ) {
        prop_assume!(!d.requires_stability() || lambda < mu);
        let out = small_run(d, f, lambda, mu, n, seed);
        let horizon = with_horizon.then(|| out.trace.horizon());
        let mut buf = Vec::new();
        eventlog::write_log(&mut buf, &out.records, horizon).unwrap();
        let back = eventlog::read_log(buf.as_slice()).unwrap();
        prop_assert_eq!(back.horizon.map(f64::to_bits), horizon.map(f64::to_bits));
        prop_assert_eq!(back.records.len(), out.records.len());
        for (a, b) in back.records.iter().zip(&out.records) {
            prop_assert_eq!(a.id, b.id);
            prop_assert_eq!(a.outcome, b.outcome);
            prop_assert_eq!(a.arrival.to_bits(), b.arrival.to_bits());
            prop_assert_eq!(a.service_start.map(f64::to_bits), b.service_start.map(f64::to_bits));
            prop_assert_eq!(a.departure.map(f64::to_bits), b.departure.map(f64::to_bits));
        }
        let rebuilt = AgeTrace::build(&back.records, Some(out.trace.horizon())).unwrap();
        prop_assert_eq!(
            rebuilt.integrate_power(Metric::Gamma, 2).to_bits(),
            out.trace.integrate_power(Metric::Gamma, 2).to_bits()
        );
    }

    #[test]
    fn result_rows_round_trip_is_bit_exact(rows in prop::collection::vec(row(), 0..20)) {
        let mut buf = Vec::new();
        write_rows(&mut buf, &["grid: test".to_string()], &rows).unwrap();
        let back = read_rows(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in back.iter().zip(&rows) {
            prop_assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
            prop_assert_eq!(a.analytic_value.map(f64::to_bits), b.analytic_value.map(f64::to_bits));
            prop_assert_eq!(a.sim_value.map(f64::to_bits), b.sim_value.map(f64::to_bits));
            prop_assert_eq!(a.sim_stderr.map(f64::to_bits), b.sim_stderr.map(f64::to_bits));
            prop_assert_eq!(a.z_score.map(f64::to_bits), b.z_score.map(f64::to_bits));
            prop_assert_eq!(a, b);
        }
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

fn row() -> impl Strategy<Value = Row> {
    let ids: Vec<FormulaId> = FormulaId::ALL.to_vec();
    (
        (
            discipline(),
            family(),
            finite(),
            finite(),
            prop::sample::select(vec![Metric::Gamma, Metric::DeltaR]),
            1u32..=2,
        ),
        (
            prop::option::of(finite()),
            prop::option::of(prop::sample::select(ids)),
            prop::option::of(finite()),
            prop::option::of(finite()),
            prop::option::of(any::<usize>()),
            prop::option::of(any::<u64>()),
            prop::option::of(finite()),
            prop::option::of(prop::sample::select(vec![
                Verdict::Match,
                Verdict::Discrepant,
                Verdict::Uncataloged,
            ])),
        ),
    )
        .prop_map(
            |((discipline, service, lambda, mu, metric, k), (av, fid, sv, se, n, seed, z, verdict))| Row {
                discipline,
                service,
                lambda,
                mu,
                metric,
                k,
                analytic_value: av,
                formula_id: fid,
                sim_value: sv,
                sim_stderr: se,
                n_packets: n,
                seed,
                z_score: z,
                verdict,
            },
        )
}

#[test]
fn hand_built_log_has_the_expected_areas() {
    // one packet served immediately: tx stamp 1 from t=1, delivered at 3
    let log = [PacketRecord {
        id: 0,
        arrival: 1.0,
        service_start: Some(1.0),
        departure: Some(3.0),
        outcome: Outcome::Delivered,
    }];
    let trace = AgeTrace::build(&log, Some(4.0)).unwrap();
    // Gamma = 0 on [0,1), 1 on [1,3), 0 on [3,4]
    assert_eq!(trace.integrate_power(Metric::Gamma, 1), 2.0);
    assert_eq!(trace.integrate_power(Metric::Gamma, 2), 2.0);
    // Delta_R = t on [0,3), t-1 on [3,4]
    assert!((trace.integrate_power(Metric::DeltaR, 1) - (4.5 + 2.5)).abs() < 1e-12);
}
