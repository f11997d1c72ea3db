//! Single-server status-update simulator with Poisson arrivals.
//!
//! At most one packet is in service under every discipline, so the engine is
//! a two-stream clock: the next arrival and the completion of the packet in
//! service. Inter-arrival and service draws come from separate streams of the
//! master seed, so switching discipline leaves the arrival sequence intact.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::age::{AgeTrace, Metric, Outcome, PacketRecord};
use crate::error::{Error, Result};
use crate::service::{exp_inverse_cdf, ServiceModel};

pub const DEFAULT_WARMUP: usize = 1_000;
pub const DEFAULT_BATCHES: usize = 100;
/// Fewest post-warm-up arrivals accepted by [`arrival_sampling_check`].
pub const MIN_SAMPLING_ARRIVALS: usize = 10_000;

const ARRIVAL_STREAM: u64 = 0;
const SERVICE_STREAM: u64 = 1;

/// Packet-management discipline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Discipline {
    /// M/GI/1: unbounded FCFS queue.
    FcfsUnbounded,
    /// M/GI/1 with preemption: an arrival always enters service and discards
    /// the packet being served.
    PreemptiveDrop,
    /// M/GI/1/1: arrivals that find the server busy are discarded.
    BlockingSingle,
    /// M/GI/1/2*: one waiting slot that always holds the newest arrival.
    ReplaceBuffer,
}

impl Discipline {
    pub const ALL: [Discipline; 4] = [
        Discipline::FcfsUnbounded,
        Discipline::PreemptiveDrop,
        Discipline::BlockingSingle,
        Discipline::ReplaceBuffer,
    ];

    /// The three packet-management disciplines (everything but FCFS).
    pub const MANAGED: [Discipline; 3] = [
        Discipline::PreemptiveDrop,
        Discipline::BlockingSingle,
        Discipline::ReplaceBuffer,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Discipline::FcfsUnbounded => "fcfs",
            Discipline::PreemptiveDrop => "prmp",
            Discipline::BlockingSingle => "blocking",
            Discipline::ReplaceBuffer => "replace",
        }
    }

    /// Loss systems are stable at every arrival rate.
    pub fn requires_stability(self) -> bool {
        self == Discipline::FcfsUnbounded
    }
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Discipline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fcfs" => Ok(Discipline::FcfsUnbounded),
            "prmp" | "preemptive" => Ok(Discipline::PreemptiveDrop),
            "blocking" | "blk" => Ok(Discipline::BlockingSingle),
            "replace" | "rep" => Ok(Discipline::ReplaceBuffer),
            other => Err(Error::Parse(format!(
                "unknown discipline `{other}` (expected fcfs|prmp|blocking|replace)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub lambda: f64,
    pub service: ServiceModel,
    pub discipline: Discipline,
    pub n_packets: usize,
    pub seed: u64,
    /// Arrivals dropped from the start of the estimation window.
    pub warmup: usize,
    pub batches: usize,
}

impl SimConfig {
    pub fn new(discipline: Discipline, service: ServiceModel, lambda: f64, n_packets: usize, seed: u64) -> Self {
        SimConfig {
            lambda,
            service,
            discipline,
            n_packets,
            seed,
            warmup: DEFAULT_WARMUP.min(n_packets / 10),
            batches: DEFAULT_BATCHES,
        }
    }

    pub fn with_warmup(mut self, warmup: usize) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn with_batches(mut self, batches: usize) -> Self {
        self.batches = batches;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_stability(self.discipline, &self.service, self.lambda)?;
        if self.n_packets <= self.warmup {
            return Err(Error::Domain(format!(
                "no packets left for estimation: n_packets = {} <= warmup = {}",
                self.n_packets, self.warmup
            )));
        }
        if self.batches < 2 {
            return Err(Error::Domain(format!("need at least 2 batches, got {}", self.batches)));
        }
        Ok(())
    }
}

/// Positive finite arrival rate, and `lambda < mu` for FCFS.
pub fn check_stability(discipline: Discipline, service: &ServiceModel, lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain(format!(
            "arrival rate must be positive and finite, got {lambda}"
        )));
    }
    if discipline.requires_stability() && lambda >= service.rate() {
        return Err(Error::Unstable {
            lambda,
            mu: service.rate(),
        });
    }
    Ok(())
}

/// A time-average moment with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub metric: Metric,
    pub k: u32,
    pub value: f64,
    pub std_error: f64,
    pub n_packets: usize,
    pub n_batches: usize,
    /// Master seed of the run; `None` for recorded logs.
    pub seed: Option<u64>,
    pub warmup_dropped: usize,
}

/// Observation window `[start, end]` of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }

    fn batch_of(&self, t: f64, batches: usize) -> usize {
        (((t - self.start) / self.len() * batches as f64) as usize).min(batches - 1)
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub config: SimConfig,
    pub records: Vec<PacketRecord>,
    pub trace: AgeTrace,
    pub window: Window,
    /// `E[Gamma]`, `E[Gamma^2]`, `E[Delta_R]`, `E[Delta_R^2]`.
    pub moments: [MomentEstimate; 4],
}

impl SimOutput {
    pub fn moment(&self, metric: Metric, k: u32) -> Option<&MomentEstimate> {
        self.moments.iter().find(|m| m.metric == metric && m.k == k)
    }

    pub fn outcome_count(&self, outcome: Outcome) -> usize {
        self.records.iter().filter(|p| p.outcome == outcome).count()
    }

    /// System times of packets delivered inside the window.
    pub fn system_times(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter(|p| p.arrival >= self.window.start)
            .filter_map(PacketRecord::system_time)
            .collect()
    }
}

struct Engine {
    discipline: Discipline,
    service: ServiceModel,
    rng: ChaCha8Rng,
    records: Vec<PacketRecord>,
    in_service: Option<(usize, f64)>,
    queue: VecDeque<usize>,
    buffer: Option<usize>,
}

impl Engine {
    fn start(&mut self, id: usize, at: f64) -> Result<()> {
        let done = at + self.service.sample(&mut self.rng);
        if !done.is_finite() {
            return Err(Error::Overflow(format!(
                "service completion of packet {id} is not finite"
            )));
        }
        self.records[id].service_start = Some(at);
        self.in_service = Some((id, done));
        Ok(())
    }

    /// Completes every service finishing at or before `t`.
    fn advance_to(&mut self, t: f64) -> Result<()> {
        while let Some((id, done)) = self.in_service {
            if done > t {
                break;
            }
            let rec = &mut self.records[id];
            rec.departure = Some(done);
            rec.outcome = Outcome::Delivered;
            self.in_service = None;
            let next = match self.discipline {
                Discipline::FcfsUnbounded => self.queue.pop_front(),
                Discipline::ReplaceBuffer => self.buffer.take(),
                _ => None,
            };
            if let Some(next) = next {
                self.start(next, done)?;
            }
        }
        Ok(())
    }

    fn admit(&mut self, id: usize, t: f64) -> Result<()> {
        let busy = self.in_service.map(|(j, _)| j);
        match (self.discipline, busy) {
            (_, None) => self.start(id, t)?,
            (Discipline::PreemptiveDrop, Some(j)) => {
                self.records[j].outcome = Outcome::Preempted;
                self.start(id, t)?;
            }
            (Discipline::BlockingSingle, Some(_)) => {
                self.records[id].outcome = Outcome::DroppedOnArrival;
            }
            (Discipline::ReplaceBuffer, Some(_)) => {
                if let Some(old) = self.buffer.replace(id) {
                    self.records[old].outcome = Outcome::ReplacedInBuffer;
                }
            }
            (Discipline::FcfsUnbounded, Some(_)) => self.queue.push_back(id),
        }
        Ok(())
    }
}

/// Runs one simulation: `n_packets` Poisson arrivals, observed until the
/// instant the next (unadmitted) arrival would occur.
pub fn run(config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let mut arrival_rng = ChaCha8Rng::seed_from_u64(config.seed);
    arrival_rng.set_stream(ARRIVAL_STREAM);
    let mut service_rng = ChaCha8Rng::seed_from_u64(config.seed);
    service_rng.set_stream(SERVICE_STREAM);

    let n = config.n_packets;
    let mut engine = Engine {
        discipline: config.discipline,
        service: config.service,
        rng: service_rng,
        records: Vec::with_capacity(n),
        in_service: None,
        queue: VecDeque::new(),
        buffer: None,
    };

    let mut t = 0.0;
    for id in 0..n {
        t += exp_inverse_cdf(&mut arrival_rng, config.lambda);
        if !t.is_finite() {
            return Err(Error::Overflow(format!("arrival time of packet {id} is not finite")));
        }
        engine.records.push(PacketRecord {
            id,
            arrival: t,
            service_start: None,
            departure: None,
            outcome: Outcome::InFlight,
        });
        engine.advance_to(t)?;
        engine.admit(id, t)?;
    }
    let horizon = t + exp_inverse_cdf(&mut arrival_rng, config.lambda);
    if !horizon.is_finite() {
        return Err(Error::Overflow("horizon is not finite".into()));
    }
    engine.advance_to(horizon)?;
    let records = engine.records;

    let trace = AgeTrace::build(&records, Some(horizon))?;
    let (window, mut moments) = window_moments(&trace, &records, config.warmup, config.batches)?;
    for m in &mut moments {
        m.seed = Some(config.seed);
    }
    Ok(SimOutput {
        config: *config,
        records,
        trace,
        window,
        moments,
    })
}

/// Estimates `E[metric^k]` over `window` with `batches` equal-time batch means.
pub fn estimate_moment(trace: &AgeTrace, window: Window, metric: Metric, k: u32, batches: usize) -> (f64, f64) {
    let integrals = trace.window_integrals(metric, k, window.start, window.end, batches);
    let width = window.len() / batches as f64;
    let means: Vec<f64> = integrals.iter().map(|v| v / width).collect();
    (integrals.iter().sum::<f64>() / window.len(), standard_error(&means))
}

/// The four moments of a recorded log, dropping the first `warmup`
/// arrivals. The window ends at the trace horizon.
pub fn moments_from_log(
    records: &[PacketRecord],
    horizon: Option<f64>,
    warmup: usize,
    batches: usize,
) -> Result<(Window, [MomentEstimate; 4])> {
    let trace = AgeTrace::build(records, horizon)?;
    window_moments(&trace, records, warmup, batches)
}

fn window_moments(
    trace: &AgeTrace,
    records: &[PacketRecord],
    warmup: usize,
    batches: usize,
) -> Result<(Window, [MomentEstimate; 4])> {
    if batches < 2 {
        return Err(Error::Domain(format!("need at least 2 batches, got {batches}")));
    }
    if warmup >= records.len() {
        return Err(Error::Domain(format!(
            "warm-up of {warmup} arrivals leaves no packets out of {}",
            records.len()
        )));
    }
    let start = if warmup == 0 { 0.0 } else { records[warmup].arrival };
    let window = Window {
        start,
        end: trace.horizon(),
    };
    if window.is_empty() {
        return Err(Error::Domain("empty estimation window".into()));
    }
    let estimate = |metric, k| {
        let (value, std_error) = estimate_moment(trace, window, metric, k, batches);
        MomentEstimate {
            metric,
            k,
            value,
            std_error,
            n_packets: records.len(),
            n_batches: batches,
            seed: None,
            warmup_dropped: warmup,
        }
    };
    let moments = [
        estimate(Metric::Gamma, 1),
        estimate(Metric::Gamma, 2),
        estimate(Metric::DeltaR, 1),
        estimate(Metric::DeltaR, 2),
    ];
    Ok((window, moments))
}

/// Sample standard deviation over `sqrt(n)`.
pub fn standard_error(batch_means: &[f64]) -> f64 {
    let n = batch_means.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = batch_means.iter().sum::<f64>() / n as f64;
    let var = batch_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Server occupancy seen over time and by arrivals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateFractions {
    pub time_idle: f64,
    pub time_busy: f64,
    pub time_busy_se: f64,
    /// Fraction of arrivals that find the server idle.
    pub arrival_idle: f64,
    pub arrival_idle_se: f64,
    pub arrivals: usize,
}

impl StateFractions {
    pub fn arrival_busy(&self) -> f64 {
        1.0 - self.arrival_idle
    }
}

struct BusyInterval {
    start: f64,
    end: f64,
    ended_by_departure: bool,
}

fn busy_intervals(log: &[PacketRecord], horizon: f64) -> Vec<BusyInterval> {
    let mut starts: Vec<(f64, Option<f64>)> = log
        .iter()
        .filter_map(|p| p.service_start.map(|s| (s, p.departure)))
        .collect();
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    (0..starts.len())
        .map(|i| {
            let (start, departure) = starts[i];
            let next = starts.get(i + 1).map_or(f64::INFINITY, |s| s.0);
            let cut = next.min(horizon);
            match departure {
                Some(d) if d <= cut => BusyInterval {
                    start,
                    end: d,
                    ended_by_departure: true,
                },
                _ => BusyInterval {
                    start,
                    end: cut,
                    ended_by_departure: false,
                },
            }
        })
        .collect()
}

/// Time-average and arrival-sampled server occupancy inside `window`, with
/// batch-means standard errors over `batches` equal-time batches.
pub fn server_state_fraction(log: &[PacketRecord], window: Window, batches: usize) -> Result<StateFractions> {
    if window.is_empty() || batches < 2 {
        return Err(Error::Domain("empty window or fewer than 2 batches".into()));
    }
    let intervals = busy_intervals(log, window.end);
    let width = window.len() / batches as f64;
    let mut busy_time = vec![0.0; batches];
    for iv in &intervals {
        let a = iv.start.max(window.start);
        let b = iv.end.min(window.end);
        if b <= a {
            continue;
        }
        let mut x = a;
        let mut j = window.batch_of(a, batches);
        while x < b {
            let edge = if j + 1 == batches {
                window.end
            } else {
                window.start + width * (j + 1) as f64
            };
            let stop = b.min(edge);
            busy_time[j] += stop - x;
            x = stop;
            j += 1;
            if j == batches {
                break;
            }
        }
    }

    let mut idle_hits = vec![0usize; batches];
    let mut counts = vec![0usize; batches];
    let mut cursor = 0;
    for p in log.iter().filter(|p| window.contains(p.arrival)) {
        let t = p.arrival;
        while cursor < intervals.len() && intervals[cursor].end < t {
            cursor += 1;
        }
        let busy = intervals[cursor..]
            .iter()
            .take(2)
            .any(|iv| iv.start < t && (iv.end > t || (iv.end == t && !iv.ended_by_departure)));
        let j = window.batch_of(t, batches);
        counts[j] += 1;
        if !busy {
            idle_hits[j] += 1;
        }
    }
    let arrivals: usize = counts.iter().sum();
    if arrivals == 0 {
        return Err(Error::Domain("no arrivals inside the window".into()));
    }
    let time_busy = busy_time.iter().sum::<f64>() / window.len();
    let busy_means: Vec<f64> = busy_time.iter().map(|b| b / width).collect();
    let idle_means: Vec<f64> = idle_hits
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(&h, &c)| h as f64 / c as f64)
        .collect();
    Ok(StateFractions {
        time_idle: 1.0 - time_busy,
        time_busy,
        time_busy_se: standard_error(&busy_means),
        arrival_idle: idle_hits.iter().sum::<usize>() as f64 / arrivals as f64,
        arrival_idle_se: standard_error(&idle_means),
        arrivals,
    })
}

/// Relative age sampled just after arrivals against the time-average
/// receiver age.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingCheck {
    pub arrival_mean: f64,
    pub arrival_se: f64,
    pub time_average_delta_r: f64,
    pub time_average_se: f64,
    pub arrivals: usize,
}

impl SamplingCheck {
    pub fn discrepancy(&self) -> f64 {
        self.arrival_mean - self.time_average_delta_r
    }

    pub fn combined_se(&self) -> f64 {
        self.arrival_se.hypot(self.time_average_se)
    }
}

pub fn arrival_sampling_check(trace: &AgeTrace, window: Window, batches: usize) -> Result<SamplingCheck> {
    if window.is_empty() || batches < 2 {
        return Err(Error::Domain("empty estimation window".into()));
    }
    let mut sums = vec![0.0; batches];
    let mut counts = vec![0usize; batches];
    for (t, g) in trace.samples_at_arrivals() {
        if window.contains(t) {
            let j = window.batch_of(t, batches);
            sums[j] += g;
            counts[j] += 1;
        }
    }
    let arrivals: usize = counts.iter().sum();
    if arrivals < MIN_SAMPLING_ARRIVALS {
        return Err(Error::Domain(format!(
            "{arrivals} arrivals in the window, need at least {MIN_SAMPLING_ARRIVALS}"
        )));
    }
    let arrival_means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(&s, &c)| s / c as f64)
        .collect();
    let integrals = trace.window_integrals(Metric::DeltaR, 1, window.start, window.end, batches);
    let width = window.len() / batches as f64;
    let time_means: Vec<f64> = integrals.iter().map(|v| v / width).collect();
    Ok(SamplingCheck {
        arrival_mean: sums.iter().sum::<f64>() / arrivals as f64,
        arrival_se: standard_error(&arrival_means),
        time_average_delta_r: integrals.iter().sum::<f64>() / window.len(),
        time_average_se: standard_error(&time_means),
        arrivals,
    })
}
