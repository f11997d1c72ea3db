//! Exact sample paths of transmitter age, receiver age and relative age.
//!
//! Both ages grow with slope one and only the stamps they are measured from
//! change at events: an arrival moves the transmitter stamp `u_T`, a delivery
//! moves the receiver stamp `u_R`. A trace therefore stores, per segment, the
//! segment start and the two stamps. Relative age on a segment is the exact
//! difference `u_T - u_R`, never an accumulated quantity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Delivered,
    DroppedOnArrival,
    Preempted,
    ReplacedInBuffer,
    /// Still queued or in service when the horizon was reached.
    InFlight,
}

/// One packet's lifecycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketRecord {
    pub id: usize,
    pub arrival: f64,
    pub service_start: Option<f64>,
    pub departure: Option<f64>,
    pub outcome: Outcome,
}

impl PacketRecord {
    /// System time of a delivered packet.
    pub fn system_time(&self) -> Option<f64> {
        self.departure.map(|d| d - self.arrival)
    }
}

/// Which age process to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    /// Relative age `Gamma = Delta_R - Delta_T`.
    Gamma,
    /// Receiver age `Delta_R`.
    DeltaR,
    /// Transmitter age `Delta_T`.
    DeltaT,
}

impl Metric {
    pub fn tag(self) -> &'static str {
        match self {
            Metric::Gamma => "gamma",
            Metric::DeltaR => "deltaR",
            Metric::DeltaT => "deltaT",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gamma" | "Gamma" | "raoi" => Ok(Metric::Gamma),
            "deltaR" | "deltar" | "delta_r" | "aoi" => Ok(Metric::DeltaR),
            "deltaT" | "deltat" | "delta_t" => Ok(Metric::DeltaT),
            other => Err(Error::Parse(format!(
                "unknown metric `{other}` (expected gamma|deltaR)"
            ))),
        }
    }
}

/// A constant-stamp piece of the sample path, running from `start` to the
/// next segment's start (or the horizon).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    /// Arrival time of the latest packet at the transmitter.
    pub tx_stamp: f64,
    /// Arrival time of the latest packet delivered to the receiver.
    pub rx_stamp: f64,
}

impl Segment {
    pub fn gamma(&self) -> f64 {
        self.tx_stamp - self.rx_stamp
    }

    fn stamp(&self, metric: Metric) -> f64 {
        match metric {
            Metric::DeltaR => self.rx_stamp,
            Metric::DeltaT => self.tx_stamp,
            Metric::Gamma => unreachable!("gamma has no stamp"),
        }
    }

    /// Exact integral of `metric^k` over `[x0, x1]` inside this segment.
    fn integrate(&self, metric: Metric, k: u32, x0: f64, x1: f64) -> f64 {
        let len = x1 - x0;
        match metric {
            Metric::Gamma => len * self.gamma().powi(k as i32),
            _ => {
                // ((a+L)^{k+1} - a^{k+1}) / (k+1), factored to avoid cancellation
                let stamp = self.stamp(metric);
                let lo = x0 - stamp;
                let hi = x1 - stamp;
                let mut sum = 0.0;
                for j in 0..=k {
                    sum += hi.powi(j as i32) * lo.powi((k - j) as i32);
                }
                len * sum / f64::from(k + 1)
            }
        }
    }
}

/// Piecewise description of `Delta_T`, `Delta_R` and `Gamma` on `[0, horizon]`.
///
/// Both ages start at zero at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgeTrace {
    segments: Vec<Segment>,
    horizon: f64,
    /// `(arrival time, index of the segment that begins at it)`.
    arrivals: Vec<(f64, usize)>,
}

enum Event {
    Delivery { generated: f64 },
    Arrival,
}

impl AgeTrace {
    /// Reconstructs the sample path from a packet log sorted by arrival time.
    ///
    /// Without an explicit horizon the trace ends at the last event. A
    /// delivery and an arrival at the same instant are applied delivery first.
    pub fn build(log: &[PacketRecord], horizon: Option<f64>) -> Result<AgeTrace> {
        validate(log)?;
        let last_event = log
            .iter()
            .map(|p| p.departure.unwrap_or(p.arrival))
            .fold(0.0f64, f64::max);
        let horizon = match horizon {
            Some(h) => {
                if !(h.is_finite() && h >= 0.0) {
                    return Err(Error::Domain(format!(
                        "horizon must be finite and non-negative, got {h}"
                    )));
                }
                if h < last_event {
                    return Err(Error::Structural(format!(
                        "event at t = {last_event} lies beyond the horizon {h}"
                    )));
                }
                h
            }
            None => last_event,
        };

        let mut deliveries: Vec<(f64, f64)> = log.iter().filter_map(|p| p.departure.map(|d| (d, p.arrival))).collect();
        deliveries.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut segments = Vec::with_capacity(log.len() + deliveries.len() + 1);
        segments.push(Segment {
            start: 0.0,
            tx_stamp: 0.0,
            rx_stamp: 0.0,
        });
        let mut arrivals = Vec::with_capacity(log.len());

        let mut next_arrival = 0;
        let mut next_delivery = 0;
        loop {
            let a = log.get(next_arrival).map(|p| p.arrival);
            let d = deliveries.get(next_delivery).copied();
            let (time, event) = match (a, d) {
                (None, None) => break,
                (Some(ta), Some((td, generated))) if td <= ta => {
                    next_delivery += 1;
                    (td, Event::Delivery { generated })
                }
                (Some(ta), _) => {
                    next_arrival += 1;
                    (ta, Event::Arrival)
                }
                (None, Some((td, generated))) => {
                    next_delivery += 1;
                    (td, Event::Delivery { generated })
                }
            };
            let prev = *segments.last().expect("at least the initial segment");
            let mut seg = prev;
            seg.start = time;
            match event {
                Event::Arrival => seg.tx_stamp = time,
                Event::Delivery { generated } => seg.rx_stamp = prev.rx_stamp.max(generated),
            }
            if time == prev.start {
                *segments.last_mut().unwrap() = seg;
            } else {
                segments.push(seg);
            }
            if let Event::Arrival = event {
                arrivals.push((time, segments.len() - 1));
            }
        }
        Ok(AgeTrace {
            segments,
            horizon,
            arrivals,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// End of segment `i`.
    pub fn segment_end(&self, i: usize) -> f64 {
        self.segments.get(i + 1).map_or(self.horizon, |s| s.start)
    }

    fn segment_at(&self, t: f64) -> &Segment {
        let idx = self.segments.partition_point(|s| s.start <= t);
        &self.segments[idx.saturating_sub(1)]
    }

    /// Value of `metric` at time `t` (right-continuous).
    pub fn value_at(&self, metric: Metric, t: f64) -> f64 {
        let seg = self.segment_at(t);
        match metric {
            Metric::Gamma => seg.gamma(),
            Metric::DeltaR => t - seg.rx_stamp,
            Metric::DeltaT => t - seg.tx_stamp,
        }
    }

    /// Exact `int_0^T metric(t)^k dt`.
    pub fn integrate_power(&self, metric: Metric, k: u32) -> f64 {
        self.integrate_power_over(metric, k, 0.0, self.horizon)
    }

    /// Exact `int_from^to metric(t)^k dt`, with the window clipped to `[0, T]`.
    pub fn integrate_power_over(&self, metric: Metric, k: u32, from: f64, to: f64) -> f64 {
        self.window_integrals(metric, k, from, to, 1)[0]
    }

    /// Integrals of `metric^k` over `batches` equal-length sub-windows of
    /// `[from, to]`, computed in one pass.
    pub fn window_integrals(&self, metric: Metric, k: u32, from: f64, to: f64, batches: usize) -> Vec<f64> {
        let batches = batches.max(1);
        let mut out = vec![0.0; batches];
        let from = from.max(0.0);
        let to = to.min(self.horizon);
        if to <= from {
            return out;
        }
        let width = (to - from) / batches as f64;
        let boundary = |j: usize| if j == batches { to } else { from + width * j as f64 };
        let first = self.segments.partition_point(|s| s.start <= from).saturating_sub(1);
        let mut batch = 0;
        for i in first..self.segments.len() {
            let seg = &self.segments[i];
            let mut x0 = seg.start.max(from);
            let x1 = self.segment_end(i).min(to);
            while x0 < x1 {
                while batch + 1 < batches && boundary(batch + 1) <= x0 {
                    batch += 1;
                }
                let stop = x1.min(boundary(batch + 1));
                out[batch] += seg.integrate(metric, k, x0, stop);
                if stop <= x0 {
                    break;
                }
                x0 = stop;
            }
            if x1 >= to {
                break;
            }
        }
        out
    }

    /// `integrate_power / T`.
    pub fn time_average(&self, metric: Metric, k: u32) -> Result<f64> {
        if self.horizon <= 0.0 {
            return Err(Error::Domain("time average over an empty horizon".into()));
        }
        Ok(self.integrate_power(metric, k) / self.horizon)
    }

    /// For each arrival, its time and the relative age on the segment that
    /// begins there. This equals the receiver age at the arrival instant.
    pub fn samples_at_arrivals(&self) -> Vec<(f64, f64)> {
        self.arrivals
            .iter()
            .map(|&(t, idx)| (t, self.segments[idx].gamma()))
            .collect()
    }
}

fn validate(log: &[PacketRecord]) -> Result<()> {
    let mut prev: Option<f64> = None;
    for p in log {
        if !p.arrival.is_finite() || p.arrival < 0.0 {
            return Err(Error::Structural(format!(
                "packet {}: invalid arrival time {}",
                p.id, p.arrival
            )));
        }
        if let Some(t) = prev {
            if p.arrival <= t {
                return Err(Error::Structural(format!(
                    "packet {}: arrival {} does not follow previous arrival {t}",
                    p.id, p.arrival
                )));
            }
        }
        prev = Some(p.arrival);
        if let Some(s) = p.service_start {
            if s < p.arrival {
                return Err(Error::Structural(format!(
                    "packet {}: service starts before arrival",
                    p.id
                )));
            }
        }
        match (p.departure, p.outcome) {
            (Some(d), Outcome::Delivered) => {
                if d < p.service_start.unwrap_or(p.arrival) {
                    return Err(Error::Structural(format!(
                        "packet {}: departure {d} precedes arrival or service start",
                        p.id
                    )));
                }
            }
            (Some(_), other) => {
                return Err(Error::Structural(format!(
                    "packet {}: outcome {other:?} with a departure time",
                    p.id
                )))
            }
            (None, Outcome::Delivered) => {
                return Err(Error::Structural(format!(
                    "packet {}: delivered without a departure time",
                    p.id
                )))
            }
            (None, _) => {}
        }
    }
    Ok(())
}
