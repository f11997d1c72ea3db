//! Builds an age trace by hand, integrates it exactly and round-trips the
//! packet log through the CSV event-log format.
//!
//! ```sh
//! cargo run --example age_trace
//! ```

use raoi::eventlog;
use raoi::{AgeTrace, Metric, Outcome, PacketRecord};

fn main() -> raoi::Result<()> {
    // packets arrive at 1 and 3 and each takes one time unit
    let log = vec![
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
    let trace = AgeTrace::build(&log, Some(5.0))?;

    println!("segments on [0, {}]:", trace.horizon());
    for (i, seg) in trace.segments().iter().enumerate() {
        println!(
            "  [{:.1}, {:.1})  gamma = {:.1}  delta_R(start) = {:.1}",
            seg.start,
            trace.segment_end(i),
            seg.gamma(),
            trace.value_at(Metric::DeltaR, seg.start)
        );
    }
    for (metric, k) in [
        (Metric::Gamma, 1),
        (Metric::Gamma, 2),
        (Metric::DeltaR, 1),
        (Metric::DeltaT, 1),
    ] {
        println!(
            "  integral of {metric}^{k} = {:<6} time average = {}",
            trace.integrate_power(metric, k),
            trace.time_average(metric, k)?
        );
    }
    println!(
        "relative age just after each arrival: {:?}",
        trace.samples_at_arrivals()
    );

    let mut buf = Vec::new();
    eventlog::write_log(&mut buf, &log, Some(trace.horizon()))?;
    println!("\nevent log:\n{}", String::from_utf8_lossy(&buf));
    let back = eventlog::read_log(buf.as_slice())?;
    assert_eq!(back.records, log);
    println!("read back {} records, horizon {:?}", back.records.len(), back.horizon);
    Ok(())
}
