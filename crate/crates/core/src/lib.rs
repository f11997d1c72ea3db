//! Relative age of information for single-server queues.
//!
//! The crate covers four pieces that are used together:
//!
//! * [`service`]: exponential and deterministic service laws with their
//!   moments, MGFs and residual-time laws.
//! * [`age`]: exact sample-path accounting of the receiver age, the
//!   transmitter age and their difference `Gamma` from a packet log.
//! * [`sim`]: a discrete-event simulator for FCFS, preemptive, blocking and
//!   replace-in-buffer service with batch-means error bars.
//! * [`analytic`]: closed-form moments under a named formula catalog, plus
//!   quadrature of the conditional-area integrals.
//!
//! [`bench`] ties the analytic and simulated values together into sweeps,
//! verification reports and figure data.

/// Serde through the `Display`/`FromStr` tags used on the command line.
macro_rules! serde_via_tag {
    ($($ty:ty),+) => {$(
        impl serde::Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> serde::Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let text = <std::borrow::Cow<'de, str>>::deserialize(d)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    )+};
}

pub mod age;
pub mod analytic;
pub mod bench;
pub mod error;
pub mod eventlog;
pub mod quad;
pub mod service;
pub mod sim;

pub use age::{AgeTrace, Metric, Outcome, PacketRecord};
pub use analytic::{AnalyticQuery, AnalyticResult, AreaMethod, FormulaId};
pub use error::{Error, Result};
pub use service::{ServiceFamily, ServiceModel};
pub use sim::{Discipline, SimConfig, SimOutput};

serde_via_tag!(Discipline, ServiceFamily, Metric, FormulaId);
