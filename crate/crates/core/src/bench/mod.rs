//! Sweeps, verification reports and figure data.

pub mod config;
pub mod figure;
pub mod rows;
pub mod sweep;
pub mod verify;

pub use figure::{render_svg, Preset};
pub use rows::{read_rows, write_rows, Row, Verdict};
pub use sweep::{log_grid, run_sweep, SweepSpec, Tolerance};
pub use verify::{default_suite, verify, VerificationReport};
