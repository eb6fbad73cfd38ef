//! Classical self-testing of quantum gates.
//!
//! Gates are CPTP maps on a few qubits. A tuple of gates is characterized,
//! up to a global basis rotation, by a finite set of experimental equations:
//! probabilities of measuring an outcome after running a word of gates on a
//! basis state. The tester estimates those probabilities through an oracle
//! and accepts iff they all match.

pub mod angle;
pub mod bloch;
pub mod channel;
pub mod cli;
pub mod equations;
pub mod error;
pub mod family;
pub mod oracle;
pub mod qstate;
pub mod roblab;
pub mod sample;
pub mod tester;

pub use angle::{Angle, PiFraction};
pub use channel::{Channel, GateSpec};
pub use equations::{EquationSet, ExperimentalEquation};
pub use error::{Error, Result};
pub use family::Family;
pub use oracle::Oracle;
pub use qstate::{BitString, DensityMatrix};
pub use tester::{run_tester, TesterVerdict, Verdict};

/// Version string embedded in every JSON report.
pub const TOOL_VERSION: &str = concat!("qselftest ", env!("CARGO_PKG_VERSION"));
