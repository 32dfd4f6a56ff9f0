//! File formats and the benchmark harness behind the `mvfhe` binary.

pub mod bench;
pub mod container;

pub use container::{Container, FormatError, Kind, Payload};
