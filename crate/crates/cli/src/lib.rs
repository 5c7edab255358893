//! Library side of the `inclab` binary: configuration, artifacts, and the
//! pipeline runner, exposed so integration tests can drive them directly.

pub mod artifact;
pub mod config;
pub mod pipeline;
