//! Extremal point-hyperplane configurations on the truncated paraboloid:
//! exact construction, counting, and transformation primitives.
//!
//! The crate builds the lattice point set P on x_d = x_1^2 + ... +
//! x_{d-1}^2, the sum-defined hyperplane family H_v, and their dual,
//! inverted, and sheared images; counts incidences, additive energy, and
//! pairwise intersection multiplicities exactly; and checks the predicted
//! growth exponents empirically.
//!
//! Counting kernels are data-parallel via rayon under the default
//! `parallel` feature; every kernel keeps a sequential twin (`*_seq`) with
//! bitwise-identical output.

pub mod conics;
pub mod energy;
pub mod error;
pub mod exec;
pub mod exponents;
pub mod hyperplanes;
pub mod incidence;
pub mod lattice;
pub mod rational;
pub mod rng;
pub mod sparsifier;
pub mod transforms;

pub use error::{Error, Result};
