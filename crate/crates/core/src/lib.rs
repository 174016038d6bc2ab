//! Lattice Green functions of the d-dimensional face-centred cubic lattice:
//! series generation, ODE guessing modulo primes, exact reconstruction,
//! differential-operator analysis, Landau singularities and return probabilities.

pub mod diffop;
pub mod error;
pub mod exec;
pub mod field;
pub mod guess;
pub mod landau;
pub mod linalg;
pub mod modular;
pub mod pipeline;
pub mod poly;
pub mod retprob;
pub mod series;

pub use error::{Error, Result};
