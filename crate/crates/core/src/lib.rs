//! Free-fermion simulation and critical-dynamics analysis of the disordered
//! kicked Ising chain.

pub mod analysis;
pub mod eigenstates;
pub mod error;
pub mod linalg;
pub mod majorana;
pub mod model;
pub mod observables;
pub mod pipeline;
pub mod store;

pub use error::{Error, Result};
