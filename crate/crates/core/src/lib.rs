pub mod certificates;
pub mod cli;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod models;
pub mod monitor;
pub mod schedule;
pub mod semigroup;
pub mod system;

pub use error::{Error, Result};
