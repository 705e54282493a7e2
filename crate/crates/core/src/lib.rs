pub mod cht;
pub mod cli;
pub mod error;
pub mod harness;
pub mod mapping;
pub mod optimizer;
pub mod par;
pub mod problem;

pub use error::{Error, Result};
