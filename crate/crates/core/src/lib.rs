pub mod algebra;
pub mod budget;
pub mod classify;
pub mod cli;
pub mod equality;
pub mod error;
pub mod gen;
pub mod model;
pub mod oracle;
pub mod qcsp;
pub mod reductions;
pub mod solvers;

pub use budget::Budget;
pub use error::{Error, Result};
