//! Hamilton-Jacobi constraint analysis of classical field theories with
//! exact symbolic tensor algebra.

pub mod error;
pub mod ansatz;
pub mod bracket;
pub mod expr;
pub mod hj;
pub mod linalg;
pub mod parse;
pub mod phase;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod reference;

pub use error::{Error, Result};
