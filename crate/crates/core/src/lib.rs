//! Analysis of weighted birth-death chains and graphs built from them.

pub mod asym;
pub mod capacity;
pub mod constructions;
pub mod corpus;
pub mod criteria;
pub mod error;
pub mod expr;
pub mod graph;
pub mod green;
pub mod harmonic;
pub mod linalg;
pub mod numeric;
pub mod report;
pub mod schrodinger;
pub mod sequence;
pub mod series;

pub use error::{Error, Result};
