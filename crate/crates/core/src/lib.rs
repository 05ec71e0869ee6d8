pub mod calculus;
pub mod chart;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod jacobi;
pub mod lifts;
pub mod linalg;
pub mod submanifolds;
pub mod symmetry;
pub mod tolerances;

pub use chart::{CotangentVec, DarbouxChart, Point, TangentVec};
pub use error::{Error, EvalError, ParseError, Result};
