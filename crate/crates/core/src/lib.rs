//! Unit roots of toric exponential sums.
//!
//! Two independent routes to the same p-adic numbers: brute-force character
//! sums over finite fields and Dwork's trace formula, plus infinite symmetric
//! powers of the Frobenius operator and a ratio-of-series formula for the unit
//! root of the unit root L-function.

pub mod charsum;
pub mod dwork;
pub mod error;
pub mod family;
pub mod ffield;
pub mod formula;
pub mod geometry;
pub mod padic;
pub mod par;
pub mod pseries;
pub mod sympow;

pub use error::{Error, Result};
