//! Infinite symmetric powers of the fiber Frobenius, the operators `β_{κ,t̄}`
//! and `β*_{κ,t̄}`, their Fredholm determinants and the checks relating them.

pub mod alpha;
pub mod basis;
pub mod checks;
pub mod euler;

pub use alpha::{beta_matrix, dual_beta_matrix, linear_images, sym_family, Side, SymMatrixFamily, SymPower};
pub use basis::{LambdaSet, SymBasis, SymIndex, SymSeries, SymSpace, SymTruncation};
