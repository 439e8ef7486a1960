//! Dwork operators: splitting function, Frobenius series, fiber matrices,
//! Fredholm determinants and the trace formula.

pub mod matrix;
pub mod ops;
pub mod series;
pub mod theta;

pub use matrix::{fredholm, ord_pitilde, FredholmSeries, NuclearMatrix};
pub use ops::{
    check_fiber_l, default_cap, dual_dwork_matrix, dwork_matrix, fiber_l_via_dwork, next_weight, fredholm_unit_root, total_family_dual_matrix, total_family_matrix,
    total_family_slice, total_trace_check, twisted_product,
    trace_formula_check, working_precision, FiberOperator, FiberSide, TraceCheck,
};
pub use series::{frobenius_one, frobenius_series, lift_family, lift_residue, FrobeniusSeries, LiftedFamily, SparseSeries};
pub use theta::{embed_cyc_rational, embed_cyclotomic, pi_of, theta, zeta_embed, SplittingSeries};
