//! Character sums, L-series and their unit roots.

pub mod cyclotomic;

pub use cyclotomic::{CycRational, CyclotomicInteger};
pub mod sums;

pub use sums::{exp_sum, exp_sum_total, torus_sum, TorusTerm};
pub mod lseries;

pub use lseries::{l_series, rational_recover, signed_power, LSeriesReport, SeriesCoeffs};
pub mod unitroot;

pub use unitroot::{
    assemble_unit_l, fiber_l_poly, fiber_unit_root, fiber_unit_root_to, fiber_unit_roots, fiber_unit_roots_to, ratio_unit_root, series_unit_root,
    unit_l_degree, unit_l_function, unit_l_gap, unit_l_root, unit_root, FiberContext,
};
