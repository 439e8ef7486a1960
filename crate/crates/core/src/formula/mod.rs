//! The unit root as a ratio of constant terms of `exp πH`: the expansion, the
//! eigenvector `η` of the dual operator, and the verification against the
//! other routes.

pub mod eta;
pub mod expansion;
pub mod ratio;
pub mod verify;

pub use eta::{build_eta, eigen_residual, EigenReport, EtaValues, EtaVector};
pub use expansion::{exp_coefficients, exp_pi_h, h_support, ExpCaps, ExpPiHSeries, LambdaPoly};
pub use ratio::{
    dual_power_iteration, f_ratio_dual, f_ratio_eval, f_ratio_m_at, f_ratio_series, f_ratio_truncated, lambda_point, PowerIteration,
    RatioConfig, RatioMethod, RatioValue,
};
pub use verify::{euler_degree_for, total_weight_for, verify_main_theorem, verify_main_theorem_all, MainTheoremReport, Route, VerifyConfig};
