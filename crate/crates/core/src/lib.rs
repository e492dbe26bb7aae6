//! Detector-efficiency analysis of two-site and n-site Clauser-Horne
//! inequalities.
//!
//! The crate builds the near-critical states `|δ(ε)>`, evaluates the
//! efficiency-scaled inequalities on quantum states and on deterministic
//! local strategies, and finds violations through the top eigenvalue of
//! the measurement operator. The critical efficiency for n sites is
//! `n / (2n - 1)`.

pub mod delta;
pub mod efficiency;
pub mod eigen;
pub mod error;
pub mod inequality;
pub mod search;
pub mod state;

pub use delta::{build_delta, k_value, theta_from_epsilon, DeltaParams};
pub use efficiency::{
    build_b_operator, comparison_eta_grid, critical_eta, critical_eta_limit, delta_vs_eigen_ratio, minimal_n,
    violation_exists, violation_scan, BoundReport, EfficiencyModel, RatioReport, ViolationScan, VIOLATION_TOL,
};
pub use eigen::{eigenvalues, max_eigenvalue, top_eigenpair};
pub use error::{Error, Result};
pub use inequality::{
    build_nsite_ch, build_two_site_ch, evaluate_quantum, evaluate_strategy, lhv_certify, ChInequality,
    DeterministicStrategy, InequalityTerm, LhvReport, CERTIFY_TOL, MAX_LHV_SITES,
};
pub use search::SearchGrid;
pub use state::{
    apply_operator_expectation, joint_probability, outcome_one_vector, HermitianOperator, MeasurementContext,
    OutcomePattern, Requirement, Setting, StateVector,
};
