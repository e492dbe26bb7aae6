//! Critical detector efficiencies and the measurement operator.
//!
//! Detection is modeled as independent with a constant efficiency `eta`,
//! so a k-fold coincidence probability is scaled by `eta^k`. Moving every
//! term of the n-site inequality to one side gives the operator
//!
//! ```text
//! B_n = eta^n     [ sum P(one B, other A) + (n-1) P(all A) - sum P(even #B >= 2, other A) ]
//!     - eta^(n-1) [ sum P(all A but one) ]
//! ```
//!
//! with each `P` replaced by its pattern projector. For two sites this is
//! the familiar `eta^2 (P(A1A2) + P(A1B2) + P(B1A2) - P(B1B2)) - eta (P(A1) + P(A2))`.
//! A state violates the inequality at efficiency `eta` iff `<psi|B_n|psi> > 0`.

use std::f64::consts::FRAC_PI_2;

use crate::delta::{build_delta, DeltaParams};
use crate::eigen::{max_eigenvalue, MAX_DENSE_DIM};
use crate::error::{Error, Result};
use crate::inequality::{build_nsite_ch, check_eta, evaluate_quantum, ChInequality};
use crate::search::SearchGrid;
use crate::state::{check_theta, joint_probability, HermitianOperator, StateVector};

/// Eigenvalues at or below this are classified as "no violation".
pub const VIOLATION_TOL: f64 = 1e-9;

/// Denominators at or below this fraction of the numerator leave the ratio
/// undefined (above 1e14). Relative, because `K` shrinks like `sin^{2n} theta`.
const DENOMINATOR_TOL: f64 = 1e-14;
const NO_VIOLATION_TOL: f64 = 1e-12;

/// Sites supported by the eigenvalue scans.
pub const SCAN_SITES: std::ops::RangeInclusive<usize> = 2..=6;

/// Independent detection at constant efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyModel {
    eta: f64,
}

impl EfficiencyModel {
    pub fn new(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Scale factor for a k-fold coincidence.
    pub fn coincidence_weight(&self, k: usize) -> f64 {
        self.eta.powi(k as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    /// `tan(theta / 2)`, the epsilon that generates the measurement angle.
    pub epsilon: f64,
    pub critical_eta: f64,
    pub numerator: f64,
    pub denominator: f64,
}

/// Splits the inequality into `(S, D)` where the residual at efficiency
/// `eta` equals `eta^n D - eta^(n-1) S`.
fn split_terms(ineq: &ChInequality, state: &StateVector, theta: f64) -> Result<(f64, f64)> {
    let n = ineq.n_sites();
    let (mut singles, mut full) = (0.0, 0.0);
    for (sign, term) in ineq
        .lhs()
        .iter()
        .map(|t| (1.0, t))
        .chain(ineq.rhs().iter().map(|t| (-1.0, t)))
    {
        let p = joint_probability(state, &term.context(theta)?, term.pattern())?;
        let contribution = sign * term.coefficient() as f64 * p;
        if term.order() == n {
            full += contribution;
        } else {
            debug_assert_eq!(term.order(), n - 1);
            singles -= contribution;
        }
    }
    Ok((singles, full))
}

/// Efficiency above which `state` measured at `theta` violates the
/// n-site inequality.
pub fn critical_eta(state: &StateVector, theta: f64, n: usize) -> Result<BoundReport> {
    if state.n_sites() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: state.n_sites(),
        });
    }
    check_theta(theta)?;
    let ineq = build_nsite_ch(n)?;
    let (numerator, denominator) = split_terms(&ineq, state, theta)?;
    if denominator <= DENOMINATOR_TOL * numerator.max(0.0) {
        return Err(Error::NoViolationPossible(denominator));
    }
    Ok(BoundReport {
        n,
        epsilon: (theta / 2.0).tan(),
        critical_eta: numerator / denominator,
        numerator,
        denominator,
    })
}

/// `n / (2n - 1)`.
pub fn critical_eta_limit(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidN(n));
    }
    Ok(n as f64 / (2 * n - 1) as f64)
}

pub fn build_b_operator(n: usize, theta: f64, eta: f64) -> Result<HermitianOperator> {
    check_eta(eta)?;
    check_theta(theta)?;
    if n < 2 {
        return Err(Error::InvalidN(n));
    }
    let dim = if n < usize::BITS as usize {
        1usize << n
    } else {
        usize::MAX
    };
    if dim > MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge(dim));
    }
    let ineq = build_nsite_ch(n)?;
    let mut op = HermitianOperator::zeros(n);
    for (sign, term) in ineq
        .lhs()
        .iter()
        .map(|t| (1.0, t))
        .chain(ineq.rhs().iter().map(|t| (-1.0, t)))
    {
        let projector = HermitianOperator::pattern_projector(&term.context(theta)?, term.pattern())?;
        op.add_scaled(sign * term.coefficient() as f64 * term.weight(eta), &projector)?;
    }
    Ok(op)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationScan {
    pub exists: bool,
    pub best_theta: f64,
    pub best_eigenvalue: f64,
}

/// Largest eigenvalue of `B_n(theta, eta)` maximized over `theta` in
/// `(0, pi/2)`, classified against `tol`.
pub fn violation_scan(n: usize, eta: f64, grid: &SearchGrid, tol: f64) -> Result<ViolationScan> {
    if !SCAN_SITES.contains(&n) {
        return Err(Error::InvalidN(n));
    }
    if grid.points < 100 {
        return Err(Error::InvalidGrid(format!(
            "{} points; the theta scan needs at least 100",
            grid.points
        )));
    }
    check_eta(eta)?;
    let (best_theta, best_eigenvalue) = grid.maximize(0.0, FRAC_PI_2, |theta| {
        max_eigenvalue(&build_b_operator(n, theta, eta)?)
    })?;
    Ok(ViolationScan {
        exists: best_eigenvalue > tol,
        best_theta,
        best_eigenvalue,
    })
}

pub fn violation_exists(n: usize, eta: f64, grid: &SearchGrid) -> Result<ViolationScan> {
    violation_scan(n, eta, grid, VIOLATION_TOL)
}

/// Smallest `n >= 2` with `n / (2n - 1) < eta`.
pub fn minimal_n(eta: f64) -> Result<u64> {
    if eta.is_nan() || eta <= 0.5 {
        return Err(Error::EtaTooSmall(eta));
    }
    check_eta(eta)?;
    let below = |n: u64| (n as f64) / ((2 * n - 1) as f64) < eta;
    // closed form: smallest integer strictly above eta / (2 eta - 1)
    let mut n = ((eta / (2.0 * eta - 1.0)).floor() as u64 + 1).max(2);
    while !below(n) {
        n += 1;
    }
    while n > 2 && below(n - 1) {
        n -= 1;
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    pub n: usize,
    pub eta: f64,
    pub ratio: f64,
    /// Best residual of the delta family and the epsilon attaining it.
    pub delta_violation: f64,
    pub best_epsilon: f64,
    /// Best top eigenvalue over theta and the theta attaining it.
    pub eigen_violation: f64,
    pub best_theta: f64,
}

/// Largest violation reachable with `|δ(ε)>` at its own angle, relative
/// to the largest violation over all states and angles.
pub fn delta_vs_eigen_ratio(n: usize, eta: f64, grid: &SearchGrid) -> Result<RatioReport> {
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidN(n));
    }
    check_eta(eta)?;
    let critical = critical_eta_limit(n)?;
    if eta <= critical {
        return Err(Error::EtaBelowCritical { eta, critical });
    }
    let ineq = build_nsite_ch(n)?;
    let (best_epsilon, delta_violation) = grid.maximize(0.0, 1.0, |epsilon| {
        let params = DeltaParams::new(n, epsilon)?;
        evaluate_quantum(&ineq, &build_delta(&params)?, params.theta(), eta)
    })?;
    let scan = violation_exists(n, eta, grid)?;
    if scan.best_eigenvalue <= NO_VIOLATION_TOL {
        return Err(Error::NoViolation(scan.best_eigenvalue));
    }
    Ok(RatioReport {
        n,
        eta,
        ratio: delta_violation / scan.best_eigenvalue,
        delta_violation,
        best_epsilon,
        eigen_violation: scan.best_eigenvalue,
        best_theta: scan.best_theta,
    })
}

/// The efficiency grid `{critical + 0.02, critical + 0.03, ...}` up to `upper`.
pub fn comparison_eta_grid(n: usize, upper: f64) -> Result<Vec<f64>> {
    let start = critical_eta_limit(n)? + 0.02;
    Ok((0..)
        .map(|i| start + 0.01 * i as f64)
        .take_while(|&eta| eta <= upper + 1e-12)
        .collect())
}
