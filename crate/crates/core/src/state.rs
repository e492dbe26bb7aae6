//! State vectors over n two-level sites and joint outcome probabilities
//! under local projective measurements.
//!
//! Amplitudes are indexed little-endian: bit `i` of the index is the
//! B-basis label of site `i`. Every site has two settings. Setting B
//! measures in the reference basis; setting A measures in the basis
//! rotated by the context angle `theta`, with outcome vector
//! `|1_A> = sin(theta)|0_B> + cos(theta)|1_B>`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest site count a state vector may have.
pub const MAX_SITES: usize = 30;

const NORM_TOL: f64 = 1e-12;
const ZERO_NORM: f64 = 1e-15;
const HERMITIAN_TOL: f64 = 1e-12;
const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Setting {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Requirement {
    /// Outcome 1 is required at this site.
    One,
    /// The site is marginalized.
    Any,
}

/// Per-site setting choice with the rotation angle shared by every A setting.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementContext {
    settings: Vec<Setting>,
    theta: f64,
}

impl MeasurementContext {
    pub fn new(settings: Vec<Setting>, theta: f64) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::InvalidN(0));
        }
        check_theta(theta)?;
        Ok(Self { settings, theta })
    }

    /// Every site measured with the same setting.
    pub fn uniform(n_sites: usize, setting: Setting, theta: f64) -> Result<Self> {
        Self::new(vec![setting; n_sites], theta)
    }

    pub fn settings(&self) -> &[Setting] {
        &self.settings
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n_sites(&self) -> usize {
        self.settings.len()
    }

    /// Measurement angle at `site`: theta for A, zero for B.
    pub fn angle(&self, site: usize) -> f64 {
        match self.settings[site] {
            Setting::A => self.theta,
            Setting::B => 0.0,
        }
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && (0.0..=FRAC_PI_2 + 1e-15).contains(&theta) {
        Ok(())
    } else {
        Err(Error::ThetaOutOfRange(theta))
    }
}

/// Joint "= 1" event over all sites. The all-`Any` pattern is rejected.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomePattern(Vec<Requirement>);

impl OutcomePattern {
    pub fn new(requirements: Vec<Requirement>) -> Result<Self> {
        if requirements.is_empty() {
            return Err(Error::InvalidN(0));
        }
        if !requirements.contains(&Requirement::One) {
            return Err(Error::EmptyPattern);
        }
        Ok(Self(requirements))
    }

    pub fn all_one(n_sites: usize) -> Result<Self> {
        Self::new(vec![Requirement::One; n_sites])
    }

    /// Outcome 1 at every site except `excluded`, which is marginalized.
    pub fn all_but(n_sites: usize, excluded: usize) -> Result<Self> {
        let mut req = vec![Requirement::One; n_sites];
        if excluded >= n_sites {
            return Err(Error::DimensionMismatch {
                expected: n_sites,
                found: excluded + 1,
            });
        }
        req[excluded] = Requirement::Any;
        Self::new(req)
    }

    pub fn requirements(&self) -> &[Requirement] {
        &self.0
    }

    pub fn n_sites(&self) -> usize {
        self.0.len()
    }

    /// Number of sites where outcome 1 is required.
    pub fn order(&self) -> usize {
        self.0.iter().filter(|r| **r == Requirement::One).count()
    }

    pub fn is_one(&self, site: usize) -> bool {
        self.0[site] == Requirement::One
    }
}

/// Normalized pure state of n two-level sites.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Normalizes `raw` into a state of `n_sites` sites.
    pub fn new(n_sites: usize, raw: Vec<Complex64>) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(Error::InvalidN(n_sites));
        }
        let expected = 1usize << n_sites;
        if raw.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: raw.len(),
            });
        }
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= ZERO_NORM {
            return Err(Error::ZeroVector);
        }
        let amplitudes = raw.into_iter().map(|a| a / norm).collect();
        Ok(Self { n_sites, amplitudes })
    }

    pub fn from_real(n_sites: usize, raw: &[f64]) -> Result<Self> {
        Self::new(n_sites, raw.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis state; bit `i` of `index` is the B-outcome of site `i`.
    pub fn basis(n_sites: usize, index: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(Error::InvalidN(n_sites));
        }
        let dim = 1usize << n_sites;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index + 1,
            });
        }
        let mut raw = vec![Complex64::new(0.0, 0.0); dim];
        raw[index] = Complex64::new(1.0, 0.0);
        Self::new(n_sites, raw)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// The outcome-1 vector of a measurement rotated by `phi` from the B basis,
/// `sin(phi)|0_B> + cos(phi)|1_B>`.
pub fn outcome_one_vector(phi: f64) -> [Complex64; 2] {
    let (s, c) = phi.sin_cos();
    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)]
}

/// Applies `|v><v|` to `site` of the little-endian amplitude vector in place.
pub(crate) fn apply_local_projector(amps: &mut [Complex64], site: usize, v: [Complex64; 2]) {
    let bit = 1usize << site;
    for lo in 0..amps.len() {
        if lo & bit != 0 {
            continue;
        }
        let hi = lo | bit;
        let overlap = v[0].conj() * amps[lo] + v[1].conj() * amps[hi];
        amps[lo] = v[0] * overlap;
        amps[hi] = v[1] * overlap;
    }
}

fn check_dims(state: &StateVector, context: &MeasurementContext, pattern: &OutcomePattern) -> Result<()> {
    let n = state.n_sites();
    for found in [context.n_sites(), pattern.n_sites()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    Ok(())
}

/// Probability that every `One` site of `pattern` yields outcome 1 when
/// `state` is measured in `context`.
pub fn joint_probability(state: &StateVector, context: &MeasurementContext, pattern: &OutcomePattern) -> Result<f64> {
    check_dims(state, context, pattern)?;
    let mut projected = state.amplitudes.clone();
    for site in (0..state.n_sites()).filter(|&s| pattern.is_one(s)) {
        apply_local_projector(&mut projected, site, outcome_one_vector(context.angle(site)));
    }
    let p: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
    debug_assert!(p > -NORM_TOL && p < 1.0 + NORM_TOL, "probability {p} out of range");
    Ok(p.clamp(0.0, 1.0))
}

/// Dense Hermitian operator on the 2^n-dimensional space of n sites.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    n_sites: usize,
    matrix: DMatrix<Complex64>,
}

impl HermitianOperator {
    /// Wraps `matrix` after checking it is Hermitian to within 1e-12 entrywise.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.ncols(),
            });
        }
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two().max(2),
                found: dim,
            });
        }
        let deviation = hermitian_deviation(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self {
            n_sites: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    pub fn zeros(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        Self {
            n_sites,
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        Self {
            n_sites,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    /// Projector onto the event described by `pattern` under `context`:
    /// `|1_phi><1_phi|` at `One` sites, identity at `Any` sites.
    pub fn pattern_projector(context: &MeasurementContext, pattern: &OutcomePattern) -> Result<Self> {
        let n = context.n_sites();
        if pattern.n_sites() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: pattern.n_sites(),
            });
        }
        if n > MAX_SITES {
            return Err(Error::InvalidN(n));
        }
        let locals: Vec<Option<[Complex64; 2]>> = (0..n)
            .map(|s| pattern.is_one(s).then(|| outcome_one_vector(context.angle(s))))
            .collect();
        let dim = 1usize << n;
        let matrix = DMatrix::from_fn(dim, dim, |r, c| {
            let mut entry = Complex64::new(1.0, 0.0);
            for (site, local) in locals.iter().enumerate() {
                let (rb, cb) = ((r >> site) & 1, (c >> site) & 1);
                match local {
                    Some(v) => entry *= v[rb] * v[cb].conj(),
                    None if rb != cb => return Complex64::new(0.0, 0.0),
                    None => {}
                }
            }
            entry
        });
        Ok(Self { n_sites: n, matrix })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// `self += alpha * other`; a real combination stays Hermitian.
    pub fn add_scaled(&mut self, alpha: f64, other: &Self) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        self.matrix.zip_apply(&other.matrix, |a, b| *a += b * alpha);
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.matrix.apply(|a| *a *= alpha);
    }
}

pub(crate) fn hermitian_deviation(matrix: &DMatrix<Complex64>) -> f64 {
    let dim = matrix.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..dim {
        for c in r..dim {
            worst = worst.max((matrix[(r, c)] - matrix[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Real part of `<psi|op|psi>`, rejecting imaginary residues above 1e-10.
pub fn apply_operator_expectation(op: &HermitianOperator, state: &StateVector) -> Result<f64> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: state.dim(),
        });
    }
    let psi = state.amplitudes();
    let m = op.matrix();
    let mut total = Complex64::new(0.0, 0.0);
    for c in 0..psi.len() {
        if psi[c] == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut col = Complex64::new(0.0, 0.0);
        for r in 0..psi.len() {
            col += psi[r].conj() * m[(r, c)];
        }
        total += col * psi[c];
    }
    if total.im.abs() > IMAG_TOL {
        return Err(Error::NotHermitian {
            deviation: total.im.abs(),
        });
    }
    Ok(total.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn complex_vec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
            .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
            .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
    }

    fn settings_vec(n: usize) -> impl Strategy<Value = Vec<Setting>> {
        prop::collection::vec(prop_oneof![Just(Setting::A), Just(Setting::B)], n)
    }

    #[test]
    fn make_state_normalizes() {
        let s = StateVector::from_real(1, &[1.0, 0.0]).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0)]);

        let s = StateVector::from_real(1, &[3.0, 4.0]).unwrap();
        assert!((s.amplitudes()[0] - c(0.6)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(0.8)).norm() < 1e-15);

        let s = StateVector::from_real(2, &[1.0; 4]).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a - c(0.5)).norm() < 1e-15));
    }

    #[test]
    fn make_state_errors() {
        assert_eq!(StateVector::from_real(2, &[0.0; 4]), Err(Error::ZeroVector));
        assert_eq!(
            StateVector::from_real(2, &[1.0; 3]),
            Err(Error::LengthMismatch { expected: 4, found: 3 })
        );
        assert_eq!(StateVector::from_real(0, &[1.0]), Err(Error::InvalidN(0)));
    }

    #[test]
    fn outcome_vectors() {
        let v = outcome_one_vector(0.0);
        assert_eq!(v, [c(0.0), c(1.0)]);
        let v = outcome_one_vector(FRAC_PI_2);
        assert!((v[0] - c(1.0)).norm() < 1e-15 && v[1].norm() < 1e-15);
        let theta = 2.0 * 0.1f64.atan();
        let v = outcome_one_vector(theta);
        // 2 atan(x): sin = 2x/(1+x^2), cos = (1-x^2)/(1+x^2)
        assert!((v[0].re - 0.2 / 1.01).abs() < 1e-15);
        assert!((v[1].re - 0.99 / 1.01).abs() < 1e-15);
        assert!((v[0].re - 0.19803).abs() < 2e-5 && (v[1].re - 0.98020).abs() < 2e-5);
    }

    #[test]
    fn joint_probability_basis_states() {
        let bb = MeasurementContext::uniform(2, Setting::B, 0.3).unwrap();
        let ones = OutcomePattern::all_one(2).unwrap();
        let s11 = StateVector::basis(2, 0b11).unwrap();
        assert!((joint_probability(&s11, &bb, &ones).unwrap() - 1.0).abs() < 1e-15);

        let s00 = StateVector::basis(2, 0).unwrap();
        let first = OutcomePattern::new(vec![Requirement::One, Requirement::Any]).unwrap();
        assert_eq!(joint_probability(&s00, &bb, &first).unwrap(), 0.0);
    }

    #[test]
    fn joint_probability_dimension_mismatch() {
        let s = StateVector::basis(2, 0).unwrap();
        let ctx = MeasurementContext::uniform(3, Setting::A, 0.1).unwrap();
        let pat = OutcomePattern::all_one(2).unwrap();
        assert_eq!(
            joint_probability(&s, &ctx, &pat),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        );
    }

    #[test]
    fn pattern_and_context_validation() {
        assert_eq!(
            OutcomePattern::new(vec![Requirement::Any, Requirement::Any]),
            Err(Error::EmptyPattern)
        );
        assert_eq!(
            MeasurementContext::uniform(2, Setting::A, 2.0),
            Err(Error::ThetaOutOfRange(2.0))
        );
        assert!(MeasurementContext::uniform(2, Setting::A, -0.1).is_err());
        assert!(MeasurementContext::uniform(2, Setting::A, FRAC_PI_2).is_ok());
    }

    #[test]
    fn expectation_of_identity_and_zero() {
        let s = StateVector::new(
            2,
            vec![Complex64::new(0.3, 0.1), c(-0.2), Complex64::new(0.0, 0.7), c(0.5)],
        )
        .unwrap();
        let one = apply_operator_expectation(&HermitianOperator::identity(2), &s).unwrap();
        assert!((one - 1.0).abs() < 1e-14);
        assert_eq!(
            apply_operator_expectation(&HermitianOperator::zeros(2), &s).unwrap(),
            0.0
        );
        assert!(matches!(
            apply_operator_expectation(&HermitianOperator::identity(3), &s),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        m[(0, 1)] = c(0.5);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian { .. })));
        let m = DMatrix::<Complex64>::identity(3, 3);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn imaginary_expectation_rejected() {
        // A non-Hermitian matrix smuggled past the constructor.
        let mut op = HermitianOperator::zeros(1);
        op.matrix[(0, 1)] = c(1.0);
        let s = StateVector::new(1, vec![c(1.0), Complex64::new(0.0, 1.0)]).unwrap();
        assert!(matches!(
            apply_operator_expectation(&op, &s),
            Err(Error::NotHermitian { .. })
        ));
    }

    /// Probability of a full outcome string, using the orthogonal outcome
    /// vector `(cos phi, -sin phi)` for outcome 0.
    fn full_outcome_probability(state: &StateVector, ctx: &MeasurementContext, outcomes: usize) -> f64 {
        let mut amps = state.amplitudes().to_vec();
        for site in 0..state.n_sites() {
            let phi = ctx.angle(site);
            let v = if outcomes >> site & 1 == 1 {
                outcome_one_vector(phi)
            } else {
                [c(phi.cos()), c(-phi.sin())]
            };
            apply_local_projector(&mut amps, site, v);
        }
        amps.iter().map(|a| a.norm_sqr()).sum()
    }

    proptest! {
        #[test]
        fn full_outcomes_sum_to_one(
            (n, raw, settings) in (1usize..=4).prop_flat_map(|n| (Just(n), complex_vec(n), settings_vec(n))),
            theta in 0.0f64..FRAC_PI_2,
        ) {
            let state = StateVector::new(n, raw).unwrap();
            let ctx = MeasurementContext::new(settings, theta).unwrap();
            let total: f64 = (0..1usize << n).map(|o| full_outcome_probability(&state, &ctx, o)).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            // The all-ones outcome string matches the all-One pattern.
            let p = joint_probability(&state, &ctx, &OutcomePattern::all_one(n).unwrap()).unwrap();
            prop_assert!((p - full_outcome_probability(&state, &ctx, (1 << n) - 1)).abs() < 1e-12);
        }

        #[test]
        fn marginals_are_independent_of_remote_settings(
            (n, raw, settings, site) in (2usize..=4).prop_flat_map(|n| (Just(n), complex_vec(n), settings_vec(n), 0..n)),
            theta in 0.0f64..FRAC_PI_2,
        ) {
            let state = StateVector::new(n, raw).unwrap();
            let pattern = OutcomePattern::all_but(n, site).unwrap();
            let mut flipped = settings.clone();
            flipped[site] = match flipped[site] { Setting::A => Setting::B, Setting::B => Setting::A };
            let p = joint_probability(&state, &MeasurementContext::new(settings, theta).unwrap(), &pattern).unwrap();
            let q = joint_probability(&state, &MeasurementContext::new(flipped, theta).unwrap(), &pattern).unwrap();
            prop_assert!((p - q).abs() < 1e-12);
        }

        #[test]
        fn global_phase_invariance(
            (n, raw, settings) in (1usize..=4).prop_flat_map(|n| (Just(n), complex_vec(n), settings_vec(n))),
            theta in 0.0f64..FRAC_PI_2,
            phase in 0.0f64..std::f64::consts::TAU,
        ) {
            let rotated: Vec<_> = raw.iter().map(|a| a * Complex64::from_polar(1.0, phase)).collect();
            let ctx = MeasurementContext::new(settings, theta).unwrap();
            let pattern = OutcomePattern::all_one(n).unwrap();
            let p = joint_probability(&StateVector::new(n, raw).unwrap(), &ctx, &pattern).unwrap();
            let q = joint_probability(&StateVector::new(n, rotated).unwrap(), &ctx, &pattern).unwrap();
            prop_assert!((p - q).abs() < 1e-12);
        }

        #[test]
        fn dense_projector_matches_vector_path(
            (n, raw, settings, mask) in (1usize..=4).prop_flat_map(|n| (Just(n), complex_vec(n), settings_vec(n), 1usize..(1 << n))),
            theta in 0.0f64..FRAC_PI_2,
        ) {
            let state = StateVector::new(n, raw).unwrap();
            let ctx = MeasurementContext::new(settings, theta).unwrap();
            let reqs = (0..n).map(|s| if mask >> s & 1 == 1 { Requirement::One } else { Requirement::Any }).collect();
            let pattern = OutcomePattern::new(reqs).unwrap();
            let dense = HermitianOperator::pattern_projector(&ctx, &pattern).unwrap();
            let via_op = apply_operator_expectation(&dense, &state).unwrap();
            let direct = joint_probability(&state, &ctx, &pattern).unwrap();
            prop_assert!((via_op - direct).abs() < 1e-12);
        }

        #[test]
        fn expectation_is_linear(
            raw in complex_vec(2),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
            theta in 0.0f64..FRAC_PI_2,
        ) {
            let state = StateVector::new(2, raw).unwrap();
            let ctx = MeasurementContext::new(vec![Setting::A, Setting::B], theta).unwrap();
            let p = HermitianOperator::pattern_projector(&ctx, &OutcomePattern::all_one(2).unwrap()).unwrap();
            let q = HermitianOperator::identity(2);
            let mut combo = HermitianOperator::zeros(2);
            combo.add_scaled(alpha, &p).unwrap();
            combo.add_scaled(beta, &q).unwrap();
            let lhs = apply_operator_expectation(&combo, &state).unwrap();
            let rhs = alpha * apply_operator_expectation(&p, &state).unwrap()
                + beta * apply_operator_expectation(&q, &state).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
