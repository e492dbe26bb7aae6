//! Two-site and n-site Clauser-Horne inequalities as signed term lists.
//!
//! An inequality reads `sum(lhs) <= sum(rhs)`. Residuals are always
//! reported as `lhs - rhs`, so a positive residual is a violation. With
//! detector efficiency `eta`, a term whose pattern requires k detections
//! is weighted by `eta^k`.
//!
//! The n-site form has
//!
//! * LHS: `+P(one B, all other A = 1)` for each site, and
//!   `-P(k B's, all other A = 1)` for every even `k >= 2`;
//! * RHS: `+P(all A = 1 except site j)` for each site, and
//!   `-(n-1) P(all A = 1)`.
//!
//! The excluded site of an "all A but one" marginal is marginalized, and its
//! setting is fixed to A.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::state::{joint_probability, MeasurementContext, OutcomePattern, Requirement, Setting, StateVector};

/// Largest site count for exhaustive strategy enumeration (4^n strategies).
pub const MAX_LHV_SITES: usize = 12;

/// Largest site count for which the term list is built.
pub const MAX_INEQUALITY_SITES: usize = 20;

/// Residuals at or below this count as certified.
pub const CERTIFY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InequalityTerm {
    coefficient: i64,
    settings: Vec<Setting>,
    pattern: OutcomePattern,
}

impl InequalityTerm {
    pub fn new(coefficient: i64, settings: Vec<Setting>, pattern: OutcomePattern) -> Result<Self> {
        if settings.len() != pattern.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: pattern.n_sites(),
                found: settings.len(),
            });
        }
        if coefficient == 0 {
            return Err(Error::ZeroCoefficient);
        }
        Ok(Self {
            coefficient,
            settings,
            pattern,
        })
    }

    pub fn coefficient(&self) -> i64 {
        self.coefficient
    }

    pub fn settings(&self) -> &[Setting] {
        &self.settings
    }

    pub fn pattern(&self) -> &OutcomePattern {
        &self.pattern
    }

    /// Number of detections the event requires.
    pub fn order(&self) -> usize {
        self.pattern.order()
    }

    pub fn context(&self, theta: f64) -> Result<MeasurementContext> {
        MeasurementContext::new(self.settings.clone(), theta)
    }

    /// Efficiency weight `eta^k`.
    pub fn weight(&self, eta: f64) -> f64 {
        eta.powi(self.order() as i32)
    }

    /// Number of B settings among the required sites.
    pub fn b_count(&self) -> usize {
        (0..self.settings.len())
            .filter(|&s| self.pattern.is_one(s) && self.settings[s] == Setting::B)
            .count()
    }

    fn masks(&self) -> (u32, u32) {
        let (mut a, mut b) = (0u32, 0u32);
        for (site, setting) in self.settings.iter().enumerate() {
            if self.pattern.is_one(site) {
                match setting {
                    Setting::A => a |= 1 << site,
                    Setting::B => b |= 1 << site,
                }
            }
        }
        (a, b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChInequality {
    n_sites: usize,
    lhs: Vec<InequalityTerm>,
    rhs: Vec<InequalityTerm>,
}

impl ChInequality {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn lhs(&self) -> &[InequalityTerm] {
        &self.lhs
    }

    pub fn rhs(&self) -> &[InequalityTerm] {
        &self.rhs
    }

    /// `sum(lhs) - sum(rhs)` where each term contributes
    /// `coefficient * eta^k * probability(term)`.
    pub fn residual_with<F>(&self, eta: f64, mut probability: F) -> Result<f64>
    where
        F: FnMut(&InequalityTerm) -> Result<f64>,
    {
        check_eta(eta)?;
        let mut side = |terms: &[InequalityTerm]| -> Result<f64> {
            terms.iter().try_fold(0.0, |acc, t| {
                Ok(acc + t.coefficient as f64 * t.weight(eta) * probability(t)?)
            })
        };
        let lhs = side(&self.lhs)?;
        let rhs = side(&self.rhs)?;
        Ok(lhs - rhs)
    }

    /// Every term tagged with its side (`false` for LHS, `true` for RHS),
    /// sorted, for order-independent comparison.
    pub fn term_multiset(&self) -> Vec<(bool, InequalityTerm)> {
        let mut all: Vec<_> = self
            .lhs
            .iter()
            .map(|t| (false, t.clone()))
            .chain(self.rhs.iter().map(|t| (true, t.clone())))
            .collect();
        all.sort();
        all
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::EtaOutOfRange(eta))
    }
}

fn one_b_term(n: usize, b_sites: u32, coefficient: i64) -> Result<InequalityTerm> {
    let settings = (0..n)
        .map(|s| if b_sites >> s & 1 == 1 { Setting::B } else { Setting::A })
        .collect();
    InequalityTerm::new(coefficient, settings, OutcomePattern::all_one(n)?)
}

/// `P(A1=B2=1) + P(B1=A2=1) - P(B1=B2=1) <= P(A1=1) + P(A2=1) - P(A1=A2=1)`.
pub fn build_two_site_ch() -> ChInequality {
    use Requirement::{Any, One};
    use Setting::{A, B};
    let term = |c, s: [Setting; 2], p: [Requirement; 2]| {
        InequalityTerm::new(c, s.to_vec(), OutcomePattern::new(p.to_vec()).unwrap()).unwrap()
    };
    ChInequality {
        n_sites: 2,
        lhs: vec![
            term(1, [A, B], [One, One]),
            term(1, [B, A], [One, One]),
            term(-1, [B, B], [One, One]),
        ],
        rhs: vec![
            term(1, [A, A], [One, Any]),
            term(1, [A, A], [Any, One]),
            term(-1, [A, A], [One, One]),
        ],
    }
}

pub fn build_nsite_ch(n: usize) -> Result<ChInequality> {
    if !(2..=MAX_INEQUALITY_SITES).contains(&n) {
        return Err(Error::InvalidN(n));
    }
    let mut lhs = Vec::new();
    for site in 0..n {
        lhs.push(one_b_term(n, 1 << site, 1)?);
    }
    for k in (2..=n).step_by(2) {
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize == k {
                lhs.push(one_b_term(n, mask, -1)?);
            }
        }
    }
    let mut rhs = Vec::new();
    for site in 0..n {
        rhs.push(InequalityTerm::new(
            1,
            vec![Setting::A; n],
            OutcomePattern::all_but(n, site)?,
        )?);
    }
    rhs.push(InequalityTerm::new(
        -(n as i64 - 1),
        vec![Setting::A; n],
        OutcomePattern::all_one(n)?,
    )?);
    Ok(ChInequality { n_sites: n, lhs, rhs })
}

/// Efficiency-scaled residual for a quantum state measured at angle `theta`.
pub fn evaluate_quantum(ineq: &ChInequality, state: &StateVector, theta: f64, eta: f64) -> Result<f64> {
    if state.n_sites() != ineq.n_sites {
        return Err(Error::DimensionMismatch {
            expected: ineq.n_sites,
            found: state.n_sites(),
        });
    }
    ineq.residual_with(eta, |t| joint_probability(state, &t.context(theta)?, t.pattern()))
}

/// Predetermined outcomes `(a_i, b_i)` for each site: one vertex of the
/// local-hidden-variable polytope.
///
/// The integer encoding is base 4 with site 0 as the least significant
/// digit and digit `a_i + 2 b_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    n_sites: usize,
    a_bits: u32,
    b_bits: u32,
}

impl DeterministicStrategy {
    pub fn new(outcomes: &[(bool, bool)]) -> Result<Self> {
        if outcomes.is_empty() || outcomes.len() > 32 {
            return Err(Error::InvalidN(outcomes.len()));
        }
        let (mut a_bits, mut b_bits) = (0, 0);
        for (site, &(a, b)) in outcomes.iter().enumerate() {
            a_bits |= (a as u32) << site;
            b_bits |= (b as u32) << site;
        }
        Ok(Self {
            n_sites: outcomes.len(),
            a_bits,
            b_bits,
        })
    }

    pub fn from_index(n_sites: usize, index: u64) -> Result<Self> {
        if n_sites == 0 || n_sites > 31 {
            return Err(Error::InvalidN(n_sites));
        }
        if index >= 1u64 << (2 * n_sites) {
            return Err(Error::DimensionMismatch {
                expected: n_sites,
                found: (64 - index.leading_zeros() as usize).div_ceil(2),
            });
        }
        let (mut a_bits, mut b_bits) = (0, 0);
        for site in 0..n_sites {
            let digit = (index >> (2 * site)) & 3;
            a_bits |= ((digit & 1) as u32) << site;
            b_bits |= ((digit >> 1) as u32) << site;
        }
        Ok(Self {
            n_sites,
            a_bits,
            b_bits,
        })
    }

    pub fn index(&self) -> u64 {
        (0..self.n_sites).fold(0u64, |acc, site| {
            let digit = (self.a_bits >> site & 1) | (self.b_bits >> site & 1) << 1;
            acc | (digit as u64) << (2 * site)
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn outcome(&self, site: usize, setting: Setting) -> bool {
        let bits = match setting {
            Setting::A => self.a_bits,
            Setting::B => self.b_bits,
        };
        bits >> site & 1 == 1
    }

    /// Whether the strategy produces outcome 1 at every required site of `term`.
    pub fn satisfies(&self, term: &InequalityTerm) -> bool {
        let (a, b) = term.masks();
        a & !self.a_bits == 0 && b & !self.b_bits == 0
    }

    /// Per-site `(a_i, b_i)` as a string of `ab` digit pairs, site 0 first.
    pub fn describe(&self) -> String {
        (0..self.n_sites)
            .map(|s| {
                format!(
                    "{}{}",
                    self.outcome(s, Setting::A) as u8,
                    self.outcome(s, Setting::B) as u8
                )
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn evaluate_strategy(ineq: &ChInequality, strategy: &DeterministicStrategy, eta: f64) -> Result<f64> {
    if strategy.n_sites != ineq.n_sites {
        return Err(Error::DimensionMismatch {
            expected: ineq.n_sites,
            found: strategy.n_sites,
        });
    }
    ineq.residual_with(eta, |t| Ok(if strategy.satisfies(t) { 1.0 } else { 0.0 }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LhvReport {
    pub max_residual: f64,
    pub argmax_strategy: DeterministicStrategy,
    pub argmax_eta: f64,
    pub strategies_checked: u64,
}

impl LhvReport {
    pub fn certified(&self) -> bool {
        self.max_residual <= CERTIFY_TOL
    }
}

/// Term compiled for fast indicator evaluation: required A/B masks,
/// signed coefficient (RHS negated) and detection count.
struct CompiledTerm {
    a_mask: u32,
    b_mask: u32,
    coefficient: f64,
    order: i32,
}

/// Maximum residual over every deterministic strategy and every `eta`.
///
/// Strategies are visited in ascending index order with `eta` in list
/// order inside; the reported argmax is the first maximum in that order.
pub fn lhv_certify(ineq: &ChInequality, eta_list: &[f64]) -> Result<LhvReport> {
    let n = ineq.n_sites;
    if n > MAX_LHV_SITES {
        return Err(Error::TooManySites {
            n,
            limit: MAX_LHV_SITES,
        });
    }
    if eta_list.is_empty() {
        return Err(Error::InvalidGrid("empty efficiency list".into()));
    }
    for &eta in eta_list {
        check_eta(eta)?;
    }
    let compiled: Vec<CompiledTerm> = ineq
        .lhs
        .iter()
        .map(|t| (t, 1.0))
        .chain(ineq.rhs.iter().map(|t| (t, -1.0)))
        .map(|(t, sign)| {
            let (a_mask, b_mask) = t.masks();
            CompiledTerm {
                a_mask,
                b_mask,
                coefficient: sign * t.coefficient as f64,
                order: t.order() as i32,
            }
        })
        .collect();
    let weights: Vec<Vec<f64>> = eta_list
        .iter()
        .map(|&eta| compiled.iter().map(|t| t.coefficient * eta.powi(t.order)).collect())
        .collect();

    let total = 1u64 << (2 * n);
    let better = |x: (f64, u64, usize), y: (f64, u64, usize)| {
        if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) {
            y
        } else {
            x
        }
    };
    let (max_residual, index, eta_idx) = (0..total)
        .into_par_iter()
        .map(|index| {
            let s = DeterministicStrategy::from_index(n, index).expect("index below 4^n");
            let mut best = (f64::NEG_INFINITY, index, 0);
            for (ei, w) in weights.iter().enumerate() {
                let r: f64 = compiled
                    .iter()
                    .zip(w)
                    .filter(|(t, _)| t.a_mask & !s.a_bits == 0 && t.b_mask & !s.b_bits == 0)
                    .map(|(_, w)| w)
                    .sum();
                best = better(best, (r, index, ei));
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, u64::MAX, usize::MAX), better);

    Ok(LhvReport {
        max_residual,
        argmax_strategy: DeterministicStrategy::from_index(n, index)?,
        argmax_eta: eta_list[eta_idx],
        strategies_checked: total,
    })
}
