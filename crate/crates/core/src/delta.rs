//! The near-critical states |δ(ε)⟩.
//!
//! For n sites and `theta = 2 atan(epsilon)` the unnormalized state is
//! `(1 - n cos theta)|0...0> + sin theta (|10...0> + ... + |0...01>)`
//! in the B basis. Measured with A rotated by the same `theta`, the
//! state has zero probability for two or more B detections, equal
//! probability `K` for every one-B/all-other-A event and for the all-A
//! event, and probability `K (1 + epsilon^2)` for every all-A-but-one
//! marginal.

use crate::error::{Error, Result};
use crate::state::{joint_probability, MeasurementContext, OutcomePattern, Setting, StateVector, MAX_SITES};

const DEGENERATE_NORM: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaParams {
    n_sites: usize,
    epsilon: f64,
}

impl DeltaParams {
    /// Accepts `n_sites >= 2` and `epsilon` in `(0, 1]`.
    pub fn new(n_sites: usize, epsilon: f64) -> Result<Self> {
        if !(2..=MAX_SITES).contains(&n_sites) {
            return Err(Error::InvalidN(n_sites));
        }
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::NonPositiveEpsilon(epsilon));
        }
        if epsilon > 1.0 {
            return Err(Error::EpsilonOutOfRange(epsilon));
        }
        Ok(Self { n_sites, epsilon })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn theta(&self) -> f64 {
        2.0 * self.epsilon.atan()
    }

    /// All-A measurement context at this state's angle.
    pub fn all_a_context(&self) -> MeasurementContext {
        MeasurementContext::uniform(self.n_sites, Setting::A, self.theta())
            .expect("theta of a valid epsilon lies in (0, pi/2]")
    }
}

pub fn theta_from_epsilon(epsilon: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    Ok(2.0 * epsilon.atan())
}

pub fn build_delta(params: &DeltaParams) -> Result<StateVector> {
    let n = params.n_sites;
    let (s, c) = params.theta().sin_cos();
    let mut raw = vec![0.0; 1 << n];
    raw[0] = 1.0 - n as f64 * c;
    for site in 0..n {
        raw[1 << site] = s;
    }
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < DEGENERATE_NORM {
        return Err(Error::DegenerateState(norm));
    }
    StateVector::from_real(n, &raw)
}

/// `K`: probability that all n sites give outcome 1 under setting A.
pub fn k_value(params: &DeltaParams) -> Result<f64> {
    let state = build_delta(params)?;
    joint_probability(
        &state,
        &params.all_a_context(),
        &OutcomePattern::all_one(params.n_sites)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Requirement;
    use std::f64::consts::FRAC_PI_2;

    const NS: [usize; 5] = [2, 3, 4, 5, 6];
    const EPS: [f64; 3] = [0.01, 0.1, 0.3];

    /// `K = C^2 sin^{2n} theta` with `C^2 = 1 / ((1 - n cos theta)^2 + n sin^2 theta)`.
    fn closed_form_k(n: usize, eps: f64) -> f64 {
        let th = 2.0 * eps.atan();
        let (s, c) = th.sin_cos();
        let nf = n as f64;
        s.powi(2 * n as i32) / ((1.0 - nf * c).powi(2) + nf * s * s)
    }

    fn ctx_with_b(n: usize, b_sites: &[usize], theta: f64) -> MeasurementContext {
        let settings = (0..n)
            .map(|s| if b_sites.contains(&s) { Setting::B } else { Setting::A })
            .collect();
        MeasurementContext::new(settings, theta).unwrap()
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta_from_epsilon(1.0).unwrap(), FRAC_PI_2);
        assert!(theta_from_epsilon(1e-12).unwrap() < 1e-11);
        assert!((theta_from_epsilon(0.1).unwrap() - 0.199337).abs() < 1e-6);
        assert_eq!(theta_from_epsilon(0.0), Err(Error::NonPositiveEpsilon(0.0)));
        assert_eq!(theta_from_epsilon(-1.0), Err(Error::NonPositiveEpsilon(-1.0)));
    }

    #[test]
    fn params_validation() {
        assert_eq!(DeltaParams::new(1, 0.1), Err(Error::InvalidN(1)));
        assert_eq!(DeltaParams::new(2, 0.0), Err(Error::NonPositiveEpsilon(0.0)));
        assert_eq!(DeltaParams::new(2, 1.5), Err(Error::EpsilonOutOfRange(1.5)));
        assert!(DeltaParams::new(2, 1.0).is_ok());
    }

    #[test]
    fn two_site_support_and_norm() {
        let state = build_delta(&DeltaParams::new(2, 0.1).unwrap()).unwrap();
        let amps = state.amplitudes();
        assert!(amps[0b11].norm() == 0.0);
        assert!([0b00, 0b01, 0b10].iter().all(|&i| amps[i].norm() > 0.0));
        assert!((state.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(amps.iter().all(|a| a.im == 0.0));
        // positive normalization: amplitude signs follow the unnormalized vector
        assert!(amps[0].re < 0.0 && amps[1].re > 0.0);
    }

    #[test]
    fn k_two_site_value() {
        let k = k_value(&DeltaParams::new(2, 0.1).unwrap()).unwrap();
        assert!((k - closed_form_k(2, 0.1)).abs() < 1e-15);
        assert!((k - 1.5367e-3).abs() < 1e-6);
    }

    #[test]
    fn k_matches_mixed_two_site_event() {
        for eps in EPS {
            let p = DeltaParams::new(2, eps).unwrap();
            let state = build_delta(&p).unwrap();
            let mixed = joint_probability(
                &state,
                &ctx_with_b(2, &[0], p.theta()),
                &OutcomePattern::all_one(2).unwrap(),
            )
            .unwrap();
            assert!((mixed - k_value(&p).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn k_three_site_dense_oracle() {
        // Contract the all-A projector with |δ> as explicit 8-dimensional vectors.
        let p = DeltaParams::new(3, 0.1).unwrap();
        let th = p.theta();
        let (s, c) = th.sin_cos();
        let local = [s, c];
        let mut one_a = [0.0f64; 8];
        for (idx, slot) in one_a.iter_mut().enumerate() {
            *slot = (0..3).map(|site| local[(idx >> site) & 1]).product();
        }
        let mut delta = [0.0f64; 8];
        delta[0] = 1.0 - 3.0 * c;
        delta[1] = s;
        delta[2] = s;
        delta[4] = s;
        let norm_sqr: f64 = delta.iter().map(|x| x * x).sum();
        let overlap: f64 = one_a.iter().zip(&delta).map(|(a, b)| a * b).sum();
        let oracle = overlap * overlap / norm_sqr;
        let k = k_value(&p).unwrap();
        assert!(k > 0.0);
        assert!((k - oracle).abs() < 1e-15);
        assert!((k - closed_form_k(3, 0.1)).abs() < 1e-15);
    }

    #[test]
    fn probability_structure() {
        for n in NS {
            for eps in EPS {
                let p = DeltaParams::new(n, eps).unwrap();
                let state = build_delta(&p).unwrap();
                let th = p.theta();
                let k = k_value(&p).unwrap();
                assert!((k - closed_form_k(n, eps)).abs() < 1e-12 * k.max(1e-300) + 1e-18);
                let all_one = OutcomePattern::all_one(n).unwrap();
                for site in 0..n {
                    let one_b = joint_probability(&state, &ctx_with_b(n, &[site], th), &all_one).unwrap();
                    assert!((one_b - k).abs() < 1e-10, "n={n} eps={eps} site={site}");

                    let marginal =
                        joint_probability(&state, &p.all_a_context(), &OutcomePattern::all_but(n, site).unwrap())
                            .unwrap();
                    assert!((marginal / k - (1.0 + eps * eps)).abs() < 1e-9);
                }
                // two or more B detections, with other sites marginalized or A
                for mask in 0usize..(1 << n) {
                    if mask.count_ones() < 2 {
                        continue;
                    }
                    let b_sites: Vec<_> = (0..n).filter(|s| mask >> s & 1 == 1).collect();
                    let b_only = OutcomePattern::new(
                        (0..n)
                            .map(|s| {
                                if b_sites.contains(&s) {
                                    Requirement::One
                                } else {
                                    Requirement::Any
                                }
                            })
                            .collect(),
                    )
                    .unwrap();
                    let ctx = ctx_with_b(n, &b_sites, th);
                    assert!(joint_probability(&state, &ctx, &b_only).unwrap() < 1e-12);
                    assert!(joint_probability(&state, &ctx, &all_one).unwrap() < 1e-12);
                }
            }
        }
    }
}
