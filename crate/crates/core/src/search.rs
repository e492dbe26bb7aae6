//! One-dimensional maximization: uniform grid scan followed by a
//! golden-section pass around the best grid point.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Uniform grid over the open interval `(lo, hi)` plus the refinement width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchGrid {
    pub points: usize,
    pub tol: f64,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self { points: 100, tol: 1e-6 }
    }
}

impl SearchGrid {
    pub fn new(points: usize, tol: f64) -> Result<Self> {
        if points < 3 {
            return Err(Error::InvalidGrid(format!("{points} points")));
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidGrid(format!("refinement width {tol}")));
        }
        Ok(Self { points, tol })
    }

    /// `points` interior points `lo + (hi - lo) i / (points + 1)`, `i = 1..=points`.
    pub fn interior(&self, lo: f64, hi: f64) -> Vec<f64> {
        let step = (hi - lo) / (self.points + 1) as f64;
        (1..=self.points).map(|i| lo + step * i as f64).collect()
    }

    /// Maximizes `f` over `(lo, hi)`. The result is never worse than the
    /// best grid point.
    pub fn maximize<F>(&self, lo: f64, hi: f64, mut f: F) -> Result<(f64, f64)>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidGrid(format!("empty interval ({lo}, {hi})")));
        }
        let xs = self.interior(lo, hi);
        let mut best = (xs[0], f64::NEG_INFINITY);
        let mut best_idx = 0;
        for (i, &x) in xs.iter().enumerate() {
            let y = f(x)?;
            if y > best.1 {
                best = (x, y);
                best_idx = i;
            }
        }
        let step = (hi - lo) / (self.points + 1) as f64;
        let a = lo + step * best_idx as f64;
        let b = lo + step * (best_idx + 2) as f64;
        let refined = golden_section_max(a, b, self.tol, &mut f)?;
        Ok(if refined.1 > best.1 { refined } else { best })
    }
}

/// Golden-section search for a maximum on `[a, b]`, stopping once the
/// bracket is narrower than `tol`. Endpoints are never evaluated.
pub fn golden_section_max<F>(mut a: f64, mut b: f64, tol: f64, f: &mut F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}
