//! Fixed-length per-hour numeric vectors.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// An hourly time series: one `f64` per hour of the model horizon.
///
/// Used for loads, availability factors, prices and dispatch alike; the unit
/// is whatever the owning field says it is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlySeries(Vec<f64>);

impl HourlySeries {
    pub fn new(values: Vec<f64>) -> Self {
        HourlySeries(values)
    }

    /// A series of `len` hours, all equal to `value`.
    pub fn constant(len: usize, value: f64) -> Self {
        HourlySeries(vec![value; len])
    }

    pub fn zeros(len: usize) -> Self {
        Self::constant(len, 0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.sum() / self.0.len() as f64
        }
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rescale in place so the series sums to `target`.
    ///
    /// Errors if the current sum is zero (nothing to scale).
    pub fn normalize_sum(&mut self, target: f64) -> Result<()> {
        let s = self.sum();
        if s == 0.0 {
            return Err(Error::InvalidParameter(
                "cannot normalize a series with zero sum".into(),
            ));
        }
        let k = target / s;
        for v in &mut self.0 {
            *v *= k;
        }
        Ok(())
    }

    pub fn scaled(&self, k: f64) -> Self {
        HourlySeries(self.0.iter().map(|v| v * k).collect())
    }

    /// Check every value lies in `[lo, hi]`; returns the first offending index.
    pub fn check_range(&self, lo: f64, hi: f64) -> std::result::Result<(), (usize, f64)> {
        for (i, &v) in self.0.iter().enumerate() {
            if !v.is_finite() || v < lo || v > hi {
                return Err((i, v));
            }
        }
        Ok(())
    }

    /// Expect an exact length, with a labelled error otherwise.
    pub fn expect_len(&self, what: &str, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::LengthMismatch {
                what: what.to_string(),
                expected,
                actual: self.len(),
            });
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for HourlySeries {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for HourlySeries {
    fn from(v: Vec<f64>) -> Self {
        HourlySeries(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_hits_target() {
        let mut s = HourlySeries::new(vec![1.0, 3.0]);
        s.normalize_sum(8.0).unwrap();
        assert_eq!(s.values(), &[2.0, 6.0]);
    }

    #[test]
    fn normalize_zero_sum_is_error() {
        let mut s = HourlySeries::zeros(4);
        assert!(s.normalize_sum(1.0).is_err());
    }

    #[test]
    fn range_check_reports_index() {
        let s = HourlySeries::new(vec![0.0, 0.5, -0.1]);
        assert_eq!(s.check_range(0.0, 1.0), Err((2, -0.1)));
    }
}
