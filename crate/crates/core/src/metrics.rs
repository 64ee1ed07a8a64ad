//! Fairness of load distributions.

use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricsError {
    /// Every load is zero, the index is 0/0.
    AllZero,
    Negative,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::AllZero => f.write_str("Jain index undefined for all-zero loads"),
            MetricsError::Negative => f.write_str("loads must be non-negative"),
        }
    }
}

impl core::error::Error for MetricsError {}

/// Jain's fairness index `(sum y)^2 / (n sum y^2)`, in `[1/n, 1]`.
pub fn jain_index(loads: &[f64]) -> Result<f64, MetricsError> {
    if loads.iter().any(|y| *y < 0.0 || y.is_nan()) {
        return Err(MetricsError::Negative);
    }
    let sum: f64 = loads.iter().sum();
    let squares: f64 = loads.iter().map(|y| y * y).sum();
    if squares == 0.0 {
        return Err(MetricsError::AllZero);
    }
    Ok(sum * sum / (loads.len() as f64 * squares))
}
