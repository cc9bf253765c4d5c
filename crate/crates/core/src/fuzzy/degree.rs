use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::FuzzyError;

/// A truth value in `[0, 1]`.
///
/// The constructor rejects NaN and out-of-range values, so every `Degree`
/// in circulation is totally ordered.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Degree(f64);

impl Degree {
    pub const ZERO: Degree = Degree(0.0);
    pub const ONE: Degree = Degree(1.0);

    pub fn new(value: f64) -> Result<Self, FuzzyError> {
        if (0.0..=1.0).contains(&value) {
            Ok(Degree(value))
        } else {
            Err(FuzzyError::InvalidDegree(value))
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to zero.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Degree(0.0)
        } else {
            Degree(value.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }
}

impl Eq for Degree {}

impl PartialOrd for Degree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Degree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl TryFrom<f64> for Degree {
    type Error = FuzzyError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Degree::new(value)
    }
}

impl From<Degree> for f64 {
    fn from(d: Degree) -> f64 {
        d.0
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}
