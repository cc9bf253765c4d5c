use serde::{Deserialize, Serialize};

use super::{Degree, FuzzyError};

/// Piecewise-linear membership function. Parameters are in universe units
/// and are validated non-decreasing at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawShape", into = "RawShape")]
pub enum MembershipFunction {
    Triangular { a: f64, b: f64, c: f64 },
    Trapezoidal { a: f64, b: f64, c: f64, d: f64 },
    /// `0` up to `a`, linear to `1` at `b`, `1` after.
    RampUp { a: f64, b: f64 },
    /// `1` up to `a`, linear to `0` at `b`, `0` after.
    RampDown { a: f64, b: f64 },
}

impl MembershipFunction {
    pub fn triangular(a: f64, b: f64, c: f64) -> Result<Self, FuzzyError> {
        check_params("triangular", &[a, b, c])?;
        Ok(Self::Triangular { a, b, c })
    }

    pub fn trapezoidal(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuzzyError> {
        check_params("trapezoidal", &[a, b, c, d])?;
        Ok(Self::Trapezoidal { a, b, c, d })
    }

    pub fn ramp_up(a: f64, b: f64) -> Result<Self, FuzzyError> {
        check_params("ramp-up", &[a, b])?;
        Ok(Self::RampUp { a, b })
    }

    pub fn ramp_down(a: f64, b: f64) -> Result<Self, FuzzyError> {
        check_params("ramp-down", &[a, b])?;
        Ok(Self::RampDown { a, b })
    }

    pub fn shape_name(&self) -> &'static str {
        match self {
            Self::Triangular { .. } => "triangular",
            Self::Trapezoidal { .. } => "trapezoidal",
            Self::RampUp { .. } => "ramp-up",
            Self::RampDown { .. } => "ramp-down",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Self::Triangular { a, b, c } => vec![a, b, c],
            Self::Trapezoidal { a, b, c, d } => vec![a, b, c, d],
            Self::RampUp { a, b } | Self::RampDown { a, b } => vec![a, b],
        }
    }

    /// Evaluates the raw function. No clamping to a universe happens here;
    /// see [`super::FuzzySubset::degree`] for that. NaN yields zero.
    pub fn eval(&self, x: f64) -> Degree {
        if x.is_nan() {
            return Degree::ZERO;
        }
        let v = match *self {
            Self::Triangular { a, b, c } => {
                if x < a || x > c {
                    0.0
                } else if x == b {
                    1.0
                } else if x < b {
                    (x - a) / (b - a)
                } else {
                    (c - x) / (c - b)
                }
            }
            Self::Trapezoidal { a, b, c, d } => {
                if x < a || x > d {
                    0.0
                } else if x >= b && x <= c {
                    1.0
                } else if x < b {
                    (x - a) / (b - a)
                } else {
                    (d - x) / (d - c)
                }
            }
            Self::RampUp { a, b } => {
                if x >= b {
                    1.0
                } else if x <= a {
                    0.0
                } else {
                    (x - a) / (b - a)
                }
            }
            Self::RampDown { a, b } => {
                if x <= a {
                    1.0
                } else if x >= b {
                    0.0
                } else {
                    (b - x) / (b - a)
                }
            }
        };
        Degree::saturating(v)
    }
}

pub fn eval_membership(mf: &MembershipFunction, x: f64) -> Degree {
    mf.eval(x)
}

fn check_params(shape: &str, params: &[f64]) -> Result<(), FuzzyError> {
    if params.iter().any(|p| !p.is_finite()) {
        return Err(FuzzyError::InvalidShape {
            shape: shape.to_string(),
            reason: "parameters must be finite".into(),
        });
    }
    if params.windows(2).any(|w| w[0] > w[1]) {
        return Err(FuzzyError::InvalidShape {
            shape: shape.to_string(),
            reason: format!("parameters must be non-decreasing, got {params:?}"),
        });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct RawShape {
    shape: String,
    params: Vec<f64>,
}

impl TryFrom<RawShape> for MembershipFunction {
    type Error = FuzzyError;

    fn try_from(raw: RawShape) -> Result<Self, Self::Error> {
        let arity = |n: usize| {
            if raw.params.len() == n {
                Ok(())
            } else {
                Err(FuzzyError::InvalidShape {
                    shape: raw.shape.clone(),
                    reason: format!("expected {n} parameters, got {}", raw.params.len()),
                })
            }
        };
        let p = &raw.params;
        match raw.shape.as_str() {
            "triangular" => {
                arity(3)?;
                Self::triangular(p[0], p[1], p[2])
            }
            "trapezoidal" => {
                arity(4)?;
                Self::trapezoidal(p[0], p[1], p[2], p[3])
            }
            "ramp-up" => {
                arity(2)?;
                Self::ramp_up(p[0], p[1])
            }
            "ramp-down" => {
                arity(2)?;
                Self::ramp_down(p[0], p[1])
            }
            other => Err(FuzzyError::InvalidShape {
                shape: other.to_string(),
                reason: "unknown shape".into(),
            }),
        }
    }
}

impl From<MembershipFunction> for RawShape {
    fn from(mf: MembershipFunction) -> Self {
        RawShape {
            shape: mf.shape_name().to_string(),
            params: mf.params(),
        }
    }
}
