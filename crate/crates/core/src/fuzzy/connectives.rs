//! Fuzzy connectives: conjunction, disjunction, negation, implication and
//! linguistic hedges.

use serde::{Deserialize, Serialize};

use super::Degree;

/// Standard conjunction, `min(a, b)`.
#[inline]
pub fn t_norm(a: Degree, b: Degree) -> Degree {
    a.min(b)
}

/// Standard disjunction, `max(a, b)`.
#[inline]
pub fn t_conorm(a: Degree, b: Degree) -> Degree {
    a.max(b)
}

/// Standard negation, `1 - a`.
#[inline]
pub fn negate(a: Degree) -> Degree {
    Degree::saturating(1.0 - a.value())
}

/// The t-norm used to combine premise degrees. `Min` is the default;
/// `Product` is opt-in through configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TNorm {
    #[default]
    Min,
    Product,
}

impl TNorm {
    pub fn apply(self, a: Degree, b: Degree) -> Degree {
        match self {
            TNorm::Min => t_norm(a, b),
            TNorm::Product => Degree::saturating(a.value() * b.value()),
        }
    }

    /// Folds a sequence with this t-norm; the empty fold is `1`.
    pub fn fold<I: IntoIterator<Item = Degree>>(self, degrees: I) -> Degree {
        degrees.into_iter().fold(Degree::ONE, |acc, d| self.apply(acc, d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImplicationMethod {
    /// Gödel-Brouwer: `1` if `a <= b`, otherwise `b`.
    Godel,
    /// Conjunctive reading: `min(a, b)`.
    Mamdani,
}

pub fn implication(a: Degree, b: Degree, method: ImplicationMethod) -> Degree {
    match method {
        ImplicationMethod::Godel => {
            if a <= b {
                Degree::ONE
            } else {
                b
            }
        }
        ImplicationMethod::Mamdani => t_norm(a, b),
    }
}

/// Linguistic hedge applied to a premise degree ("very", "more or less").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Modifier {
    #[default]
    None,
    /// Dilation, `sqrt(d)`.
    Weakening,
    /// Concentration, `d^2`.
    Strengthening,
}

impl Modifier {
    pub fn is_none(&self) -> bool {
        matches!(self, Modifier::None)
    }
}

pub fn apply_modifier(modifier: Modifier, d: Degree) -> Degree {
    match modifier {
        Modifier::None => d,
        Modifier::Weakening => Degree::saturating(d.value().sqrt()),
        Modifier::Strengthening => Degree::saturating(d.value() * d.value()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: f64) -> Degree {
        Degree::new(v).unwrap()
    }

    #[test]
    fn t_norm_examples() {
        assert_eq!(t_norm(d(0.45), d(0.61)), d(0.45));
        assert_eq!(t_norm(d(0.45), d(0.35)), d(0.35));
        assert_eq!(t_norm(d(0.7), Degree::ONE), d(0.7));
    }

    #[test]
    fn t_conorm_examples() {
        assert_eq!(t_conorm(d(0.3), d(0.7)), d(0.7));
        assert_eq!(t_conorm(d(0.4), Degree::ZERO), d(0.4));
        assert_eq!(t_conorm(d(0.2), d(0.9)), t_conorm(d(0.9), d(0.2)));
    }

    #[test]
    fn negate_examples() {
        assert_eq!(negate(d(0.3)).value(), 0.7);
        assert_eq!(negate(Degree::ONE), Degree::ZERO);
        // 1 - (1 - 0.45) is one ulp away from 0.45 in binary floating point.
        let twice = negate(negate(d(0.45))).value();
        assert!((twice - 0.45).abs() <= f64::EPSILON);
    }

    #[test]
    fn implication_examples() {
        assert_eq!(implication(d(0.3), d(0.7), ImplicationMethod::Godel), Degree::ONE);
        assert_eq!(implication(d(0.7), d(0.3), ImplicationMethod::Godel), d(0.3));
        assert_eq!(implication(d(0.7), d(0.3), ImplicationMethod::Mamdani), d(0.3));
    }

    #[test]
    fn modifier_examples() {
        assert_eq!(apply_modifier(Modifier::None, d(0.45)), d(0.45));
        assert_eq!(apply_modifier(Modifier::Strengthening, d(0.5)), d(0.25));
        assert_eq!(apply_modifier(Modifier::Weakening, d(0.25)), d(0.5));
    }

    #[test]
    fn product_t_norm() {
        assert_eq!(TNorm::Product.apply(d(0.5), d(0.5)), d(0.25));
        assert_eq!(TNorm::Min.fold([d(0.7), d(0.6), Degree::ONE, d(0.4)]), d(0.4));
        assert_eq!(TNorm::Min.fold([]), Degree::ONE);
    }
}
