use serde::{Deserialize, Serialize};

use super::{t_conorm, Degree, FuzzyError, MembershipFunction};

pub const DEFAULT_RESOLUTION: usize = 1001;

/// A bounded reference set, sampled at `resolution` evenly spaced points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawUniverse", into = "RawUniverse")]
pub struct Universe {
    name: String,
    low: f64,
    high: f64,
    resolution: usize,
}

impl Universe {
    pub fn new(name: impl Into<String>, low: f64, high: f64, resolution: usize) -> Result<Self, FuzzyError> {
        let name = name.into();
        let invalid = |reason: &str| FuzzyError::InvalidUniverse {
            name: name.clone(),
            reason: reason.to_string(),
        };
        if !low.is_finite() || !high.is_finite() {
            return Err(invalid("bounds must be finite"));
        }
        if low >= high {
            return Err(invalid("low must be strictly below high"));
        }
        if resolution < 2 {
            return Err(invalid("resolution must be at least 2"));
        }
        Ok(Self { name, low, high, resolution })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Distance between neighbouring grid points.
    pub fn step(&self) -> f64 {
        (self.high - self.low) / (self.resolution - 1) as f64
    }

    /// Grid point `i`; the last point is pinned to `high`.
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 >= self.resolution {
            self.high
        } else {
            self.low + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.resolution).map(move |i| self.point(i))
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.low, self.high)
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.low..=self.high).contains(&x)
    }
}

#[derive(Serialize, Deserialize)]
struct RawUniverse {
    name: String,
    low: f64,
    high: f64,
    #[serde(default = "default_resolution")]
    resolution: usize,
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

impl TryFrom<RawUniverse> for Universe {
    type Error = FuzzyError;

    fn try_from(r: RawUniverse) -> Result<Self, Self::Error> {
        Universe::new(r.name, r.low, r.high, r.resolution)
    }
}

impl From<Universe> for RawUniverse {
    fn from(u: Universe) -> Self {
        RawUniverse {
            name: u.name,
            low: u.low,
            high: u.high,
            resolution: u.resolution,
        }
    }
}

/// A fuzzy set sampled on its universe's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFuzzySet {
    universe: Universe,
    samples: Vec<Degree>,
}

impl DiscreteFuzzySet {
    pub fn from_samples(universe: Universe, samples: Vec<Degree>) -> Result<Self, FuzzyError> {
        if samples.len() != universe.resolution() {
            return Err(FuzzyError::LengthMismatch {
                expected: universe.resolution(),
                found: samples.len(),
            });
        }
        Ok(Self { universe, samples })
    }

    pub fn from_fn(universe: Universe, f: impl Fn(f64) -> Degree) -> Self {
        let samples = universe.points().map(f).collect();
        Self { universe, samples }
    }

    pub fn constant(universe: Universe, value: Degree) -> Self {
        let samples = vec![value; universe.resolution()];
        Self { universe, samples }
    }

    pub fn discretize(universe: &Universe, mf: &MembershipFunction) -> Self {
        Self::from_fn(universe.clone(), |x| mf.eval(x))
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn samples(&self) -> &[Degree] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.iter().all(|d| d.is_zero())
    }

    pub fn height(&self) -> Degree {
        self.samples.iter().copied().max().unwrap_or(Degree::ZERO)
    }

    /// Pointwise combination with another set over the same universe.
    pub fn zip_with(&self, other: &Self, f: impl Fn(Degree, Degree) -> Degree) -> Result<Self, FuzzyError> {
        ensure_same_universe(&self.universe, &other.universe)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self {
            universe: self.universe.clone(),
            samples,
        })
    }
}

pub(crate) fn ensure_same_universe(expected: &Universe, found: &Universe) -> Result<(), FuzzyError> {
    if expected == found {
        Ok(())
    } else {
        Err(FuzzyError::UniverseMismatch {
            expected: expected.name().to_string(),
            found: found.name().to_string(),
        })
    }
}

/// Min-clips a discretized consequent at the rule's firing strength.
pub fn clip(universe: &Universe, consequent: &MembershipFunction, strength: Degree) -> DiscreteFuzzySet {
    DiscreteFuzzySet::from_fn(universe.clone(), |x| consequent.eval(x).min(strength))
}

/// Pointwise max over a non-empty list of sets sharing one universe.
pub fn aggregate(sets: &[DiscreteFuzzySet]) -> Result<DiscreteFuzzySet, FuzzyError> {
    let (first, rest) = sets.split_first().ok_or(FuzzyError::NothingToAggregate)?;
    let mut acc = first.clone();
    for set in rest {
        acc = acc.zip_with(set, t_conorm)?;
    }
    Ok(acc)
}

/// Weighted-sample centroid `sum(x_i * mu_i) / sum(mu_i)` on the grid.
pub fn defuzzify_centroid(set: &DiscreteFuzzySet) -> Result<f64, FuzzyError> {
    let universe = set.universe();
    let (num, den) = set
        .samples()
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(num, den), (i, mu)| {
            (num + universe.point(i) * mu.value(), den + mu.value())
        });
    if den <= 0.0 {
        return Err(FuzzyError::EmptyAggregate);
    }
    Ok(universe.clamp(num / den))
}
