use super::set::ensure_same_universe;
use super::{implication, t_conorm, t_norm, Degree, DiscreteFuzzySet, FuzzyError, ImplicationMethod, Universe};

/// A fuzzy relation on `domain x codomain`, stored row-major
/// (`rows = domain.resolution()`).
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyRelation {
    domain: Universe,
    codomain: Universe,
    samples: Vec<Degree>,
}

impl FuzzyRelation {
    pub fn from_fn(domain: Universe, codomain: Universe, f: impl Fn(usize, usize) -> Degree) -> Self {
        let (rows, cols) = (domain.resolution(), codomain.resolution());
        let mut samples = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                samples.push(f(i, j));
            }
        }
        Self { domain, codomain, samples }
    }

    pub fn from_rows(domain: Universe, codomain: Universe, rows: Vec<Vec<Degree>>) -> Result<Self, FuzzyError> {
        if rows.len() != domain.resolution() {
            return Err(FuzzyError::LengthMismatch {
                expected: domain.resolution(),
                found: rows.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != codomain.resolution()) {
            return Err(FuzzyError::LengthMismatch {
                expected: codomain.resolution(),
                found: bad.len(),
            });
        }
        Ok(Self {
            domain,
            codomain,
            samples: rows.into_iter().flatten().collect(),
        })
    }

    pub fn domain(&self) -> &Universe {
        &self.domain
    }

    pub fn codomain(&self) -> &Universe {
        &self.codomain
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Degree {
        self.samples[i * self.codomain.resolution() + j]
    }

    pub fn row(&self, i: usize) -> &[Degree] {
        let cols = self.codomain.resolution();
        &self.samples[i * cols..(i + 1) * cols]
    }
}

/// `R[i][j] = implication(A[i], B[j])`.
pub fn build_relation(a: &DiscreteFuzzySet, b: &DiscreteFuzzySet, method: ImplicationMethod) -> FuzzyRelation {
    FuzzyRelation::from_fn(a.universe().clone(), b.universe().clone(), |i, j| {
        implication(a.samples()[i], b.samples()[j], method)
    })
}

/// Sup-min composition: `B'[j] = max_i min(A'[i], R[i][j])`.
pub fn generalized_modus_ponens(
    premise: &DiscreteFuzzySet,
    relation: &FuzzyRelation,
) -> Result<DiscreteFuzzySet, FuzzyError> {
    ensure_same_universe(relation.domain(), premise.universe())?;
    let mut out = vec![Degree::ZERO; relation.codomain().resolution()];
    for (i, &a) in premise.samples().iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (acc, &r) in out.iter_mut().zip(relation.row(i)) {
            *acc = t_conorm(*acc, t_norm(a, r));
        }
    }
    DiscreteFuzzySet::from_samples(relation.codomain().clone(), out)
}
