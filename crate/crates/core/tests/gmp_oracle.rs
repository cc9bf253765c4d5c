use fuzzy_agents::fuzzy::{
    build_relation, generalized_modus_ponens, Degree, DiscreteFuzzySet, FuzzyRelation, ImplicationMethod, Universe,
};
use proptest::prelude::*;

/// B'[j] = sup_i min(A'[i], R[i][j]), written out over plain floats.
fn oracle(premise: &[f64], rows: &[Vec<f64>]) -> Vec<f64> {
    let m = rows.first().map_or(0, Vec::len);
    let mut out = vec![0.0f64; m];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut best = 0.0f64;
        for (i, a) in premise.iter().enumerate() {
            let r = rows[i][j];
            let v = if *a < r { *a } else { r };
            if v > best {
                best = v;
            }
        }
        *slot = best;
    }
    out
}

fn degrees(v: &[f64]) -> Vec<Degree> {
    v.iter().map(|x| Degree::new(*x).unwrap()).collect()
}

fn case() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>)> {
    (2usize..=101, 2usize..=101).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(0.0f64..=1.0, n),
            prop::collection::vec(prop::collection::vec(0.0f64..=1.0, m), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gmp_equals_exhaustive_sup_min((premise, rows) in case()) {
        let x = Universe::new("x", 0.0, 1.0, premise.len()).unwrap();
        let y = Universe::new("y", 0.0, 1.0, rows[0].len()).unwrap();
        let r = FuzzyRelation::from_rows(x.clone(), y, rows.iter().map(|row| degrees(row)).collect()).unwrap();
        let a = DiscreteFuzzySet::from_samples(x, degrees(&premise)).unwrap();
        let got: Vec<f64> = generalized_modus_ponens(&a, &r).unwrap().samples().iter().map(|d| d.value()).collect();
        prop_assert_eq!(got, oracle(&premise, &rows));
    }

    #[test]
    fn relation_entries_follow_implication(
        a in prop::collection::vec(0.0f64..=1.0, 2..20),
        b in prop::collection::vec(0.0f64..=1.0, 2..20),
    ) {
        let x = Universe::new("x", 0.0, 1.0, a.len()).unwrap();
        let y = Universe::new("y", 0.0, 1.0, b.len()).unwrap();
        let sa = DiscreteFuzzySet::from_samples(x, degrees(&a)).unwrap();
        let sb = DiscreteFuzzySet::from_samples(y, degrees(&b)).unwrap();
        let mamdani = build_relation(&sa, &sb, ImplicationMethod::Mamdani);
        let godel = build_relation(&sa, &sb, ImplicationMethod::Godel);
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                prop_assert_eq!(mamdani.get(i, j).value(), ai.min(*bj));
                prop_assert_eq!(godel.get(i, j).value(), if ai <= bj { 1.0 } else { *bj });
            }
        }
    }
}

#[test]
fn matching_premise_reproduces_consequent_under_mamdani() {
    let x = Universe::new("x", 0.0, 10.0, 11).unwrap();
    let y = Universe::new("y", 0.0, 10.0, 11).unwrap();
    let a = DiscreteFuzzySet::from_fn(x, |v| Degree::saturating(1.0 - (v - 5.0).abs() / 5.0));
    let b = DiscreteFuzzySet::from_fn(y, |v| Degree::saturating(v / 10.0));
    let r = build_relation(&a, &b, ImplicationMethod::Mamdani);
    // A is normal (height 1), so sup-min recovers B exactly.
    assert_eq!(generalized_modus_ponens(&a, &r).unwrap(), b);
}
