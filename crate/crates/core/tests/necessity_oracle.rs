mod common;

use std::collections::BTreeMap;

#[test]
fn certified_evidence_is_the_unique_minimal_core() {
    let (grammar, examples) = common::small_certified(40, 5);
    assert_eq!(examples.len(), 40);
    let mut sizes = BTreeMap::new();
    for (premise, ex) in &examples {
        assert!(premise.len() <= 20);
        let formulas: Vec<_> = premise.clauses.iter().map(|c| &c.formula).collect();
        let minimal = common::minimal_unsat_subsets(&formulas, &ex.hypothesis.formula, grammar.domain(), 20)
            .expect("few enough atoms");
        let expected = ex.evidence.iter().fold(0u32, |m, &i| m | 1 << i);
        assert_eq!(minimal, vec![expected], "{:?} / {}", ex.evidence, ex.hypothesis.english);
        *sizes.entry(ex.evidence.len()).or_insert(0) += 1;
    }
    assert!(sizes.len() >= 2, "evidence sizes {sizes:?}");
}
