mod common;

use common::{check_all_words, random_formula, CASE_FORMULA, TABLE_FORMULA};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tlswitch::twtl::{parse_twtl, translate_to_fsa, TwtlAst};

fn props_used(ast: &TwtlAst) -> usize {
    let used = ast.propositions();
    if used.contains("B") {
        2
    } else {
        1
    }
}

#[test]
fn paper_formula_time_bounds() {
    assert_eq!(parse_twtl(CASE_FORMULA).unwrap().time_bound(), 62);
    assert_eq!(parse_twtl(TABLE_FORMULA).unwrap().time_bound(), 17);
}

#[test]
fn hand_written_formulas_match_semantics() {
    for text in [
        "H^1 A",
        "H^0 !A",
        "!H^2 A",
        "[H^1 A]^[0,3]",
        "[H^0 A]^[2,4] . H^0 B",
        "H^1 A & [H^0 B]^[0,3]",
        "[H^0 A]^[0,2] | [H^1 B]^[1,3]",
        "[!H^1 A]^[0,3] . [H^0 true]^[0,1]",
    ] {
        let ast = parse_twtl(text).unwrap();
        let fsa = translate_to_fsa(&ast).unwrap();
        let len = ast.time_bound() as usize + 1;
        check_all_words(&ast, &fsa, len, 2)
            .unwrap_or_else(|w| panic!("{text}: disagreement on {w:?}"));
    }
}

#[test]
fn random_formulas_match_semantics() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut words = 0;
    for _ in 0..1000 {
        let ast = random_formula(&mut rng, 8, 2);
        let fsa = translate_to_fsa(&ast).unwrap();
        let len = ast.time_bound() as usize + 1;
        words += check_all_words(&ast, &fsa, len, props_used(&ast))
            .unwrap_or_else(|w| panic!("{ast:?}: disagreement on {w:?}"));
    }
    assert!(words > 1000);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fsa_is_deterministic_and_absorbing(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ast = random_formula(&mut rng, 8, 2);
        let fsa = translate_to_fsa(&ast).unwrap();
        for q in 0..fsa.num_states() {
            let edges = fsa.edges(q);
            for (i, a) in edges.iter().enumerate() {
                for b in &edges[i + 1..] {
                    prop_assert!(!a.guard.overlaps(&b.guard), "state {} overlaps", q);
                }
            }
            if fsa.is_accepting(q) {
                prop_assert!(fsa.is_absorbing(q));
            }
        }
    }

    #[test]
    fn printed_formula_reparses(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ast = random_formula(&mut rng, 8, 2);
        let again = parse_twtl(&ast.to_string()).unwrap();
        prop_assert_eq!(again.time_bound(), ast.time_bound());
        prop_assert_eq!(again, ast);
    }
}
