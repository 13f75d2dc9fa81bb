//! Invariants checked over random inputs.

mod common;

use std::collections::{BTreeSet, HashMap};

use common::*;
use efgame::game::{duplicator_wins_oracle, k_type};
use efgame::logic::{evaluate, free_vars, parse_formula, quantifier_depth};
use efgame::presburger::{check_conditions_plain, Bounds, CheckMode};
use efgame::representation::{
    canonical_s, parse_dense, parse_region, print_dense, print_region, qe_normalize, rep_structure,
    RegionRelation,
};
use efgame::structure::{
    active_domain, is_order_preserving, parse_structure, print_structure, relocate, OrderedStructure,
    PartialMap, Point, Signature, Universe,
};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn word(seed: u64, len: usize) -> OrderedStructure {
    let mut r = rng(seed);
    let w = random_word(&mut r, len);
    word_structure(&w, &spaced(w.len(), 1))
}

/// Moves every point of `s` onto increasing targets with random gaps.
fn stretch(s: &OrderedStructure, seed: u64) -> OrderedStructure {
    let mut r = rng(seed);
    let pts = s.points(1 << 10).expect("finite");
    let mut at = r.gen_range(-50..50);
    let targets: Vec<Point> = pts
        .iter()
        .map(|_| {
            at += r.gen_range(1..20);
            Point::ratio(at, 3)
        })
        .collect();
    let m = PartialMap::new(pts.into_iter().zip(targets.iter().cloned()).collect());
    relocate(s, &m, Universe::Points(targets)).expect("order preserving")
}

/// The region relation `random_region` draws for `seed`, on cuts shifted by
/// `shift`.
fn shifted_region(seed: u64, arity: usize, cuts: &[i64], shift: i64) -> RegionRelation {
    let moved: Vec<i64> = cuts.iter().map(|c| c + shift).collect();
    random_region(&mut rng(seed), arity, &moved)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn oracle_is_reflexive_and_symmetric(sa in any::<u64>(), sb in any::<u64>(), r in 0usize..=2) {
        let (a, b) = (word(sa, 6), word(sb, 6));
        prop_assert!(duplicator_wins_oracle(&a, &a, r).unwrap());
        prop_assert_eq!(duplicator_wins_oracle(&a, &b, r).unwrap(), duplicator_wins_oracle(&b, &a, r).unwrap());
    }

    #[test]
    fn more_rounds_only_separate_more(sa in any::<u64>(), sb in any::<u64>(), r in 0usize..2) {
        let (a, b) = (word(sa, 5), word(sb, 5));
        if duplicator_wins_oracle(&a, &b, r + 1).unwrap() {
            prop_assert!(duplicator_wins_oracle(&a, &b, r).unwrap());
        }
    }

    #[test]
    fn k_types_match_the_oracle(sa in any::<u64>(), sb in any::<u64>(), k in 0usize..=2) {
        let (a, b) = (word(sa, 5), word(sb, 5));
        let same = k_type(&a, k).unwrap() == k_type(&b, k).unwrap();
        prop_assert_eq!(same, duplicator_wins_oracle(&a, &b, k).unwrap());
    }

    #[test]
    fn games_ignore_order_preserving_relocation(sa in any::<u64>(), sb in any::<u64>(), sm in any::<u64>(), r in 1usize..=2) {
        let (a, b) = (word(sa, 5), word(sb, 5));
        let moved = stretch(&a, sm);
        prop_assert!(duplicator_wins_oracle(&a, &moved, r + 1).unwrap());
        prop_assert_eq!(duplicator_wins_oracle(&a, &b, r).unwrap(), duplicator_wins_oracle(&moved, &b, r).unwrap());
    }

    #[test]
    fn rank_maps_preserve_order(src in proptest::collection::btree_set(-40i64..40, 0..8), step in 1i64..9) {
        let sources: BTreeSet<Point> = src.iter().map(|&x| Point::int(x)).collect();
        let targets: Vec<Point> = spaced(sources.len(), step).into_iter().map(Point::int).collect();
        let m = PartialMap::by_rank(&sources, &targets).expect("enough targets");
        prop_assert!(m.is_functional_injective());
        prop_assert!(is_order_preserving(&m));
        prop_assert_eq!(m.then(&m.inverse()).pairs.len(), sources.len());
        for (x, y) in &m.then(&m.inverse()).pairs {
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn structures_survive_text(seed in any::<u64>(), n in 1usize..8) {
        let s = random_database(&mut rng(seed), n, 40);
        let back = parse_structure(&print_structure(&s)).unwrap();
        prop_assert_eq!(active_domain(&back), active_domain(&s));
        prop_assert_eq!(print_structure(&back), print_structure(&s));
    }

    #[test]
    fn regions_and_dense_databases_survive_text(seed in any::<u64>()) {
        let a = random_dense(&mut rng(seed), 3);
        prop_assert!(parse_dense(&print_dense(&a)).unwrap().same_as(&a));
        for r in a.relations.values() {
            prop_assert!(parse_region(&print_region(r)).unwrap().same_set(r));
        }
    }

    #[test]
    fn formulas_survive_text(seed in any::<u64>(), depth in 1usize..=3, plus in any::<bool>()) {
        let f = random_sentence(&mut rng(seed), depth, plus);
        let sig = if plus { Signature::new().with_plus() } else { Signature::new() };
        let back = parse_formula(&f.to_string(), &sig).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(quantifier_depth(&back), depth);
        prop_assert!(free_vars(&back).is_empty());
    }

    #[test]
    fn presburger_sentences_match_brute_force(seed in any::<u64>(), depth in 1usize..=2, n in 3i64..12) {
        let f = random_sentence(&mut rng(seed), depth, true);
        let s = OrderedStructure::new(Signature::new().with_plus(), Universe::window(0, n));
        prop_assert_eq!(evaluate(&f, &s, &HashMap::new()).unwrap(), naive_range(&f, n, &mut vec![]));
    }

    #[test]
    fn quantifier_elimination_agrees_with_evaluation(seed in any::<u64>(), depth in 0usize..=2,
                                                     xs in proptest::collection::vec((-16i64..80, 1i64..8), 2)) {
        let mut r = rng(seed);
        let pool = [0, 3, 5];
        let vars = vec!["x1".to_string(), "x2".to_string()];
        let f = random_formula(&mut r, depth, &mut vars.clone(), &pool, false);
        let cuts: Vec<Point> = pool.iter().map(|&c| Point::int(c)).collect();
        let region = qe_normalize(&f, &vars, &cuts).unwrap();
        let pts: Vec<Point> = xs.iter().map(|&(n, d)| Point::ratio(n, d)).collect();
        let env: HashMap<String, Point> = vars.iter().cloned().zip(pts.iter().cloned()).collect();
        let rationals = OrderedStructure::new(Signature::new(), Universe::Rationals);
        prop_assert_eq!(region.contains(&pts), evaluate(&f, &rationals, &env).unwrap());
    }

    #[test]
    fn canonical_cuts_follow_translation(seed in any::<u64>(), arity in 1usize..=2, shift in -20i64..20,
                                         cuts in proptest::collection::btree_set(0i64..8, 0..4)) {
        let cuts: Vec<i64> = cuts.into_iter().collect();
        let r = shifted_region(seed, arity, &cuts, 0);
        let moved = shifted_region(seed, arity, &cuts, shift);
        let expect: Vec<Point> = canonical_s(&r).iter().map(|p| p.add(&Point::int(shift))).collect();
        prop_assert_eq!(canonical_s(&moved), expect);
    }

    #[test]
    fn encoding_keeps_the_canonical_cuts(seed in any::<u64>()) {
        let a = random_dense(&mut rng(seed), 3);
        let rep = rep_structure(&a).unwrap();
        let mut want: BTreeSet<Point> = a.relations.values().flat_map(canonical_s).collect();
        want.extend(a.constants.values().cloned());
        let got: BTreeSet<Point> = rep.cuts().into_iter().collect();
        prop_assert_eq!(got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn identical_sides_meet_level_one(anchors in proptest::collection::btree_set(0i64..5000, 0..4)) {
        let mut a = vec![BigInt::from(0)];
        a.extend(anchors.into_iter().filter(|&x| x != 0).map(BigInt::from));
        let bounds = Bounds::level(1).unwrap();
        prop_assert!(check_conditions_plain(&a, &a, &bounds, CheckMode::default()).unwrap().holds);
    }
}
