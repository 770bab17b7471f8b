mod common;

use boxltl::hfset::HfSet;
use boxltl::oracle::{holds_bruteforce, holds_fast, TemporalFormula};
use boxltl::proof::{check_proof, tree_from_json, tree_to_json, ProofContext, ProofHints};
use boxltl::speclang::{parse_machine, parse_temporal_for, print_machine, print_temporal};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn hfset() -> impl Strategy<Value = HfSet> {
    let leaf = prop_oneof![
        Just(HfSet::empty()),
        Just(HfSet::atom("a")),
        Just(HfSet::atom("b")),
        (0usize..5).prop_map(HfSet::von_neumann),
    ];
    leaf.prop_recursive(4, 32, 4, |inner| prop::collection::vec(inner, 0..4).prop_map(HfSet::set))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #[test]
    fn hfset_text_round_trips(x in hfset()) {
        prop_assert_eq!(x.to_string().parse::<HfSet>().unwrap(), x.clone());
        prop_assert_eq!(x.pretty().parse::<HfSet>().unwrap(), x);
    }

    #[test]
    fn order_is_a_strict_partial_order(x in hfset(), y in hfset(), z in hfset()) {
        prop_assert!(!x.lt(&x));
        prop_assert!(x.leq(&x));
        if x.lt(&y) {
            prop_assert!(!y.lt(&x));
            prop_assert!(x.tc_size() < y.tc_size());
            if y.lt(&z) {
                prop_assert!(x.lt(&z));
            }
        }
    }

    #[test]
    fn membership_descends(x in hfset(), y in hfset()) {
        let s = HfSet::set([x.clone(), y]);
        prop_assert!(x.lt(&s));
        prop_assert!(s.contains(&x));
    }

    #[test]
    fn pairs_and_tuples_decode(x in hfset(), y in hfset(), z in hfset()) {
        prop_assert_eq!(HfSet::decode_kpair(&HfSet::kpair(&x, &y)), Some((x.clone(), y.clone())));
        let xs = vec![x, y, z];
        prop_assert_eq!(HfSet::decode_tuple(&HfSet::encode_tuple(&xs), 3), Some(xs));
    }

    #[test]
    fn set_algebra(x in hfset(), y in hfset()) {
        prop_assume!(!x.is_atom() && !y.is_atom());
        let u = x.union(&y).unwrap();
        prop_assert_eq!(&u, &y.union(&x).unwrap());
        prop_assert!(x.is_subset(&u) && y.is_subset(&u));
        let d = x.difference(&y).unwrap();
        prop_assert!(d.is_subset(&x));
        prop_assert!(d.elements().iter().all(|e| !y.contains(e)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn machines_round_trip(seed in any::<u64>(), n in 1usize..=12) {
        let m = parse_machine(&random_machine_text(&mut rng(seed), 0, n)).unwrap();
        let text = print_machine(&m);
        let back = parse_machine(&text).unwrap();
        prop_assert_eq!(print_machine(&back), text);
        prop_assert_eq!(back, m);
    }

    #[test]
    fn formulas_round_trip(seed in any::<u64>(), which in 0usize..4) {
        let name = ["counter", "two_loop", "traffic", "elevator"][which];
        let m = fixture(name).machine;
        let f = random_temporal(&mut rng(seed), &m, 3);
        let text = print_temporal(&f);
        prop_assert_eq!(parse_temporal_for(&text, &m).unwrap(), f);
    }

    #[test]
    fn oracles_agree_on_random_machines(seed in any::<u64>(), n in 1usize..=7) {
        let mut r = rng(seed);
        let m = parse_machine(&random_machine_text(&mut r, 0, n)).unwrap();
        let g = m.trivial_extension().build_graph(1_000).unwrap();
        prop_assert!(g.deadlocked_nodes().is_empty());
        for _ in 0..8 {
            let f = random_temporal(&mut r, &m, 2);
            let fast = holds_fast(&g, &f, 1_000_000).unwrap();
            let brute = holds_bruteforce(&g, &f, 1_000_000).unwrap();
            prop_assert_eq!(fast.label(), brute.label(), "{}", f);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Proofs found on random machines are accepted, survive storage, and
    /// prove only formulas the oracle validates.
    #[test]
    fn proofs_check_and_survive_storage(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let m = parse_machine(&random_machine_text(&mut r, 0, n)).unwrap();
        let ctx = ProofContext::new(&m).unwrap();
        let atoms = named_atoms(&m);
        for f in TemporalFormula::enumerate(&atoms, 1) {
            let Ok(t) = ctx.prove(&f, &ProofHints::auto()) else { continue };
            prop_assert!(holds_fast(&ctx.ext_graph, &f, 1_000_000).unwrap().holds());
            let back = tree_from_json(&tree_to_json(&t), &m).unwrap();
            prop_assert_eq!(&back, &t);
            prop_assert!(check_proof(&m, &back).unwrap().ok, "{}", f);
        }
    }
}
