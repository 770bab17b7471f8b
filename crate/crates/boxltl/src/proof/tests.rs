use super::*;
use crate::error::Error;
use crate::speclang::{parse_machine, parse_temporal_for};

fn counter() -> Machine {
    parse_machine(include_str!("../../fixtures/counter.ebm")).unwrap()
}

fn temporal(m: &Machine, s: &str) -> TemporalFormula {
    parse_temporal_for(s, m).unwrap()
}

fn hints(json: &str) -> ProofHints {
    ProofHints::from_json(json).unwrap()
}

fn n_hint() -> ProofHints {
    hints(r#"{"variants": [{"term": "n"}]}"#)
}

fn proved(m: &Machine, f: &str, h: &ProofHints) -> ProofTree {
    let t = prove(m, &temporal(m, f), h).unwrap_or_else(|e| panic!("{f}: {e}"));
    let r = check_proof(m, &t).unwrap();
    assert!(r.ok, "{f}: {:?}\n{}", r.failure, tree_to_text(&t));
    t
}

#[test]
fn rule_names_round_trip() {
    for r in ALL_RULES {
        assert_eq!(Rule::from_name(r.name()), Some(r));
    }
    assert_eq!(Rule::from_name("MP"), None);
}

#[test]
fn collapse_merges_repeated_modalities() {
    let m = counter();
    let b = word(&temporal(&m, "[] <> (n = 0)"));
    let doubled = Word {
        prefix: vec![Modality::Always, Modality::Always, Modality::Eventually, Modality::Eventually],
        base: b.base.clone(),
    };
    assert_ne!(doubled, b);
    assert_eq!(collapse(&doubled), b);
    assert_eq!(word(&temporal(&m, "[] (true -> <> n = 0)")), b);
    let p = word(&temporal(&m, "[] (n = 2 -> <> n = 0)"));
    let boxed = Word { prefix: [vec![Modality::Always], p.prefix.clone()].concat(), base: p.base.clone() };
    assert_eq!(collapse(&boxed), p);
}

#[test]
fn counter_invariance_uses_inv1() {
    let m = counter();
    let t = proved(&m, "[] n <= 10", &ProofHints::default());
    assert_eq!(t.rule, Rule::Ext);
    assert_eq!(t.premises[0].rule, Rule::Inv1);
}

#[test]
fn counter_existence_with_hint() {
    let m = counter();
    let t = proved(&m, "[] <> (n = 0)", &n_hint());
    assert!(t.rules_used().contains(&Rule::Live));
    assert!(t.rules_used().contains(&Rule::Conv));
}

#[test]
fn counter_persistence_with_hint() {
    let m = counter();
    let t = proved(&m, "<> [] (n = 0)", &n_hint());
    assert!(t.rules_used().contains(&Rule::Pers));
    assert!(t.rules_used().contains(&Rule::Div));
}

#[test]
fn counter_progress_from_existence() {
    let m = counter();
    let t = proved(&m, "[] (n = 2 -> <> n = 0)", &n_hint());
    assert!(t.rules_used().contains(&Rule::BoxDia1));
}

#[test]
fn auto_refine_supplies_the_variant() {
    let m = counter();
    let t = proved(&m, "[] <> (n = 0)", &ProofHints::auto());
    let conv = find(&t, Rule::Conv).expect("CONV node");
    assert!(matches!(conv.evidence, Some(Evidence::Refinement { mode: RefineMode::Conv, .. })));
}

fn find(t: &ProofTree, r: Rule) -> Option<&ProofTree> {
    if t.rule == r {
        return Some(t);
    }
    t.premises.iter().find_map(|p| find(p, r))
}

fn find_mut(t: &mut ProofTree, r: Rule) -> Option<&mut ProofTree> {
    if t.rule == r {
        return Some(t);
    }
    t.premises.iter_mut().find_map(|p| find_mut(p, r))
}

#[test]
fn missing_variant_asks_for_a_hint() {
    let m = counter();
    let e = prove(&m, &temporal(&m, "[] <> (n = 0)"), &ProofHints::default()).unwrap_err();
    assert!(matches!(&e, Error::Invalid(msg) if msg.contains("hint")), "{e}");
}

#[test]
fn invalid_goal_is_refused_with_counterexample() {
    let m = counter();
    let e = prove(&m, &temporal(&m, "[] (n = 10)"), &n_hint()).unwrap_err();
    assert!(matches!(&e, Error::Refused(msg) if msg.contains("fails")), "{e}");
}

#[test]
fn tampered_variant_is_rejected() {
    let m = counter();
    let mut t = proved(&m, "[] <> (n = 0)", &n_hint());
    let conv = find_mut(&mut t, Rule::Conv).unwrap();
    let bad = Term::Empty;
    conv.evidence = Some(Evidence::Variant(bad.clone()));
    if let Claim::VarC(v, _) = &mut conv.premises[0].conclusion.claim {
        *v = bad;
    }
    let r = check_proof(&m, &t).unwrap();
    let f = r.failure.expect("rejected");
    assert!(!f.path.is_empty());
}

#[test]
fn altered_conclusion_is_rejected() {
    let m = counter();
    let mut t = proved(&m, "[] <> (n = 0)", &n_hint());
    t.conclusion.claim = Claim::Temporal(temporal(&m, "[] <> (n = 2)"));
    let r = check_proof(&m, &t).unwrap();
    let f = r.failure.expect("rejected");
    assert!(f.path.is_empty());
    assert_eq!(f.rule, "EXT");
}

#[test]
fn forged_report_is_rejected() {
    let m = counter();
    let mut t = proved(&m, "[] n <= 10", &ProofHints::default());
    let leaf = find_mut(&mut t, Rule::Check).unwrap();
    if let Some(Evidence::Report(r)) = &mut leaf.evidence {
        r.condition.push(' ');
    }
    assert!(!check_proof(&m, &t).unwrap().ok);
}

#[test]
fn json_round_trip_preserves_trees() {
    let countdown = parse_machine(include_str!("../../fixtures/countdown.ebm")).unwrap();
    for (m, f, h) in [
        (counter(), "[] <> (n = 0)", n_hint()),
        (countdown.clone(), "<> [] (n = 0)", ProofHints::auto()),
        (countdown, "[] <> (n = 0)", ProofHints::auto()),
    ] {
        let t = proved(&m, f, &h);
        let back = tree_from_json(&tree_to_json(&t), &m).unwrap();
        assert_eq!(back, t);
    }
}

#[test]
fn text_listing_indents_premises() {
    let m = counter();
    let t = proved(&m, "[] n <= 10", &ProofHints::default());
    let text = tree_to_text(&t);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("[EXT] M |- "), "{text}");
    assert!(text.lines().nth(1).unwrap().starts_with("  [INV1] M~ |- "), "{text}");
}

#[test]
fn phi3_hint_must_be_parsable() {
    let m = counter();
    let h = hints(r#"{"phi3": [{"phi1": "n = 2", "phi2": "n = 0", "phi3": "n <"}]}"#);
    assert!(prove(&m, &temporal(&m, "[] (n = 2 -> <> n = 0)"), &h).is_err());
}

#[test]
fn progress_to_a_transient_goal_uses_prog() {
    let m = parse_machine(include_str!("../../fixtures/countdown.ebm")).unwrap();
    let t = proved(&m, "[] (n = 4 -> <> n = 2)", &ProofHints::auto());
    assert!(t.rules_used().contains(&Rule::Prog), "{}", tree_to_text(&t));
    let h = hints(
        r#"{"auto_refine": true, "phi3": [{"phi1": "n = 4", "phi2": "n = 2", "phi3": "n = 4 | n = 3"}]}"#,
    );
    let t = proved(&m, "[] (n = 4 -> <> n = 2)", &h);
    let prog = find(&t, Rule::Prog).unwrap();
    assert!(prog.premises.iter().any(|p| p.conclusion.to_string().contains("n = 4 | n = 3")));
}
