//! Proves liveness properties of the counter, stores a proof and rechecks it.

use boxltl::proof::{check_proof, prove, tree_from_json, tree_to_json, tree_to_text, ProofHints};
use boxltl::speclang::{parse_machine, parse_temporal_for};

fn main() -> boxltl::Result<()> {
    let m = parse_machine(include_str!("../fixtures/counter.ebm"))?;
    let hints = ProofHints::from_json(include_str!("../fixtures/counter.hints.json"))?;
    for text in ["[] n <= 10", "[] <> (n = 0)", "<> [] (n = 0)", "[] (n = 2 -> <> n = 0)"] {
        let f = parse_temporal_for(text, &m)?;
        let tree = prove(&m, &f, &hints)?;
        println!("{text}: {} nodes, rules {:?}", tree.size(), tree.rules_used());
        println!("{}", tree_to_text(&tree));
        let stored = tree_to_json(&tree);
        let back = tree_from_json(&stored, &m)?;
        let report = check_proof(&m, &back)?;
        println!("rechecked: {}\n", if report.ok { "accepted" } else { "rejected" });
    }

    // A false goal is refused with the oracle's counterexample.
    let f = parse_temporal_for("[] <> (n = 2)", &m)?;
    if let Err(e) = prove(&m, &f, &hints) {
        println!("refused: {e}");
    }
    Ok(())
}
