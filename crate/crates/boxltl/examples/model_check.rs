//! Checks fragment formulas with both oracles and prints counterexamples.

use boxltl::oracle::{holds_bruteforce, holds_fast, verdict_text};
use boxltl::speclang::{parse_machine, parse_temporal_for};

fn main() -> boxltl::Result<()> {
    let m = parse_machine(include_str!("../fixtures/two_loop.ebm"))?;
    let g = m.trivial_extension().build_graph(10_000)?;
    for p in &m.predicates {
        println!("predicate {} : {}", p.0, boxltl::speclang::print_formula(&p.1));
    }
    let atoms: Vec<_> = m.predicates.iter().map(|p| p.1.clone()).collect();
    let Some(first) = atoms.first() else { return Ok(()) };
    let first = boxltl::speclang::print_formula(first);
    for text in [format!("[] <> ({first})"), format!("<> [] ({first})"), format!("[] (!({first}) -> <> {first})")] {
        let Ok(f) = parse_temporal_for(&text, &m) else {
            println!("{text}: not a fragment formula");
            continue;
        };
        let fast = holds_fast(&g, &f, 1_000_000)?;
        let brute = holds_bruteforce(&g, &f, 1_000_000)?;
        assert_eq!(fast.label(), brute.label());
        println!("{}", verdict_text(&g, &text, &fast));
    }
    Ok(())
}
