//! Explores a machine and its trivial extension and prints both graphs.

use boxltl::speclang::parse_machine;

fn main() -> boxltl::Result<()> {
    let m = parse_machine(include_str!("../fixtures/two_branch.ebm"))?;
    let g = m.build_graph(10_000)?;
    println!("{} reachable states, {} edges, complete: {}", g.len(), g.edges.len(), g.complete);
    for n in 0..g.len() {
        println!("  [{n}] {}", g.render_state(n));
    }
    for e in &g.edges {
        println!("  {} --{}--> {}", e.from, e.event, e.to);
    }
    println!("deadlocked: {:?}", g.deadlocked_nodes());

    let ext = m.trivial_extension().build_graph(10_000)?;
    println!("extension deadlocked: {:?}", ext.deadlocked_nodes());
    println!("{}", ext.to_dot());
    Ok(())
}
