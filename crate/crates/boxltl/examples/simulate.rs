//! A seeded random walk through the traffic light, written with the library.

use boxltl::speclang::parse_machine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> boxltl::Result<()> {
    let m = parse_machine(include_str!("../fixtures/traffic.ebm"))?.trivial_extension();
    let env = m.env()?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let inits = m.initial_states(&env)?;
    let mut state = inits[rng.gen_range(0..inits.len())].clone();
    println!("   0  {}", m.render_state(&state));
    for step in 1..=12 {
        let succ = m.successors(&env, &state)?;
        let (firing, next) = succ[rng.gen_range(0..succ.len())].clone();
        state = next;
        println!("{step:>4}  {}   via {}", m.render_state(&state), m.events[firing.event].name);
    }
    Ok(())
}
