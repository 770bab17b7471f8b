//! Builds the variant-introducing refinements and checks their side conditions.

use boxltl::fol::check_var_c;
use boxltl::refine::{refine_for_conv, refine_for_div, refinement_evidence, RefineMode};
use boxltl::speclang::{parse_machine, parse_state_formula, print_machine, print_term};

fn main() -> boxltl::Result<()> {
    let m = parse_machine(include_str!("../fixtures/countdown.ebm"))?.trivial_extension();
    let nonzero = parse_state_formula("n != 0", Some(&m))?;
    let zero = parse_state_formula("n = 0", Some(&m))?;

    let conv = refine_for_conv(&m, &nonzero, 100_000)?;
    println!("{}", print_machine(&conv.machine));
    let g = conv.machine.build_graph(100_000)?;
    let var = check_var_c(&g, &conv.variant, &nonzero)?;
    println!("{} refined states; {}: {}", g.len(), var.condition, var.holds);

    let div = refine_for_div(&m, &zero, 100_000)?;
    println!("div variant: {}", print_term(&div.variant));
    println!("{}", serde_json::to_string_pretty(&div.sidecar()).unwrap_or_default());

    for (mode, phi) in [(RefineMode::Conv, &nonzero), (RefineMode::Div, &zero)] {
        let (variant, reports) = refinement_evidence(&m, phi, mode, 100_000, 12)?;
        println!("{}: variant {}", mode.name(), print_term(&variant));
        for r in reports {
            println!("  {}: {}", r.condition, if r.holds { "holds" } else { "fails" });
        }
    }
    Ok(())
}
