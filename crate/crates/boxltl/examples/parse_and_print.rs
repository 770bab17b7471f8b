//! Parses a machine and its property file, prints them back and reparses.

use boxltl::speclang::{parse_ltl_file, parse_machine, print_machine, print_temporal};

const MACHINE: &str = include_str!("../fixtures/counter.ebm");
const PROPERTIES: &str = include_str!("../fixtures/counter.ltl");

fn main() -> boxltl::Result<()> {
    let m = parse_machine(MACHINE)?;
    let printed = print_machine(&m);
    println!("{printed}");
    assert_eq!(parse_machine(&printed)?, m);

    for (name, f) in parse_ltl_file(PROPERTIES, Some(&m))? {
        println!("{name} : {}  (depth {})", print_temporal(&f), f.depth());
    }

    match parse_machine("machine Broken\nvariables x\ninit\n  x := \nend\n") {
        Ok(_) => println!("unexpectedly parsed"),
        Err(e) => println!("error report:\n{e}"),
    }
    Ok(())
}
