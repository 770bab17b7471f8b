//! Building hereditarily finite sets and comparing them in the closure order.

use boxltl::hfset::HfSet;

fn main() -> boxltl::Result<()> {
    let a = HfSet::atom("a");
    let three = HfSet::von_neumann(3);
    let s: HfSet = "{a, {a}, 2}".parse()?;
    println!("3 = {}", three.pretty());
    println!("s = {} with {} elements", s.pretty(), s.len());
    println!("TC(s) = {} ({} members)", s.transitive_closure().pretty(), s.tc_size());

    let p = HfSet::kpair(&a, &three);
    println!("(a, 3) = {}", p.pretty());
    println!("decoded: {:?}", HfSet::decode_kpair(&p).map(|(x, y)| (x.pretty(), y.pretty())));

    let t = HfSet::encode_tuple(&[a.clone(), three.clone(), HfSet::empty()]);
    println!("tuple decodes back: {}", HfSet::decode_tuple(&t, 3).is_some());

    // Membership and strict inclusion both descend in the order.
    println!("2 < 3: {}", HfSet::von_neumann(2).lt(&three));
    println!("{{a}} < {{a, 2}}: {}", HfSet::set([a.clone()]).lt(&HfSet::set([a.clone(), HfSet::von_neumann(2)])));
    // Removing a middle element keeps it in the closure through its successor.
    let holey = three.difference(&HfSet::set([HfSet::von_neumann(1)]))?;
    println!("3 \\ {{1}} = {}, below 3: {}", holey.pretty(), holey.lt(&three));
    println!("union {}", s.union(&three)?.pretty());
    println!("bigunion of 3 = {}", three.big_union()?.pretty());
    Ok(())
}
