//! Contact sub-connection of the BC quotient and its reduction along contact
//! curves with chain 1 frozen to an arbitrary function `f(t)`.
//!
//! Run with `cargo run -p cfl --example subconnection`.

use cascade::{reduce_along_curves, ContactCurveSpec};
use cfl::load;
use flags::analyze;
use geomcore::Ctx;

fn main() {
    let file = load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/bc_subconnection.cfl")).expect("fixture loads");
    let c = file.subconnection(&Ctx::default()).expect("sub-connection block").expect("valid");
    println!("chains {}, group dimension {}", c.chains(), c.group_dim());
    println!("full rdt    {}", analyze(c.distribution()).unwrap().rdt);
    let r = reduce_along_curves(&c, &ContactCurveSpec::new().drop_chain(1, "f")).expect("reduction");
    for (b, p) in r.p().iter().enumerate() {
        println!("p{} = {p}", b + 1);
    }
    println!("reduced rdt {}", analyze(r.distribution()).unwrap().rdt);
}
