//! The sufficient condition for the so(5) sub-connection: search for a
//! decomposition, then print the reduced invariant and the side condition.
//!
//! Run with `cargo run -p cfl --example sufficiency`.

use cascade::{sufficiency_search, ContactCurveSpec, SearchOutcome};
use cfl::load;
use geomcore::Ctx;

fn main() {
    let file = load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/so5.cfl")).expect("fixture loads");
    let ctx = Ctx::default();
    let c = file.subconnection(&ctx).expect("sub-connection block").expect("valid");
    let spec = ContactCurveSpec::new().drop_chain(2, "g");
    match sufficiency_search(&c, &spec, None, &ctx).expect("search") {
        SearchOutcome::Found(v) => {
            for (l, a) in v.decomposition.iter().enumerate() {
                println!("A{l} = {a}");
            }
            println!("{v}");
        }
        SearchOutcome::Impossible(n) => println!("impossible: {n}"),
        SearchOutcome::Inconclusive(why) => println!("inconclusive: {why}"),
    }
}
