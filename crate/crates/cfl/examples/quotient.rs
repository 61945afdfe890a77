//! Quotient of the BC system by its symmetry algebra, verified and decided.
//!
//! Run with `cargo run -p cfl --example quotient`.

use cfl::load;
use geomcore::Ctx;
use goursat::esfl_conditions;
use symmetry::{quotient_construct, quotient_verify};

fn main() {
    let file = load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/bc.cfl")).expect("fixture loads");
    let ctx = Ctx::default();
    let p = file.pfaffian(&ctx).expect("control system");
    let gamma = file.symmetry_algebra().expect("symmetries parse");
    let data = file.quotient_data().expect("invariants and cross-section");
    let q = quotient_construct(&p, &gamma, &data).expect("quotient");
    if let Ok(cs) = q.control_system() {
        for (s, f) in cs.names_with(geomcore::Role::State).iter().zip(cs.rhs()) {
            println!("{s}' = {f}");
        }
    }
    println!("verified: {}", quotient_verify(&p, &data, &q.system).unwrap().holds());
    let (verdict, esfl) = esfl_conditions(&q.distribution).expect("decision");
    println!("quotient rdt {}, ESFL {}", verdict.analysis.rdt, esfl.esfl);
}
