//! Goursat recognition and contact coordinates for the HSM system, with the
//! first integrals supplied by an oracle.
//!
//! Run with `cargo run -p cfl --example goursat_contact`.

use geomcore::{ControlSystem, Ctx};
use goursat::{esfl_conditions, procedure_contact, verify_contact_coordinates, FirstIntegralOracle};

fn main() {
    let sys = ControlSystem::parse(
        &[
            ("x1", "sin(x2)"),
            ("x2", "sin(x3)"),
            ("x3", "x4^3 + u1"),
            ("x4", "x5 + x4^3 - x1^10"),
            ("x5", "u2"),
        ],
        &["u1", "u2"],
    )
    .expect("valid system");
    let v = sys.distribution(&Ctx::default());
    let (verdict, _) = esfl_conditions(&v).expect("decision");
    for c in &verdict.conditions {
        println!("{:<28} {:?}  {}", c.name, c.status, c.detail);
    }
    let oracle = FirstIntegralOracle::new()
        .with_sources("order2", &["x4"])
        .and_then(|o| o.with_sources("fundamental", &["x1"]))
        .expect("oracle expressions parse");
    let coords = procedure_contact(&v, &oracle).expect("contact coordinates");
    println!("procedure {:?}, x = {}", coords.procedure, coords.x);
    for chain in &coords.chains {
        for (s, z) in chain.coords.iter().enumerate() {
            println!("  order {} z_{s} = {z}", chain.order);
        }
    }
    println!("verified: {}", verify_contact_coordinates(&v, &coords).holds());
}
