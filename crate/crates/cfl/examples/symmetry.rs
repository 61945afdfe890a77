//! Symmetry algebra of the BC system: closure, admissibility and the
//! relative Goursat decision.
//!
//! Run with `cargo run -p cfl --example symmetry`.

use cfl::load;
use geomcore::Ctx;
use num_traits::Zero;
use symmetry::{is_control_admissible, is_strongly_transverse, relative_goursat_check};

fn main() {
    let file = load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/bc.cfl")).expect("fixture loads");
    let ctx = Ctx::default();
    let gamma = file.symmetry_algebra().expect("symmetries parse");
    let table = gamma.verify_closure(&ctx).expect("closed algebra");
    println!("dim {}", gamma.dim());
    let mut abelian = true;
    for (i, row) in table.iter().enumerate() {
        for (j, cs) in row.iter().enumerate().skip(i + 1) {
            for (k, c) in cs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                abelian = false;
                println!("c^{}_{}{} = {c}", k + 1, i + 1, j + 1);
            }
        }
    }
    println!("abelian: {abelian}");
    let p = file.pfaffian(&ctx).expect("control system");
    let adm = is_control_admissible(&gamma, &p).expect("admissibility");
    for (name, ok) in adm.items() {
        println!("{name}: {ok}");
    }
    println!("strongly transverse: {}", is_strongly_transverse(&gamma, &p).unwrap());
    let rel = relative_goursat_check(&file.distribution(&ctx).unwrap(), &gamma).expect("decision");
    println!("extended rdt {} -> {}", rel.goursat.analysis.rdt, rel.outcome);
}
