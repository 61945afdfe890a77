//! Derived flag and refined derived type of the HSM system.
//!
//! Run with `cargo run -p cfl --example flags`.

use flags::analyze;
use geomcore::{ControlSystem, Ctx};

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
    let a = analyze(&sys.distribution(&Ctx::default())).expect("analysis");
    println!("ranks          {:?}", a.ranks());
    println!("derived length {}", a.derived_length());
    println!("refined type   {}", a.rdt);
}
