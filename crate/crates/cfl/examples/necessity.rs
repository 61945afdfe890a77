//! The necessary condition on both codimension-one reductions of the
//! sub-connection with drift `exp(z1_1 z2_0)`.
//!
//! Run with `cargo run -p cfl --example necessity`.

use cascade::{build_subconnection, necessity_check, ContactCurveSpec, JetChains};
use geomcore::Ctx;
use symexpr::nf;

fn main() {
    let ctx = Ctx::default();
    let chains = JetChains::from_orders(&[2, 2]).unwrap();
    let c = build_subconnection(&chains, vec![nf("exp(z1_1*z2_0)").unwrap()], vec![vec![nf("1").unwrap()]], &ctx)
        .expect("sub-connection");
    for (drop, name) in [(2, "f"), (1, "g")] {
        let v = necessity_check(&c, &ContactCurveSpec::new().drop_chain(drop, name), &ctx).expect("check");
        println!("drop chain {drop} -> {name}(t): {v}");
    }
}
