//! Reconstruction of the group coordinates along the flat curves
//! `z1 = t^2`, `z2 = t^3 - t` of the lifted example.
//!
//! Run with `cargo run -p cfl --example reconstruct`.

use cascade::reconstruct_trajectory;
use cfl::load;
use geomcore::Ctx;

fn main() {
    let file = load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/reconstruction.cfl")).expect("fixture loads");
    let c = file.subconnection(&Ctx::default()).expect("sub-connection block").expect("valid");
    let grid = file.time_grid();
    let tr = reconstruct_trajectory(&c, &file.flat_curves(), &grid, &file.eps0).expect("integration");
    for n in (0..tr.t.len()).step_by(grid.steps / 5) {
        println!("t = {:.2}  eps = {:?}", tr.t[n], tr.eps[n]);
    }
    let exact = ((2.0f64).exp() - 1.0) / 2.0;
    println!("eps2(1) = {:.12} (closed form {exact:.12})", tr.eps.last().unwrap()[1]);
    println!("residual {:.3e}, Richardson confirmed: {}", tr.residual, tr.confirmed);
}
