//! Kalman rank test for a linear system and for a Brunovsky normal form.
//!
//! Run with `cargo run -p cfl --example kalman`.

use geomcore::{brunovsky_matrices, kalman_controllable, kalman_rank, ControlSystem};

fn main() {
    let sys = ControlSystem::parse(
        &[("x1", "x2"), ("x2", "u1"), ("x3", "x4 + u2"), ("x4", "x3 - u2")],
        &["u1", "u2"],
    )
    .expect("valid system");
    let (a, b) = sys.linear_matrices().expect("linear");
    println!("rank [B AB A^2B A^3B] = {} of {}", kalman_rank(&a, &b).unwrap(), a.len());
    for kappa in [vec![1], vec![0, 1], vec![1, 0, 2]] {
        let (a, b) = brunovsky_matrices(&kappa);
        println!("Brunovsky {kappa:?}: controllable = {}", kalman_controllable(&a, &b).unwrap());
    }
}
