//! Truncated total derivative and Euler operator on a single jet chain,
//! including the kernel identity `E(D_t g) = 0`.
//!
//! Run with `cargo run -p cfl --example euler`.

use cascade::{euler_kernel_image, truncated_euler, truncated_total_derivative, JetChains};
use symexpr::nf;

fn main() {
    let chains = JetChains::from_orders(&[3]).unwrap();
    let f = nf("z1_0*z1_1^2 + sin(z1_2)").unwrap();
    println!("D_t f = {}", truncated_total_derivative(&f, &chains));
    for tau in 0..=3 {
        println!("E_{tau} f = {}", truncated_euler(&f, tau, 1, &chains).unwrap());
    }
    let g = nf("z1_0*exp(z1_1)").unwrap();
    let k = euler_kernel_image(&g, 2, 1, &chains).unwrap();
    println!("E_2(D_t g) = {}, identity residual = {}", k.euler, k.difference);
}
