//! Static feedback linearizability of the Sluis system from a `.cfl` file:
//! the system is Goursat, but `dt` does not lie in the resolvent annihilator.
//!
//! Run with `cargo run -p cfl --example esfl`.

use cfl::{load, run, Command, Options};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/sluis.cfl");
    let file = load(path).expect("fixture loads");
    let report = run(Command::Esfl, &file, &Options::default()).expect("decision");
    print!("{}", report.to_text(None));
}
