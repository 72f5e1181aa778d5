//! Reduced states of a Bell pair: each half alone is maximally mixed.

use decolab::entanglement::{ensemble_entropy, linear_entropy};
use decolab::hilbert::{partial_trace, StateVector, TensorSpace};
use decolab::Result;

fn main() -> Result<()> {
    let space = TensorSpace::new([("alice", 2), ("bob", 2)])?;
    let bell = StateVector::from_reals(space, &[1.0, 0.0, 0.0, 1.0])?.normalize()?;

    let joint = bell.density()?;
    println!("global purity      {:.6}", joint.purity());

    for side in ["alice", "bob"] {
        let reduced = partial_trace(&bell, &[side])?;
        println!("{side:>5} reduced state:");
        for r in 0..2 {
            println!("    [{:+.3}  {:+.3}]", reduced.element(r, 0).re, reduced.element(r, 1).re);
        }
        println!("      S = {:.6} nats, S_lin = {:.3}", ensemble_entropy(&reduced), linear_entropy(&reduced));
    }
    println!("ln 2 = {:.6}", std::f64::consts::LN_2);
    Ok(())
}
