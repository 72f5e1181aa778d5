//! Coherence of a qubit as imperfect pointers are chained onto it.

use decolab::hilbert::{StateVector, TensorSpace};
use decolab::measurement::{chain_propagate, chain_report, ChainSpec};
use decolab::Result;

fn main() -> Result<()> {
    let system = TensorSpace::single("system", 2)?;
    let plus = StateVector::from_reals(system.clone(), &[1.0, 1.0])?.normalize()?;
    let basis = StateVector::computational_basis(&system);

    for overlap in [0.9, 0.5, 0.0] {
        let spec = ChainSpec::uniform(basis.clone(), 4, overlap, true)?;
        let states = chain_propagate(&spec, &plus)?;
        println!("pointer overlap {overlap}");
        println!("  step  |rho_01|   S_lin    global purity");
        for r in chain_report(&spec, &states)? {
            println!("  {:>4}  {:.6}  {:.6}  {:.3}", r.step, r.off_diagonal, r.linear_entropy, r.global_purity);
        }
    }
    Ok(())
}
