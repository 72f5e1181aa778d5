//! Repeated stochastic collapse reproduces Born frequencies.

use decolab::dynamics::{collapse, outcome_probabilities};
use decolab::hilbert::{StateVector, TensorSpace};
use decolab::Result;

fn main() -> Result<()> {
    let space = TensorSpace::single("spin", 3)?;
    let psi = StateVector::from_reals(space.clone(), &[0.2, 0.5, 0.8])?.normalize()?;
    let basis = StateVector::computational_basis(&space);
    let born = outcome_probabilities(&psi, &basis)?;

    let trials = 20_000u64;
    let mut counts = [0u64; 3];
    for seed in 0..trials {
        let record = collapse(&psi, &basis, seed)?;
        counts[record.outcome_index] += 1;
        // measuring again in the same basis repeats the outcome
        let again = collapse(&record.post_state, &basis, seed ^ 0xdead)?;
        assert_eq!(again.outcome_index, record.outcome_index);
    }
    println!("outcome  born      observed");
    for (n, (p, c)) in born.iter().zip(counts).enumerate() {
        println!("{n:>7}  {p:.5}   {:.5}", c as f64 / trials as f64);
    }
    Ok(())
}
