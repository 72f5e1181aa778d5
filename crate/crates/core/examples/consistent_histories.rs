//! Two-time histories of a precessing spin: which families admit probabilities.

use decolab::dynamics::{sigma_x, Hamiltonian};
use decolab::hilbert::{ProjectorSet, StateVector, TensorSpace};
use decolab::histories::{HistoryEvaluator, HistorySpec};
use decolab::Result;

fn main() -> Result<()> {
    let space = TensorSpace::single("spin", 2)?;
    let up = StateVector::basis(space.clone(), 0)?;
    let h = Hamiltonian::new(space.clone(), sigma_x().scale(0.5))?;
    let z = ProjectorSet::local_computational(&space, "spin")?;
    let x_basis = [
        StateVector::from_reals(space.clone(), &[1.0, 1.0])?.normalize()?,
        StateVector::from_reals(space.clone(), &[1.0, -1.0])?.normalize()?,
    ];
    let x = ProjectorSet::from_basis(&x_basis)?;

    let families = [("z then z", [z.clone(), z.clone()]), ("x then z", [x.clone(), z.clone()]), ("z then x", [z, x])];
    for (name, sets) in families {
        let spec = HistorySpec::new(0.0, up.density()?, h.clone(), vec![1.0, 2.0], sets.to_vec())?;
        let eval = HistoryEvaluator::new(&spec)?;
        println!("{name}: consistency defect {:.4}", eval.consistency_defect());
        for history in spec.histories() {
            println!("    {history:?}  p = {:.4}", eval.probability(&history)?);
        }
    }
    Ok(())
}
