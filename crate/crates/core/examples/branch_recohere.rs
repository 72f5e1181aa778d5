//! An apparatus reads a qubit, the environment reads the apparatus, then the
//! apparatus is reset. The system never gets its coherence back.

use decolab::entanglement::decoherence_factor;
use decolab::hilbert::{partial_trace, StateVector, TensorSpace};
use decolab::measurement::{branch_and_recohere, BranchModel};
use decolab::Result;

fn main() -> Result<()> {
    let system = TensorSpace::single("system", 2)?;
    let psi = StateVector::from_reals(system.clone(), &[0.6, 0.8])?;
    let basis = StateVector::computational_basis(&system);

    let model = BranchModel::ideal(2, 2)?;
    let initial = model.initial_state(&psi)?;
    let [read, recorded, reset] = branch_and_recohere(&model, &initial)?;

    for (name, state) in [("initial", &initial), ("apparatus reads", &read), ("environment reads", &recorded), ("apparatus reset", &reset)] {
        let rho = partial_trace(state, &["system"])?;
        let app = partial_trace(state, &["apparatus"])?;
        let f = decoherence_factor(&rho, &basis)?;
        println!("{name:<18} |rho_01| = {:.4}   apparatus purity = {:.4}", f.max_off_diagonal(), app.purity());
    }
    Ok(())
}
