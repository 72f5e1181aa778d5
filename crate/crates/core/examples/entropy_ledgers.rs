//! Entropy bookkeeping for a classical measurement, a collapse and the
//! unitary branching model.

use decolab::ledger::{branching_ledger, classical_ledger, quantum_collapse_ledger, write_ledger_csv};
use decolab::linalg::c;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let stdout = std::io::stdout();

    println!("# classical, p = (0.25, 0.75)");
    write_ledger_csv(stdout.lock(), &classical_ledger(&[0.25, 0.75])?)?;

    let amps = [c(0.6, 0.0), c(0.0, 0.8)];
    println!("\n# collapse");
    write_ledger_csv(stdout.lock(), &quantum_collapse_ledger(&amps)?)?;

    println!("\n# branching");
    let rows = branching_ledger(&amps, 2)?;
    write_ledger_csv(stdout.lock(), &rows)?;
    for row in &rows {
        let parts: Vec<String> = row.marginals.iter().map(|(name, s)| format!("{name}={s:.4}")).collect();
        println!("{:<18} {}", row.step, parts.join(" "));
    }
    Ok(())
}
