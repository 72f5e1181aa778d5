pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod hilbert;
pub mod histories;
pub mod ledger;
pub mod linalg;
pub mod measurement;
pub mod output;
pub mod scenario;
pub mod wigner;

pub use error::{Error, Result};
