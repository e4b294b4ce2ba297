//! Clifford circuits with heralded noise on a bit-packed stabilizer tableau,
//! with exact output entropies from the diagonal subgroup.

mod clifford;
mod pauli;
mod tableau;

pub use clifford::{symplectic, Clifford2, SignedPauli2};
pub use pauli::PauliString;
pub use tableau::{
    conditional_distribution, region_entropy, simulate_circuit, stabilizer_cmi,
    stabilizer_distribution, PauliTableau, MAX_TABLE_QUBITS,
};
