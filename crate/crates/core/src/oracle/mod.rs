//! Dense density-matrix evolution for small registers. Everything else in the
//! crate is validated against this module.

mod dense;
mod kernel;

pub use dense::{
    evolve, evolve_circuit, DenseOptions, DenseState, HeraldMode, InitialState,
    DEFAULT_MAX_QUBITS,
};
