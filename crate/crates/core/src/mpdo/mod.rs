//! Tensor-train simulation of the vectorized density operator for 1D
//! circuits with non-heralded noise.

mod checkpoint;
mod estimate;
mod state;
mod superop;

pub use estimate::McEstimate;
pub use state::{MpdoState, SiteTensor, NEGATIVITY_TOL, SVD_RELATIVE_CUTOFF};
pub use superop::ChannelSuperop;

use crate::circuit::CircuitDescriptor;
use crate::error::Result;

/// Realizes `descriptor` and evolves it with bond dimension `chi_max`.
pub fn evolve(descriptor: &CircuitDescriptor, chi_max: usize) -> Result<MpdoState> {
    MpdoState::evolve(&descriptor.realize()?, chi_max)
}
