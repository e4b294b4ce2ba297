//! Lattice geometries, brickwork layouts, noise channels, and deterministic
//! sampling of circuit realizations.

mod gates;
mod geometry;
mod layout;
mod noise;
mod realize;

pub use gates::{haar_unitary, sample_gate, Gate2, GateFamily};
pub use geometry::GridGeometry;
pub use layout::{build_layout_1d, build_layout_2d, layer_for, GateLayer};
pub use noise::{
    channel_ptm, contraction_coefficient, identity_superop, NoiseKind, NoiseSpec,
    PauliTransferMatrix, Superop1,
};
pub use realize::{Circuit, CircuitLayer, HeraldRecord, PlacedGate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Everything needed to reproduce one circuit realization.
///
/// `realization` and `layer_offset` are optional in JSON and default to 0.
/// A non-zero `layer_offset` marks a truncated circuit whose layer `t`
/// reproduces layer `t + layer_offset` of its parent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDescriptor {
    pub geometry: GridGeometry,
    pub depth: usize,
    pub gate_family: GateFamily,
    pub noise: NoiseSpec,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "is_zero_u64")]
    pub realization: u64,
    #[serde(default, skip_serializing_if = "is_zero_usize")]
    pub layer_offset: usize,
}

fn is_zero_u64(v: &u64) -> bool {
    *v == 0
}

fn is_zero_usize(v: &usize) -> bool {
    *v == 0
}

impl CircuitDescriptor {
    pub fn new(
        geometry: GridGeometry,
        depth: usize,
        gate_family: GateFamily,
        noise: NoiseSpec,
        seed: u64,
    ) -> Self {
        Self {
            geometry,
            depth,
            gate_family,
            noise,
            seed,
            realization: 0,
            layer_offset: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.depth + self.layer_offset > 0 {
            layer_for(&self.geometry, 1)?;
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.geometry.num_qubits()
    }

    pub fn with_realization(&self, realization: u64) -> Self {
        Self {
            realization,
            ..self.clone()
        }
    }

    pub fn with_depth(&self, depth: usize) -> Self {
        Self {
            depth,
            ..self.clone()
        }
    }

    pub fn with_noise(&self, noise: NoiseSpec) -> Self {
        Self {
            noise,
            ..self.clone()
        }
    }

    /// Absolute layer indices covered by this descriptor.
    pub fn layer_indices(&self) -> std::ops::RangeInclusive<usize> {
        self.layer_offset + 1..=self.layer_offset + self.depth
    }

    pub fn layers(&self) -> Result<Vec<GateLayer>> {
        self.layer_indices()
            .map(|t| layer_for(&self.geometry, t))
            .collect()
    }

    /// Keeps only the final `d_star` layers, with identical gate draws. The
    /// truncated circuit starts from `|0^n>`.
    pub fn truncate(&self, d_star: usize) -> Result<Self> {
        if d_star > self.depth {
            return Err(Error::InvalidArgument(format!(
                "truncation depth {d_star} exceeds circuit depth {}",
                self.depth
            )));
        }
        Ok(Self {
            depth: d_star,
            layer_offset: self.layer_offset + (self.depth - d_star),
            ..self.clone()
        })
    }

    pub fn realize(&self) -> Result<Circuit> {
        Circuit::from_descriptor(self)
    }
}

/// Free-function form of [`CircuitDescriptor::truncate`].
pub fn truncate_circuit(descriptor: &CircuitDescriptor, d_star: usize) -> Result<CircuitDescriptor> {
    descriptor.truncate(d_star)
}
