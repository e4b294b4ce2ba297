use std::io::Write;

use serde::Serialize;

use super::ExperimentConfig;
use crate::circuit::CircuitDescriptor;
use crate::error::Result;
use crate::sampler::{coarse_grain, format_bits, patch_sampler, Backend};

/// Metadata written next to a sample file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSidecar {
    pub descriptor: CircuitDescriptor,
    pub ell: usize,
    pub d_star: usize,
    pub backend: Backend,
    pub seed: u64,
    pub samples: usize,
    /// Qubit printed at each character position of a sample line.
    pub qubit_order: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchSampleOutput {
    pub samples: Vec<usize>,
    pub sidecar: SampleSidecar,
}

impl PatchSampleOutput {
    /// One ASCII bitstring per line in patch-raster qubit order.
    pub fn write_lines<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.sidecar.descriptor.num_qubits();
        for &x in &self.samples {
            writeln!(out, "{}", format_bits(x, n, &self.sidecar.qubit_order))?;
        }
        Ok(())
    }
}

/// Draws `config.samples` bitstrings from the patch sampler with
/// `ell = ells[0]` and `d_star` defaulting to the full depth.
pub fn run_patch_sample(config: &ExperimentConfig) -> Result<PatchSampleOutput> {
    config.validate()?;
    let descriptor = config.template();
    let ell = config.ell_axis()[0];
    let d_star = config.d_star.unwrap_or(descriptor.depth);
    let sampler = patch_sampler(&descriptor, ell, d_star, config.backend, config.capacity)?;
    let samples = sampler.sample_many(config.samples, descriptor.seed, descriptor.realization)?;
    let qubit_order = coarse_grain(&descriptor.geometry, ell)?.patches().concat();
    Ok(PatchSampleOutput {
        samples,
        sidecar: SampleSidecar {
            seed: descriptor.seed,
            descriptor,
            ell,
            d_star,
            backend: config.backend,
            samples: config.samples,
            qubit_order,
        },
    })
}
