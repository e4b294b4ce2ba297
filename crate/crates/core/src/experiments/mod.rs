//! Batch drivers for the numerical studies: CMI scans, MPOEE benchmarks,
//! patch sampling, and the validation suites.

pub mod checks;
mod cmi;
mod mpoee;
mod patch;
mod validate;

pub use cmi::{
    central_region, realization_cmi, run_cmi_scan, smooth_depth_pairs, tripartition, write_csv, CmiRow,
};
pub use mpoee::{mpoee_trajectory, run_mpoee_bench, MpoeeRow};
pub use patch::{run_patch_sample, PatchSampleOutput, SampleSidecar};
pub use validate::{run_validate, ValidateReport};

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitDescriptor, NoiseKind};
use crate::error::{Error, Result};
use crate::oracle::{DenseOptions, HeraldMode};
use crate::sampler::Backend;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CmiScan,
    MpoeeBench,
    PatchSample,
    Validate,
}

/// Which simulator computes the CMI of a realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Exact, from the diagonal stabilizer subgroup.
    Stabilizer,
    /// Exact, from the dense density matrix.
    Dense,
    /// Monte-Carlo estimate on the tensor train.
    Mpdo,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Stabilizer => "stabilizer",
            Model::Dense => "dense",
            Model::Mpdo => "mpdo",
        }
    }
}

fn default_realizations() -> usize {
    1
}

fn default_mc_samples() -> usize {
    1000
}

fn default_region_side() -> usize {
    2
}

fn default_samples() -> usize {
    1000
}

fn default_backend() -> Backend {
    Backend::Dense
}

fn default_capacity() -> usize {
    crate::sampler::DEFAULT_DENSE_CAPACITY
}

/// One experiment run. Sweep axes left empty fall back to the template's
/// own value (`depths`, `gammas`) or to a single default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub descriptor: CircuitDescriptor,
    #[serde(default)]
    pub model: Option<Model>,
    #[serde(default)]
    pub depths: Vec<usize>,
    #[serde(default)]
    pub gammas: Vec<f64>,
    #[serde(default)]
    pub ells: Vec<usize>,
    #[serde(default)]
    pub chis: Vec<usize>,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    /// Overrides the template's seed when present.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Side of the central region X (qubits in 1D, a square block in 2D).
    #[serde(default = "default_region_side")]
    pub region_side: usize,
    /// Average the CMI over consecutive depth pairs after the scan.
    #[serde(default)]
    pub smooth_depths: bool,
    #[serde(default)]
    pub d_star: Option<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    #[serde(default = "default_capacity")]
    pub capacity: usize,
    #[serde(default)]
    pub threads: Option<usize>,
    /// Negative control for `validate`: feed a tableau containing `-I` to
    /// the stabilizer suite.
    #[serde(default)]
    pub corrupt_tableau: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, descriptor: CircuitDescriptor) -> Self {
        Self {
            experiment,
            descriptor,
            model: None,
            depths: Vec::new(),
            gammas: Vec::new(),
            ells: Vec::new(),
            chis: Vec::new(),
            realizations: 1,
            mc_samples: default_mc_samples(),
            seed: None,
            output: None,
            region_side: default_region_side(),
            smooth_depths: false,
            d_star: None,
            samples: default_samples(),
            backend: Backend::Dense,
            capacity: default_capacity(),
            threads: None,
            corrupt_tableau: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.descriptor.validate()?;
        if self.realizations == 0 {
            return Err(Error::InvalidArgument("realizations must be at least 1".into()));
        }
        if self.mc_samples == 0 || self.samples == 0 {
            return Err(Error::InvalidArgument("sample counts must be at least 1".into()));
        }
        if self.gammas.iter().any(|g| !(0.0..=1.0).contains(g)) {
            return Err(Error::InvalidArgument("gamma outside [0, 1]".into()));
        }
        if self.ells.contains(&0) || self.chis.contains(&0) || self.region_side == 0 {
            return Err(Error::InvalidArgument("ell, chi and region_side must be positive".into()));
        }
        Ok(())
    }

    /// The template with the seed override applied.
    pub fn template(&self) -> CircuitDescriptor {
        let mut d = self.descriptor.clone();
        if let Some(seed) = self.seed {
            d.seed = seed;
        }
        d
    }

    pub fn depth_axis(&self) -> Vec<usize> {
        if self.depths.is_empty() {
            vec![self.descriptor.depth]
        } else {
            self.depths.clone()
        }
    }

    pub fn gamma_axis(&self) -> Vec<f64> {
        if self.gammas.is_empty() {
            vec![self.descriptor.noise.gamma]
        } else {
            self.gammas.clone()
        }
    }

    pub fn ell_axis(&self) -> Vec<usize> {
        if self.ells.is_empty() {
            vec![1]
        } else {
            self.ells.clone()
        }
    }

    pub fn chi_axis(&self) -> Vec<usize> {
        if self.chis.is_empty() {
            vec![256]
        } else {
            self.chis.clone()
        }
    }

    pub fn thread_count(&self) -> usize {
        self.threads.unwrap_or(0)
    }
}

/// Dense-oracle options for experiments: heralded noise follows the
/// realization's herald record so that every track sees the same circuit.
pub fn dense_options(capacity: usize) -> DenseOptions {
    DenseOptions {
        heralds: HeraldMode::Trajectory,
        max_qubits: capacity,
        ..DenseOptions::default()
    }
}

pub(crate) fn with_gamma(d: &CircuitDescriptor, gamma: f64) -> Result<CircuitDescriptor> {
    let mut noise = d.noise;
    if noise.kind == NoiseKind::None && gamma > 0.0 {
        return Err(Error::InvalidArgument("gamma sweep over a noiseless template".into()));
    }
    noise.gamma = gamma;
    noise.validate()?;
    Ok(d.with_noise(noise))
}

/// Maps `f` over `0..count` on a pool of `threads` workers (0 = rayon's
/// default) and returns the results in index order.
pub fn par_map<T, F>(threads: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}
