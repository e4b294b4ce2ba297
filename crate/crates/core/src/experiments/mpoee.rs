use serde::Serialize;

use super::{par_map, with_gamma, ExperimentConfig};
use crate::circuit::CircuitDescriptor;
use crate::error::{Error, Result};
use crate::mpdo::MpdoState;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MpoeeRow {
    pub n: usize,
    pub d: usize,
    pub gamma: f64,
    pub chi: usize,
    pub cut: usize,
    pub mpoee: f64,
}

/// MPOEE at the central cut after each depth in `depths` (ascending), from a
/// single layer-by-layer evolution of `descriptor` at its full depth.
pub fn mpoee_trajectory(descriptor: &CircuitDescriptor, chi_max: usize, depths: &[usize]) -> Result<Vec<f64>> {
    let n = descriptor.num_qubits();
    if descriptor.geometry.dimension() != 1 || n < 2 {
        return Err(Error::Unsupported("MPOEE needs a 1D chain of at least 2 sites".into()));
    }
    if depths.windows(2).any(|w| w[0] > w[1]) || depths.last().is_some_and(|&d| d > descriptor.depth) {
        return Err(Error::InvalidArgument("depths must be ascending and within the circuit".into()));
    }
    let circuit = descriptor.realize()?;
    let bond = n / 2 - 1;
    let mut state = MpdoState::zero_state(n, chi_max)?;
    let mut out = Vec::with_capacity(depths.len());
    let mut done = 0;
    for &d in depths {
        for layer in &circuit.layers()[done..d] {
            state.apply_layer(layer, circuit.noise())?;
        }
        done = d;
        out.push(state.mpoee(bond)?);
    }
    Ok(out)
}

/// Mean central-cut MPOEE per `(gamma, chi, depth)`, averaged over
/// realizations. Every realization is one evolution to the deepest listed
/// depth, so shallower rows see the same gates.
pub fn run_mpoee_bench(config: &ExperimentConfig) -> Result<Vec<MpoeeRow>> {
    config.validate()?;
    let template = config.template();
    let n = template.num_qubits();
    let mut depths = config.depth_axis();
    depths.sort_unstable();
    depths.dedup();
    let max_depth = *depths.last().unwrap_or(&0);
    let gammas = config.gamma_axis();
    let chis = config.chi_axis();
    let r = config.realizations;
    let jobs = gammas.len() * chis.len() * r;
    let results = par_map(config.thread_count(), jobs, |job| {
        let (gi, rest) = (job / (chis.len() * r), job % (chis.len() * r));
        let (ci, k) = (rest / r, rest % r);
        let d = with_gamma(&template, gammas[gi])?
            .with_depth(max_depth)
            .with_realization(k as u64);
        mpoee_trajectory(&d, chis[ci], &depths)
    })?;
    let mut rows = Vec::new();
    for (gi, &gamma) in gammas.iter().enumerate() {
        for (ci, &chi) in chis.iter().enumerate() {
            for (di, &d) in depths.iter().enumerate() {
                let base = (gi * chis.len() + ci) * r;
                let mpoee = (0..r).map(|k| results[base + k][di]).sum::<f64>() / r as f64;
                rows.push(MpoeeRow {
                    n,
                    d,
                    gamma,
                    chi,
                    cut: n / 2 - 1,
                    mpoee,
                });
            }
        }
    }
    Ok(rows)
}
