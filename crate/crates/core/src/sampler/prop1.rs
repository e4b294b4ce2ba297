use serde::Serialize;

use super::graph::{coarse_grain, PatchGraph};
use super::patching::SamplingPlan;
use crate::circuit::CircuitDescriptor;
use crate::error::Result;
use crate::info::{exact_cmi, tv_distance, DistributionTable};
use crate::oracle;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop1Report {
    /// `||P - P''||_1`.
    pub lhs: f64,
    /// Largest telescoping-step CMI `I(X_j : X_{<j} \ N'(X_j) | N'(X_j))`.
    pub eta_measured: f64,
    /// `(|V| - 1) sqrt(2 ln 2 eta)`.
    pub bound: f64,
    pub holds: bool,
    pub step_cmi: Vec<f64>,
}

/// Checks the patching error bound on an exact full distribution `p` over
/// qubits `0..n`.
pub fn verify_prop1_distribution(p: &DistributionTable, graph: &PatchGraph) -> Result<Prop1Report> {
    let plan = SamplingPlan::from_patches(graph)?;
    let lhs = tv_distance(p, &plan.product_from(p)?)?;
    let mut step_cmi = Vec::with_capacity(graph.len());
    for j in 0..graph.len() {
        let y = graph.prior_neighbor_qubits(j);
        let z: Vec<usize> = graph.earlier_qubits(j).into_iter().filter(|q| !y.contains(q)).collect();
        let value = if z.is_empty() {
            0.0
        } else {
            exact_cmi(p, &graph.patches()[j], &y, &z)?
        };
        step_cmi.push(value);
    }
    let eta_measured = step_cmi.iter().copied().fold(0.0, f64::max);
    let bound = (graph.len().saturating_sub(1)) as f64 * (2.0 * std::f64::consts::LN_2 * eta_measured).sqrt();
    // Entropy sums leave rounding noise around a true zero.
    let holds = lhs <= bound + 1e-9;
    Ok(Prop1Report {
        lhs,
        eta_measured,
        bound,
        holds,
        step_cmi,
    })
}

/// Dense-oracle version for a descriptor.
pub fn verify_prop1(descriptor: &CircuitDescriptor, ell: usize) -> Result<Prop1Report> {
    let p = oracle::evolve(descriptor)?.distribution()?;
    verify_prop1_distribution(&p, &coarse_grain(&descriptor.geometry, ell)?)
}
