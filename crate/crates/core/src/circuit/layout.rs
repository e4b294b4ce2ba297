//! Brickwork gate layouts.
//!
//! Layers are numbered from 1. In 1D, odd layers pair `(i, i+1)` for even
//! 1-based `i` and even layers for odd 1-based `i`. In 2D the layers cycle
//! through four patterns: axis-0 pairs starting at odd positions, axis-1 pairs
//! starting at even positions, axis-0 pairs starting at even positions, and
//! axis-1 pairs starting at odd positions.

use crate::circuit::GridGeometry;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateLayer {
    pub layer_index: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl GateLayer {
    /// Qubits that no gate in this layer touches.
    pub fn idle_qubits(&self, n: usize) -> Vec<usize> {
        let mut busy = vec![false; n];
        for &(a, b) in &self.pairs {
            busy[a] = true;
            busy[b] = true;
        }
        (0..n).filter(|&q| !busy[q]).collect()
    }
}

pub fn build_layout_1d(geometry: &GridGeometry, depth: usize) -> Result<Vec<GateLayer>> {
    check_1d(geometry)?;
    Ok((1..=depth).map(|t| layer_1d(geometry.num_qubits(), t)).collect())
}

pub fn build_layout_2d(geometry: &GridGeometry, depth: usize) -> Result<Vec<GateLayer>> {
    check_2d(geometry)?;
    Ok((1..=depth).map(|t| layer_2d(geometry, t)).collect())
}

/// The layer with absolute index `t` for any supported geometry.
pub fn layer_for(geometry: &GridGeometry, t: usize) -> Result<GateLayer> {
    match geometry.dimension() {
        1 => {
            check_1d(geometry)?;
            Ok(layer_1d(geometry.num_qubits(), t))
        }
        2 => {
            check_2d(geometry)?;
            Ok(layer_2d(geometry, t))
        }
        d => Err(Error::Geometry(format!("no built-in layout for dimension {d}"))),
    }
}

fn check_1d(geometry: &GridGeometry) -> Result<()> {
    if geometry.dimension() != 1 {
        return Err(Error::Geometry(format!(
            "1D layout needs a 1D geometry, got dims {:?}",
            geometry.dims()
        )));
    }
    if geometry.num_qubits() < 2 {
        return Err(Error::Geometry("1D layout needs at least 2 qubits".into()));
    }
    Ok(())
}

fn check_2d(geometry: &GridGeometry) -> Result<()> {
    if geometry.dimension() != 2 {
        return Err(Error::Geometry(format!(
            "2D layout needs a 2D geometry, got dims {:?}",
            geometry.dims()
        )));
    }
    if geometry.dims().iter().any(|d| d % 2 != 0) {
        return Err(Error::Geometry(format!(
            "2D layout needs even side lengths, got {:?}",
            geometry.dims()
        )));
    }
    Ok(())
}

fn layer_1d(n: usize, t: usize) -> GateLayer {
    // 0-based start: even t pairs (0,1),(2,3),...; odd t pairs (1,2),(3,4),...
    let start = if t % 2 == 0 { 0 } else { 1 };
    let pairs = (start..n.saturating_sub(1))
        .step_by(2)
        .map(|i| (i, i + 1))
        .collect();
    GateLayer {
        layer_index: t,
        pairs,
    }
}

fn layer_2d(geometry: &GridGeometry, t: usize) -> GateLayer {
    let dims = geometry.dims();
    // (axis, 0-based start of the pair along that axis)
    let (axis, start) = match t % 4 {
        1 => (0, 0),
        2 => (1, 1),
        3 => (0, 1),
        _ => (1, 0),
    };
    let mut pairs = Vec::new();
    for q in 0..geometry.num_qubits() {
        let c = geometry.coords(q);
        if c[axis] >= start && (c[axis] - start) % 2 == 0 && c[axis] + 1 < dims[axis] {
            let mut partner = c.clone();
            partner[axis] += 1;
            pairs.push((q, geometry.index(&partner)));
        }
    }
    GateLayer {
        layer_index: t,
        pairs,
    }
}
