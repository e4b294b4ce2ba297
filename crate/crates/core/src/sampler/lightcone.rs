use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// The part of a circuit that can influence the output on a region.
#[derive(Clone, Debug)]
pub struct LightconeRegion {
    /// Qubits of the cone, ascending, in the parent's numbering.
    pub qubits: Vec<usize>,
    /// The restricted circuit on `qubits` (relabelled `0..qubits.len()`),
    /// holding the last `window` layers of the parent with only the gates
    /// inside the cone.
    pub circuit: Circuit,
}

impl LightconeRegion {
    pub fn width(&self) -> usize {
        self.qubits.len()
    }

    pub fn gate_count(&self) -> usize {
        self.circuit.gate_count()
    }

    /// Position of parent qubit `q` inside the cone.
    pub fn local(&self, q: usize) -> Option<usize> {
        self.qubits.binary_search(&q).ok()
    }
}

/// Backward lightcone of `region` through the last `window` layers.
pub fn backward_lightcone(circuit: &Circuit, region: &[usize], window: usize) -> Result<LightconeRegion> {
    let n = circuit.num_qubits();
    if region.is_empty() {
        return Err(Error::InvalidArgument("lightcone of an empty region".into()));
    }
    if window > circuit.depth() {
        return Err(Error::InvalidArgument(format!(
            "window {window} exceeds circuit depth {}",
            circuit.depth()
        )));
    }
    let mut inside = vec![false; n];
    for &q in region {
        if q >= n {
            return Err(Error::InvalidArgument(format!("qubit {q} out of range")));
        }
        inside[q] = true;
    }
    let first = circuit.depth() - window;
    let layers = circuit.layers();
    let mut kept: Vec<Vec<bool>> = vec![Vec::new(); layers.len()];
    for pos in (first..layers.len()).rev() {
        let layer = &layers[pos];
        let hits: Vec<bool> = layer
            .gates
            .iter()
            .map(|g| inside[g.qubits.0] || inside[g.qubits.1])
            .collect();
        for (g, &hit) in layer.gates.iter().zip(&hits) {
            if hit {
                inside[g.qubits.0] = true;
                inside[g.qubits.1] = true;
            }
        }
        kept[pos] = hits;
    }
    let qubits: Vec<usize> = (0..n).filter(|&q| inside[q]).collect();
    let mut gate_pos = vec![0usize; layers.len()];
    let sub = circuit.sub_circuit(&qubits, |pos, _| {
        let k = gate_pos[pos];
        gate_pos[pos] += 1;
        pos >= first && kept[pos][k]
    })?;
    Ok(LightconeRegion {
        qubits,
        circuit: sub.drop_leading_layers(first),
    })
}
