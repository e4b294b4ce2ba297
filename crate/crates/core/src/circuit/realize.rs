use rand::Rng;

use crate::circuit::{sample_gate, CircuitDescriptor, Gate2, GateFamily, GateLayer, NoiseSpec};
use crate::error::{Error, Result};
use crate::rng::{Purpose, StreamKey};

#[derive(Clone, Debug, PartialEq)]
pub struct PlacedGate {
    /// Absolute layer index `t`.
    pub layer: usize,
    /// Position of the pair within its layer.
    pub index: usize,
    /// Local qubit indices `(a, b)`; `a` is the high bit of the gate matrix.
    pub qubits: (usize, usize),
    pub gate: Gate2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitLayer {
    pub layer: usize,
    pub gates: Vec<PlacedGate>,
    /// Herald outcomes per local qubit; empty unless the noise is heralded.
    pub fired: Vec<bool>,
}

/// Per-layer, per-qubit herald outcomes of one realization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeraldRecord {
    pub fired: Vec<Vec<bool>>,
}

impl HeraldRecord {
    pub fn count(&self) -> usize {
        self.fired.iter().flatten().filter(|&&f| f).count()
    }
}

/// A materialized circuit: gates and herald outcomes drawn, qubits possibly a
/// relabeled subset of a larger lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    labels: Vec<usize>,
    noise: NoiseSpec,
    layers: Vec<CircuitLayer>,
}

impl Circuit {
    pub fn from_descriptor(descriptor: &CircuitDescriptor) -> Result<Self> {
        descriptor.validate()?;
        let layout = descriptor.layers()?;
        Ok(Self::from_layout(
            descriptor.num_qubits(),
            &layout,
            descriptor,
        ))
    }

    /// Builds a circuit from an explicit layout, e.g. an edge colouring of an
    /// arbitrary interaction graph. Each `GateLayer::layer_index` keys the gate
    /// and herald draws.
    pub fn from_layers(
        n: usize,
        layout: &[GateLayer],
        gate_family: GateFamily,
        noise: NoiseSpec,
        seed: u64,
        realization: u64,
    ) -> Result<Self> {
        noise.validate()?;
        for layer in layout {
            let mut seen = vec![false; n];
            for &(a, b) in &layer.pairs {
                if a >= n || b >= n || a == b || seen[a] || seen[b] {
                    return Err(Error::InvalidArgument(format!(
                        "layer {} has an invalid or overlapping pair ({a}, {b})",
                        layer.layer_index
                    )));
                }
                seen[a] = true;
                seen[b] = true;
            }
        }
        let mut descriptor = CircuitDescriptor::new(
            crate::circuit::GridGeometry::line(n.max(1))?,
            layout.len(),
            gate_family,
            noise,
            seed,
        );
        descriptor.realization = realization;
        Ok(Self::from_layout(n, layout, &descriptor))
    }

    fn from_layout(n: usize, layout: &[GateLayer], descriptor: &CircuitDescriptor) -> Self {
        let noise = descriptor.noise;
        let layers = layout
            .iter()
            .map(|gl| {
                let t = gl.layer_index;
                let gates = gl
                    .pairs
                    .iter()
                    .enumerate()
                    .map(|(k, &(a, b))| PlacedGate {
                        layer: t,
                        index: k,
                        qubits: (a, b),
                        gate: sample_gate(descriptor, t, k),
                    })
                    .collect();
                let fired = if noise.is_heralded() {
                    (0..n)
                        .map(|q| {
                            let key = StreamKey::new(
                                descriptor.seed,
                                descriptor.realization,
                                t as u64,
                                q as u64,
                                Purpose::Herald,
                            );
                            key.rng().random::<f64>() < noise.gamma
                        })
                        .collect()
                } else {
                    Vec::new()
                };
                CircuitLayer { layer: t, gates, fired }
            })
            .collect();
        Self {
            labels: (0..n).collect(),
            noise,
            layers,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    /// Global lattice label of each local qubit.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn layers(&self) -> &[CircuitLayer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.gates.len()).sum()
    }

    pub fn herald_record(&self) -> Option<HeraldRecord> {
        if !self.noise.is_heralded() {
            return None;
        }
        Some(HeraldRecord {
            fired: self.layers.iter().map(|l| l.fired.clone()).collect(),
        })
    }

    pub fn local_index(&self, label: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Sub-circuit on the local qubits `keep` (sorted, unique), retaining only
    /// the gates selected by `keep_gate(layer_position, gate)`. Every retained
    /// gate must act inside `keep`.
    pub fn sub_circuit(
        &self,
        keep: &[usize],
        mut keep_gate: impl FnMut(usize, &PlacedGate) -> bool,
    ) -> Result<Self> {
        let mut map = vec![usize::MAX; self.num_qubits()];
        for (new, &old) in keep.iter().enumerate() {
            if old >= self.num_qubits() {
                return Err(Error::InvalidArgument(format!("qubit {old} out of range")));
            }
            map[old] = new;
        }
        let mut layers = Vec::with_capacity(self.layers.len());
        for (pos, layer) in self.layers.iter().enumerate() {
            let mut gates = Vec::new();
            for g in &layer.gates {
                if !keep_gate(pos, g) {
                    continue;
                }
                let (a, b) = g.qubits;
                if map[a] == usize::MAX || map[b] == usize::MAX {
                    return Err(Error::InvalidArgument(format!(
                        "gate on ({a}, {b}) at layer {} leaves the kept region",
                        g.layer
                    )));
                }
                gates.push(PlacedGate {
                    qubits: (map[a], map[b]),
                    ..g.clone()
                });
            }
            let fired = if layer.fired.is_empty() {
                Vec::new()
            } else {
                keep.iter().map(|&q| layer.fired[q]).collect()
            };
            layers.push(CircuitLayer {
                layer: layer.layer,
                gates,
                fired,
            });
        }
        Ok(Self {
            labels: keep.iter().map(|&q| self.labels[q]).collect(),
            noise: self.noise,
            layers,
        })
    }

    /// Removes the first `k` layers, keeping labels and herald records.
    pub fn drop_leading_layers(mut self, k: usize) -> Self {
        self.layers.drain(..k.min(self.layers.len()));
        self
    }

    /// Replaces the gate list; used to build hand-written test circuits.
    pub fn from_parts(n: usize, noise: NoiseSpec, layers: Vec<CircuitLayer>) -> Result<Self> {
        for l in &layers {
            if noise.is_heralded() && l.fired.len() != n {
                return Err(Error::InvalidArgument("herald record size mismatch".into()));
            }
            for g in &l.gates {
                if g.qubits.0 >= n || g.qubits.1 >= n || g.qubits.0 == g.qubits.1 {
                    return Err(Error::InvalidArgument(format!("bad gate qubits {:?}", g.qubits)));
                }
            }
        }
        Ok(Self {
            labels: (0..n).collect(),
            noise,
            layers,
        })
    }
}
