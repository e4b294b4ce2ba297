use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::circuit::CircuitDescriptor;
use crate::linalg::{Matrix4, C64};
use crate::rng::{Purpose, StreamKey};
use crate::stabilizer::Clifford2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateFamily {
    #[serde(rename = "haar2q")]
    Haar2Q,
    #[serde(rename = "clifford2q")]
    Clifford2Q,
    #[serde(rename = "identity2q")]
    Identity2Q,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gate2 {
    Identity,
    Unitary(Matrix4),
    Clifford(Clifford2),
}

impl Gate2 {
    pub fn unitary(&self) -> Matrix4 {
        match self {
            Gate2::Identity => Matrix4::identity(),
            Gate2::Unitary(u) => *u,
            Gate2::Clifford(c) => c.unitary(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Gate2::Identity)
    }
}

/// Draws the gate at `(layer, pair_index)` of a circuit realization. `layer`
/// is the absolute layer index, so truncated circuits reproduce the draws of
/// the layers they keep.
pub fn sample_gate(descriptor: &CircuitDescriptor, layer: usize, pair_index: usize) -> Gate2 {
    let key = StreamKey::new(
        descriptor.seed,
        descriptor.realization,
        layer as u64,
        pair_index as u64,
        Purpose::Gate,
    );
    match descriptor.gate_family {
        GateFamily::Identity2Q => Gate2::Identity,
        GateFamily::Haar2Q => Gate2::Unitary(haar_unitary(&mut key.rng())),
        GateFamily::Clifford2Q => Gate2::Clifford(Clifford2::random(&mut key.rng())),
    }
}

/// Haar-random element of U(4): QR of a complex Ginibre matrix with the
/// phases of `diag(R)` absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> Matrix4 {
    let mut entries = [[C64::new(0.0, 0.0); 4]; 4];
    for row in entries.iter_mut() {
        for v in row.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v = C64::new(re, im);
        }
    }
    let z = faer::Mat::<C64>::from_fn(4, 4, |i, j| entries[i][j]);
    let qr = z.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let mut u = Matrix4::zeros();
    for j in 0..4 {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..4 {
            u.0[i][j] = q[(i, j)] * phase;
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GridGeometry, NoiseSpec};

    fn descriptor(family: GateFamily) -> CircuitDescriptor {
        CircuitDescriptor::new(GridGeometry::line(4).unwrap(), 3, family, NoiseSpec::none(), 99)
    }

    #[test]
    fn identity_family() {
        assert_eq!(sample_gate(&descriptor(GateFamily::Identity2Q), 2, 1), Gate2::Identity);
    }

    #[test]
    fn haar_is_unitary_and_reproducible() {
        let d = descriptor(GateFamily::Haar2Q);
        for t in 1..4 {
            for k in 0..3 {
                let g = sample_gate(&d, t, k).unitary();
                assert!(g.unitarity_defect() <= 1e-12);
                assert_eq!(g, sample_gate(&d, t, k).unitary());
            }
        }
        assert_ne!(sample_gate(&d, 1, 0), sample_gate(&d, 1, 1));
    }

    #[test]
    fn haar_first_moment_twirl() {
        // E[G_ij conj(G_kl)] = delta_ik delta_jl / 4
        let mut rng = StreamKey::new(5, 0, 0, 0, Purpose::Instance).rng();
        let draws = 100_000;
        let mut acc = vec![C64::new(0.0, 0.0); 256];
        for _ in 0..draws {
            let g = haar_unitary(&mut rng);
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            acc[((i * 4 + j) * 4 + k) * 4 + l] += g.0[i][j] * g.0[k][l].conj();
                        }
                    }
                }
            }
        }
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let expected = if i == k && j == l { 0.25 } else { 0.0 };
                        let got = acc[((i * 4 + j) * 4 + k) * 4 + l] / draws as f64;
                        worst = worst.max((got - C64::new(expected, 0.0)).norm());
                    }
                }
            }
        }
        assert!(worst <= 5e-3, "max deviation {worst}");
    }

    #[test]
    fn clifford_family_is_clifford() {
        let d = descriptor(GateFamily::Clifford2Q);
        match sample_gate(&d, 1, 0) {
            Gate2::Clifford(c) => assert!(c.unitary().unitarity_defect() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }
}
