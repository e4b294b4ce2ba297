//! Single-qubit noise channels and their Pauli transfer matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix2, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    AmplitudeDamping,
    Depolarizing,
    HeraldedReset,
    HeraldedDepolarizing,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    #[serde(default)]
    pub gamma: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, gamma: f64) -> Result<Self> {
        let spec = Self { kind, gamma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            gamma: 0.0,
        }
    }

    pub fn amplitude_damping(gamma: f64) -> Self {
        Self {
            kind: NoiseKind::AmplitudeDamping,
            gamma,
        }
    }

    pub fn depolarizing(gamma: f64) -> Self {
        Self {
            kind: NoiseKind::Depolarizing,
            gamma,
        }
    }

    pub fn heralded_reset(gamma: f64) -> Self {
        Self {
            kind: NoiseKind::HeraldedReset,
            gamma,
        }
    }

    pub fn heralded_depolarizing(gamma: f64) -> Self {
        Self {
            kind: NoiseKind::HeraldedDepolarizing,
            gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != NoiseKind::None && !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidArgument(format!(
                "noise rate must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    pub fn is_heralded(&self) -> bool {
        matches!(
            self.kind,
            NoiseKind::HeraldedReset | NoiseKind::HeraldedDepolarizing
        )
    }

    /// Effective rate; zero for `None`.
    pub fn rate(&self) -> f64 {
        if self.kind == NoiseKind::None {
            0.0
        } else {
            self.gamma
        }
    }

    /// Kraus operators of the channel. Heralded kinds return the Kraus set of
    /// their herald-averaged channel.
    pub fn kraus(&self) -> Vec<Matrix2> {
        let g = self.rate();
        match self.kind {
            NoiseKind::None => vec![Matrix2::identity()],
            NoiseKind::AmplitudeDamping => vec![
                Matrix2::from_real([[1.0, 0.0], [0.0, (1.0 - g).sqrt()]]),
                Matrix2::from_real([[0.0, g.sqrt()], [0.0, 0.0]]),
            ],
            NoiseKind::Depolarizing | NoiseKind::HeraldedDepolarizing => {
                let mut ks = vec![Matrix2::identity().scale(C64::from((1.0 - 0.75 * g).sqrt()))];
                for p in 1..4 {
                    ks.push(Matrix2::pauli(p).scale(C64::from((0.25 * g).sqrt())));
                }
                ks
            }
            NoiseKind::HeraldedReset => vec![
                Matrix2::identity().scale(C64::from((1.0 - g).sqrt())),
                Matrix2::from_real([[g.sqrt(), 0.0], [0.0, 0.0]]),
                Matrix2::from_real([[0.0, g.sqrt()], [0.0, 0.0]]),
            ],
        }
    }

    /// Applies the (herald-averaged) channel to a single-qubit operator.
    pub fn apply(&self, rho: &Matrix2) -> Matrix2 {
        self.kraus()
            .iter()
            .fold(Matrix2::zeros(), |acc, k| acc.add(&(*k * *rho * k.adjoint())))
    }

    /// Superoperator in the vectorized basis `I = 2i + j` for `|i><j|`:
    /// `S[I][J] = <i| N(|i'><j'|) |j>` with `J = 2i' + j'`.
    pub fn superop(&self) -> Superop1 {
        superop_of(|m| self.apply(m))
    }

    /// Superoperator of the channel applied when a herald fires.
    pub fn fired_superop(&self) -> Option<Superop1> {
        match self.kind {
            NoiseKind::HeraldedReset => Some(superop_of(|m| {
                let mut out = Matrix2::zeros();
                out.0[0][0] = m.trace();
                out
            })),
            NoiseKind::HeraldedDepolarizing => Some(superop_of(|m| {
                Matrix2::identity().scale(m.trace() * 0.5)
            })),
            _ => None,
        }
    }
}

/// 4x4 single-qubit superoperator in the vectorized basis.
pub type Superop1 = [[C64; 4]; 4];

pub fn identity_superop() -> Superop1 {
    let mut s = [[ZERO; 4]; 4];
    for (i, row) in s.iter_mut().enumerate() {
        row[i] = ONE;
    }
    s
}

fn superop_of(channel: impl Fn(&Matrix2) -> Matrix2) -> Superop1 {
    let mut s = [[ZERO; 4]; 4];
    for col in 0..4 {
        let out = channel(&Matrix2::unit(col >> 1, col & 1));
        for (row, srow) in s.iter_mut().enumerate() {
            srow[col] = out.0[row >> 1][row & 1];
        }
    }
    s
}

/// Pauli transfer matrix `T[P][Q] = Tr[P N(Q)] / 2`, indexed I, X, Y, Z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTransferMatrix(pub [[f64; 4]; 4]);

impl PauliTransferMatrix {
    /// `(|t|^2 + |M|_F^2) / 3` where `t` is the lower part of the first
    /// column and `M` the lower-right 3x3 block.
    pub fn contraction_coefficient(&self) -> f64 {
        let t = &self.0;
        let mut acc = 0.0;
        for row in t.iter().skip(1) {
            for v in row.iter() {
                acc += v * v;
            }
        }
        acc / 3.0
    }
}

pub fn channel_ptm(noise: &NoiseSpec) -> PauliTransferMatrix {
    let mut t = [[0.0; 4]; 4];
    for (q, col) in (0..4).map(|q| (q, noise.apply(&Matrix2::pauli(q)))) {
        for (p, row) in t.iter_mut().enumerate() {
            row[q] = (Matrix2::pauli(p) * col).trace().re / 2.0;
        }
    }
    PauliTransferMatrix(t)
}

pub fn contraction_coefficient(noise: &NoiseSpec) -> f64 {
    channel_ptm(noise).contraction_coefficient()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_ptm(actual: &PauliTransferMatrix, expected: [[f64; 4]; 4]) {
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (actual.0[i][j] - expected[i][j]).abs() < 1e-14,
                    "T[{i}][{j}] = {} expected {}",
                    actual.0[i][j],
                    expected[i][j]
                );
            }
        }
    }

    #[test]
    fn depolarizing_ptm_is_diagonal() {
        let g = 0.3;
        let t = channel_ptm(&NoiseSpec::depolarizing(g));
        let s = 1.0 - g;
        assert_ptm(
            &t,
            [[1.0, 0.0, 0.0, 0.0], [0.0, s, 0.0, 0.0], [0.0, 0.0, s, 0.0], [0.0, 0.0, 0.0, s]],
        );
    }

    #[test]
    fn amplitude_damping_ptm() {
        let g = 0.25;
        let t = channel_ptm(&NoiseSpec::amplitude_damping(g));
        let r = (1.0 - g).sqrt();
        assert_ptm(
            &t,
            [[1.0, 0.0, 0.0, 0.0], [0.0, r, 0.0, 0.0], [0.0, 0.0, r, 0.0], [g, 0.0, 0.0, 1.0 - g]],
        );
    }

    #[test]
    fn none_ptm_is_identity() {
        let t = channel_ptm(&NoiseSpec::none());
        let mut id = [[0.0; 4]; 4];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        assert_ptm(&t, id);
    }

    #[test]
    fn contraction_coefficients() {
        assert!((contraction_coefficient(&NoiseSpec::depolarizing(0.1)) - 0.81).abs() < 1e-14);
        assert!((contraction_coefficient(&NoiseSpec::amplitude_damping(1.0)) - 1.0 / 3.0).abs() < 1e-14);
        assert!((contraction_coefficient(&NoiseSpec::none()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_preserving_first_row() {
        for kind in [
            NoiseKind::AmplitudeDamping,
            NoiseKind::Depolarizing,
            NoiseKind::HeraldedReset,
            NoiseKind::HeraldedDepolarizing,
            NoiseKind::None,
        ] {
            for g in [0.0, 0.05, 0.5, 1.0] {
                let t = channel_ptm(&NoiseSpec { kind, gamma: g });
                assert_eq!(t.0[0].map(|v| (v * 1e12).round()), [1e12, 0.0, 0.0, 0.0]);
                let c = t.contraction_coefficient();
                if g > 0.0 && kind != NoiseKind::None {
                    assert!(c < 1.0, "{kind:?} {g} -> {c}");
                } else {
                    assert!((c - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn superop_matches_kraus() {
        let n = NoiseSpec::amplitude_damping(0.3);
        let s = n.superop();
        // |1><1| (I = 3) -> gamma |0><0| + (1 - gamma) |1><1|
        assert!((s[0][3].re - 0.3).abs() < 1e-15);
        assert!((s[3][3].re - 0.7).abs() < 1e-15);
        assert!((s[1][1].re - 0.7f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn json_shape() {
        let n: NoiseSpec = serde_json::from_str(r#"{"kind":"amplitude_damping","gamma":0.1}"#).unwrap();
        assert_eq!(n, NoiseSpec::amplitude_damping(0.1));
        assert!(serde_json::from_str::<NoiseSpec>(r#"{"kind":"amplitude_damping","gamma":0.1,"x":0}"#).is_err());
        let none: NoiseSpec = serde_json::from_str(r#"{"kind":"none"}"#).unwrap();
        assert_eq!(none.rate(), 0.0);
    }
}
