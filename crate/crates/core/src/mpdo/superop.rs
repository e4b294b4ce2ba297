use crate::circuit::{NoiseKind, NoiseSpec, Superop1};
use crate::error::{Error, Result};
use crate::linalg::{Matrix4, C64, ONE, ZERO};

/// Two-qubit superoperator on vectorized operators. Row and column index
/// `4 * I_a + I_b` with `I = 2i + j` for `|i><j|` on each qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSuperop(pub [[C64; 16]; 16]);

impl ChannelSuperop {
    pub fn identity() -> Self {
        let mut m = [[ZERO; 16]; 16];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = ONE;
        }
        Self(m)
    }

    /// `(N (x) N) o (U . U^dagger)`.
    pub fn build(gate: &Matrix4, noise: &NoiseSpec) -> Result<Self> {
        if matches!(noise.kind, NoiseKind::HeraldedReset | NoiseKind::HeraldedDepolarizing) {
            return Err(Error::Unsupported(
                "heralded channels are simulated on the stabilizer track".into(),
            ));
        }
        let u = &gate.0;
        let mut mu = [[ZERO; 16]; 16];
        for (row, out) in mu.iter_mut().enumerate() {
            let (ia, ja) = (row >> 3 & 1, row >> 2 & 1);
            let (ib, jb) = (row >> 1 & 1, row & 1);
            for (col, v) in out.iter_mut().enumerate() {
                let (ia2, ja2) = (col >> 3 & 1, col >> 2 & 1);
                let (ib2, jb2) = (col >> 1 & 1, col & 1);
                *v = u[2 * ia + ib][2 * ia2 + ib2] * u[2 * ja + jb][2 * ja2 + jb2].conj();
            }
        }
        let n1 = noise.superop();
        Ok(Self::local(&n1, &n1).then_after(&Self(mu)))
    }

    /// `A (x) B` for single-qubit superoperators.
    pub fn local(a: &Superop1, b: &Superop1) -> Self {
        let mut m = [[ZERO; 16]; 16];
        for (row, out) in m.iter_mut().enumerate() {
            for (col, v) in out.iter_mut().enumerate() {
                *v = a[row >> 2][col >> 2] * b[row & 3][col & 3];
            }
        }
        Self(m)
    }

    /// `self o first`.
    pub fn then_after(&self, first: &Self) -> Self {
        let mut m = [[ZERO; 16]; 16];
        for (i, out) in m.iter_mut().enumerate() {
            for (j, v) in out.iter_mut().enumerate() {
                *v = (0..16).map(|k| self.0[i][k] * first.0[k][j]).sum();
            }
        }
        Self(m)
    }

    /// The same channel with the roles of the two qubits exchanged.
    pub fn swapped(&self) -> Self {
        let sw = |i: usize| (i & 3) << 2 | i >> 2;
        let mut m = [[ZERO; 16]; 16];
        for (i, out) in m.iter_mut().enumerate() {
            for (j, v) in out.iter_mut().enumerate() {
                *v = self.0[sw(i)][sw(j)];
            }
        }
        Self(m)
    }

    pub fn apply(&self, v: &[C64; 16]) -> [C64; 16] {
        let mut out = [ZERO; 16];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Largest deviation from trace preservation: the trace functional
    /// (sum over `I in {0, 3}` on both qubits) composed with the map must
    /// equal the trace functional.
    pub fn trace_defect(&self) -> f64 {
        let diag = |i: usize| (i >> 2 == 0 || i >> 2 == 3) && (i & 3 == 0 || i & 3 == 3);
        let mut worst = 0.0f64;
        for col in 0..16 {
            let s: C64 = (0..16).filter(|&r| diag(r)).map(|r| self.0[r][col]).sum();
            let want = if diag(col) { ONE } else { ZERO };
            worst = worst.max((s - want).norm());
        }
        worst
    }
}
