//! Fixed-size complex matrices for one- and two-qubit operators.
//!
//! Two-qubit matrices use the basis `|q_a q_b>` with `q_a` as the high bit,
//! i.e. row index `2 * q_a + q_b`.

use num_complex::Complex64;
use std::ops::Mul;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix2(pub [[C64; 2]; 2]);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix4(pub [[C64; 4]; 4]);

impl Matrix2 {
    pub fn identity() -> Self {
        Self([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn zeros() -> Self {
        Self([[ZERO; 2]; 2])
    }

    /// Pauli matrices in the order I, X, Y, Z.
    pub fn pauli(index: usize) -> Self {
        match index {
            0 => Self::identity(),
            1 => Self([[ZERO, ONE], [ONE, ZERO]]),
            2 => Self([[ZERO, -I], [I, ZERO]]),
            3 => Self([[ONE, ZERO], [ZERO, -ONE]]),
            _ => panic!("pauli index {index} out of range"),
        }
    }

    pub fn from_real(rows: [[f64; 2]; 2]) -> Self {
        Self(rows.map(|r| r.map(|v| C64::new(v, 0.0))))
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|r| r.map(|v| v * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for (r, o) in out.0.iter_mut().zip(other.0.iter()) {
            for (v, w) in r.iter_mut().zip(o.iter()) {
                *v += *w;
            }
        }
        out
    }

    /// Basis operator `|i><j|`.
    pub fn unit(i: usize, j: usize) -> Self {
        let mut m = Self::zeros();
        m.0[i][j] = ONE;
        m
    }

    pub fn kron(&self, other: &Matrix2) -> Matrix4 {
        let mut out = Matrix4::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        out.0[2 * a + c][2 * b + d] = self.0[a][b] * other.0[c][d];
                    }
                }
            }
        }
        out
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let mut out = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j];
            }
        }
        out
    }
}

impl Matrix4 {
    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn zeros() -> Self {
        Self([[ZERO; 4]; 4])
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = self.0[j][i].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|r| r.map(|v| v * s)))
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] += other.0[i][j];
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64; 4]) -> [C64; 4] {
        std::array::from_fn(|i| (0..4).map(|k| self.0[i][k] * v[k]).sum())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    /// `max |(G^dagger G - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    /// `U * rho * U^dagger`.
    pub fn conjugate(&self, rho: &Matrix4) -> Matrix4 {
        *self * *rho * self.adjoint()
    }
}

impl Mul for Matrix4 {
    type Output = Matrix4;
    fn mul(self, rhs: Matrix4) -> Matrix4 {
        let mut out = Matrix4::zeros();
        for i in 0..4 {
            for k in 0..4 {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..4 {
                    out.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        out
    }
}
