use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{Matrix2, Matrix4, C64, ONE};

/// Two-qubit Pauli `±σ(bits)` with bits `xa<<3 | za<<2 | xb<<1 | zb`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedPauli2 {
    pub bits: u8,
    pub negative: bool,
}

impl SignedPauli2 {
    pub const fn new(bits: u8, negative: bool) -> Self {
        Self { bits, negative }
    }

    pub fn matrix(&self) -> Matrix4 {
        let m = pauli_matrix(self.bits);
        if self.negative {
            m.scale(-ONE)
        } else {
            m
        }
    }
}

const XA: u8 = 0b1000;
const ZA: u8 = 0b0100;
const XB: u8 = 0b0010;
const ZB: u8 = 0b0001;

fn pauli_index(x: bool, z: bool) -> usize {
    match (x, z) {
        (false, false) => 0,
        (true, false) => 1,
        (true, true) => 2,
        (false, true) => 3,
    }
}

fn pauli_matrix(bits: u8) -> Matrix4 {
    let a = Matrix2::pauli(pauli_index(bits & 8 != 0, bits & 4 != 0));
    let b = Matrix2::pauli(pauli_index(bits & 2 != 0, bits & 1 != 0));
    a.kron(&b)
}

/// Symplectic form: 1 if the two Paulis anticommute.
pub fn symplectic(u: u8, v: u8) -> u8 {
    let swapped = ((v & 0b1010) >> 1) | ((v & 0b0101) << 1);
    ((u & swapped).count_ones() & 1) as u8
}

// Exponent g with σ(x1,z1) σ(x2,z2) = i^g σ(x1^x2, z1^z2), single qubit.
fn g1(x1: u8, z1: u8, x2: u8, z2: u8) -> i32 {
    let (x1, z1, x2, z2) = (x1 as i32, z1 as i32, x2 as i32, z2 as i32);
    match (x1, z1) {
        (0, 0) => 0,
        (1, 1) => z2 - x2,
        (1, 0) => z2 * (2 * x2 - 1),
        _ => x2 * (1 - 2 * z2),
    }
}

fn g2(u: u8, v: u8) -> i32 {
    g1(u >> 3 & 1, u >> 2 & 1, v >> 3 & 1, v >> 2 & 1) + g1(u >> 1 & 1, u & 1, v >> 1 & 1, v & 1)
}

/// A two-qubit Clifford stored as the images of `X_a, Z_a, X_b, Z_b` under
/// conjugation, with a lookup table for all 16 unsigned Paulis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Clifford2 {
    images: [SignedPauli2; 4],
    table: [SignedPauli2; 16],
}

impl Clifford2 {
    pub fn from_images(images: [SignedPauli2; 4]) -> Result<Self> {
        let b: Vec<u8> = images.iter().map(|p| p.bits & 15).collect();
        let expect = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]];
        for i in 0..4 {
            if b[i] == 0 || images[i].bits > 15 {
                return Err(Error::InvalidArgument("Clifford image is not a non-identity Pauli".into()));
            }
            for j in 0..4 {
                if symplectic(b[i], b[j]) != expect[i][j] {
                    return Err(Error::InvalidArgument(
                        "Clifford images violate the commutation relations".into(),
                    ));
                }
            }
        }
        let mut table = [SignedPauli2::new(0, false); 16];
        for (pattern, entry) in table.iter_mut().enumerate() {
            let p = pattern as u8;
            let mut log_i = ((p >> 3) & (p >> 2) & 1) as i32 + ((p >> 1) & p & 1) as i32;
            let mut bits = 0u8;
            for (k, gen) in [XA, ZA, XB, ZB].iter().enumerate() {
                if p & gen != 0 {
                    let img = images[k];
                    log_i += g2(bits, img.bits) + 2 * img.negative as i32;
                    bits ^= img.bits;
                }
            }
            let log_i = log_i.rem_euclid(4);
            debug_assert!(log_i % 2 == 0);
            *entry = SignedPauli2::new(bits, log_i == 2);
        }
        Ok(Self { images, table })
    }

    fn from_bits(bits: [u8; 4]) -> Self {
        Self::from_images(bits.map(|b| SignedPauli2::new(b, false))).expect("valid images")
    }

    pub fn identity() -> Self {
        Self::from_bits([XA, ZA, XB, ZB])
    }

    /// CNOT with control `a` and target `b`.
    pub fn cnot() -> Self {
        Self::from_bits([XA | XB, ZA, XB, ZA | ZB])
    }

    pub fn hadamard_a() -> Self {
        Self::from_bits([ZA, XA, XB, ZB])
    }

    pub fn hadamard_b() -> Self {
        Self::from_bits([XA, ZA, ZB, XB])
    }

    pub fn phase_a() -> Self {
        Self::from_bits([XA | ZA, ZA, XB, ZB])
    }

    pub fn swap() -> Self {
        Self::from_bits([XB, ZB, XA, ZA])
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Self) -> Self {
        let images = self.images.map(|img| {
            let out = next.conjugate(img.bits);
            SignedPauli2::new(out.bits, out.negative ^ img.negative)
        });
        Self::from_images(images).expect("composition of Cliffords")
    }

    /// Uniform element of the two-qubit Clifford group (modulo phase): a
    /// uniform symplectic basis followed by uniform signs, 720 · 16 = 11520
    /// elements.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let xa = rng.random_range(1..16u8);
        let za = pick(rng, |v| symplectic(xa, v) == 1);
        let xb = pick(rng, |v| symplectic(xa, v) == 0 && symplectic(za, v) == 0);
        let zb = pick(rng, |v| {
            symplectic(xa, v) == 0 && symplectic(za, v) == 0 && symplectic(xb, v) == 1
        });
        let signs: u8 = rng.random_range(0..16);
        let bits = [xa, za, xb, zb];
        let images = std::array::from_fn(|k| SignedPauli2::new(bits[k], signs >> k & 1 == 1));
        Self::from_images(images).expect("symplectic basis")
    }

    pub fn images(&self) -> &[SignedPauli2; 4] {
        &self.images
    }

    /// `U σ(bits) U†`.
    pub fn conjugate(&self, bits: u8) -> SignedPauli2 {
        self.table[(bits & 15) as usize]
    }

    /// A unitary realizing this Clifford, determined up to a global phase.
    pub fn unitary(&self) -> Matrix4 {
        let za = self.images[1].matrix();
        let zb = self.images[3].matrix();
        let id = Matrix4::identity();
        let half = C64::new(0.5, 0.0);
        let proj = (id.add(&za).scale(half)) * (id.add(&zb).scale(half));
        // Column of the projector with the largest norm spans its range.
        let mut best = 0;
        let mut best_norm = -1.0;
        for k in 0..4 {
            let norm: f64 = (0..4).map(|i| proj.0[i][k].norm_sqr()).sum();
            if norm > best_norm {
                best = k;
                best_norm = norm;
            }
        }
        let scale = 1.0 / best_norm.sqrt();
        let psi0: [C64; 4] = std::array::from_fn(|i| proj.0[i][best] * scale);
        let xa = self.images[0].matrix();
        let xb = self.images[2].matrix();
        let mut u = Matrix4::zeros();
        for col in 0..4 {
            let mut v = psi0;
            if col & 1 == 1 {
                v = xb.apply(&v);
            }
            if col & 2 == 2 {
                v = xa.apply(&v);
            }
            for i in 0..4 {
                u.0[i][col] = v[i];
            }
        }
        u
    }
}

fn pick<R: Rng + ?Sized>(rng: &mut R, keep: impl Fn(u8) -> bool) -> u8 {
    let choices: Vec<u8> = (1..16u8).filter(|&v| keep(v)).collect();
    choices[rng.random_range(0..choices.len())]
}
