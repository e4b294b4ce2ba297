use std::fmt;

use crate::error::{Error, Result};

/// A Hermitian Pauli string `±P_1 ⊗ … ⊗ P_n` with bit-packed x/z parts.
/// Qubit `q` with `x = z = 1` is `Y`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    negative: bool,
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x: vec![0; words(n)],
            z: vec![0; words(n)],
            negative: false,
        }
    }

    pub fn single_z(n: usize, q: usize) -> Self {
        let mut p = Self::identity(n);
        p.set(q, false, true);
        p
    }

    pub fn single_x(n: usize, q: usize) -> Self {
        let mut p = Self::identity(n);
        p.set(q, true, false);
        p
    }

    /// Parses strings like `"+XZI"`, `"-YY"` or `"ZZ"`; character `k` is qubit `k`.
    pub fn parse(text: &str) -> Result<Self> {
        let (negative, body) = match text.as_bytes().first() {
            Some(b'-') => (true, &text[1..]),
            Some(b'+') => (false, &text[1..]),
            _ => (false, text),
        };
        let mut p = Self::identity(body.len());
        for (q, c) in body.chars().enumerate() {
            let (x, z) = match c {
                'I' | '_' => (false, false),
                'X' => (true, false),
                'Y' => (true, true),
                'Z' => (false, true),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unexpected Pauli character {other:?}"
                    )))
                }
            };
            p.set(q, x, z);
        }
        p.negative = negative;
        Ok(p)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn set_negative(&mut self, negative: bool) {
        self.negative = negative;
    }

    pub fn x(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn z(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn set(&mut self, q: usize, x: bool, z: bool) {
        let (w, b) = (q / 64, q % 64);
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn is_identity_up_to_sign(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// True if every factor is `I` or `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Qubits on which the string acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x(q) || self.z(q)).collect()
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        let mut acc = 0u32;
        for w in 0..self.x.len() {
            acc ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones();
        }
        acc & 1 == 0
    }

    /// Sets `self = self · other` and returns `k` such that the product equals
    /// `i^k` times the unsigned Pauli string now stored in `self`. `k` is odd
    /// exactly when the two strings anticommute; the stored sign is then not
    /// meaningful.
    pub fn mul_assign_log_i(&mut self, other: &Self) -> u32 {
        debug_assert_eq!(self.n, other.n);
        let mut cnt1 = 0u64;
        let mut cnt2 = 0u64;
        for w in 0..self.x.len() {
            let (x2, z2) = (other.x[w], other.z[w]);
            let old_x1 = self.x[w];
            let old_z1 = self.z[w];
            self.x[w] ^= x2;
            self.z[w] ^= z2;
            let x1z2 = old_x1 & z2;
            let anti = (x2 & old_z1) ^ x1z2;
            cnt2 ^= (cnt1 ^ self.x[w] ^ self.z[w] ^ x1z2) & anti;
            cnt1 ^= anti;
        }
        let mut s = cnt1.count_ones() + 2 * cnt2.count_ones();
        s += 2 * (other.negative as u32) + 2 * (self.negative as u32);
        s &= 3;
        self.negative = s & 2 != 0;
        s
    }

    /// `self = self · other` for commuting strings.
    pub fn mul_assign(&mut self, other: &Self) {
        let s = self.mul_assign_log_i(other);
        debug_assert!(s & 1 == 0, "product of anticommuting Pauli strings");
    }

    /// Local 4-bit pattern `xa<<3 | za<<2 | xb<<1 | zb` on qubits `(a, b)`.
    pub fn local_bits(&self, a: usize, b: usize) -> u8 {
        ((self.x(a) as u8) << 3) | ((self.z(a) as u8) << 2) | ((self.x(b) as u8) << 1) | self.z(b) as u8
    }

    pub fn set_local_bits(&mut self, a: usize, b: usize, bits: u8) {
        self.set(a, bits & 8 != 0, bits & 4 != 0);
        self.set(b, bits & 2 != 0, bits & 1 != 0);
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.negative { '-' } else { '+' })?;
        for q in 0..self.n {
            let c = match (self.x(q), self.z(q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Matrix2, C64};

    // Dense matrix of a Pauli string, qubit 0 most significant.
    fn dense(p: &PauliString) -> Vec<Vec<C64>> {
        let mut m = vec![vec![C64::new(1.0, 0.0)]];
        for q in 0..p.num_qubits() {
            let idx = match (p.x(q), p.z(q)) {
                (false, false) => 0,
                (true, false) => 1,
                (true, true) => 2,
                (false, true) => 3,
            };
            let s = Matrix2::pauli(idx).0;
            let d = m.len();
            let mut next = vec![vec![C64::new(0.0, 0.0); 2 * d]; 2 * d];
            for i in 0..d {
                for j in 0..d {
                    for a in 0..2 {
                        for b in 0..2 {
                            next[2 * i + a][2 * j + b] = m[i][j] * s[a][b];
                        }
                    }
                }
            }
            m = next;
        }
        let sign = if p.is_negative() { -1.0 } else { 1.0 };
        m.iter().map(|r| r.iter().map(|v| v * sign).collect()).collect()
    }

    fn matmul(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let d = a.len();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).map(|k| a[i][k] * b[k][j]).sum())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for s in ["+XYZI", "-ZZ", "+I"] {
            assert_eq!(PauliString::parse(s).unwrap().to_string(), s);
        }
        assert!(PauliString::parse("XQ").is_err());
    }

    #[test]
    fn products_match_dense_matrices() {
        let letters = ['I', 'X', 'Y', 'Z'];
        for a in 0..64usize {
            for b in 0..64usize {
                let sa: String = (0..3).map(|k| letters[(a >> (2 * k)) & 3]).collect();
                let sb: String = (0..3).map(|k| letters[(b >> (2 * k)) & 3]).collect();
                for (na, nb) in [(false, false), (true, false), (false, true)] {
                    let mut p = PauliString::parse(&sa).unwrap();
                    p.set_negative(na);
                    let mut q = PauliString::parse(&sb).unwrap();
                    q.set_negative(nb);
                    let expect = matmul(&dense(&p), &dense(&q));
                    let mut r = p.clone();
                    let log_i = r.mul_assign_log_i(&q);
                    assert_eq!(log_i & 1 == 0, p.commutes_with(&q));
                    let phase = match log_i {
                        0 => C64::new(1.0, 0.0),
                        1 => C64::new(0.0, 1.0),
                        2 => C64::new(-1.0, 0.0),
                        _ => C64::new(0.0, -1.0),
                    };
                    r.set_negative(false);
                    let got: Vec<Vec<C64>> = dense(&r)
                        .iter()
                        .map(|row| row.iter().map(|v| v * phase).collect())
                        .collect();
                    for i in 0..8 {
                        for j in 0..8 {
                            assert!((got[i][j] - expect[i][j]).norm() < 1e-12, "{p} * {q}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn multiword_strings() {
        let n = 130;
        let mut p = PauliString::single_x(n, 129);
        p.mul_assign_log_i(&PauliString::single_z(n, 129));
        assert!(p.x(129) && p.z(129));
        assert_eq!(p.weight(), 1);
        assert_eq!(p.support(), vec![129]);
        assert!(!PauliString::single_x(n, 70).commutes_with(&PauliString::single_z(n, 70)));
        assert!(PauliString::single_x(n, 70).commutes_with(&PauliString::single_z(n, 71)));
    }
}
