//! Classical distributions over bitstrings and exact information quantities.

use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on `sum(probs) - 1` accepted by [`DistributionTable::new`].
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Probabilities over the bitstrings of an ordered list of qubits. Index bit
/// `m-1-i` holds the value of `qubits[i]`, so the first listed qubit is the
/// most significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionTable {
    qubits: Vec<usize>,
    probs: Vec<f64>,
}

impl DistributionTable {
    pub fn new(qubits: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let m = qubits.len();
        if m >= 48 || probs.len() != 1usize << m {
            return Err(Error::InvalidArgument(format!(
                "{} probabilities for {m} qubits",
                probs.len()
            )));
        }
        let mut sorted = qubits.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != m {
            return Err(Error::InvalidArgument(format!("repeated qubit in {qubits:?}")));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidArgument(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { qubits, probs })
    }

    /// Rescales non-negative weights to sum to one.
    pub fn from_weights(qubits: Vec<usize>, mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::ZeroProbability(format!("total weight {total}")));
        }
        for w in &mut weights {
            *w /= total;
        }
        Self::new(qubits, weights)
    }

    pub fn one_hot(qubits: Vec<usize>, index: usize) -> Self {
        let mut probs = vec![0.0; 1 << qubits.len()];
        probs[index] = 1.0;
        Self { qubits, probs }
    }

    pub fn uniform(qubits: Vec<usize>) -> Self {
        let size = 1usize << qubits.len();
        Self {
            qubits,
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_bits(&self) -> usize {
        self.qubits.len()
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    /// Value of `qubits[pos]` in `index`.
    pub fn bit(&self, index: usize, pos: usize) -> bool {
        (index >> (self.qubits.len() - 1 - pos)) & 1 == 1
    }

    fn positions(&self, labels: &[usize]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.qubits.iter().position(|q| q == l).ok_or_else(|| {
                    Error::InvalidArgument(format!("qubit {l} not in table {:?}", self.qubits))
                })
            })
            .collect()
    }

    // Gathers the bits at `positions` (in order) into a big-endian index.
    fn gather(&self, index: usize, positions: &[usize]) -> usize {
        let m = self.qubits.len();
        positions
            .iter()
            .fold(0, |acc, &p| (acc << 1) | ((index >> (m - 1 - p)) & 1))
    }

    /// Marginal over `keep`, in the order given.
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        let pos = self.positions(keep)?;
        let mut probs = vec![0.0; 1 << keep.len()];
        for (i, &p) in self.probs.iter().enumerate() {
            probs[self.gather(i, &pos)] += p;
        }
        let mut seen = pos.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != pos.len() {
            return Err(Error::InvalidArgument(format!("repeated qubit in {keep:?}")));
        }
        Ok(Self {
            qubits: keep.to_vec(),
            probs,
        })
    }

    /// Conditional distribution of the remaining qubits (table order) given
    /// that `on[i]` takes bit `value >> (on.len()-1-i) & 1`.
    pub fn condition(&self, on: &[usize], value: usize) -> Result<Self> {
        let pos = self.positions(on)?;
        let rest: Vec<usize> = (0..self.qubits.len()).filter(|p| !pos.contains(p)).collect();
        let mut weights = vec![0.0; 1 << rest.len()];
        for (i, &p) in self.probs.iter().enumerate() {
            if self.gather(i, &pos) == value {
                weights[self.gather(i, &rest)] += p;
            }
        }
        let labels = rest.iter().map(|&p| self.qubits[p]).collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroProbability(format!(
                "conditioning {on:?} = {value:b} has probability zero"
            )));
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self {
            qubits: labels,
            probs: weights,
        })
    }

    /// Same distribution with the qubits listed in `order`.
    pub fn reorder(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.qubits.len() {
            return Err(Error::InvalidArgument("reorder must keep every qubit".into()));
        }
        self.marginal(order)
    }

    /// Shannon entropy in bits, with `0 log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.probs)
    }

    pub fn entropy_of(&self, region: &[usize]) -> Result<f64> {
        Ok(self.marginal(region)?.entropy())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last = i;
                if u < acc {
                    return i;
                }
            }
        }
        last
    }
}

pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

fn check_disjoint(sets: &[&[usize]]) -> Result<()> {
    let mut all: Vec<usize> = sets.iter().flat_map(|s| s.iter().copied()).collect();
    let len = all.len();
    all.sort_unstable();
    all.dedup();
    if all.len() != len {
        return Err(Error::InvalidArgument("regions overlap".into()));
    }
    Ok(())
}

fn union(sets: &[&[usize]]) -> Vec<usize> {
    sets.iter().flat_map(|s| s.iter().copied()).collect()
}

/// `I(X:Z|Y) = H(XY) + H(YZ) - H(XYZ) - H(Y)` in bits.
pub fn exact_cmi(p: &DistributionTable, x: &[usize], y: &[usize], z: &[usize]) -> Result<f64> {
    check_disjoint(&[x, y, z])?;
    let xyz = p.marginal(&union(&[x, y, z]))?;
    let h_xy = xyz.entropy_of(&union(&[x, y]))?;
    let h_yz = xyz.entropy_of(&union(&[y, z]))?;
    let h_y = xyz.entropy_of(y)?;
    Ok(h_xy + h_yz - xyz.entropy() - h_y)
}

/// `||P - Q||_1` (twice the total variation distance). Both tables must list
/// the same qubits; `q` is reordered to match `p` if needed.
pub fn tv_distance(p: &DistributionTable, q: &DistributionTable) -> Result<f64> {
    let q = if q.qubits() == p.qubits() {
        q.clone()
    } else {
        q.reorder(p.qubits())?
    };
    Ok(p.probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// `||P_XYZ - P_XY P_{Z|Y}||_1`, the distance to the Markov chain `X - Y - Z`
/// built from the exact marginals. Conditionals on zero-probability `y`
/// carry zero weight.
pub fn markov_residual(p: &DistributionTable, x: &[usize], y: &[usize], z: &[usize]) -> Result<f64> {
    check_disjoint(&[x, y, z])?;
    let order = union(&[x, y, z]);
    let pxyz = p.marginal(&order)?;
    let pxy = pxyz.marginal(&union(&[x, y]))?;
    let pyz = pxyz.marginal(&union(&[y, z]))?;
    let py = pxyz.marginal(y)?;
    let (ny, nz) = (y.len(), z.len());
    let mut total = 0.0;
    for i in 0..pxyz.probs.len() {
        let xv = i >> (ny + nz);
        let yv = (i >> nz) & ((1 << ny) - 1);
        let zv = i & ((1 << nz) - 1);
        let denom = py.probs[yv];
        let model = if denom > 0.0 {
            pxy.probs[(xv << ny) | yv] * pyz.probs[(yv << nz) | zv] / denom
        } else {
            0.0
        };
        total += (pxyz.probs[i] - model).abs();
    }
    Ok(total)
}

/// Lower bound on the CMI implied by Pinsker's inequality for a residual.
pub fn pinsker_bound(residual: f64) -> f64 {
    residual * residual / (2.0 * std::f64::consts::LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ghz3() -> DistributionTable {
        let mut p = vec![0.0; 8];
        p[0] = 0.5;
        p[7] = 0.5;
        DistributionTable::new(vec![0, 1, 2], p).unwrap()
    }

    fn bell() -> DistributionTable {
        DistributionTable::new(vec![0, 1], vec![0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(DistributionTable::new(vec![0], vec![0.5, 0.6]).is_err());
        assert!(DistributionTable::new(vec![0], vec![1.0]).is_err());
        assert!(DistributionTable::new(vec![0, 0], vec![0.25; 4]).is_err());
        assert!(DistributionTable::new(vec![0], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn marginal_and_condition() {
        let p = DistributionTable::new(vec![3, 7], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let m = p.marginal(&[7]).unwrap();
        assert!((m.probs()[0] - 0.4).abs() < 1e-15);
        let swapped = p.reorder(&[7, 3]).unwrap();
        assert_eq!(swapped.probs(), &[0.1, 0.3, 0.2, 0.4]);
        let c = p.condition(&[3], 1).unwrap();
        assert_eq!(c.qubits(), &[7]);
        assert!((c.probs()[1] - 4.0 / 7.0).abs() < 1e-15);
        let b = bell();
        assert_eq!(b.condition(&[0], 1).unwrap().probs(), &[0.0, 1.0]);
        let zero = DistributionTable::one_hot(vec![0, 1], 0);
        assert!(matches!(zero.condition(&[0], 1), Err(Error::ZeroProbability(_))));
    }

    #[test]
    fn cmi_examples() {
        let product = DistributionTable::new(
            vec![0, 1, 2],
            (0..8)
                .map(|i| {
                    let a = if i & 4 != 0 { 0.3 } else { 0.7 };
                    let b = if i & 2 != 0 { 0.6 } else { 0.4 };
                    let c = if i & 1 != 0 { 0.1 } else { 0.9 };
                    a * b * c
                })
                .collect(),
        )
        .unwrap();
        assert!(exact_cmi(&product, &[0], &[1], &[2]).unwrap().abs() < 1e-12);
        assert!(exact_cmi(&ghz3(), &[0], &[1], &[2]).unwrap().abs() < 1e-12);
        assert!((exact_cmi(&bell(), &[0], &[], &[1]).unwrap() - 1.0).abs() < 1e-12);
        assert!(exact_cmi(&bell(), &[0], &[0], &[1]).is_err());
    }

    #[test]
    fn distances() {
        let u = DistributionTable::uniform(vec![0, 1, 2]);
        assert_eq!(tv_distance(&u, &u).unwrap(), 0.0);
        let o = DistributionTable::one_hot(vec![0, 1, 2], 5);
        assert!((tv_distance(&o, &u).unwrap() - 2.0 * (1.0 - 0.125)).abs() < 1e-15);
        assert!(markov_residual(&ghz3(), &[0], &[1], &[2]).unwrap() < 1e-15);
        let r = markov_residual(&bell(), &[0], &[], &[1]).unwrap();
        // P = Bell, model = product of uniform marginals.
        assert!((r - 1.0).abs() < 1e-15);
        assert!(exact_cmi(&bell(), &[0], &[], &[1]).unwrap() >= pinsker_bound(r));
    }

    #[test]
    fn entropy_and_sampling() {
        assert_eq!(DistributionTable::one_hot(vec![0, 1], 2).entropy(), 0.0);
        assert!((DistributionTable::uniform(vec![0, 1, 2]).entropy() - 3.0).abs() < 1e-15);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let b = bell();
        for _ in 0..100 {
            let s = b.sample(&mut rng);
            assert!(s == 0 || s == 3);
        }
    }
}
