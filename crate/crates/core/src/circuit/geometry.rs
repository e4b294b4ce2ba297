use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A hypercubic lattice with open boundaries. Qubits are numbered by the
/// row-major linearization of their coordinates (last axis fastest).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawGeometry")]
pub struct GridGeometry {
    dims: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    dims: Vec<usize>,
}

impl TryFrom<RawGeometry> for GridGeometry {
    type Error = Error;
    fn try_from(raw: RawGeometry) -> Result<Self> {
        GridGeometry::new(raw.dims)
    }
}

impl GridGeometry {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Geometry("at least one dimension required".into()));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Geometry(format!("side lengths must be positive, got {dims:?}")));
        }
        Ok(Self { dims })
    }

    pub fn line(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn square(side: usize) -> Result<Self> {
        Self::new(vec![side, side])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Lattice dimension D.
    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn coords(&self, mut q: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &side) in out.iter_mut().zip(self.dims.iter()).rev() {
            *slot = q % side;
            q /= side;
        }
        out
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(self.dims.iter())
            .fold(0, |acc, (&c, &side)| acc * side + c)
    }

    /// Shortest-path (Manhattan) distance between two qubits.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.coords(a)
            .iter()
            .zip(self.coords(b).iter())
            .map(|(&x, &y)| x.abs_diff(y))
            .sum()
    }

    /// `min_{x in a, z in b} dist(x, z)`; `usize::MAX` if either set is empty.
    pub fn set_distance(&self, a: &[usize], b: &[usize]) -> usize {
        let mut best = usize::MAX;
        for &x in a {
            for &z in b {
                best = best.min(self.distance(x, z));
            }
        }
        best
    }

    /// Nearest-neighbour adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.num_qubits();
        (0..n)
            .map(|q| {
                let c = self.coords(q);
                let mut out = Vec::new();
                for axis in 0..c.len() {
                    if c[axis] > 0 {
                        let mut d = c.clone();
                        d[axis] -= 1;
                        out.push(self.index(&d));
                    }
                    if c[axis] + 1 < self.dims[axis] {
                        let mut d = c.clone();
                        d[axis] += 1;
                        out.push(self.index(&d));
                    }
                }
                out.sort_unstable();
                out
            })
            .collect()
    }
}
