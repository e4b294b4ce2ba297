use std::collections::VecDeque;

use crate::circuit::GridGeometry;
use crate::error::{Error, Result};

/// Coarse-grained partition of a lattice into hypercubes of side `ell`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatchGraph {
    ell: usize,
    patches: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl PatchGraph {
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Patches in raster order of their block coordinates; qubits ascending.
    pub fn patches(&self) -> &[Vec<usize>] {
        &self.patches
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// Pairs `(i, j)` with `i < j` and `dist(X_i, X_j) < ell`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// `N'(X_i)`: neighbouring patches that come earlier in the order.
    pub fn prior_neighbors(&self, i: usize) -> Vec<usize> {
        self.neighbors[i].iter().copied().filter(|&j| j < i).collect()
    }

    /// Qubits of `N'(X_i)`, ascending.
    pub fn prior_neighbor_qubits(&self, i: usize) -> Vec<usize> {
        let mut q: Vec<usize> = self
            .prior_neighbors(i)
            .into_iter()
            .flat_map(|j| self.patches[j].iter().copied())
            .collect();
        q.sort_unstable();
        q
    }

    /// Qubits of `X_1 ... X_{i-1}`, ascending.
    pub fn earlier_qubits(&self, i: usize) -> Vec<usize> {
        let mut q: Vec<usize> = self.patches[..i].iter().flatten().copied().collect();
        q.sort_unstable();
        q
    }
}

pub fn coarse_grain(geometry: &GridGeometry, ell: usize) -> Result<PatchGraph> {
    if ell == 0 {
        return Err(Error::InvalidArgument("patch side must be at least 1".into()));
    }
    let blocks: Vec<usize> = geometry.dims().iter().map(|&s| s.div_ceil(ell)).collect();
    let block_grid = GridGeometry::new(blocks)?;
    let mut patches = vec![Vec::new(); block_grid.num_qubits()];
    for q in 0..geometry.num_qubits() {
        let c: Vec<usize> = geometry.coords(q).iter().map(|&x| x / ell).collect();
        patches[block_grid.index(&c)].push(q);
    }
    let m = patches.len();
    let mut edges = Vec::new();
    let mut neighbors = vec![Vec::new(); m];
    for i in 0..m {
        for j in i + 1..m {
            if geometry.set_distance(&patches[i], &patches[j]) < ell {
                edges.push((i, j));
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    for nb in &mut neighbors {
        nb.sort_unstable();
    }
    Ok(PatchGraph {
        ell,
        patches,
        edges,
        neighbors,
    })
}

/// Vertices within graph distance `radius` of `v` (breadth-first search).
pub fn ball(adjacency: &[Vec<usize>], v: usize, radius: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adjacency.len()];
    let mut queue = VecDeque::from([v]);
    dist[v] = 0;
    while let Some(u) = queue.pop_front() {
        if dist[u] == radius {
            continue;
        }
        for &w in &adjacency[u] {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    (0..adjacency.len()).filter(|&u| dist[u] != usize::MAX).collect()
}
