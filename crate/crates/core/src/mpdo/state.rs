use faer::Mat;

use super::superop::ChannelSuperop;
use crate::circuit::{Circuit, CircuitLayer, NoiseSpec, Superop1};
use crate::error::{Error, Result};
use crate::info::{shannon_entropy, DistributionTable};
use crate::linalg::{C64, ONE, ZERO};

/// Singular values below this fraction of the largest are dropped from the
/// bond regardless of `chi_max`.
pub const SVD_RELATIVE_CUTOFF: f64 = 1e-14;

/// Diagonal probabilities in `[-NEGATIVITY_TOL, 0)` are clamped to zero.
pub const NEGATIVITY_TOL: f64 = 1e-10;

/// Rank-3 site tensor `A[a, I, b]` with physical index `I = 2i + j`,
/// stored row-major with `I` in the middle.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    pub left: usize,
    pub right: usize,
    pub values: Vec<C64>,
}

impl SiteTensor {
    pub fn new(left: usize, right: usize, values: Vec<C64>) -> Result<Self> {
        if values.len() != left * 4 * right || left == 0 || right == 0 {
            return Err(Error::InvalidArgument(format!(
                "site tensor of shape ({left}, 4, {right}) with {} values",
                values.len()
            )));
        }
        Ok(Self { left, right, values })
    }

    #[inline]
    pub fn get(&self, a: usize, p: usize, b: usize) -> C64 {
        self.values[(a * 4 + p) * self.right + b]
    }

    // (left * 4) x right
    fn left_grouped(&self) -> Mat<C64> {
        Mat::from_fn(self.left * 4, self.right, |i, j| self.values[i * self.right + j])
    }

    // left x (4 * right)
    fn right_grouped(&self) -> Mat<C64> {
        let cols = 4 * self.right;
        Mat::from_fn(self.left, cols, |i, j| self.values[i * cols + j])
    }

    fn from_left_grouped(m: &Mat<C64>) -> Self {
        let (rows, right) = (m.nrows(), m.ncols());
        let mut values = Vec::with_capacity(rows * right);
        for i in 0..rows {
            for j in 0..right {
                values.push(m[(i, j)]);
            }
        }
        Self {
            left: rows / 4,
            right,
            values,
        }
    }

    fn from_right_grouped(m: &Mat<C64>) -> Self {
        let (left, cols) = (m.nrows(), m.ncols());
        let mut values = Vec::with_capacity(left * cols);
        for i in 0..left {
            for j in 0..cols {
                values.push(m[(i, j)]);
            }
        }
        Self {
            left,
            right: cols / 4,
            values,
        }
    }

    /// `v^T A[:, p, :]` for a left environment `v`.
    fn contract_left(&self, v: &[C64], p: usize) -> Vec<C64> {
        let mut out = vec![ZERO; self.right];
        for (a, &va) in v.iter().enumerate() {
            if va == ZERO {
                continue;
            }
            let row = &self.values[(a * 4 + p) * self.right..(a * 4 + p + 1) * self.right];
            for (o, &x) in out.iter_mut().zip(row) {
                *o += va * x;
            }
        }
        out
    }

    /// `v^T (A[:, 0, :] + A[:, 3, :])`: the site traced out.
    fn contract_left_traced(&self, v: &[C64]) -> Vec<C64> {
        let mut out = self.contract_left(v, 0);
        for (o, x) in out.iter_mut().zip(self.contract_left(v, 3)) {
            *o += x;
        }
        out
    }

    /// `(A[:, 0, :] + A[:, 3, :]) v` for a right environment `v`.
    fn contract_right_traced(&self, v: &[C64]) -> Vec<C64> {
        (0..self.left)
            .map(|a| {
                let mut s = ZERO;
                for p in [0, 3] {
                    let row = &self.values[(a * 4 + p) * self.right..(a * 4 + p + 1) * self.right];
                    s += row.iter().zip(v).map(|(x, y)| x * y).sum::<C64>();
                }
                s
            })
            .collect()
    }
}

/// Vectorized density operator as a tensor train in mixed-canonical form.
#[derive(Clone, Debug)]
pub struct MpdoState {
    sites: Vec<SiteTensor>,
    center: usize,
    chi_max: usize,
    trace: f64,
    spectra: Vec<Vec<f64>>,
    truncation: Vec<f64>,
}

/// Which way the canonical center moves when a two-site update is split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sweep {
    Right,
    Left,
}

impl MpdoState {
    /// `|0^n><0^n|` with every bond of dimension 1.
    pub fn zero_state(n: usize, chi_max: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("MPDO needs at least one site".into()));
        }
        if chi_max == 0 {
            return Err(Error::InvalidArgument("chi_max must be positive".into()));
        }
        let site = SiteTensor::new(1, 1, vec![ONE, ZERO, ZERO, ZERO])?;
        Ok(Self {
            sites: vec![site; n],
            center: 0,
            chi_max,
            trace: 1.0,
            spectra: vec![vec![1.0]; n - 1],
            truncation: vec![0.0; n - 1],
        })
    }

    /// Builds a state from explicit site tensors and brings it to canonical
    /// form centred on site 0 with unit trace.
    pub fn from_sites(sites: Vec<SiteTensor>, chi_max: usize) -> Result<Self> {
        let n = sites.len();
        if n == 0 || chi_max == 0 {
            return Err(Error::InvalidArgument("empty tensor train or zero chi_max".into()));
        }
        for (k, s) in sites.iter().enumerate() {
            let want_left = if k == 0 { 1 } else { sites[k - 1].right };
            if s.left != want_left || (k == n - 1 && s.right != 1) {
                return Err(Error::InvalidArgument(format!("bond mismatch at site {k}")));
            }
        }
        let mut state = Self {
            sites,
            center: n - 1,
            chi_max,
            trace: 1.0,
            spectra: vec![Vec::new(); n - 1],
            truncation: vec![0.0; n - 1],
        };
        state.move_center(0)?;
        state.renormalize()?;
        Ok(state)
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[SiteTensor] {
        &self.sites
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn chi_max(&self) -> usize {
        self.chi_max
    }

    /// Trace measured at the most recent renormalization, before rescaling.
    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// Bond dimensions, one per internal bond.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1].iter().map(|s| s.right).collect()
    }

    /// Singular values recorded at each bond by its most recent split.
    pub fn bond_spectrum(&self, bond: usize) -> &[f64] {
        &self.spectra[bond]
    }

    /// Discarded weight (fraction of squared singular values) of the most
    /// recent truncation at each bond.
    pub fn truncation_weights(&self) -> &[f64] {
        &self.truncation
    }

    pub(crate) fn parts(&self) -> (&[SiteTensor], usize, usize, f64) {
        (&self.sites, self.center, self.chi_max, self.trace)
    }

    pub(crate) fn from_raw_parts(
        sites: Vec<SiteTensor>,
        center: usize,
        chi_max: usize,
        trace: f64,
    ) -> Result<Self> {
        let n = sites.len();
        if n == 0 || center >= n || chi_max == 0 {
            return Err(Error::InvalidArgument("inconsistent checkpoint header".into()));
        }
        for (k, s) in sites.iter().enumerate() {
            let want_left = if k == 0 { 1 } else { sites[k - 1].right };
            if s.left != want_left || (k == n - 1 && s.right != 1) {
                return Err(Error::InvalidArgument(format!("bond mismatch at site {k}")));
            }
        }
        Ok(Self {
            sites,
            center,
            chi_max,
            trace,
            spectra: vec![Vec::new(); n - 1],
            truncation: vec![0.0; n - 1],
        })
    }

    /// Moves the canonical center to `k` with QR factorizations.
    pub fn move_center(&mut self, k: usize) -> Result<()> {
        if k >= self.sites.len() {
            return Err(Error::InvalidArgument(format!("site {k} out of range")));
        }
        while self.center < k {
            let c = self.center;
            let m = self.sites[c].left_grouped();
            let qr = m.qr();
            let q = qr.compute_thin_Q();
            let r = qr.thin_R().to_owned();
            check_finite(&q, c)?;
            self.sites[c] = SiteTensor::from_left_grouped(&q);
            let next = r * self.sites[c + 1].right_grouped();
            self.sites[c + 1] = SiteTensor::from_right_grouped(&next);
            self.center += 1;
        }
        while self.center > k {
            let c = self.center;
            let m = self.sites[c].right_grouped();
            let qr = m.adjoint().to_owned().qr();
            let q = qr.compute_thin_Q();
            let r = qr.thin_R().to_owned();
            check_finite(&q, c)?;
            self.sites[c] = SiteTensor::from_right_grouped(&q.adjoint().to_owned());
            let prev = self.sites[c - 1].left_grouped() * r.adjoint();
            self.sites[c - 1] = SiteTensor::from_left_grouped(&prev);
            self.center -= 1;
        }
        Ok(())
    }

    /// Applies a two-qubit channel to sites `(k, k + 1)`, splits with an SVD
    /// truncated to `chi_max`, and renormalizes the trace.
    pub fn apply_channel(&mut self, m: &ChannelSuperop, k: usize) -> Result<()> {
        let sweep = if self.center <= k { Sweep::Right } else { Sweep::Left };
        self.apply_channel_sweep(m, k, sweep)
    }

    fn apply_channel_sweep(&mut self, m: &ChannelSuperop, k: usize, sweep: Sweep) -> Result<()> {
        let n = self.sites.len();
        if k + 1 >= n {
            return Err(Error::InvalidArgument(format!("no bond to the right of site {k}")));
        }
        self.move_center(if sweep == Sweep::Right { k } else { k + 1 })?;
        let theta = self.sites[k].left_grouped() * self.sites[k + 1].right_grouped();
        let (l, r) = (self.sites[k].left, self.sites[k + 1].right);
        // theta[(a, I), (J, b)] -> sum M[(I', J'), (I, J)] theta[(a, I), (J, b)]
        let mut out = Mat::<C64>::zeros(4 * l, 4 * r);
        let mut v = [ZERO; 16];
        for a in 0..l {
            for b in 0..r {
                for i in 0..4 {
                    for j in 0..4 {
                        v[4 * i + j] = theta[(4 * a + i, j * r + b)];
                    }
                }
                if v.iter().all(|x| *x == ZERO) {
                    continue;
                }
                let w = m.apply(&v);
                for i in 0..4 {
                    for j in 0..4 {
                        out[(4 * a + i, j * r + b)] = w[4 * i + j];
                    }
                }
            }
        }
        let svd = out.thin_svd().map_err(|e| Error::Numerical {
            site: k,
            reason: format!("SVD did not converge: {e:?}"),
        })?;
        let s: Vec<f64> = svd.S().column_vector().iter().map(|x| x.re).collect();
        let total: f64 = s.iter().map(|x| x * x).sum();
        if !total.is_finite() || total == 0.0 {
            return Err(Error::Numerical {
                site: k,
                reason: "vanishing or non-finite two-site tensor".into(),
            });
        }
        let cutoff = s[0] * SVD_RELATIVE_CUTOFF;
        let keep = s
            .iter()
            .take(self.chi_max)
            .take_while(|&&x| x > cutoff)
            .count()
            .max(1);
        let kept: f64 = s[..keep].iter().map(|x| x * x).sum();
        self.truncation[k] = ((total - kept) / total).max(0.0);
        let u = svd.U();
        let vm = svd.V();
        match sweep {
            Sweep::Right => {
                let left = Mat::from_fn(4 * l, keep, |i, j| u[(i, j)]);
                let right = Mat::from_fn(keep, 4 * r, |i, j| vm[(j, i)].conj() * s[i]);
                self.sites[k] = SiteTensor::from_left_grouped(&left);
                self.sites[k + 1] = SiteTensor::from_right_grouped(&right);
                self.center = k + 1;
            }
            Sweep::Left => {
                let left = Mat::from_fn(4 * l, keep, |i, j| u[(i, j)] * s[j]);
                let right = Mat::from_fn(keep, 4 * r, |i, j| vm[(j, i)].conj());
                self.sites[k] = SiteTensor::from_left_grouped(&left);
                self.sites[k + 1] = SiteTensor::from_right_grouped(&right);
                self.center = k;
            }
        }
        self.spectra[k] = s[..keep].to_vec();
        self.renormalize()
    }

    /// Applies a single-qubit superoperator at site `q` via the center.
    pub fn apply_single(&mut self, s: &Superop1, q: usize) -> Result<()> {
        self.move_center(q)?;
        let site = &mut self.sites[q];
        let (l, r) = (site.left, site.right);
        for a in 0..l {
            for b in 0..r {
                let v: [C64; 4] = std::array::from_fn(|p| site.values[(a * 4 + p) * r + b]);
                for (p, row) in s.iter().enumerate() {
                    site.values[(a * 4 + p) * r + b] = row.iter().zip(&v).map(|(x, y)| x * y).sum();
                }
            }
        }
        Ok(())
    }

    /// Trace of the represented operator.
    pub fn compute_trace(&self) -> C64 {
        let mut env = vec![ONE];
        for s in &self.sites {
            env = s.contract_left_traced(&env);
        }
        env[0]
    }

    fn renormalize(&mut self) -> Result<()> {
        let t = self.compute_trace().re;
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Numerical {
                site: self.center,
                reason: format!("non-positive trace {t}"),
            });
        }
        self.trace = t;
        for v in &mut self.sites[self.center].values {
            *v /= t;
        }
        Ok(())
    }

    /// Applies one realized layer: gate channels with the noise fused on both
    /// qubits, then the noise alone on idle qubits. Operations are ordered
    /// along the chain in the direction that needs fewer center moves.
    pub fn apply_layer(&mut self, layer: &CircuitLayer, noise: &NoiseSpec) -> Result<()> {
        let n = self.sites.len();
        let mut busy = vec![false; n];
        let mut ops: Vec<(usize, Option<ChannelSuperop>)> = Vec::new();
        for g in &layer.gates {
            let (a, b) = g.qubits;
            if a.abs_diff(b) != 1 {
                return Err(Error::Unsupported(format!(
                    "MPDO gates must act on neighbouring sites, got ({a}, {b})"
                )));
            }
            busy[a] = true;
            busy[b] = true;
            let m = ChannelSuperop::build(&g.gate.unitary(), noise)?;
            ops.push((a.min(b), Some(if a < b { m } else { m.swapped() })));
        }
        let single = noise.superop();
        let identity_noise = noise.rate() == 0.0;
        if !identity_noise {
            ops.extend((0..n).filter(|&q| !busy[q]).map(|q| (q, None)));
        }
        ops.sort_by_key(|op| op.0);
        let sweep = if self.center <= n / 2 { Sweep::Right } else { Sweep::Left };
        if sweep == Sweep::Left {
            ops.reverse();
        }
        for (site, op) in ops {
            match op {
                Some(m) => self.apply_channel_sweep(&m, site, sweep)?,
                None => self.apply_single(&single, site)?,
            }
        }
        Ok(())
    }

    /// Evolves `|0^n><0^n|` through a realized circuit.
    pub fn evolve(circuit: &Circuit, chi_max: usize) -> Result<Self> {
        let mut state = Self::zero_state(circuit.num_qubits(), chi_max)?;
        for layer in circuit.layers() {
            state.apply_layer(layer, circuit.noise())?;
        }
        Ok(state)
    }

    /// Operator entanglement entropy (bits) across `bond`, the cut between
    /// sites `bond` and `bond + 1`. Moves the center to `bond`.
    pub fn mpoee(&mut self, bond: usize) -> Result<f64> {
        if bond + 1 >= self.sites.len() {
            return Err(Error::InvalidArgument(format!("bond {bond} out of range")));
        }
        self.move_center(bond)?;
        let s = self.sites[bond]
            .left_grouped()
            .singular_values()
            .map_err(|e| Error::Numerical {
                site: bond,
                reason: format!("SVD did not converge: {e:?}"),
            })?;
        let weights: Vec<f64> = s.iter().map(|x| x * x).collect();
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            return Err(Error::Numerical {
                site: bond,
                reason: "all-zero bond spectrum".into(),
            });
        }
        let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Ok(shannon_entropy(&p))
    }

    /// Probability of a partial assignment: `Some(bit)` fixes a site, `None`
    /// marginalizes it. Sites past the end of `assignment` are marginalized.
    pub fn marginal_prob(&self, assignment: &[Option<bool>]) -> Result<f64> {
        if assignment.len() > self.sites.len() {
            return Err(Error::InvalidArgument("assignment longer than the chain".into()));
        }
        let mut env = vec![ONE];
        for (k, s) in self.sites.iter().enumerate() {
            env = match assignment.get(k).copied().flatten() {
                Some(bit) => s.contract_left(&env, if bit { 3 } else { 0 }),
                None => s.contract_left_traced(&env),
            };
        }
        clamp_probability(env[0].re)
    }

    /// `P(prefix)` for a bitstring on the first `prefix.len()` sites.
    pub fn diagonal_prob(&self, prefix: &[bool]) -> Result<f64> {
        let a: Vec<Option<bool>> = prefix.iter().map(|&b| Some(b)).collect();
        self.marginal_prob(&a)
    }

    /// Full output distribution. Only sensible for short chains.
    pub fn distribution(&self) -> Result<DistributionTable> {
        let n = self.sites.len();
        if n > 24 {
            return Err(Error::Capacity {
                what: "MPDO full distribution".into(),
                requested: n,
                limit: 24,
            });
        }
        let mut probs = vec![0.0; 1 << n];
        let mut stack: Vec<(usize, usize, Vec<C64>)> = vec![(0, 0, vec![ONE])];
        while let Some((k, prefix, env)) = stack.pop() {
            if k == n {
                probs[prefix] = clamp_probability(env[0].re)?;
                continue;
            }
            for bit in [1usize, 0] {
                let next = self.sites[k].contract_left(&env, 3 * bit);
                stack.push((k + 1, prefix << 1 | bit, next));
            }
        }
        DistributionTable::from_weights((0..n).collect(), probs)
    }

    /// Right environments with every site traced out: entry `k` covers sites
    /// `k..n` and has the left bond dimension of site `k`.
    pub(crate) fn traced_right_envs(&self) -> Vec<Vec<C64>> {
        let n = self.sites.len();
        let mut envs = vec![Vec::new(); n + 1];
        envs[n] = vec![ONE];
        for k in (0..n).rev() {
            envs[k] = self.sites[k].contract_right_traced(&envs[k + 1]);
        }
        envs
    }

    pub(crate) fn site_contract(&self, k: usize, env: &[C64], bit: Option<bool>) -> Vec<C64> {
        match bit {
            Some(b) => self.sites[k].contract_left(env, if b { 3 } else { 0 }),
            None => self.sites[k].contract_left_traced(env),
        }
    }

    /// Largest deviation from the isometry conditions of the mixed-canonical
    /// form around the current center.
    pub fn canonical_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, s) in self.sites.iter().enumerate() {
            if k == self.center {
                continue;
            }
            let g = if k < self.center {
                let m = s.left_grouped();
                m.adjoint() * &m
            } else {
                let m = s.right_grouped();
                &m * m.adjoint()
            };
            for i in 0..g.nrows() {
                for j in 0..g.ncols() {
                    let want = if i == j { ONE } else { ZERO };
                    worst = worst.max((g[(i, j)] - want).norm());
                }
            }
        }
        worst
    }
}

pub(crate) fn clamp_probability(p: f64) -> Result<f64> {
    if p < -NEGATIVITY_TOL {
        return Err(Error::Integrity(format!(
            "diagonal probability {p} is below the clamping tolerance"
        )));
    }
    Ok(p.max(0.0))
}

fn check_finite(m: &Mat<C64>, site: usize) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !(m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()) {
                return Err(Error::Numerical {
                    site,
                    reason: "non-finite value in QR factor".into(),
                });
            }
        }
    }
    Ok(())
}
