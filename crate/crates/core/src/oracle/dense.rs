use crate::circuit::{Circuit, CircuitDescriptor, NoiseKind, Superop1};
use crate::error::{Error, Result};
use crate::info::DistributionTable;
use crate::linalg::{Matrix4, C64};
use crate::oracle::kernel::{self, PairOp, PopChannel};

pub const DEFAULT_MAX_QUBITS: usize = 14;

/// How heralded noise is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeraldMode {
    /// The herald-averaged channel on every qubit.
    Averaged,
    /// The realization's herald record: the fired channel where a herald
    /// fired, nothing elsewhere.
    Trajectory,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialState {
    Zero,
    MaximallyMixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DenseOptions {
    pub heralds: HeraldMode,
    pub initial: InitialState,
    pub max_qubits: usize,
}

impl Default for DenseOptions {
    fn default() -> Self {
        Self {
            heralds: HeraldMode::Averaged,
            initial: InitialState::Zero,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl DenseOptions {
    pub fn trajectory() -> Self {
        Self {
            heralds: HeraldMode::Trajectory,
            ..Self::default()
        }
    }
}

/// A `2^n x 2^n` density matrix, row-major, stored as separate real and
/// imaginary planes. Qubit `q` is bit `n-1-q` of the basis index.
#[derive(Clone, Debug)]
pub struct DenseState {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

// A noise channel prepared for the kernels.
enum Prepared {
    Identity,
    Pop(PopChannel),
    General(Superop1),
}

fn prepare(s: Option<&Superop1>) -> Prepared {
    match s {
        None => Prepared::Identity,
        Some(s) if kernel::is_identity_superop(s) => Prepared::Identity,
        Some(s) => match PopChannel::from_superop(s) {
            Some(p) => Prepared::Pop(p),
            None => Prepared::General(*s),
        },
    }
}

impl DenseState {
    pub fn zero_state(n: usize, max_qubits: usize) -> Result<Self> {
        let mut s = Self::allocate(n, max_qubits)?;
        s.re[0] = 1.0;
        Ok(s)
    }

    pub fn maximally_mixed(n: usize, max_qubits: usize) -> Result<Self> {
        let mut s = Self::allocate(n, max_qubits)?;
        let dim = s.dim();
        for i in 0..dim {
            s.re[i * dim + i] = 1.0 / dim as f64;
        }
        Ok(s)
    }

    fn allocate(n: usize, max_qubits: usize) -> Result<Self> {
        if n > max_qubits {
            return Err(Error::Capacity {
                what: "dense oracle qubits".into(),
                requested: n,
                limit: max_qubits,
            });
        }
        if n == 0 {
            return Err(Error::InvalidArgument("dense state needs at least one qubit".into()));
        }
        Ok(Self {
            n,
            re: vec![0.0; 1 << (2 * n)],
            im: vec![0.0; 1 << (2 * n)],
        })
    }

    /// Wraps an explicit matrix (row-major, `4^n` entries).
    pub fn from_matrix(n: usize, rho: &[C64]) -> Result<Self> {
        if n == 0 || rho.len() != 1 << (2 * n) {
            return Err(Error::InvalidArgument(format!(
                "{} entries for {n} qubits",
                rho.len()
            )));
        }
        Ok(Self {
            n,
            re: rho.iter().map(|v| v.re).collect(),
            im: rho.iter().map(|v| v.im).collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        let k = row * self.dim() + col;
        C64::new(self.re[k], self.im[k])
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue, via a dense Hermitian eigensolver.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let m = faer::Mat::<C64>::from_fn(d, d, |i, j| self.entry(i, j));
        let eig = m
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("Hermitian eigensolver");
        eig.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Applies `U (.) U^dagger` on qubits `(a, b)` followed by the optional
    /// single-qubit superoperators on `a` and `b`, fused into one sweep when
    /// the channels allow it.
    pub fn apply_two_qubit(
        &mut self,
        u: Option<&Matrix4>,
        a: usize,
        b: usize,
        noise_a: Option<&Superop1>,
        noise_b: Option<&Superop1>,
    ) -> Result<()> {
        let n = self.n;
        if a >= n || b >= n || a == b {
            return Err(Error::InvalidArgument(format!("invalid qubit pair ({a}, {b})")));
        }
        let mut op = PairOp {
            u: u.copied(),
            a: PopChannel::IDENTITY,
            b: PopChannel::IDENTITY,
        };
        let mut deferred = Vec::new();
        for (q, noise, slot) in [(a, noise_a, &mut op.a), (b, noise_b, &mut op.b)] {
            match prepare(noise) {
                Prepared::Identity => {}
                Prepared::Pop(p) => *slot = p,
                Prepared::General(s) => deferred.push((q, s)),
            }
        }
        if op.u.is_some() || !op.a.is_identity() || !op.b.is_identity() {
            kernel::apply_pair(&mut self.re, &mut self.im, n, n - 1 - a, n - 1 - b, &op);
        }
        for (q, s) in deferred {
            kernel::apply_single(&mut self.re, &mut self.im, n, n - 1 - q, &s);
        }
        Ok(())
    }

    /// Applies a single-qubit superoperator to qubit `q`.
    pub fn apply_single_qubit_superop(&mut self, q: usize, s: &Superop1) -> Result<()> {
        let n = self.n;
        if q >= n {
            return Err(Error::InvalidArgument(format!("qubit {q} out of range")));
        }
        match prepare(Some(s)) {
            Prepared::Identity => {}
            Prepared::Pop(p) if n >= 2 => {
                // Pair with a neighbouring qubit carrying the identity.
                let other = if q == 0 { 1 } else { q - 1 };
                let op = PairOp {
                    u: None,
                    a: p,
                    b: PopChannel::IDENTITY,
                };
                kernel::apply_pair(&mut self.re, &mut self.im, n, n - 1 - q, n - 1 - other, &op);
            }
            _ => kernel::apply_single(&mut self.re, &mut self.im, n, n - 1 - q, s),
        }
        Ok(())
    }

    /// Computational-basis distribution over all qubits. Diagonal entries in
    /// `[-1e-12, 0)` are clamped to zero; anything more negative is an error.
    pub fn distribution(&self) -> Result<DistributionTable> {
        let d = self.dim();
        let mut probs = Vec::with_capacity(d);
        for i in 0..d {
            let p = self.re[i * d + i];
            if p < -1e-12 {
                return Err(Error::Integrity(format!(
                    "diagonal entry {i} of the density matrix is {p}"
                )));
            }
            probs.push(p.max(0.0));
        }
        DistributionTable::new((0..self.n).collect(), probs)
    }
}

/// Evolves a realized circuit from the chosen initial state.
pub fn evolve_circuit(circuit: &Circuit, options: &DenseOptions) -> Result<DenseState> {
    let n = circuit.num_qubits();
    let mut state = match options.initial {
        InitialState::Zero => DenseState::zero_state(n, options.max_qubits)?,
        InitialState::MaximallyMixed => DenseState::maximally_mixed(n, options.max_qubits)?,
    };
    let noise = *circuit.noise();
    let averaged = (noise.kind != NoiseKind::None && noise.gamma > 0.0).then(|| noise.superop());
    let fired = noise.fired_superop();
    let trajectory = noise.is_heralded() && options.heralds == HeraldMode::Trajectory;
    for layer in circuit.layers() {
        let channel = |q: usize| -> Option<Superop1> {
            if trajectory {
                if layer.fired[q] {
                    fired
                } else {
                    None
                }
            } else {
                averaged
            }
        };
        let mut touched = vec![false; n];
        for g in &layer.gates {
            let (a, b) = g.qubits;
            touched[a] = true;
            touched[b] = true;
            let u = (!g.gate.is_identity()).then(|| g.gate.unitary());
            state.apply_two_qubit(u.as_ref(), a, b, channel(a).as_ref(), channel(b).as_ref())?;
        }
        for q in (0..n).filter(|&q| !touched[q]) {
            if let Some(s) = channel(q) {
                state.apply_single_qubit_superop(q, &s)?;
            }
        }
    }
    Ok(state)
}

/// Realizes the descriptor and evolves it from `|0^n>`, with heralded noise
/// averaged.
pub fn evolve(descriptor: &CircuitDescriptor) -> Result<DenseState> {
    evolve_circuit(&descriptor.realize()?, &DenseOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{
        CircuitLayer, GateFamily, GridGeometry, NoiseSpec, PlacedGate, Gate2,
    };
    use crate::linalg::{Matrix2, ONE, ZERO};
    use crate::stabilizer::Clifford2;

    // Reference implementation: full 2^n x 2^n matrices with Kraus sums.
    fn reference(circuit: &Circuit, options: &DenseOptions) -> Vec<Vec<C64>> {
        let n = circuit.num_qubits();
        let d = 1 << n;
        let mut rho = vec![vec![ZERO; d]; d];
        match options.initial {
            InitialState::Zero => rho[0][0] = ONE,
            InitialState::MaximallyMixed => {
                for (i, row) in rho.iter_mut().enumerate() {
                    row[i] = C64::new(1.0 / d as f64, 0.0);
                }
            }
        }
        let embed2 = |u: &Matrix4, a: usize, b: usize| {
            let mut m = vec![vec![ZERO; d]; d];
            for r in 0..d {
                for c in 0..d {
                    let (pa, pb) = (n - 1 - a, n - 1 - b);
                    let rest = !((1 << pa) | (1 << pb));
                    if r & rest != c & rest {
                        continue;
                    }
                    let ri = 2 * (r >> pa & 1) + (r >> pb & 1);
                    let ci = 2 * (c >> pa & 1) + (c >> pb & 1);
                    m[r][c] = u.0[ri][ci];
                }
            }
            m
        };
        let embed1 = |k: &Matrix2, q: usize| {
            let mut m = vec![vec![ZERO; d]; d];
            let p = n - 1 - q;
            for r in 0..d {
                for c in 0..d {
                    if r & !(1 << p) != c & !(1 << p) {
                        continue;
                    }
                    m[r][c] = k.0[r >> p & 1][c >> p & 1];
                }
            }
            m
        };
        let mul = |a: &Vec<Vec<C64>>, b: &Vec<Vec<C64>>| -> Vec<Vec<C64>> {
            (0..d)
                .map(|i| (0..d).map(|j| (0..d).map(|k| a[i][k] * b[k][j]).sum()).collect())
                .collect()
        };
        let adj = |a: &Vec<Vec<C64>>| -> Vec<Vec<C64>> {
            (0..d).map(|i| (0..d).map(|j| a[j][i].conj()).collect()).collect()
        };
        let noise = circuit.noise();
        for layer in circuit.layers() {
            for g in &layer.gates {
                let u = embed2(&g.gate.unitary(), g.qubits.0, g.qubits.1);
                rho = mul(&mul(&u, &rho), &adj(&u));
            }
            for q in 0..n {
                let kraus: Vec<Matrix2> = if noise.is_heralded() && options.heralds == HeraldMode::Trajectory {
                    if !layer.fired[q] {
                        continue;
                    }
                    match noise.kind {
                        NoiseKind::HeraldedReset => vec![
                            Matrix2::from_real([[1.0, 0.0], [0.0, 0.0]]),
                            Matrix2::from_real([[0.0, 1.0], [0.0, 0.0]]),
                        ],
                        _ => (0..4).map(|p| Matrix2::pauli(p).scale(C64::new(0.5, 0.0))).collect(),
                    }
                } else {
                    noise.kraus()
                };
                let mut next = vec![vec![ZERO; d]; d];
                for k in &kraus {
                    let km = embed1(k, q);
                    let term = mul(&mul(&km, &rho), &adj(&km));
                    for i in 0..d {
                        for j in 0..d {
                            next[i][j] += term[i][j];
                        }
                    }
                }
                rho = next;
            }
        }
        rho
    }

    fn compare(circuit: &Circuit, options: &DenseOptions) {
        let fast = evolve_circuit(circuit, options).unwrap();
        let slow = reference(circuit, options);
        let d = fast.dim();
        for i in 0..d {
            for j in 0..d {
                assert!((fast.entry(i, j) - slow[i][j]).norm() < 1e-12, "({i}, {j})");
            }
        }
    }

    #[test]
    fn matches_reference_haar_amplitude_damping() {
        for (seed, n) in [(1, 4), (2, 5)] {
            let d = CircuitDescriptor::new(
                GridGeometry::line(n).unwrap(),
                4,
                GateFamily::Haar2Q,
                NoiseSpec::amplitude_damping(0.15),
                seed,
            );
            let c = d.realize().unwrap();
            compare(&c, &DenseOptions::default());
            compare(
                &c,
                &DenseOptions {
                    initial: InitialState::MaximallyMixed,
                    ..DenseOptions::default()
                },
            );
        }
    }

    #[test]
    fn matches_reference_heralded() {
        for noise in [NoiseSpec::heralded_reset(0.3), NoiseSpec::heralded_depolarizing(0.3)] {
            let d = CircuitDescriptor::new(
                GridGeometry::new(vec![2, 2]).unwrap(),
                5,
                GateFamily::Clifford2Q,
                noise,
                7,
            );
            let c = d.realize().unwrap();
            compare(&c, &DenseOptions::default());
            compare(&c, &DenseOptions::trajectory());
        }
    }

    // A Hadamard conjugation channel is not phase covariant, so it takes the
    // generic superoperator path; compare with the same map as a unitary.
    #[test]
    fn general_superop_matches_unitary_route() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let h = Matrix2::from_real([[1.0, 1.0], [1.0, -1.0]]).scale(C64::new(0.5f64.sqrt(), 0.0));
        let mut sh = [[ZERO; 4]; 4];
        for col in 0..4 {
            let out = h * Matrix2::unit(col >> 1, col & 1) * h.adjoint();
            for (row, srow) in sh.iter_mut().enumerate() {
                srow[col] = out.0[row >> 1][row & 1];
            }
        }
        let mut base = DenseState::zero_state(4, 14).unwrap();
        for (a, b) in [(0, 1), (2, 3), (1, 2), (0, 3)] {
            let u = crate::circuit::haar_unitary(&mut rng);
            base.apply_two_qubit(Some(&u), a, b, None, None).unwrap();
        }
        let v = crate::circuit::haar_unitary(&mut rng);
        let mut fused = base.clone();
        fused.apply_two_qubit(Some(&v), 1, 3, Some(&sh), None).unwrap();
        let mut single = base.clone();
        single.apply_two_qubit(Some(&v), 1, 3, None, None).unwrap();
        single.apply_single_qubit_superop(1, &sh).unwrap();
        let mut unitary = base;
        let hi = h.kron(&Matrix2::identity());
        unitary.apply_two_qubit(Some(&(hi * v)), 1, 3, None, None).unwrap();
        for r in 0..16 {
            for c in 0..16 {
                assert!((fused.entry(r, c) - unitary.entry(r, c)).norm() < 1e-12);
                assert!((single.entry(r, c) - unitary.entry(r, c)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn depth_zero_is_zero_state() {
        let d = CircuitDescriptor::new(
            GridGeometry::line(3).unwrap(),
            0,
            GateFamily::Haar2Q,
            NoiseSpec::amplitude_damping(0.1),
            0,
        );
        let p = evolve(&d).unwrap().distribution().unwrap();
        assert_eq!(p.probs()[0], 1.0);
    }

    #[test]
    fn bell_projector() {
        let gate = Clifford2::hadamard_a().then(&Clifford2::cnot());
        let layer = CircuitLayer {
            layer: 1,
            gates: vec![PlacedGate {
                layer: 1,
                index: 0,
                qubits: (0, 1),
                gate: Gate2::Clifford(gate),
            }],
            fired: vec![],
        };
        let c = Circuit::from_parts(2, NoiseSpec::none(), vec![layer]).unwrap();
        let s = evolve_circuit(&c, &DenseOptions::default()).unwrap();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((s.entry(i, j).norm() - 0.5).abs() < 1e-12);
        }
        let p = s.distribution().unwrap();
        assert!((p.probs()[0] - 0.5).abs() < 1e-12 && (p.probs()[3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn physical_state_after_noisy_haar() {
        let d = CircuitDescriptor::new(
            GridGeometry::line(6).unwrap(),
            6,
            GateFamily::Haar2Q,
            NoiseSpec::amplitude_damping(0.1),
            11,
        );
        let s = evolve(&d).unwrap();
        assert!((s.trace() - ONE).norm() < 1e-12);
        assert!(s.hermiticity_defect() < 1e-12);
        assert!(s.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn distribution_examples_and_cap() {
        let m = DenseState::maximally_mixed(3, 14).unwrap().distribution().unwrap();
        assert!(m.probs().iter().all(|&p| (p - 0.125).abs() < 1e-15));
        let z = DenseState::zero_state(2, 14).unwrap().distribution().unwrap();
        assert_eq!(z.probs(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(DenseState::zero_state(15, 14).unwrap_err().is_capacity());
        let mut bad = vec![ZERO; 4];
        bad[0] = C64::new(1.1, 0.0);
        bad[3] = C64::new(-0.1, 0.0);
        let bad = DenseState::from_matrix(1, &bad).unwrap();
        assert!(matches!(bad.distribution(), Err(Error::Integrity(_))));
    }
}

