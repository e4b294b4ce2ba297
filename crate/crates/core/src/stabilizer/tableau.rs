use crate::circuit::{Circuit, Gate2, NoiseKind};
use crate::error::{Error, Result};
use crate::info::DistributionTable;
use crate::stabilizer::{Clifford2, PauliString};

/// Largest target region for which [`conditional_distribution`] builds a
/// table.
pub const MAX_TABLE_QUBITS: usize = 26;

/// Generating set of a stabilizer group on `n` qubits. The state it
/// represents is the normalized projector onto the joint +1 eigenspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliTableau {
    n: usize,
    gens: Vec<PauliString>,
}

/// Removes one generator satisfying `hit`, multiplying it into every other
/// generator that satisfies `hit`. Returns the removed pivot.
fn eliminate(gens: &mut Vec<PauliString>, hit: impl Fn(&PauliString) -> bool) -> Option<PauliString> {
    let pos = gens.iter().position(&hit)?;
    let pivot = gens.remove(pos);
    for g in gens.iter_mut() {
        if hit(g) {
            g.mul_assign(&pivot);
        }
    }
    Some(pivot)
}

fn check_region(n: usize, region: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &q in region {
        if q >= n {
            return Err(Error::InvalidArgument(format!("qubit {q} out of range for n = {n}")));
        }
        if seen[q] {
            return Err(Error::InvalidArgument(format!("qubit {q} repeated")));
        }
        seen[q] = true;
    }
    Ok(())
}

/// GF(2) rank of bit rows.
fn gf2_rank(mut rows: Vec<Vec<u64>>) -> usize {
    let mut rank = 0;
    let width = rows.first().map_or(0, |r| r.len());
    for w in 0..width {
        for b in 0..64 {
            let bit = 1u64 << b;
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & bit != 0 {
                    for (a, b) in row.iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

impl PauliTableau {
    /// `{+Z_1, ..., +Z_n}`.
    pub fn init_zero_state(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("tableau needs at least one qubit".into()));
        }
        Ok(Self {
            n,
            gens: (0..n).map(|q| PauliString::single_z(n, q)).collect(),
        })
    }

    /// Empty generating set: the maximally mixed state.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("tableau needs at least one qubit".into()));
        }
        Ok(Self { n, gens: Vec::new() })
    }

    /// Validated construction: generators must commute pairwise, be
    /// independent, and not generate `-I`.
    pub fn from_generators(n: usize, gens: Vec<PauliString>) -> Result<Self> {
        let t = Self::from_generators_unchecked(n, gens)?;
        t.check_invariants()?;
        Ok(t)
    }

    /// Construction without the group checks, e.g. for corrupted inputs in
    /// negative tests. Qubit counts are still checked.
    pub fn from_generators_unchecked(n: usize, gens: Vec<PauliString>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("tableau needs at least one qubit".into()));
        }
        if let Some(g) = gens.iter().find(|g| g.num_qubits() != n) {
            return Err(Error::InvalidArgument(format!("generator {g} is not on {n} qubits")));
        }
        Ok(Self { n, gens })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn check_invariants(&self) -> Result<()> {
        for (i, a) in self.gens.iter().enumerate() {
            for b in &self.gens[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(Error::Integrity(format!("generators {a} and {b} anticommute")));
                }
            }
        }
        // Row-reduce over x|z with signs; a vanishing row exposes a dependency.
        let mut rows = self.gens.clone();
        let mut rank = 0;
        for q in 0..self.n {
            for use_x in [true, false] {
                let hit = |p: &PauliString| if use_x { p.x(q) } else { p.z(q) };
                let Some(p) = (rank..rows.len()).find(|&r| hit(&rows[r])) else {
                    continue;
                };
                rows.swap(rank, p);
                let pivot = rows[rank].clone();
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank && hit(row) {
                        row.mul_assign(&pivot);
                    }
                }
                rank += 1;
            }
        }
        if let Some(row) = rows[rank..].first() {
            return Err(Error::Integrity(if row.is_negative() {
                "-I is in the generated group".to_string()
            } else {
                "generators are not independent".to_string()
            }));
        }
        Ok(())
    }

    pub fn apply_clifford(&mut self, gate: &Clifford2, a: usize, b: usize) -> Result<()> {
        if a >= self.n || b >= self.n || a == b {
            return Err(Error::InvalidArgument(format!(
                "invalid qubit pair ({a}, {b}) for n = {}",
                self.n
            )));
        }
        for g in &mut self.gens {
            let local = g.local_bits(a, b);
            if local == 0 {
                continue;
            }
            let image = gate.conjugate(local);
            g.set_local_bits(a, b, image.bits);
            g.set_negative(g.is_negative() ^ image.negative);
        }
        Ok(())
    }

    /// Applies a circuit gate; only Clifford and identity gates are accepted.
    pub fn apply_gate(&mut self, gate: &Gate2, a: usize, b: usize) -> Result<()> {
        match gate {
            Gate2::Identity => Ok(()),
            Gate2::Clifford(c) => self.apply_clifford(c, a, b),
            Gate2::Unitary(_) => Err(Error::Unsupported(
                "stabilizer simulation needs Clifford gates".into(),
            )),
        }
    }

    // Generators of the subgroup acting as identity on qubit q.
    fn drop_qubit(&mut self, q: usize) {
        eliminate(&mut self.gens, |p| p.x(q));
        eliminate(&mut self.gens, |p| p.z(q));
    }

    pub fn apply_heralded_depolarizing(&mut self, q: usize, fired: bool) -> Result<()> {
        self.check_qubit(q)?;
        if fired {
            self.drop_qubit(q);
        }
        Ok(())
    }

    pub fn apply_heralded_reset(&mut self, q: usize, fired: bool) -> Result<()> {
        self.check_qubit(q)?;
        if fired {
            self.drop_qubit(q);
            self.gens.push(PauliString::single_z(self.n, q));
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::InvalidArgument(format!("qubit {q} out of range for n = {}", self.n)));
        }
        Ok(())
    }

    /// Generators of the subgroup whose elements contain only `I` and `Z`,
    /// found by row-reducing the x block.
    pub fn diagonal_subgroup(&self) -> Result<PauliTableau> {
        let mut rows = self.gens.clone();
        let mut rank = 0;
        for q in 0..self.n {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].x(q)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.x(q) {
                    row.mul_assign(&pivot);
                }
            }
            rank += 1;
        }
        let mut diag: Vec<PauliString> = rows.split_off(rank);
        // Reduce the z block too, so dependent generators surface as
        // sign-only rows.
        let mut zrank = 0;
        for q in 0..self.n {
            let Some(p) = (zrank..diag.len()).find(|&r| diag[r].z(q)) else {
                continue;
            };
            diag.swap(zrank, p);
            let pivot = diag[zrank].clone();
            for (r, row) in diag.iter_mut().enumerate() {
                if r != zrank && row.z(q) {
                    row.mul_assign(&pivot);
                }
            }
            zrank += 1;
        }
        if let Some(bad) = diag.iter().find(|g| g.is_identity_up_to_sign()) {
            return Err(Error::Integrity(if bad.is_negative() {
                "-I is in the generated group".to_string()
            } else {
                "generators are not independent".to_string()
            }));
        }
        Ok(PauliTableau {
            n: self.n,
            gens: diag,
        })
    }

    fn require_diagonal(&self) -> Result<()> {
        if self.gens.iter().any(|g| !g.is_diagonal()) {
            return Err(Error::InvalidArgument(
                "expected a diagonal (I/Z only) generating set".into(),
            ));
        }
        Ok(())
    }

    fn masked_z_rows(&self, mask: &[u64]) -> Vec<Vec<u64>> {
        self.gens
            .iter()
            .map(|g| g.z_words().iter().zip(mask).map(|(z, m)| z & m).collect())
            .collect()
    }

    fn region_mask(&self, region: &[usize]) -> Vec<u64> {
        let mut mask = vec![0u64; self.n.div_ceil(64)];
        for &q in region {
            mask[q / 64] |= 1 << (q % 64);
        }
        mask
    }

    /// Shannon entropy in bits of the computational-basis marginal on
    /// `region`, for a diagonal generating set: `|A|` minus the number of
    /// independent elements supported inside `A`.
    pub fn region_entropy(&self, region: &[usize]) -> Result<f64> {
        self.require_diagonal()?;
        check_region(self.n, region)?;
        let full = vec![u64::MAX; self.n.div_ceil(64)];
        let k = self.gens.len();
        if gf2_rank(self.masked_z_rows(&full)) != k {
            return Err(Error::Integrity("diagonal generators are dependent".into()));
        }
        let inside = self.region_mask(region);
        let outside: Vec<u64> = inside.iter().zip(&full).map(|(i, f)| !i & f).collect();
        let outside_rank = gf2_rank(self.masked_z_rows(&outside));
        Ok((region.len() + outside_rank) as f64 - k as f64)
    }
}

/// Free-function form of [`PauliTableau::region_entropy`].
pub fn region_entropy(diagonal: &PauliTableau, region: &[usize]) -> Result<f64> {
    diagonal.region_entropy(region)
}

/// `I(X:Z|Y)` in bits from a diagonal generating set. The value is a
/// non-negative integer; a negative result is reported as an integrity error.
pub fn stabilizer_cmi(diagonal: &PauliTableau, x: &[usize], y: &[usize], z: &[usize]) -> Result<f64> {
    let xy: Vec<usize> = x.iter().chain(y).copied().collect();
    let yz: Vec<usize> = y.iter().chain(z).copied().collect();
    let xyz: Vec<usize> = x.iter().chain(y).chain(z).copied().collect();
    check_region(diagonal.num_qubits(), &xyz)?;
    let value = diagonal.region_entropy(&xy)? + diagonal.region_entropy(&yz)?
        - diagonal.region_entropy(&xyz)?
        - diagonal.region_entropy(y)?;
    if value < 0.0 {
        return Err(Error::Integrity(format!("negative stabilizer CMI {value}")));
    }
    Ok(value)
}

/// Exact conditional distribution of `target` given that `cond[i]` has bit
/// `value >> (cond.len()-1-i) & 1`. The support is an affine subspace, so
/// every entry is `0` or `2^-f`.
pub fn conditional_distribution(
    tableau: &PauliTableau,
    target: &[usize],
    cond: &[usize],
    value: usize,
) -> Result<DistributionTable> {
    let n = tableau.num_qubits();
    let region: Vec<usize> = target.iter().chain(cond).copied().collect();
    check_region(n, &region)?;
    if target.len() > MAX_TABLE_QUBITS {
        return Err(Error::Capacity {
            what: "stabilizer conditional table qubits".into(),
            requested: target.len(),
            limit: MAX_TABLE_QUBITS,
        });
    }
    let diag = tableau.diagonal_subgroup()?;
    // Elements of the diagonal group supported inside target ∪ cond.
    let mut rows = diag.gens;
    let mut inside = vec![false; n];
    for &q in &region {
        inside[q] = true;
    }
    for q in (0..n).filter(|&q| !inside[q]) {
        eliminate(&mut rows, |p| p.z(q));
    }
    // Each row is a parity constraint sum_q z_q b_q = sign on the bits.
    let mut eqs: Vec<(u64, bool)> = rows
        .iter()
        .map(|g| {
            let mut mask = 0u64;
            for (i, &q) in target.iter().enumerate() {
                if g.z(q) {
                    mask |= 1 << i;
                }
            }
            let mut rhs = g.is_negative();
            for (i, &q) in cond.iter().enumerate() {
                if g.z(q) && (value >> (cond.len() - 1 - i)) & 1 == 1 {
                    rhs = !rhs;
                }
            }
            (mask, rhs)
        })
        .collect();
    let m = target.len();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..m {
        let bit = 1u64 << col;
        let Some(p) = (rank..eqs.len()).find(|&r| eqs[r].0 & bit != 0) else {
            continue;
        };
        eqs.swap(rank, p);
        let pivot = eqs[rank];
        for (r, e) in eqs.iter_mut().enumerate() {
            if r != rank && e.0 & bit != 0 {
                e.0 ^= pivot.0;
                e.1 ^= pivot.1;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if eqs[rank..].iter().any(|e| e.1) {
        return Err(Error::ZeroProbability(format!(
            "condition {cond:?} = {value:b} is outside the support"
        )));
    }
    let free: Vec<usize> = (0..m).filter(|c| !pivots.contains(c)).collect();
    let weight = 0.5f64.powi(free.len() as i32);
    let mut probs = vec![0.0; 1 << m];
    for assignment in 0..1usize << free.len() {
        let mut bits = 0u64;
        for (k, &c) in free.iter().enumerate() {
            if assignment >> k & 1 == 1 {
                bits |= 1 << c;
            }
        }
        for (e, &c) in eqs[..rank].iter().zip(&pivots) {
            let others = (e.0 & bits & !(1 << c)).count_ones() & 1 == 1;
            if e.1 ^ others {
                bits |= 1 << c;
            }
        }
        // Target position i is table bit m-1-i.
        let index = (0..m).fold(0usize, |acc, i| (acc << 1) | ((bits >> i) & 1) as usize);
        probs[index] = weight;
    }
    DistributionTable::new(target.to_vec(), probs)
}

/// Output distribution on `qubits`.
pub fn stabilizer_distribution(tableau: &PauliTableau, qubits: &[usize]) -> Result<DistributionTable> {
    conditional_distribution(tableau, qubits, &[], 0)
}

/// Runs a Clifford circuit with heralded noise along its herald record.
/// Non-heralded noise is accepted only at rate zero.
pub fn simulate_circuit(circuit: &Circuit) -> Result<PauliTableau> {
    let mut t = PauliTableau::init_zero_state(circuit.num_qubits())?;
    let noise = circuit.noise();
    let heralded = match noise.kind {
        NoiseKind::None => false,
        NoiseKind::HeraldedReset | NoiseKind::HeraldedDepolarizing => true,
        NoiseKind::AmplitudeDamping | NoiseKind::Depolarizing if noise.gamma == 0.0 => false,
        _ => {
            return Err(Error::Unsupported(format!(
                "stabilizer simulation cannot apply {:?} noise",
                noise.kind
            )))
        }
    };
    for layer in circuit.layers() {
        for g in &layer.gates {
            t.apply_gate(&g.gate, g.qubits.0, g.qubits.1)?;
        }
        if heralded {
            for (q, &fired) in layer.fired.iter().enumerate() {
                match noise.kind {
                    NoiseKind::HeraldedReset => t.apply_heralded_reset(q, fired)?,
                    _ => t.apply_heralded_depolarizing(q, fired)?,
                }
            }
        }
    }
    Ok(t)
}
