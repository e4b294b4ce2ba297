use rand::Rng;
use serde::{Deserialize, Serialize};

use super::graph::{ball, coarse_grain, PatchGraph};
use super::lightcone::backward_lightcone;
use crate::circuit::{Circuit, CircuitDescriptor};
use crate::error::{Error, Result};
use crate::info::DistributionTable;
use crate::oracle::{evolve_circuit, DenseOptions, HeraldMode, InitialState};
use crate::rng::{Purpose, StreamKey};
use crate::stabilizer::{simulate_circuit, stabilizer_distribution};

/// Default limit on the width of a lightcone simulated densely.
pub const DEFAULT_DENSE_CAPACITY: usize = 14;

/// Largest full distribution the plan will tabulate.
const MAX_PRODUCT_QUBITS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Dense density matrix of the lightcone. Heralded noise follows the
    /// realization's herald record.
    Dense,
    /// Stabilizer tableau of the lightcone; Clifford gates and heralded or no
    /// noise only.
    Stabilizer,
}

/// One step of a sequential sampler: draw `targets` conditioned on `cond`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingStep {
    pub targets: Vec<usize>,
    pub cond: Vec<usize>,
}

/// An ordered factorization `prod_j P(targets_j | cond_j)` covering every
/// qubit once, with each `cond_j` drawn from earlier targets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingPlan {
    n: usize,
    steps: Vec<SamplingStep>,
}

impl SamplingPlan {
    pub fn new(n: usize, steps: Vec<SamplingStep>) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidArgument(format!("plans cover 1..=64 qubits, got {n}")));
        }
        let mut assigned = vec![false; n];
        for (j, s) in steps.iter().enumerate() {
            if s.cond.iter().any(|&q| q >= n || !assigned[q]) {
                return Err(Error::InvalidArgument(format!(
                    "step {j} conditions on a qubit not sampled earlier"
                )));
            }
            for &q in &s.targets {
                if q >= n || assigned[q] {
                    return Err(Error::InvalidArgument(format!(
                        "step {j} targets qubit {q} twice or out of range"
                    )));
                }
                assigned[q] = true;
            }
        }
        if assigned.iter().any(|a| !a) {
            return Err(Error::InvalidArgument("plan leaves qubits unsampled".into()));
        }
        Ok(Self { n, steps })
    }

    /// One step per patch with `cond = N'(X_j)`.
    pub fn from_patches(graph: &PatchGraph) -> Result<Self> {
        let n = graph.patches().iter().map(Vec::len).sum();
        let steps = (0..graph.len())
            .map(|j| SamplingStep {
                targets: graph.patches()[j].clone(),
                cond: graph.prior_neighbor_qubits(j),
            })
            .collect();
        Self::new(n, steps)
    }

    /// Bit-by-bit plan in vertex order with `cond = B_radius(v_i) ∩ v_{<i}`.
    pub fn from_balls(adjacency: &[Vec<usize>], radius: usize) -> Result<Self> {
        let steps = (0..adjacency.len())
            .map(|v| SamplingStep {
                targets: vec![v],
                cond: ball(adjacency, v, radius).into_iter().filter(|&u| u < v).collect(),
            })
            .collect();
        Self::new(adjacency.len(), steps)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> &[SamplingStep] {
        &self.steps
    }

    /// `P''` built from the marginals of a full distribution over qubits
    /// `0..n` in index order.
    pub fn product_from(&self, p: &DistributionTable) -> Result<DistributionTable> {
        if p.qubits() != (0..self.n).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument("expected a table over 0..n in order".into()));
        }
        let tables = self
            .steps
            .iter()
            .map(|s| StepTable::from_joint(s, &p.marginal(&joint_order(s))?))
            .collect::<Result<Vec<_>>>()?;
        self.product(&tables)
    }

    fn product(&self, tables: &[StepTable]) -> Result<DistributionTable> {
        if self.n > MAX_PRODUCT_QUBITS {
            return Err(Error::Capacity {
                what: "product distribution".into(),
                requested: self.n,
                limit: MAX_PRODUCT_QUBITS,
            });
        }
        let mut probs = vec![0.0; 1 << self.n];
        for (x, slot) in probs.iter_mut().enumerate() {
            let mut w = 1.0;
            for t in tables {
                w *= t.conditional_prob(self.n, x);
                if w == 0.0 {
                    break;
                }
            }
            *slot = w;
        }
        DistributionTable::from_weights((0..self.n).collect(), probs)
    }
}

fn joint_order(s: &SamplingStep) -> Vec<usize> {
    s.cond.iter().chain(&s.targets).copied().collect()
}

fn gather(n: usize, x: usize, qubits: &[usize]) -> usize {
    qubits.iter().fold(0, |acc, &q| acc << 1 | (x >> (n - 1 - q) & 1))
}

/// Joint table over `cond ++ targets`, indexed `c << |targets| | t`.
#[derive(Clone, Debug)]
struct StepTable {
    cond: Vec<usize>,
    targets: Vec<usize>,
    probs: Vec<f64>,
    cond_mass: Vec<f64>,
}

impl StepTable {
    fn from_joint(step: &SamplingStep, joint: &DistributionTable) -> Result<Self> {
        debug_assert_eq!(joint.qubits(), joint_order(step).as_slice());
        let t = step.targets.len();
        let cond_mass = joint.probs().chunks(1 << t).map(|c| c.iter().sum()).collect();
        Ok(Self {
            cond: step.cond.clone(),
            targets: step.targets.clone(),
            probs: joint.probs().to_vec(),
            cond_mass,
        })
    }

    /// `P(x_targets | x_cond)`; uniform where the condition has zero mass.
    fn conditional_prob(&self, n: usize, x: usize) -> f64 {
        let c = gather(n, x, &self.cond);
        let t = gather(n, x, &self.targets);
        let mass = self.cond_mass[c];
        if mass > 0.0 {
            self.probs[c << self.targets.len() | t] / mass
        } else {
            1.0 / (1usize << self.targets.len()) as f64
        }
    }

    fn conditional(&self, value: usize) -> Result<DistributionTable> {
        let t = self.targets.len();
        if value >= self.cond_mass.len() {
            return Err(Error::InvalidArgument(format!("condition value {value} out of range")));
        }
        let mass = self.cond_mass[value];
        if mass <= 0.0 {
            return Err(Error::ZeroProbability(format!(
                "{:?} = {value:b} has probability zero in the lightcone simulation",
                self.cond
            )));
        }
        let slice = &self.probs[value << t..(value + 1) << t];
        DistributionTable::from_weights(self.targets.clone(), slice.to_vec())
    }

    fn draw<R: Rng + ?Sized>(&self, n: usize, x: usize, rng: &mut R) -> Result<usize> {
        let t = self.targets.len();
        let c = gather(n, x, &self.cond);
        let mass = self.cond_mass[c];
        if mass <= 0.0 {
            return Err(Error::ZeroProbability(format!(
                "{:?} = {c:b} has probability zero in the lightcone simulation",
                self.cond
            )));
        }
        let slice = &self.probs[c << t..(c + 1) << t];
        let u = rng.random::<f64>() * mass;
        let mut acc = 0.0;
        let mut pick = 0;
        for (i, &p) in slice.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                pick = i;
                if u < acc {
                    break;
                }
            }
        }
        let mut out = x;
        for (pos, &q) in self.targets.iter().enumerate() {
            let bit = pick >> (t - 1 - pos) & 1;
            out |= bit << (n - 1 - q);
        }
        Ok(out)
    }
}

/// Exact output distribution of `circuit` on `region` (in that order),
/// computed from the region's backward lightcone only.
pub fn region_marginal(
    circuit: &Circuit,
    region: &[usize],
    backend: Backend,
    capacity: usize,
) -> Result<DistributionTable> {
    let cone = backward_lightcone(circuit, region, circuit.depth())?;
    let local: Vec<usize> = region
        .iter()
        .map(|&q| cone.local(q).expect("region lies in its own cone"))
        .collect();
    let table = match backend {
        Backend::Dense => {
            if cone.width() > capacity {
                return Err(Error::Capacity {
                    what: format!(
                        "lightcone of {} qubits (reduce d* or ell)",
                        region.len()
                    ),
                    requested: cone.width(),
                    limit: capacity,
                });
            }
            let options = DenseOptions {
                heralds: HeraldMode::Trajectory,
                initial: InitialState::Zero,
                max_qubits: capacity,
            };
            evolve_circuit(&cone.circuit, &options)?.distribution()?.marginal(&local)?
        }
        Backend::Stabilizer => stabilizer_distribution(&simulate_circuit(&cone.circuit)?, &local)?,
    };
    DistributionTable::new(region.to_vec(), table.probs().to_vec())
}

/// `P_{X | cond = value}` from a lightcone simulation of `X ∪ cond`.
pub fn patch_conditional(
    circuit: &Circuit,
    patch: &[usize],
    cond: &[usize],
    value: usize,
    backend: Backend,
    capacity: usize,
) -> Result<DistributionTable> {
    let step = SamplingStep {
        targets: patch.to_vec(),
        cond: cond.to_vec(),
    };
    let joint = region_marginal(circuit, &joint_order(&step), backend, capacity)?;
    StepTable::from_joint(&step, &joint)?.conditional(value)
}

/// Sequential sampler with one lightcone simulation per plan step, done once
/// at construction.
#[derive(Clone, Debug)]
pub struct PatchSampler {
    plan: SamplingPlan,
    tables: Vec<StepTable>,
    max_cone: usize,
}

impl PatchSampler {
    pub fn build(circuit: &Circuit, plan: SamplingPlan, backend: Backend, capacity: usize) -> Result<Self> {
        if plan.num_qubits() != circuit.num_qubits() {
            return Err(Error::InvalidArgument("plan and circuit sizes differ".into()));
        }
        let mut tables = Vec::with_capacity(plan.steps().len());
        let mut max_cone = 0;
        for s in plan.steps() {
            let region = joint_order(s);
            max_cone = max_cone.max(backward_lightcone(circuit, &region, circuit.depth())?.width());
            let joint = region_marginal(circuit, &region, backend, capacity)?;
            tables.push(StepTable::from_joint(s, &joint)?);
        }
        Ok(Self {
            plan,
            tables,
            max_cone,
        })
    }

    pub fn plan(&self) -> &SamplingPlan {
        &self.plan
    }

    /// Number of lightcone simulations performed.
    pub fn backend_invocations(&self) -> usize {
        self.tables.len()
    }

    /// Conditional evaluations per drawn sample.
    pub fn conditionals_per_sample(&self) -> usize {
        self.tables.len()
    }

    /// Widest lightcone simulated.
    pub fn max_cone_width(&self) -> usize {
        self.max_cone
    }

    pub fn conditional(&self, step: usize, value: usize) -> Result<DistributionTable> {
        self.tables
            .get(step)
            .ok_or_else(|| Error::InvalidArgument(format!("no step {step}")))?
            .conditional(value)
    }

    /// One sample; qubit `q` is bit `n-1-q` of the result.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        let n = self.plan.num_qubits();
        let mut x = 0;
        for t in &self.tables {
            x = t.draw(n, x, rng)?;
        }
        Ok(x)
    }

    /// `count` samples; sample `i` uses the stream `(seed, realization, 0, i)`.
    pub fn sample_many(&self, count: usize, seed: u64, realization: u64) -> Result<Vec<usize>> {
        (0..count)
            .map(|i| {
                let mut rng = StreamKey::new(seed, realization, 0, i as u64, Purpose::Sampler).rng();
                self.sample(&mut rng)
            })
            .collect()
    }

    /// The distribution the sampler draws from, from its own lightcone tables.
    pub fn distribution(&self) -> Result<DistributionTable> {
        self.plan.product(&self.tables)
    }
}

/// Truncates to the last `d_star` layers, coarse-grains with side `ell`, and
/// builds the patch sampler.
pub fn patch_sampler(
    descriptor: &CircuitDescriptor,
    ell: usize,
    d_star: usize,
    backend: Backend,
    capacity: usize,
) -> Result<PatchSampler> {
    let circuit = descriptor.truncate(d_star)?.realize()?;
    let graph = coarse_grain(&descriptor.geometry, ell)?;
    PatchSampler::build(&circuit, SamplingPlan::from_patches(&graph)?, backend, capacity)
}

pub fn patch_sample(
    descriptor: &CircuitDescriptor,
    ell: usize,
    d_star: usize,
    backend: Backend,
    seed: u64,
    count: usize,
) -> Result<Vec<usize>> {
    patch_sampler(descriptor, ell, d_star, backend, DEFAULT_DENSE_CAPACITY)?.sample_many(
        count,
        seed,
        descriptor.realization,
    )
}

/// Bit-by-bit sampling over a general interaction graph with balls of the
/// given radius as conditioning sets.
pub fn ball_patch_sample(
    circuit: &Circuit,
    adjacency: &[Vec<usize>],
    radius: usize,
    backend: Backend,
    seed: u64,
    count: usize,
) -> Result<Vec<usize>> {
    if adjacency.len() != circuit.num_qubits() {
        return Err(Error::InvalidArgument("graph and circuit sizes differ".into()));
    }
    for layer in circuit.layers() {
        for g in &layer.gates {
            if !adjacency[g.qubits.0].contains(&g.qubits.1) {
                return Err(Error::InvalidArgument(format!(
                    "gate on {:?} is not an edge of the graph",
                    g.qubits
                )));
            }
        }
    }
    let plan = SamplingPlan::from_balls(adjacency, radius)?;
    PatchSampler::build(circuit, plan, backend, DEFAULT_DENSE_CAPACITY)?.sample_many(count, seed, 0)
}

/// Formats a sample with qubits listed in `order`.
pub fn format_bits(x: usize, n: usize, order: &[usize]) -> String {
    order
        .iter()
        .map(|&q| if x >> (n - 1 - q) & 1 == 1 { '1' } else { '0' })
        .collect()
}
