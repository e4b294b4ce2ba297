use rand::Rng;

use super::state::{MpdoState, NEGATIVITY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{C64, ONE};
use crate::rng::{Purpose, StreamKey};
use crate::stats::mean_stderr;

/// Conditionals whose normalization falls below this are redrawn.
const UNDERFLOW: f64 = 1e-300;
const MAX_REDRAWS: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Most negative conditional weight that was clamped to zero.
    pub worst_negativity: f64,
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }
}

/// Sequential sampler for the marginal on an ordered region.
struct RegionChain<'a> {
    state: &'a MpdoState,
    region: Vec<usize>,
    in_region: Vec<bool>,
    start_env: Vec<C64>,
    right: Vec<Vec<C64>>,
}

impl<'a> RegionChain<'a> {
    fn new(state: &'a MpdoState, region: &[usize]) -> Result<Self> {
        let n = state.num_sites();
        let mut region = region.to_vec();
        region.sort_unstable();
        region.dedup();
        if region.iter().any(|&q| q >= n) {
            return Err(Error::InvalidArgument("region site out of range".into()));
        }
        let mut in_region = vec![false; n];
        for &q in &region {
            in_region[q] = true;
        }
        let right = state.traced_right_envs();
        let mut start_env = vec![ONE];
        if let Some(&first) = region.first() {
            for k in 0..first {
                start_env = state.site_contract(k, &start_env, None);
            }
        }
        Ok(Self {
            state,
            region,
            in_region,
            start_env,
            right,
        })
    }

    /// One draw: returns the accumulated conditional entropies in bits, or
    /// `None` if a conditional normalization underflowed.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, worst: &mut f64) -> Option<f64> {
        let Some(&first) = self.region.first() else {
            return Some(0.0);
        };
        let last = *self.region.last().expect("nonempty");
        let mut env = self.start_env.clone();
        let mut h = 0.0;
        for k in first..=last {
            if !self.in_region[k] {
                env = self.state.site_contract(k, &env, None);
                continue;
            }
            let e0 = self.state.site_contract(k, &env, Some(false));
            let e1 = self.state.site_contract(k, &env, Some(true));
            let dot = |e: &[C64]| -> f64 {
                e.iter().zip(&self.right[k + 1]).map(|(a, b)| a * b).sum::<C64>().re
            };
            let (mut p0, mut p1) = (dot(&e0), dot(&e1));
            let total = p0.abs() + p1.abs();
            if !(total > UNDERFLOW) {
                return None;
            }
            for p in [&mut p0, &mut p1] {
                if *p < 0.0 {
                    *worst = worst.min(*p / total);
                    *p = 0.0;
                }
            }
            let norm = p0 + p1;
            if !(norm > UNDERFLOW) {
                return None;
            }
            let q1 = p1 / norm;
            h += binary_entropy(q1);
            let bit = rng.random::<f64>() < q1;
            env = if bit { e1 } else { e0 };
            let scale = if bit { p1 } else { p0 };
            for v in &mut env {
                *v /= scale;
            }
        }
        Some(h)
    }
}

impl MpdoState {
    /// Per-sample chain-rule entropies of the region marginal, one value per
    /// sample. Sample `i` uses the stream `(seed, 0, 0, i)`, so different
    /// regions evaluated with the same seed share random numbers.
    pub fn mc_entropy_samples(&self, region: &[usize], samples: usize, seed: u64) -> Result<(Vec<f64>, f64)> {
        if samples == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        let chain = RegionChain::new(self, region)?;
        let mut worst = 0.0f64;
        let mut out = Vec::with_capacity(samples);
        for i in 0..samples {
            let mut value = None;
            for attempt in 0..MAX_REDRAWS {
                let mut rng = StreamKey::new(seed, attempt, 0, i as u64, Purpose::MonteCarlo).rng();
                value = chain.draw(&mut rng, &mut worst);
                if value.is_some() {
                    break;
                }
            }
            out.push(value.ok_or_else(|| Error::Numerical {
                site: chain.region[0],
                reason: "conditional normalization underflow on every redraw".into(),
            })?);
        }
        if worst < -NEGATIVITY_TOL {
            return Err(Error::Integrity(format!(
                "relative conditional weight {worst} is below the clamping tolerance"
            )));
        }
        Ok((out, worst))
    }

    /// Monte-Carlo estimate of `H(region)` in bits.
    pub fn mc_entropy(&self, region: &[usize], samples: usize, seed: u64) -> Result<McEstimate> {
        let (values, worst) = self.mc_entropy_samples(region, samples, seed)?;
        let (mean, stderr) = mean_stderr(&values);
        Ok(McEstimate {
            mean,
            stderr,
            samples,
            worst_negativity: worst,
        })
    }

    /// Monte-Carlo estimate of `I(X:Z|Y)`. The four entropies share random
    /// streams and the standard error is taken over per-sample combinations.
    pub fn mc_cmi(
        &self,
        x: &[usize],
        y: &[usize],
        z: &[usize],
        samples: usize,
        seed: u64,
    ) -> Result<McEstimate> {
        let mut seen = vec![false; self.num_sites()];
        for &q in x.iter().chain(y).chain(z) {
            if q >= seen.len() || seen[q] {
                return Err(Error::InvalidArgument(format!(
                    "regions overlap or leave the chain at site {q}"
                )));
            }
            seen[q] = true;
        }
        let cat = |a: &[usize], b: &[usize]| -> Vec<usize> { a.iter().chain(b).copied().collect() };
        let xy = cat(x, y);
        let yz = cat(y, z);
        let xyz = cat(&xy, z);
        let mut worst = 0.0f64;
        let mut run = |r: &[usize]| -> Result<Vec<f64>> {
            let (v, w) = self.mc_entropy_samples(r, samples, seed)?;
            worst = worst.min(w);
            Ok(v)
        };
        let (hxy, hyz, hxyz, hy) = (run(&xy)?, run(&yz)?, run(&xyz)?, run(y)?);
        let per: Vec<f64> = (0..samples).map(|i| hxy[i] + hyz[i] - hxyz[i] - hy[i]).collect();
        let (mean, stderr) = mean_stderr(&per);
        Ok(McEstimate {
            mean,
            stderr,
            samples,
            worst_negativity: worst,
        })
    }
}
