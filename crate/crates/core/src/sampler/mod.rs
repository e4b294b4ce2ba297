//! Patching sampler: coarse-grain the lattice, then sample patch by patch
//! from conditionals computed on lightcone-restricted sub-circuits.

mod graph;
mod lightcone;
mod patching;
mod prop1;

pub use graph::{ball, coarse_grain, PatchGraph};
pub use lightcone::{backward_lightcone, LightconeRegion};
pub use patching::{
    ball_patch_sample, format_bits, patch_conditional, patch_sample, patch_sampler, region_marginal,
    Backend, PatchSampler, SamplingPlan, SamplingStep, DEFAULT_DENSE_CAPACITY,
};
pub use prop1::{verify_prop1, verify_prop1_distribution, Prop1Report};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{
        Circuit, CircuitDescriptor, CircuitLayer, Gate2, GateFamily, GridGeometry, NoiseSpec,
        PlacedGate,
    };
    use crate::info::{tv_distance, DistributionTable};
    use crate::oracle::{self, evolve_circuit, DenseOptions, HeraldMode};
    use crate::stabilizer::Clifford2;

    fn haar(n: usize, d: usize, gamma: f64, seed: u64) -> CircuitDescriptor {
        CircuitDescriptor::new(
            GridGeometry::line(n).unwrap(),
            d,
            GateFamily::Haar2Q,
            NoiseSpec::amplitude_damping(gamma),
            seed,
        )
    }

    #[test]
    fn depth_zero_conditional_is_zero() {
        let c = haar(6, 0, 0.1, 1).realize().unwrap();
        for value in 0..4 {
            let t = patch_conditional(&c, &[2, 3], &[0, 1], value, Backend::Dense, 14);
            // Only the all-zero condition has support at depth 0.
            if value == 0 {
                assert_eq!(t.unwrap().probs(), &[1.0, 0.0, 0.0, 0.0]);
            } else {
                assert!(matches!(t, Err(crate::Error::ZeroProbability(_))));
            }
        }
        let samples = patch_sample(&haar(6, 0, 0.0, 1), 2, 0, Backend::Dense, 9, 20).unwrap();
        assert!(samples.iter().all(|&x| x == 0));
    }

    #[test]
    fn identity_gates_give_independent_conditionals() {
        let d = CircuitDescriptor::new(
            GridGeometry::line(6).unwrap(),
            4,
            GateFamily::Identity2Q,
            NoiseSpec::amplitude_damping(0.3),
            2,
        );
        let c = d.realize().unwrap();
        let first = patch_conditional(&c, &[2, 3], &[1], 0, Backend::Dense, 14).unwrap();
        assert_eq!(first.probs(), &[1.0, 0.0, 0.0, 0.0]);
    }

    fn bell_pairs(noise: NoiseSpec, fired: Vec<bool>) -> Circuit {
        let bell = Clifford2::hadamard_a().then(&Clifford2::cnot());
        let gates = [(0, 1), (2, 3)]
            .iter()
            .enumerate()
            .map(|(index, &qubits)| PlacedGate {
                layer: 1,
                index,
                qubits,
                gate: Gate2::Clifford(bell),
            })
            .collect();
        let cross = PlacedGate {
            layer: 2,
            index: 0,
            qubits: (1, 2),
            gate: Gate2::Clifford(Clifford2::cnot()),
        };
        let layers = vec![
            CircuitLayer {
                layer: 1,
                gates,
                fired: vec![false; 4],
            },
            CircuitLayer {
                layer: 2,
                gates: vec![cross],
                fired,
            },
        ];
        Circuit::from_parts(4, noise, layers).unwrap()
    }

    #[test]
    fn stabilizer_backend_matches_dense_on_bell_pairs() {
        for fired in [vec![false; 4], vec![false, false, true, false], vec![true, false, false, true]] {
            let c = bell_pairs(NoiseSpec::heralded_reset(0.5), fired);
            for value in 0..4 {
                let s = patch_conditional(&c, &[2, 3], &[0, 1], value, Backend::Stabilizer, 14);
                let d = patch_conditional(&c, &[2, 3], &[0, 1], value, Backend::Dense, 14);
                match (s, d) {
                    (Ok(s), Ok(d)) => {
                        for (a, b) in s.probs().iter().zip(d.probs()) {
                            assert!((a - b).abs() < 1e-12);
                        }
                    }
                    (Err(crate::Error::ZeroProbability(_)), Err(crate::Error::ZeroProbability(_))) => {}
                    other => panic!("backends disagree: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn single_patch_full_depth_is_exact() {
        let d = haar(6, 5, 0.2, 4);
        let s = patch_sampler(&d, 6, 5, Backend::Dense, 14).unwrap();
        assert_eq!(s.backend_invocations(), 1);
        let p = oracle::evolve(&d).unwrap().distribution().unwrap();
        assert!(tv_distance(&p, &s.distribution().unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn lightcone_tables_match_full_oracle_product() {
        let d = haar(8, 6, 0.2, 5);
        let s = patch_sampler(&d, 2, 6, Backend::Dense, 14).unwrap();
        assert_eq!(s.backend_invocations(), 4);
        assert_eq!(s.conditionals_per_sample(), 4);
        let p = oracle::evolve(&d).unwrap().distribution().unwrap();
        let graph = coarse_grain(&d.geometry, 2).unwrap();
        let want = SamplingPlan::from_patches(&graph).unwrap().product_from(&p).unwrap();
        assert!(tv_distance(&want, &s.distribution().unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn truncation_keeps_sampler_on_last_layers() {
        let d = haar(6, 6, 0.2, 6);
        let s = patch_sampler(&d, 6, 3, Backend::Dense, 14).unwrap();
        let p = oracle::evolve(&d.truncate(3).unwrap()).unwrap().distribution().unwrap();
        assert!(tv_distance(&p, &s.distribution().unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn capacity_is_enforced() {
        let d = haar(12, 6, 0.1, 7);
        let err = patch_sampler(&d, 2, 6, Backend::Dense, 6).unwrap_err();
        assert!(err.is_capacity());
    }

    #[test]
    fn ball_sampler_on_star_with_covering_radius_is_exact() {
        let adj = vec![vec![1, 2, 3, 4], vec![0], vec![0], vec![0], vec![0]];
        let layer = |t: usize, leaf: usize, u: crate::linalg::Matrix4| CircuitLayer {
            layer: t,
            gates: vec![PlacedGate {
                layer: t,
                index: 0,
                qubits: (0, leaf),
                gate: Gate2::Unitary(u),
            }],
            fired: vec![],
        };
        let mut rng = crate::rng::StreamKey::new(1, 0, 0, 0, crate::rng::Purpose::Instance).rng();
        let layers = (1..=4)
            .map(|t| layer(t, t, crate::circuit::haar_unitary(&mut rng)))
            .collect();
        let c = Circuit::from_parts(5, NoiseSpec::amplitude_damping(0.1), layers).unwrap();
        let plan = SamplingPlan::from_balls(&adj, 2).unwrap();
        let s = PatchSampler::build(&c, plan, Backend::Dense, 14).unwrap();
        let p = evolve_circuit(&c, &DenseOptions::default()).unwrap().distribution().unwrap();
        assert!(tv_distance(&p, &s.distribution().unwrap()).unwrap() < 1e-12);
        let x = ball_patch_sample(&c, &adj, 2, Backend::Dense, 3, 5).unwrap();
        assert_eq!(x.len(), 5);
        let zero = Circuit::from_parts(5, NoiseSpec::none(), vec![]).unwrap();
        assert!(ball_patch_sample(&zero, &adj, 1, Backend::Dense, 3, 5).unwrap().iter().all(|&x| x == 0));
    }

    #[test]
    fn ball_plan_on_path_conditions_on_preceding_radius() {
        let adj: Vec<Vec<usize>> = (0..5)
            .map(|v: usize| [v.wrapping_sub(1), v + 1].into_iter().filter(|&u| u < 5).collect())
            .collect();
        let plan = SamplingPlan::from_balls(&adj, 2).unwrap();
        assert_eq!(plan.steps()[4].cond, vec![2, 3]);
        assert_eq!(plan.steps()[1].cond, vec![0]);
    }

    #[test]
    fn prop1_trivial_cases() {
        let product = DistributionTable::one_hot((0..6).collect(), 0);
        let g = coarse_grain(&GridGeometry::line(6).unwrap(), 2).unwrap();
        let r = verify_prop1_distribution(&product, &g).unwrap();
        assert_eq!((r.lhs, r.bound), (0.0, 0.0));
        let single = coarse_grain(&GridGeometry::line(6).unwrap(), 6).unwrap();
        let r = verify_prop1(&haar(6, 4, 0.1, 3), 6).unwrap();
        assert!(r.lhs < 1e-12 && r.holds);
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn heralded_dense_backend_uses_trajectory() {
        let d = CircuitDescriptor::new(
            GridGeometry::line(6).unwrap(),
            4,
            GateFamily::Clifford2Q,
            NoiseSpec::heralded_reset(0.3),
            8,
        );
        let c = d.realize().unwrap();
        let region = [2, 3];
        let dense = region_marginal(&c, &region, Backend::Dense, 14).unwrap();
        let stab = region_marginal(&c, &region, Backend::Stabilizer, 14).unwrap();
        assert_eq!(dense.probs().len(), stab.probs().len());
        for (a, b) in dense.probs().iter().zip(stab.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
        let options = DenseOptions {
            heralds: HeraldMode::Trajectory,
            ..DenseOptions::default()
        };
        let full = evolve_circuit(&c, &options).unwrap().distribution().unwrap();
        let m = full.marginal(&region).unwrap();
        assert!(tv_distance(&m, &dense).unwrap() < 1e-12);
    }
}
