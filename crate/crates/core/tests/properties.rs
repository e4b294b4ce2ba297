use proptest::prelude::*;

use patchsim::circuit::{channel_ptm, contraction_coefficient, CircuitDescriptor, GateFamily, GridGeometry, NoiseSpec};
use patchsim::info::{exact_cmi, markov_residual, pinsker_bound, tv_distance, DistributionTable};
use patchsim::mpdo::MpdoState;
use patchsim::oracle::{evolve_circuit, DenseOptions, HeraldMode};
use patchsim::stabilizer::{simulate_circuit, stabilizer_cmi};

fn table(weights: Vec<f64>) -> DistributionTable {
    let n = weights.len().trailing_zeros() as usize;
    DistributionTable::from_weights((0..n).collect(), weights).unwrap()
}

fn noise() -> impl Strategy<Value = NoiseSpec> {
    (0usize..4, 0.0f64..=1.0).prop_map(|(k, g)| match k {
        0 => NoiseSpec::amplitude_damping(g),
        1 => NoiseSpec::depolarizing(g),
        2 => NoiseSpec::heralded_reset(g),
        _ => NoiseSpec::heralded_depolarizing(g),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cmi_nonnegative_and_above_pinsker(w in prop::collection::vec(0.0f64..1.0, 32)) {
        prop_assume!(w.iter().sum::<f64>() > 1e-3);
        let p = table(w);
        let (x, y, z) = ([0usize, 1], [2usize], [3usize, 4]);
        let cmi = exact_cmi(&p, &x, &y, &z).unwrap();
        prop_assert!(cmi >= -1e-12);
        let residual = markov_residual(&p, &x, &y, &z).unwrap();
        prop_assert!(cmi >= pinsker_bound(residual) - 1e-12);
    }

    #[test]
    fn l1_distance_is_a_metric(a in prop::collection::vec(0.01f64..1.0, 8), b in prop::collection::vec(0.01f64..1.0, 8)) {
        let (p, q) = (table(a), table(b));
        let d = tv_distance(&p, &q).unwrap();
        prop_assert!((d - tv_distance(&q, &p).unwrap()).abs() < 1e-15);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&d));
        prop_assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn ptm_preserves_trace_and_contracts(n in noise()) {
        let t = channel_ptm(&n);
        for (a, b) in t.0[0].iter().zip([1.0, 0.0, 0.0, 0.0]) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let c = contraction_coefficient(&n);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
        if n.gamma > 1e-9 {
            prop_assert!(c < 1.0);
        }
    }

    #[test]
    fn stabilizer_cmi_is_integer_and_matches_dense(seed in 0u64..1000, depth in 0usize..6, heralded_reset in any::<bool>()) {
        let noise = if heralded_reset { NoiseSpec::heralded_reset(0.25) } else { NoiseSpec::heralded_depolarizing(0.25) };
        let d = CircuitDescriptor::new(GridGeometry::line(6).unwrap(), depth, GateFamily::Clifford2Q, noise, seed);
        let c = d.realize().unwrap();
        let diag = simulate_circuit(&c).unwrap().diagonal_subgroup().unwrap();
        let (x, y, z) = ([0usize, 1], [2usize, 3], [4usize, 5]);
        let s = stabilizer_cmi(&diag, &x, &y, &z).unwrap();
        prop_assert!(s >= 0.0 && s.fract() == 0.0);
        let options = DenseOptions { heralds: HeraldMode::Trajectory, ..DenseOptions::default() };
        let p = evolve_circuit(&c, &options).unwrap().distribution().unwrap();
        prop_assert!((exact_cmi(&p, &x, &y, &z).unwrap() - s).abs() < 1e-10);
    }

    #[test]
    fn dense_state_stays_physical(seed in 0u64..1000, depth in 0usize..5, n in noise()) {
        let d = CircuitDescriptor::new(GridGeometry::line(4).unwrap(), depth, GateFamily::Haar2Q, n, seed);
        let rho = patchsim::oracle::evolve(&d).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.hermiticity_defect() < 1e-12);
        prop_assert!(rho.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn untruncated_mpdo_matches_dense(seed in 0u64..1000, depth in 0usize..6, gamma in 0.0f64..0.5) {
        let d = CircuitDescriptor::new(GridGeometry::line(5).unwrap(), depth, GateFamily::Haar2Q, NoiseSpec::depolarizing(gamma), seed);
        let p = patchsim::oracle::evolve(&d).unwrap().distribution().unwrap();
        let q = MpdoState::evolve(&d.realize().unwrap(), 256).unwrap().distribution().unwrap();
        for (a, b) in p.probs().iter().zip(q.probs()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
