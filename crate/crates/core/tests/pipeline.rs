use std::io::BufReader;

use patchsim::circuit::{CircuitDescriptor, GateFamily, GridGeometry, NoiseSpec};
use patchsim::experiments::{
    run_cmi_scan, run_mpoee_bench, run_patch_sample, run_validate, write_csv, ExperimentConfig, ExperimentKind,
};
use patchsim::info::tv_distance;
use patchsim::mpdo::MpdoState;
use patchsim::sampler::{coarse_grain, patch_sampler, Backend, SamplingPlan};

#[test]
fn descriptor_json_round_trip_reproduces_circuit() {
    let d = CircuitDescriptor::new(
        GridGeometry::square(4).unwrap(),
        5,
        GateFamily::Clifford2Q,
        NoiseSpec::heralded_reset(0.2),
        42,
    )
    .with_realization(3);
    let back = CircuitDescriptor::from_json(&d.to_json()).unwrap();
    assert_eq!(back, d);
    let (a, b) = (d.realize().unwrap(), back.realize().unwrap());
    assert_eq!(a.herald_record(), b.herald_record());
    assert_eq!(a.gate_count(), b.gate_count());
}

#[test]
fn config_from_json_drives_a_scan() {
    let text = r#"{
        "experiment": "cmi_scan",
        "descriptor": {
            "geometry": {"dims": [8]},
            "depth": 4,
            "gate_family": "haar2q",
            "noise": {"kind": "amplitude_damping", "gamma": 0.1},
            "seed": 9
        },
        "ells": [1, 2, 3],
        "realizations": 3
    }"#;
    let config = ExperimentConfig::from_json(text).unwrap();
    let rows = run_cmi_scan(&config).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.model == "dense" && r.mean_cmi >= -1e-12));
    let mut a = Vec::new();
    write_csv(&rows, &mut a).unwrap();
    let mut b = Vec::new();
    write_csv(&run_cmi_scan(&config).unwrap(), &mut b).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("model,n,d,gamma,ell,mean_cmi,stderr,realizations\n"));
}

#[test]
fn unknown_config_fields_are_rejected() {
    let text = r#"{"experiment":"cmi_scan","descriptor":{"geometry":{"dims":[4]},"depth":1,
        "gate_family":"haar2q","noise":{"kind":"none"},"seed":1},"realisations":3}"#;
    assert!(ExperimentConfig::from_json(text).is_err());
}

#[test]
fn thread_count_does_not_change_results() {
    let d = CircuitDescriptor::new(
        GridGeometry::line(8).unwrap(),
        4,
        GateFamily::Haar2Q,
        NoiseSpec::amplitude_damping(0.2),
        5,
    );
    let mut c = ExperimentConfig::new(ExperimentKind::CmiScan, d);
    c.ells = vec![1, 2];
    c.depths = vec![2, 4];
    c.realizations = 5;
    c.threads = Some(1);
    let one = run_cmi_scan(&c).unwrap();
    c.threads = Some(3);
    assert_eq!(one, run_cmi_scan(&c).unwrap());
}

#[test]
fn mpoee_bench_reports_central_cut() {
    let d = CircuitDescriptor::new(
        GridGeometry::line(6).unwrap(),
        4,
        GateFamily::Haar2Q,
        NoiseSpec::amplitude_damping(0.1),
        1,
    );
    let mut c = ExperimentConfig::new(ExperimentKind::MpoeeBench, d);
    c.depths = vec![1, 2, 4];
    c.chis = vec![16, 64];
    let rows = run_mpoee_bench(&c).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.cut == 2 && r.mpoee >= 0.0));
    // chi = 64 is exact for 6 sites; 16 is truncated at most at the centre.
    for (lo, hi) in rows[..3].iter().zip(&rows[3..]) {
        assert!(hi.mpoee >= lo.mpoee - 1e-9);
    }
}

#[test]
fn patch_sample_matches_sampler_distribution_counts() {
    let d = CircuitDescriptor::new(
        GridGeometry::line(6).unwrap(),
        4,
        GateFamily::Haar2Q,
        NoiseSpec::amplitude_damping(0.2),
        8,
    );
    let mut c = ExperimentConfig::new(ExperimentKind::PatchSample, d.clone());
    c.ells = vec![2];
    c.samples = 20_000;
    let out = run_patch_sample(&c).unwrap();
    let mut counts = vec![0u64; 64];
    for &x in &out.samples {
        counts[x] += 1;
    }
    let p = patchsim::oracle::evolve(&d).unwrap().distribution().unwrap();
    let graph = coarse_grain(&d.geometry, 2).unwrap();
    let expected = SamplingPlan::from_patches(&graph).unwrap().product_from(&p).unwrap();
    let test = patchsim::stats::chi_square_gof(&counts, expected.probs(), 5.0).unwrap();
    assert!(test.p_value > 1e-4, "{test:?}");
    let sampler = patch_sampler(&d, 2, 4, Backend::Dense, 14).unwrap();
    assert!(tv_distance(&sampler.distribution().unwrap(), &expected).unwrap() < 1e-10);
}

#[test]
fn checkpoint_round_trip_through_a_file() {
    let d = CircuitDescriptor::new(
        GridGeometry::line(5).unwrap(),
        3,
        GateFamily::Haar2Q,
        NoiseSpec::amplitude_damping(0.1),
        2,
    );
    let state = patchsim::mpdo::evolve(&d, 32).unwrap();
    let mut file = tempfile::tempfile().unwrap();
    state.write_checkpoint(&mut file).unwrap();
    use std::io::{Seek, SeekFrom};
    file.seek(SeekFrom::Start(0)).unwrap();
    let back = MpdoState::read_checkpoint(BufReader::new(file)).unwrap();
    let (p, q) = (state.distribution().unwrap(), back.distribution().unwrap());
    assert!(tv_distance(&p, &q).unwrap() < 1e-14);
}

fn validate_config(corrupt: bool) -> ExperimentConfig {
    let d = CircuitDescriptor::new(GridGeometry::line(4).unwrap(), 1, GateFamily::Haar2Q, NoiseSpec::none(), 2024);
    let mut c = ExperimentConfig::new(ExperimentKind::Validate, d);
    c.corrupt_tableau = corrupt;
    c
}

// Every suite passes except the decay-rate comparison in lemma6_decay: the
// measured rate is more than 3x the contraction-coefficient prediction
// (see the decisions ledger). The upper bound itself holds.
#[test]
fn validate_suites_on_defaults() {
    let report = run_validate(&validate_config(false)).unwrap();
    for suite in &report.suites {
        let failed: Vec<_> = suite.checks.iter().filter(|c| !c.passed).map(|c| &c.summary).collect();
        if suite.suite == "lemma6_decay" {
            let check = &suite.checks[0];
            assert!(check.metrics["slope"] < 0.0);
            assert!(check.metrics["rate_ratio"] > 3.0, "{}", check.summary);
            assert!(check.cases.iter().all(|c| c.passed), "bound violated: {}", check.summary);
        } else {
            assert!(suite.passed, "{}: {failed:?}", suite.suite);
        }
    }
    assert_eq!(report.suites.len(), 5);
}

#[test]
fn corrupted_tableau_fails_validation() {
    let report = run_validate(&validate_config(true)).unwrap();
    assert!(!report.passed);
    let stab = report.suites.iter().find(|s| s.suite == "cmi_nonneg_stab").unwrap();
    assert!(!stab.passed);
    let corrupted = stab.checks.iter().find(|c| c.name == "corrupted_tableau").unwrap();
    assert!(corrupted.summary.contains("integrity"), "{}", corrupted.summary);
}
