use serde::Serialize;

use super::checks::{self, CheckReport};
use super::ExperimentConfig;
use crate::circuit::NoiseSpec;
use crate::error::Result;

pub const SUITES: [&str; 5] = ["oracle_equivalence", "pinsker", "prop1", "lemma6_decay", "cmi_nonneg_stab"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidateReport {
    pub passed: bool,
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
}

fn run_suite(name: &str, config: &ExperimentConfig, seed: u64, threads: usize) -> Vec<CheckReport> {
    let results: Vec<(&str, Result<CheckReport>)> = match name {
        "oracle_equivalence" => vec![
            ("clifford_equivalence", checks::clifford_equivalence(6, 8, 0.2, seed, threads)),
            ("mpdo_equivalence", checks::mpdo_equivalence(6, 6, 6, 0.1, 4096, seed, threads)),
        ],
        "pinsker" => vec![("pinsker", checks::pinsker_suite(10, 10, 8, seed, threads))],
        "prop1" => vec![("prop1", checks::prop1_suite(8, 8, 2, 6, 0.2, seed, threads))],
        "lemma6_decay" => {
            let depths: Vec<usize> = (2..=12).collect();
            vec![(
                "lemma6_decay",
                checks::lemma6_decay(8, 2, &depths, 20, NoiseSpec::amplitude_damping(0.1), seed, threads),
            )]
        }
        "cmi_nonneg_stab" => {
            let mut v = vec![("stabilizer_cmi", checks::stabilizer_cmi_check(16, 10, 6, 0.2, seed, threads))];
            if config.corrupt_tableau {
                v.push(("corrupted_tableau", checks::corrupted_tableau_check(8)));
            }
            v
        }
        _ => unreachable!("unknown suite {name}"),
    };
    results
        .into_iter()
        .map(|(n, r)| r.unwrap_or_else(|e| CheckReport::errored(n, &e)))
        .collect()
}

/// Runs every validation suite on small default instances seeded from the
/// config. A check that errors counts as failed.
pub fn run_validate(config: &ExperimentConfig) -> Result<ValidateReport> {
    config.validate()?;
    let seed = config.template().seed;
    let threads = config.thread_count();
    let suites: Vec<SuiteReport> = SUITES
        .iter()
        .map(|&name| {
            let checks = run_suite(name, config, seed, threads);
            SuiteReport {
                suite: name.into(),
                passed: checks.iter().all(|c| c.passed),
                checks,
            }
        })
        .collect();
    Ok(ValidateReport {
        passed: suites.iter().all(|s| s.passed),
        seed,
        suites,
    })
}
