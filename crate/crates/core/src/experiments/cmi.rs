use std::io::Write;

use serde::Serialize;

use super::{dense_options, par_map, with_gamma, ExperimentConfig, Model};
use crate::circuit::{CircuitDescriptor, GateFamily, GridGeometry};
use crate::error::{Error, Result};
use crate::info::exact_cmi;
use crate::mpdo::MpdoState;
use crate::oracle::evolve_circuit;
use crate::rng::derive_seed;
use crate::stabilizer::{simulate_circuit, stabilizer_cmi};
use crate::stats::mean_stderr;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CmiRow {
    pub model: String,
    pub n: usize,
    pub d: usize,
    pub gamma: f64,
    pub ell: usize,
    pub mean_cmi: f64,
    pub stderr: f64,
    pub realizations: usize,
}

/// The central `side` qubits of a line, or the central `side x side` block
/// of a square grid, ascending.
pub fn central_region(geometry: &GridGeometry, side: usize) -> Result<Vec<usize>> {
    let dims = geometry.dims();
    if side == 0 || dims.iter().any(|&l| side > l) {
        return Err(Error::Geometry(format!("region side {side} does not fit {dims:?}")));
    }
    let starts: Vec<usize> = dims.iter().map(|&l| (l - side) / 2).collect();
    let mut region = Vec::new();
    for q in 0..geometry.num_qubits() {
        let c = geometry.coords(q);
        if c.iter().zip(&starts).all(|(&x, &s)| x >= s && x < s + side) {
            region.push(q);
        }
    }
    Ok(region)
}

/// `(Y, Z)` for a region `X`: `Z` holds every qubit at distance at least
/// `ell` from `X`, and `Y` the rest of the complement.
pub fn tripartition(geometry: &GridGeometry, x: &[usize], ell: usize) -> (Vec<usize>, Vec<usize>) {
    let mut y = Vec::new();
    let mut z = Vec::new();
    for q in 0..geometry.num_qubits() {
        if x.contains(&q) {
            continue;
        }
        if geometry.set_distance(&[q], x) >= ell {
            z.push(q);
        } else {
            y.push(q);
        }
    }
    (y, z)
}

/// CMI `I(X:Z|Y)` of one realization for every `(Y, Z)` in `parts`. The
/// MPDO model returns Monte-Carlo means drawn with `mc_seed`.
pub fn realization_cmi(
    descriptor: &CircuitDescriptor,
    model: Model,
    x: &[usize],
    parts: &[(Vec<usize>, Vec<usize>)],
    mc_samples: usize,
    mc_seed: u64,
    chi_max: usize,
    capacity: usize,
) -> Result<Vec<f64>> {
    let circuit = descriptor.realize()?;
    match model {
        Model::Dense => {
            let p = evolve_circuit(&circuit, &dense_options(capacity))?.distribution()?;
            parts.iter().map(|(y, z)| exact_cmi(&p, x, y, z)).collect()
        }
        Model::Stabilizer => {
            let diagonal = simulate_circuit(&circuit)?.diagonal_subgroup()?;
            parts.iter().map(|(y, z)| stabilizer_cmi(&diagonal, x, y, z)).collect()
        }
        Model::Mpdo => {
            if descriptor.geometry.dimension() != 1 {
                return Err(Error::Unsupported("the MPDO model needs a 1D geometry".into()));
            }
            let state = MpdoState::evolve(&circuit, chi_max)?;
            parts
                .iter()
                .map(|(y, z)| state.mc_cmi(x, y, z, mc_samples, mc_seed).map(|e| e.mean))
                .collect()
        }
    }
}

/// Pools the per-realization values of depth pairs `(d0, d1), (d2, d3), ...`
/// into one sample reported at the first depth of each pair. A trailing
/// unpaired depth is kept on its own.
pub fn smooth_depth_pairs(depths: &[usize], values: &[Vec<f64>]) -> (Vec<usize>, Vec<Vec<f64>>) {
    let mut out_depths = Vec::new();
    let mut out_values = Vec::new();
    for (ds, vs) in depths.chunks(2).zip(values.chunks(2)) {
        out_depths.push(ds[0]);
        out_values.push(vs.concat());
    }
    (out_depths, out_values)
}

fn model_for(config: &ExperimentConfig) -> Model {
    let clifford = matches!(config.descriptor.gate_family, GateFamily::Clifford2Q | GateFamily::Identity2Q);
    config.model.unwrap_or(if clifford {
        Model::Stabilizer
    } else {
        Model::Dense
    })
}

/// Mean CMI per `(depth, gamma, ell)`, averaged over realizations. Rows are
/// ordered by gamma, then depth, then ell.
pub fn run_cmi_scan(config: &ExperimentConfig) -> Result<Vec<CmiRow>> {
    config.validate()?;
    let model = model_for(config);
    let template = config.template();
    let geometry = &template.geometry;
    let n = geometry.num_qubits();
    if model == Model::Dense && n > config.capacity {
        return Err(Error::Capacity {
            what: "dense CMI scan".into(),
            requested: n,
            limit: config.capacity,
        });
    }
    let x = central_region(geometry, config.region_side)?;
    let ells = config.ell_axis();
    let parts: Vec<(Vec<usize>, Vec<usize>)> = ells.iter().map(|&l| tripartition(geometry, &x, l)).collect();
    let depths = config.depth_axis();
    let gammas = config.gamma_axis();
    let chi = config.chi_axis()[0];
    let r = config.realizations;
    let jobs = gammas.len() * depths.len() * r;
    let results = par_map(config.thread_count(), jobs, |job| {
        let (gi, rest) = (job / (depths.len() * r), job % (depths.len() * r));
        let (di, k) = (rest / r, rest % r);
        let d = with_gamma(&template, gammas[gi])?
            .with_depth(depths[di])
            .with_realization(k as u64);
        let mc_seed = derive_seed(derive_seed(template.seed, k as u64), depths[di] as u64);
        realization_cmi(&d, model, &x, &parts, config.mc_samples, mc_seed, chi, config.capacity)
    })?;
    let mut rows = Vec::new();
    for (gi, &gamma) in gammas.iter().enumerate() {
        // values[depth][ell] -> per-realization samples
        let per_depth: Vec<Vec<Vec<f64>>> = (0..depths.len())
            .map(|di| {
                (0..ells.len())
                    .map(|li| (0..r).map(|k| results[(gi * depths.len() + di) * r + k][li]).collect())
                    .collect()
            })
            .collect();
        let (ds, per_depth) = if config.smooth_depths {
            let mut out_depths = Vec::new();
            let mut out = Vec::new();
            for li in 0..ells.len() {
                let column: Vec<Vec<f64>> = per_depth.iter().map(|v| v[li].clone()).collect();
                let (sd, sv) = smooth_depth_pairs(&depths, &column);
                out_depths = sd;
                out.push(sv);
            }
            let transposed = (0..out_depths.len())
                .map(|di| (0..ells.len()).map(|li| out[li][di].clone()).collect())
                .collect();
            (out_depths, transposed)
        } else {
            (depths.clone(), per_depth)
        };
        for (di, &d) in ds.iter().enumerate() {
            for (li, &ell) in ells.iter().enumerate() {
                let samples = &per_depth[di][li];
                let (mean_cmi, stderr) = mean_stderr(samples);
                rows.push(CmiRow {
                    model: model.name().into(),
                    n,
                    d,
                    gamma,
                    ell,
                    mean_cmi,
                    stderr,
                    realizations: samples.len(),
                });
            }
        }
    }
    Ok(rows)
}

/// Writes rows with a header through the csv crate.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
