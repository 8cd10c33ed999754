//! Executing registry experiments and parameter sweeps.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::config::{Compare, ExperimentSpec, Mode, SweepGrid};
use crate::floquet::{quasienergy_sweep, zeno_comparison, QuasienergySpectrum};
use crate::hamiltonians::PhysParams;
use crate::linalg::CVector;
use crate::model::Model;
use crate::noise::{Channel, NoisePlan, NoiseSampler, NoiseSource, Segment};
use crate::observables::ObservableSpec;
use crate::open_system::{master_evolve, DensityMatrix, StepControl};
use crate::propagation::{continuous_evolve, stroboscopic_evolve, unitary_of};
use crate::record::{RecordMeta, TrajectoryRecord, ARTIFACT_VERSION};

#[derive(Clone, Debug, Serialize)]
pub struct SweepMeta {
    pub params: PhysParams,
    pub model: crate::model::ModelKind,
    pub version: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub urr_over_omega: Vec<f64>,
    pub cycles: Vec<u32>,
    /// final W fidelity, `fidelity[u][n]` for urr_over_omega[u] and cycles[n]
    pub fidelity: Vec<Vec<f64>>,
    pub meta: SweepMeta,
    #[serde(skip)]
    pub runtime_s: f64,
}

impl SweepResult {
    pub fn fraction_above(&self, threshold: f64) -> f64 {
        let total: usize = self.fidelity.iter().map(Vec::len).sum();
        let above = self.fidelity.iter().flatten().filter(|&&f| f > threshold).count();
        above as f64 / total as f64
    }

    /// U_rr/Ω with the lowest fidelity averaged over the cycle axis.
    pub fn canyon(&self) -> (f64, f64) {
        self.fidelity
            .iter()
            .zip(&self.urr_over_omega)
            .map(|(row, &u)| (u, row.iter().sum::<f64>() / row.len() as f64))
            .fold((f64::NAN, f64::INFINITY), |best, x| if x.1 < best.1 { x } else { best })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentOutput {
    pub spec: ExperimentSpec,
    /// (suffix, record); the main record has an empty suffix
    pub trajectories: Vec<(String, TrajectoryRecord)>,
    pub sweep: Option<SweepResult>,
    pub spectrum: Option<QuasienergySpectrum>,
    pub summary: Vec<(String, f64)>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("worker pool: {e}")))
}

fn observers(spec: &ExperimentSpec) -> Vec<ObservableSpec> {
    let mut obs = vec![ObservableSpec::fidelity("W")];
    obs.extend(spec.populations.iter().map(|l| ObservableSpec::population(l)));
    if spec.g2 {
        obs.push(ObservableSpec::G2 {
            emission: spec.emission,
        });
    }
    obs
}

/// Final W fidelity on every (U_rr/Ω, N) grid point, one stroboscopic
/// evolution per point. Stage unitaries are shared along each axis.
pub fn run_sweep(spec: &ExperimentSpec, grid: &SweepGrid, workers: usize) -> Result<SweepResult> {
    if grid.urr_over_omega.is_empty() || grid.cycles.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.cycles.contains(&0) {
        return Err(Error::InvalidParams("sweep cycles must be at least 1".into()));
    }
    let start = Instant::now();
    let base = Model::build(spec.model, &spec.params)?;
    let ground = base.ground();
    let target = base.target();
    let pool = pool(workers)?;
    let (ub, ua) = pool.install(|| -> Result<_> {
        let ub = grid
            .urr_over_omega
            .par_iter()
            .map(|&u| {
                let mut p = spec.params.clone();
                p.u_rr = u * p.omega_ryd;
                let m = Model::build(spec.model, &p)?;
                unitary_of(m.h_b(), m.protocol().t_b)
            })
            .collect::<Result<Vec<_>>>()?;
        let ua = grid
            .cycles
            .par_iter()
            .map(|&n| {
                let mut p = spec.params.clone();
                p.cycles = n;
                unitary_of(base.h_a(), p.t_a())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((ub, ua))
    })?;
    let fidelity = pool.install(|| {
        ub.par_iter()
            .map(|ub| {
                grid.cycles
                    .iter()
                    .zip(&ua)
                    .map(|(&n, ua)| {
                        let ut = ub.entries() * ua.entries();
                        let mut psi: CVector = ground.amplitudes().clone();
                        for _ in 0..n {
                            psi = &ut * psi;
                        }
                        target.amplitudes().dotc(&psi).norm_sqr()
                    })
                    .collect::<Vec<f64>>()
            })
            .collect::<Vec<_>>()
    });
    Ok(SweepResult {
        urr_over_omega: grid.urr_over_omega.clone(),
        cycles: grid.cycles.clone(),
        fidelity,
        meta: SweepMeta {
            params: spec.params.clone(),
            model: spec.model,
            version: ARTIFACT_VERSION.to_string(),
        },
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

/// Entry-wise mean of records that share their time grid.
fn mean_record(records: &[TrajectoryRecord], meta: RecordMeta) -> TrajectoryRecord {
    let n = records.len() as f64;
    let first = &records[0];
    let avg = |get: &dyn Fn(&TrajectoryRecord) -> &Vec<f64>| -> Vec<f64> {
        (0..first.len())
            .map(|i| records.iter().map(|r| get(r)[i]).sum::<f64>() / n)
            .collect()
    };
    let populations = first
        .populations
        .iter()
        .enumerate()
        .map(|(k, (label, _))| (label.clone(), avg(&|r| &r.populations[k].1)))
        .collect();
    let g2 = first.g2.as_ref().map(|g| {
        (0..g.len())
            .map(|i| {
                let vals: Option<Vec<f64>> = records.iter().map(|r| r.g2.as_ref().unwrap()[i]).collect();
                vals.map(|v| v.iter().sum::<f64>() / n)
            })
            .collect()
    });
    TrajectoryRecord {
        times: first.times.clone(),
        cycles: first.cycles.clone(),
        fidelity_target: first.fidelity_target.clone(),
        fidelities: avg(&|r| &r.fidelities),
        populations,
        g2,
        meta,
    }
}

fn final_stats(prefix: &str, records: &[TrajectoryRecord], out: &mut Vec<(String, f64)>) {
    let finals: Vec<f64> = records.iter().map(|r| r.final_fidelity()).collect();
    let n = finals.len() as f64;
    let mean = finals.iter().sum::<f64>() / n;
    let var = finals.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n;
    let min = finals.iter().cloned().fold(f64::INFINITY, f64::min);
    out.push((format!("{prefix}mean_final_fidelity"), mean));
    out.push((format!("{prefix}min_final_fidelity"), min));
    out.push((format!("{prefix}std_final_fidelity"), var.sqrt()));
}

/// Lindblad runs for seeds base, base+1, …; a quiet plan needs only one run.
pub fn master_ensemble(
    params: &PhysParams,
    plan: &NoisePlan,
    ensemble: u32,
    step: &StepControl,
    observers: &[ObservableSpec],
    workers: usize,
) -> Result<Vec<TrajectoryRecord>> {
    let model = Model::full(params)?;
    let rho0 = DensityMatrix::pure(&model.ground());
    let runs = if plan.is_quiet() { 1 } else { ensemble };
    pool(workers)?.install(|| {
        (0..runs)
            .into_par_iter()
            .map(|i| {
                let noise = (!plan.is_quiet()).then(|| plan.with_seed(plan.seed.wrapping_add(i as u64)));
                master_evolve(&rho0, &model, noise.as_ref(), step, observers)
            })
            .collect()
    })
}

/// Superatom runs with ℕ₀ drawn per realisation and t_a pinned to the reference ℕ.
pub fn atom_number_ensemble(
    params: &PhysParams,
    plan: &NoisePlan,
    ensemble: u32,
    observers: &[ObservableSpec],
    workers: usize,
) -> Result<(Vec<TrajectoryRecord>, Vec<u32>)> {
    let channel = plan.atom_number.ok_or(Error::MissingChannel("atom_number"))?;
    let mut reference = params.clone();
    reference.atom_count = channel.reference;
    let protocol = reference.protocol();
    let mut sampler = NoiseSampler::new(plan)?;
    let draws = (0..ensemble)
        .map(|i| Ok(sampler.draw(i, Segment::Run, Channel::AtomNumber)? as u32))
        .collect::<Result<Vec<u32>>>()?;
    let log = sampler.log().to_vec();
    let records = pool(workers)?.install(|| {
        draws
            .par_iter()
            .map(|&n0| {
                let mut p = params.clone();
                p.atom_count = n0;
                let model = Model::superatom(&p)?.with_protocol(protocol);
                let mut rec = stroboscopic_evolve(&model.ground(), &model, observers)?;
                rec.meta.seed = Some(plan.seed);
                Ok(rec)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut records = records;
    if let Some(first) = records.first_mut() {
        first.meta.draws = log;
    }
    Ok((records, draws))
}

pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput {
        spec: spec.clone(),
        trajectories: Vec::new(),
        sweep: None,
        spectrum: None,
        summary: Vec::new(),
    };
    let obs = observers(spec);
    match spec.mode {
        Mode::None => {}
        Mode::Stroboscopic => {
            let model = Model::build(spec.model, &spec.params)?;
            let rec = stroboscopic_evolve(&model.ground(), &model, &obs)?;
            out.summary.push(("final_fidelity".into(), rec.final_fidelity()));
            if let Some(g) = rec.g2.as_ref().and_then(|g| *g.last().unwrap()) {
                out.summary.push(("final_g2".into(), g));
            }
            out.trajectories.push((String::new(), rec));
        }
        Mode::Continuous => {
            let model = Model::build(spec.model, &spec.params)?;
            let rec = continuous_evolve(&model.ground(), &model, spec.samples_per_segment, &obs)?;
            out.summary.push(("final_fidelity".into(), rec.final_fidelity()));
            out.trajectories.push((String::new(), rec));
        }
        Mode::Zeno => {
            let model = Model::build(spec.model, &spec.params)?;
            let rec = zeno_comparison(&model)?;
            let worst = rec.fidelities.iter().cloned().fold(f64::INFINITY, f64::min);
            out.summary.push(("min_zeno_agreement".into(), worst));
            out.trajectories.push((String::new(), rec));
        }
        Mode::Master => {
            let step = StepControl {
                integrator: spec.integrator,
                ..Default::default()
            };
            let records = master_ensemble(&spec.params, &spec.noise, spec.ensemble, &step, &obs, workers)?;
            final_stats("", &records, &mut out.summary);
            let mut meta = records[0].meta.clone();
            meta.seed = Some(spec.noise.seed);
            meta.draws.clear();
            out.trajectories.push((String::new(), mean_record(&records, meta)));
            let reference = match spec.compare {
                Compare::None => None,
                Compare::NoDecay => {
                    let mut p = spec.params.clone();
                    p.gamma = 0.0;
                    Some(master_ensemble(&p, &spec.noise, spec.ensemble, &step, &obs, workers)?)
                }
                Compare::NoiseFree => Some(master_ensemble(
                    &spec.params,
                    &NoisePlan {
                        seed: spec.noise.seed,
                        ..Default::default()
                    },
                    1,
                    &step,
                    &obs,
                    workers,
                )?),
            };
            if let Some(refs) = reference {
                final_stats("reference_", &refs, &mut out.summary);
                let mut meta = refs[0].meta.clone();
                meta.draws.clear();
                out.trajectories.push(("reference".into(), mean_record(&refs, meta)));
            }
        }
        Mode::AtomNumber => {
            let (records, draws) = atom_number_ensemble(&spec.params, &spec.noise, spec.ensemble, &obs, workers)?;
            final_stats("", &records, &mut out.summary);
            let mut meta = records[0].meta.clone();
            meta.params.atom_count = spec.noise.atom_number.map(|a| a.reference).unwrap_or(meta.params.atom_count);
            let mean_atoms = draws.iter().map(|&d| d as f64).sum::<f64>() / draws.len() as f64;
            out.summary.push(("mean_atom_number".into(), mean_atoms));
            out.trajectories.push((String::new(), mean_record(&records, meta)));
        }
    }
    if let Some(grid) = &spec.sweep {
        let sweep = run_sweep(spec, grid, workers)?;
        out.summary.push(("fraction_above_0.99".into(), sweep.fraction_above(0.99)));
        let (u, f) = sweep.canyon();
        out.summary.push(("canyon_urr_over_omega".into(), u));
        out.summary.push(("canyon_mean_fidelity".into(), f));
        out.sweep = Some(sweep);
    }
    if let Some(s) = &spec.spectrum {
        out.spectrum = Some(quasienergy_sweep(&spec.params, s.model, &s.axis)?);
    }
    Ok(out)
}
