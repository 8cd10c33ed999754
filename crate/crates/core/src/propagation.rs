//! Exact piecewise-constant propagation of pure states.

use crate::error::{Error, Result};
use crate::hilbert::{OperatorKind, OperatorMatrix, StateVector};
use crate::linalg::{eigh, expm_hermitian, CMatrix, CVector, C64};
use crate::model::Model;
use crate::observables::{ObservableSpec, Observers};
use crate::record::{RecordMeta, TrajectoryRecord, ARTIFACT_VERSION};

const NORM_TOL: f64 = 1e-10;

/// exp(−i·h·t) for a Hermitian generator.
pub fn unitary_of(h: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    if h.kind() != OperatorKind::Hermitian {
        return Err(Error::NotHermitian {
            deviation: crate::linalg::hermitian_deviation(h.entries()),
        });
    }
    if !t.is_finite() {
        return Err(Error::InvalidParams("propagation time must be finite".into()));
    }
    OperatorMatrix::unitary(expm_hermitian(h.entries(), t))
}

/// One protocol cycle U_T = U_b(t_b)·U_a(t_a).
pub fn floquet_cycle(model: &Model) -> Result<OperatorMatrix> {
    let p = model.protocol();
    let ua = unitary_of(model.h_a(), p.t_a)?;
    let ub = unitary_of(model.h_b(), p.t_b)?;
    ub.compose(&ua)
}

pub(crate) fn meta_for(model: &Model) -> RecordMeta {
    let p = model.protocol();
    RecordMeta {
        params: model.params().clone(),
        model: model.kind(),
        t_a: p.t_a,
        t_b: p.t_b,
        seed: None,
        integrator: None,
        draws: Vec::new(),
        version: ARTIFACT_VERSION.to_string(),
    }
}

fn check_norm(state: &StateVector, sample: usize) -> Result<()> {
    let drift = (state.norm() - 1.0).abs();
    if drift > NORM_TOL {
        return Err(Error::Invariant {
            what: "state norm drift",
            value: drift,
            sample,
        });
    }
    Ok(())
}

/// Samples after every full cycle, starting with the initial state (N+1 rows).
pub fn stroboscopic_evolve(
    initial: &StateVector,
    model: &Model,
    observers: &[ObservableSpec],
) -> Result<TrajectoryRecord> {
    let obs = Observers::resolve(observers, model)?;
    let ut = floquet_cycle(model)?;
    ut.check_dim(initial.dim())?;
    let period = model.protocol().period();
    let mut rec = TrajectoryRecord::empty(&obs, meta_for(model));
    let mut psi = initial.clone();
    rec.push(0.0, 0, obs.measure(&psi)?)?;
    for k in 1..=model.protocol().cycles {
        psi = psi.apply(&ut)?;
        check_norm(&psi, k as usize)?;
        rec.push(k as f64 * period, k, obs.measure(&psi)?)?;
    }
    Ok(rec)
}

/// Final state after all cycles.
pub fn evolve_final(initial: &StateVector, model: &Model) -> Result<StateVector> {
    let ut = floquet_cycle(model)?;
    ut.check_dim(initial.dim())?;
    let mut psi = initial.clone();
    for _ in 0..model.protocol().cycles {
        psi = psi.apply(&ut)?;
    }
    Ok(psi)
}

/// Evolution under a fixed Hermitian generator at arbitrary times.
struct Spectral {
    vals: Vec<f64>,
    vecs: CMatrix,
}

impl Spectral {
    fn new(h: &OperatorMatrix) -> Self {
        let (vals, vecs) = eigh(h.entries());
        Spectral { vals, vecs }
    }

    fn apply(&self, psi: &CVector, t: f64) -> CVector {
        let mut coeffs = self.vecs.adjoint() * psi;
        for (z, &e) in coeffs.iter_mut().zip(&self.vals) {
            *z *= C64::from_polar(1.0, -e * t);
        }
        &self.vecs * coeffs
    }
}

/// Samples `samples_per_segment` evenly spaced points inside every segment,
/// the last one at the segment end.
pub fn continuous_evolve(
    initial: &StateVector,
    model: &Model,
    samples_per_segment: u32,
    observers: &[ObservableSpec],
) -> Result<TrajectoryRecord> {
    if samples_per_segment == 0 {
        return Err(Error::InvalidParams(
            "samples_per_segment must be at least 1".into(),
        ));
    }
    let obs = Observers::resolve(observers, model)?;
    model.h_a().check_dim(initial.dim())?;
    let p = model.protocol();
    let stages = [(Spectral::new(model.h_a()), p.t_a), (Spectral::new(model.h_b()), p.t_b)];
    let mut rec = TrajectoryRecord::empty(&obs, meta_for(model));
    let mut psi = initial.amplitudes().clone();
    let mut t0 = 0.0;
    rec.push(0.0, 0, obs.measure(initial)?)?;
    for k in 0..p.cycles {
        for (si, (prop, dur)) in stages.iter().enumerate() {
            let start = psi.clone();
            for j in 1..=samples_per_segment {
                let tau = dur * j as f64 / samples_per_segment as f64;
                let v = StateVector::from_normalized(prop.apply(&start, tau));
                check_norm(&v, rec.len())?;
                let done = if si == 1 && j == samples_per_segment { k + 1 } else { k };
                rec.push(t0 + tau, done, obs.measure(&v)?)?;
                if j == samples_per_segment {
                    psi = v.amplitudes().clone();
                }
            }
            t0 += dur;
        }
    }
    Ok(rec)
}
