//! Fidelities, populations, zero-delay g² and state compositions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{OperatorMatrix, StateVector};
use crate::linalg::{CMatrix, C64};
use crate::model::{Emission, Model};

/// Below this first-order correlation g² is reported as undefined.
pub const VACUUM_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableSpec {
    Fidelity { target: String },
    Population { label: String },
    G2 { emission: Emission },
    Composition,
}

impl ObservableSpec {
    pub fn fidelity(target: &str) -> Self {
        ObservableSpec::Fidelity {
            target: target.to_string(),
        }
    }

    pub fn population(label: &str) -> Self {
        ObservableSpec::Population {
            label: label.to_string(),
        }
    }

    pub fn g2() -> Self {
        ObservableSpec::G2 {
            emission: Emission::Ground,
        }
    }
}

/// |⟨target|ψ⟩|²
pub fn fidelity(state: &StateVector, target: &StateVector) -> Result<f64> {
    if state.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            found: state.dim(),
        });
    }
    Ok(target.overlap_sq(state))
}

/// ⟨target|ρ|target⟩
pub fn fidelity_density(rho: &CMatrix, target: &StateVector) -> Result<f64> {
    if rho.nrows() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            found: rho.nrows(),
        });
    }
    let v = target.amplitudes();
    Ok(v.dotc(&(rho * v)).re)
}

/// g²(0) = ⟨E⁻E⁻E⁺E⁺⟩ / ⟨E⁻E⁺⟩² for a pure state.
pub fn g2_zero_delay(state: &StateVector, lowering: &OperatorMatrix) -> Result<f64> {
    lowering.check_dim(state.dim())?;
    let once = lowering.entries() * state.amplitudes();
    let twice = lowering.entries() * &once;
    ratio(twice.norm_squared(), once.norm_squared())
}

/// g²(0) for a density matrix.
pub fn g2_density(rho: &CMatrix, lowering: &OperatorMatrix) -> Result<f64> {
    lowering.check_dim(rho.nrows())?;
    let a = lowering.entries();
    let ad = a.adjoint();
    let n1 = (&ad * a * rho).trace().re;
    let aa = a * a;
    let n2 = (aa.adjoint() * &aa * rho).trace().re;
    ratio(n2, n1)
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if den.abs() < VACUUM_THRESHOLD {
        return Err(Error::VacuumCorrelation { denominator: den });
    }
    Ok(num / (den * den))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionReport {
    /// amplitude on each labelled collective state
    pub amplitudes: Vec<(String, C64)>,
    /// 1 − Σ|amplitude|², weight outside the labelled states
    pub residual: f64,
}

pub fn composition_report(state: &StateVector, model: &Model) -> Result<CompositionReport> {
    let amplitudes = model.composition(state)?;
    let weight: f64 = amplitudes.iter().map(|(_, a)| a.norm_sqr()).sum();
    Ok(CompositionReport {
        amplitudes,
        residual: (1.0 - weight).max(0.0),
    })
}

/// Observer set bound to a model.
#[derive(Clone, Debug)]
pub struct Observers {
    pub fidelity_target: (String, StateVector),
    pub populations: Vec<(String, StateVector)>,
    pub g2: Option<OperatorMatrix>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub fidelity: f64,
    pub populations: Vec<f64>,
    pub g2: Option<f64>,
}

impl Observers {
    /// Exactly one fidelity target is required; compositions are not time series.
    pub fn resolve(specs: &[ObservableSpec], model: &Model) -> Result<Observers> {
        let mut fid = None;
        let mut pops = Vec::new();
        let mut g2 = None;
        for spec in specs {
            match spec {
                ObservableSpec::Fidelity { target } => {
                    if fid.is_some() {
                        return Err(Error::Observers("more than one fidelity target".into()));
                    }
                    fid = Some((target.clone(), model.state(target)?));
                }
                ObservableSpec::Population { label } => {
                    pops.push((label.clone(), model.state(label)?));
                }
                ObservableSpec::G2 { emission } => {
                    g2 = Some(model.lowering(*emission)?);
                }
                ObservableSpec::Composition => {
                    return Err(Error::Observers(
                        "composition is not a time-series observable".into(),
                    ))
                }
            }
        }
        let fidelity_target =
            fid.ok_or_else(|| Error::Observers("a fidelity target is required".into()))?;
        Ok(Observers {
            fidelity_target,
            populations: pops,
            g2,
        })
    }

    pub fn measure(&self, state: &StateVector) -> Result<Sample> {
        Ok(Sample {
            fidelity: fidelity(state, &self.fidelity_target.1)?,
            populations: self
                .populations
                .iter()
                .map(|(_, s)| fidelity(state, s))
                .collect::<Result<_>>()?,
            g2: match &self.g2 {
                Some(op) => defined(g2_zero_delay(state, op))?,
                None => None,
            },
        })
    }

    pub fn measure_density(&self, rho: &CMatrix) -> Result<Sample> {
        Ok(Sample {
            fidelity: fidelity_density(rho, &self.fidelity_target.1)?,
            populations: self
                .populations
                .iter()
                .map(|(_, s)| fidelity_density(rho, s))
                .collect::<Result<_>>()?,
            g2: match &self.g2 {
                Some(op) => defined(g2_density(rho, op))?,
                None => None,
            },
        })
    }
}

/// Vacuum-like samples inside a trajectory are recorded as missing.
fn defined(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::VacuumCorrelation { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}
