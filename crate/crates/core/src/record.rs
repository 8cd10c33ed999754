//! Time-series output of an evolution run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::PhysParams;
use crate::model::ModelKind;
use crate::noise::DrawRecord;
use crate::observables::{Observers, Sample};

pub const ARTIFACT_VERSION: &str = concat!("floquet-rydberg ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub params: PhysParams,
    pub model: ModelKind,
    pub t_a: f64,
    pub t_b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub draws: Vec<DrawRecord>,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// completed cycles at each sample
    pub cycles: Vec<u32>,
    pub fidelity_target: String,
    pub fidelities: Vec<f64>,
    pub populations: Vec<(String, Vec<f64>)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<Vec<Option<f64>>>,
    pub meta: RecordMeta,
}

impl TrajectoryRecord {
    pub(crate) fn empty(observers: &Observers, meta: RecordMeta) -> Self {
        TrajectoryRecord {
            times: Vec::new(),
            cycles: Vec::new(),
            fidelity_target: observers.fidelity_target.0.clone(),
            fidelities: Vec::new(),
            populations: observers
                .populations
                .iter()
                .map(|(l, _)| (l.clone(), Vec::new()))
                .collect(),
            g2: observers.g2.as_ref().map(|_| Vec::new()),
            meta,
        }
    }

    pub(crate) fn push(&mut self, time: f64, cycle: u32, sample: Sample) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if time < last {
                return Err(Error::Invariant {
                    what: "time decreased",
                    value: time - last,
                    sample: self.times.len(),
                });
            }
        }
        self.times.push(time);
        self.cycles.push(cycle);
        self.fidelities.push(sample.fidelity);
        for ((_, series), v) in self.populations.iter_mut().zip(sample.populations) {
            series.push(v);
        }
        if let Some(g) = self.g2.as_mut() {
            g.push(sample.g2);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_fidelity(&self) -> f64 {
        *self.fidelities.last().unwrap_or(&f64::NAN)
    }

    pub fn population(&self, label: &str) -> Option<&[f64]> {
        self.populations
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v.as_slice())
    }
}
