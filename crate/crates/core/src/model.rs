//! A driven system ready for propagation: state space, stage Hamiltonians
//! and protocol timing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{
    hamiltonian_a, hamiltonian_b, superatom_model, two_atom_symmetric, PhysParams, Protocol,
};
use crate::hilbert::{collective_state, transition, Basis, Collective, Level, OperatorMatrix, StateVector};
use crate::linalg::{c, CMatrix, CVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// full 3^ℕ product space
    Full,
    /// two atoms, {gg, W₂, ee, T₂, D₂}
    Pair,
    /// two atoms, {gg, W₂, ee, T₂, D₂, rr}
    PairRr,
    /// ℕ atoms, {G, W, P, T, D}
    Superatom,
}

impl ModelKind {
    pub fn parse(s: &str) -> Result<ModelKind> {
        Ok(match s {
            "full" => ModelKind::Full,
            "pair" => ModelKind::Pair,
            "pair_rr" => ModelKind::PairRr,
            "superatom" => ModelKind::Superatom,
            _ => return Err(Error::config("model", format!("unknown model `{s}`"))),
        })
    }
}

/// Which transition the emitted field E⁺ = Σσᵢ⁻ lowers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emission {
    /// σ⁻ = |g⟩⟨e|
    #[default]
    Ground,
    /// σ⁻ = |e⟩⟨r|
    Rydberg,
}

#[derive(Clone, Debug)]
enum Space {
    Full(Basis),
    Symmetric(Vec<Collective>),
}

#[derive(Clone, Debug)]
pub struct Model {
    kind: ModelKind,
    space: Space,
    labels: Vec<String>,
    params: PhysParams,
    protocol: Protocol,
    h_a: OperatorMatrix,
    h_b: OperatorMatrix,
}

impl Model {
    pub fn build(kind: ModelKind, params: &PhysParams) -> Result<Model> {
        params.validate_timings()?;
        Model::build_with_protocol(kind, params, params.protocol())
    }

    /// Explicit segment durations; the drives may then be switched off.
    pub fn build_with_protocol(kind: ModelKind, params: &PhysParams, protocol: Protocol) -> Result<Model> {
        params.validate()?;
        if !(protocol.t_a >= 0.0 && protocol.t_b >= 0.0 && protocol.period().is_finite()) {
            return Err(Error::InvalidParams("segment durations must be finite and non-negative".into()));
        }
        let (space, labels, h_a, h_b) = match kind {
            ModelKind::Full => {
                let basis = Basis::new(params.atom_count)?;
                let h_a = hamiltonian_a(&basis, params)?;
                let h_b = hamiltonian_b(&basis, params)?;
                let labels = Collective::ALL
                    .iter()
                    .filter(|s| s.min_atoms() <= params.atom_count)
                    .map(|&s| display(s, params.atom_count))
                    .collect();
                (Space::Full(basis), labels, h_a, h_b)
            }
            ModelKind::Pair | ModelKind::PairRr | ModelKind::Superatom => {
                let sym = match kind {
                    ModelKind::Pair => two_atom_symmetric(params, false)?,
                    ModelKind::PairRr => two_atom_symmetric(params, true)?,
                    _ => superatom_model(params)?,
                };
                (Space::Symmetric(sym.states), sym.labels, sym.h_a, sym.h_b)
            }
        };
        Ok(Model {
            kind,
            space,
            labels,
            params: params.clone(),
            protocol,
            h_a,
            h_b,
        })
    }

    pub fn full(params: &PhysParams) -> Result<Model> {
        Model::build(ModelKind::Full, params)
    }

    pub fn two_atom(params: &PhysParams, include_rr: bool) -> Result<Model> {
        Model::build(
            if include_rr {
                ModelKind::PairRr
            } else {
                ModelKind::Pair
            },
            params,
        )
    }

    pub fn superatom(params: &PhysParams) -> Result<Model> {
        Model::build(ModelKind::Superatom, params)
    }

    /// Replace segment durations, e.g. to keep t_a fixed while ℕ varies.
    pub fn with_protocol(mut self, protocol: Protocol) -> Model {
        self.protocol = protocol;
        self
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn h_a(&self) -> &OperatorMatrix {
        &self.h_a
    }

    pub fn h_b(&self) -> &OperatorMatrix {
        &self.h_b
    }

    pub fn dim(&self) -> usize {
        self.h_a.dim()
    }

    pub fn basis(&self) -> Option<&Basis> {
        match &self.space {
            Space::Full(b) => Some(b),
            Space::Symmetric(_) => None,
        }
    }

    /// Collective-state labels available in this model, in display form.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Resolve a collective label (`W`, `W2`, `gg`, ...) or, in the full space,
    /// a product label such as `gre`.
    pub fn state(&self, label: &str) -> Result<StateVector> {
        match &self.space {
            Space::Full(basis) => {
                if let Ok(which) = Collective::parse(label) {
                    return collective_state(which, basis);
                }
                let levels = product_label(label, basis.atom_count())?;
                StateVector::basis_state(basis.dim(), basis.index(&levels)?)
            }
            Space::Symmetric(states) => {
                let which = Collective::parse(label)?;
                let k = states
                    .iter()
                    .position(|&s| s == which)
                    .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
                StateVector::basis_state(states.len(), k)
            }
        }
    }

    pub fn ground(&self) -> StateVector {
        self.state("G").expect("ground state exists in every model")
    }

    pub fn target(&self) -> StateVector {
        self.state("W").expect("W state exists in every model")
    }

    /// Collective lowering operator E⁺ = Σᵢ σᵢ⁻ in this model's space.
    pub fn lowering(&self, emission: Emission) -> Result<OperatorMatrix> {
        let (lo, hi) = match emission {
            Emission::Ground => (Level::G, Level::E),
            Emission::Rydberg => (Level::E, Level::R),
        };
        match &self.space {
            Space::Full(basis) => {
                let single = transition(lo, hi);
                let mut m = CMatrix::zeros(basis.dim(), basis.dim());
                for a in 0..basis.atom_count() as usize {
                    m += crate::hilbert::embed_single_atom(&single, a, basis)?.entries();
                }
                OperatorMatrix::general(m)
            }
            Space::Symmetric(states) => {
                // ⟨target|E⁺|source⟩ = √(n_hi·(n_lo + 1)) between equal-weight collective states
                let n = self.params.atom_count as usize;
                let dim = states.len();
                let mut m = CMatrix::zeros(dim, dim);
                for (j, s) in states.iter().enumerate() {
                    let (ne, nr) = s.excitations();
                    let ng = n - ne - nr;
                    let (target, coef) = match emission {
                        Emission::Ground if ne > 0 => ((ne - 1, nr), (ne * (ng + 1)) as f64),
                        Emission::Rydberg if nr > 0 => ((ne + 1, nr - 1), (nr * (ne + 1)) as f64),
                        _ => continue,
                    };
                    if let Some(i) = states.iter().position(|t| t.excitations() == target) {
                        m[(i, j)] = c(coef.sqrt());
                    }
                }
                OperatorMatrix::general(m)
            }
        }
    }

    /// Amplitudes of `state` on each labelled collective state.
    pub fn composition(&self, state: &StateVector) -> Result<Vec<(String, crate::linalg::C64)>> {
        self.labels
            .iter()
            .map(|l| Ok((l.clone(), self.state(l)?.inner(state))))
            .collect()
    }

    pub fn zero_vector(&self) -> CVector {
        CVector::zeros(self.dim())
    }
}

fn display(s: Collective, atom_count: u32) -> String {
    if atom_count == 2 {
        s.pair_name().to_string()
    } else {
        s.name().to_string()
    }
}

fn product_label(label: &str, atom_count: u32) -> Result<Vec<Level>> {
    if label.len() != atom_count as usize {
        return Err(Error::UnknownLabel(label.to_string()));
    }
    label
        .chars()
        .map(|ch| match ch {
            'g' => Ok(Level::G),
            'e' => Ok(Level::E),
            'r' => Ok(Level::R),
            _ => Err(Error::UnknownLabel(label.to_string())),
        })
        .collect()
}
