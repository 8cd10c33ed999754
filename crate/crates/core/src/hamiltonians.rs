//! Physical parameters and the two stage Hamiltonians, in the full product
//! space and in the reduced symmetric models.
//!
//! Units: angular frequencies in rad/µs, times in µs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Basis, Collective, Level, OperatorMatrix};
use crate::linalg::{c, CMatrix, C64};

pub const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    /// g↔e Rabi frequency ω
    pub omega: f64,
    /// e↔r Rabi frequency Ω
    pub omega_ryd: f64,
    /// uniform r–r interaction
    pub u_rr: f64,
    /// decay rate of r (split evenly into r→e and r→g)
    pub gamma: f64,
    pub atom_count: u32,
    pub cycles: u32,
    #[serde(default)]
    pub detuning_e: f64,
    #[serde(default)]
    pub detuning_r: f64,
    /// laser phase on both drives
    #[serde(default)]
    pub phase: f64,
    /// optional symmetric per-pair interaction matrix, overrides `u_rr`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub urr_pairs: Option<Vec<Vec<f64>>>,
}

/// Segment durations for one protocol run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub t_a: f64,
    pub t_b: f64,
    pub cycles: u32,
}

impl Protocol {
    pub fn period(&self) -> f64 {
        self.t_a + self.t_b
    }
}

impl PhysParams {
    /// ω/2π = 1 MHz, Ω = 5ω, U_rr = 45Ω, no decay, two atoms, 20 cycles.
    pub fn reference() -> Self {
        let omega = TWO_PI;
        PhysParams {
            omega,
            omega_ryd: 5.0 * omega,
            u_rr: 45.0 * 5.0 * omega,
            gamma: 0.0,
            atom_count: 2,
            cycles: 20,
            detuning_e: 0.0,
            detuning_r: 0.0,
            phase: 0.0,
            urr_pairs: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega", self.omega),
            ("omega_ryd", self.omega_ryd),
            ("u_rr", self.u_rr),
            ("gamma", self.gamma),
            ("detuning_e", self.detuning_e),
            ("detuning_r", self.detuning_r),
            ("phase", self.phase),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        if self.omega < 0.0 {
            return Err(Error::InvalidParams("omega must be non-negative".into()));
        }
        if self.omega_ryd < 0.0 {
            return Err(Error::InvalidParams("omega_ryd must be non-negative".into()));
        }
        if self.u_rr < 0.0 {
            return Err(Error::InvalidParams("u_rr must be non-negative".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParams("gamma must be non-negative".into()));
        }
        if self.atom_count == 0 {
            return Err(Error::InvalidParams("atom_count must be at least 1".into()));
        }
        if let Some(pairs) = &self.urr_pairs {
            let n = self.atom_count as usize;
            if pairs.len() != n || pairs.iter().any(|row| row.len() != n) {
                return Err(Error::InvalidParams(format!(
                    "urr_pairs must be {n}x{n}"
                )));
            }
            for i in 0..n {
                for j in 0..n {
                    if !pairs[i][j].is_finite() || pairs[i][j] < 0.0 {
                        return Err(Error::InvalidParams("urr_pairs entries must be finite and non-negative".into()));
                    }
                    if (pairs[i][j] - pairs[j][i]).abs() > 0.0 {
                        return Err(Error::InvalidParams("urr_pairs must be symmetric".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// t_a = π/(√ℕ·N·ω). Zero cycles is the empty protocol; its t_a uses N = 1
    /// and is never applied.
    pub fn t_a(&self) -> f64 {
        PI / ((self.atom_count as f64).sqrt() * self.cycles.max(1) as f64 * self.omega)
    }

    /// t_b = 4π/Ω
    pub fn t_b(&self) -> f64 {
        4.0 * PI / self.omega_ryd
    }

    pub fn period(&self) -> f64 {
        self.t_a() + self.t_b()
    }

    /// Both drives must be on for the protocol timings to exist.
    pub fn validate_timings(&self) -> Result<()> {
        self.validate()?;
        if self.omega == 0.0 || self.omega_ryd == 0.0 {
            return Err(Error::InvalidParams(
                "protocol timings need omega > 0 and omega_ryd > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn protocol(&self) -> Protocol {
        Protocol {
            t_a: self.t_a(),
            t_b: self.t_b(),
            cycles: self.cycles,
        }
    }

    pub fn pair_interaction(&self, i: usize, j: usize) -> f64 {
        match &self.urr_pairs {
            Some(m) => m[i][j],
            None => self.u_rr,
        }
    }

    /// True when every pair interacts with the same strength.
    pub fn uniform_interaction(&self) -> bool {
        match &self.urr_pairs {
            None => true,
            Some(m) => {
                let n = m.len();
                n < 2 || (0..n).all(|i| (0..n).all(|j| i == j || m[i][j] == m[0][1]))
            }
        }
    }
}

/// Stage-a Hamiltonian: g↔e drive plus e detuning.
pub fn hamiltonian_a(basis: &Basis, params: &PhysParams) -> Result<OperatorMatrix> {
    params.validate()?;
    check_atoms(basis, params)?;
    drive(basis, Level::G, Level::E, params.omega, params.phase, |i| {
        params.detuning_e * basis.count(i, Level::E) as f64
    })
}

/// Stage-b Hamiltonian: e↔r drive, pairwise r–r interaction and r detuning.
pub fn hamiltonian_b(basis: &Basis, params: &PhysParams) -> Result<OperatorMatrix> {
    params.validate()?;
    check_atoms(basis, params)?;
    let n = basis.atom_count() as usize;
    drive(basis, Level::E, Level::R, params.omega_ryd, params.phase, |i| {
        let mut diag = params.detuning_r * basis.count(i, Level::R) as f64;
        for a in 0..n {
            if basis.level(i, a) != Level::R {
                continue;
            }
            for b in (a + 1)..n {
                if basis.level(i, b) == Level::R {
                    diag += params.pair_interaction(a, b);
                }
            }
        }
        diag
    })
}

fn check_atoms(basis: &Basis, params: &PhysParams) -> Result<()> {
    if basis.atom_count() != params.atom_count {
        return Err(Error::DimensionMismatch {
            expected: params.atom_count as usize,
            found: basis.atom_count() as usize,
        });
    }
    Ok(())
}

fn drive(
    basis: &Basis,
    lower: Level,
    upper: Level,
    rabi: f64,
    phase: f64,
    diagonal: impl Fn(usize) -> f64,
) -> Result<OperatorMatrix> {
    let dim = basis.dim();
    let mut m = CMatrix::zeros(dim, dim);
    let up = C64::from_polar(rabi / 2.0, phase);
    let shift = upper as usize - lower as usize;
    for i in 0..dim {
        m[(i, i)] = c(diagonal(i));
        for a in 0..basis.atom_count() as usize {
            if basis.level(i, a) == lower {
                let j = i + shift * basis.stride(a);
                m[(j, i)] += up;
                m[(i, j)] += up.conj();
            }
        }
    }
    OperatorMatrix::hermitian(m)
}

/// Reduced Hamiltonians on an ordered set of collective states.
#[derive(Clone, Debug)]
pub struct SymmetricModel {
    pub states: Vec<Collective>,
    pub labels: Vec<String>,
    pub h_a: OperatorMatrix,
    pub h_b: OperatorMatrix,
    pub atom_count: u32,
}

impl SymmetricModel {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, which: Collective) -> Option<usize> {
        self.states.iter().position(|&s| s == which)
    }
}

struct Couplings {
    states: Vec<Collective>,
    a: Vec<(Collective, Collective, f64)>,
    b: Vec<(Collective, Collective, f64)>,
}

fn assemble(params: &PhysParams, spec: Couplings, pair_labels: bool) -> Result<SymmetricModel> {
    params.validate()?;
    if !params.uniform_interaction() {
        return Err(Error::InvalidParams(
            "symmetric models need a uniform r-r interaction".into(),
        ));
    }
    let dim = spec.states.len();
    let idx = |s: Collective| spec.states.iter().position(|&x| x == s).unwrap();
    let u_rr = params.pair_interaction(0, 1.min(params.atom_count as usize - 1));
    let mut ha = CMatrix::zeros(dim, dim);
    let mut hb = CMatrix::zeros(dim, dim);
    let ph = C64::from_polar(1.0, params.phase);
    // (upper, lower, coupling) with e^{iφ} on the raising element
    for &(hi, lo, g) in &spec.a {
        ha[(idx(hi), idx(lo))] += ph * g;
        ha[(idx(lo), idx(hi))] += ph.conj() * g;
    }
    for &(hi, lo, g) in &spec.b {
        hb[(idx(hi), idx(lo))] += ph * g;
        hb[(idx(lo), idx(hi))] += ph.conj() * g;
    }
    for (k, s) in spec.states.iter().enumerate() {
        let (ne, nr) = s.excitations();
        ha[(k, k)] += c(params.detuning_e * ne as f64);
        hb[(k, k)] += c(params.detuning_r * nr as f64);
        if nr == 2 {
            hb[(k, k)] += c(u_rr);
        }
    }
    let labels = spec
        .states
        .iter()
        .map(|s| {
            if pair_labels {
                s.pair_name().to_string()
            } else {
                s.name().to_string()
            }
        })
        .collect();
    Ok(SymmetricModel {
        states: spec.states,
        labels,
        h_a: OperatorMatrix::hermitian(ha)?,
        h_b: OperatorMatrix::hermitian(hb)?,
        atom_count: params.atom_count,
    })
}

/// Two-atom symmetric subspace {gg, W₂, ee, T₂, D₂} (+ rr).
pub fn two_atom_symmetric(params: &PhysParams, include_rr: bool) -> Result<SymmetricModel> {
    if params.atom_count != 2 {
        return Err(Error::InvalidParams(format!(
            "two-atom model needs atom_count = 2, got {}",
            params.atom_count
        )));
    }
    use Collective::*;
    let w = params.omega / 2.0;
    let o = params.omega_ryd / 2.0;
    let s2 = 2f64.sqrt();
    let mut states = vec![G, W, P, T, D];
    let a = vec![(W, G, s2 * w), (P, W, s2 * w), (D, T, w)];
    let mut b = vec![(T, W, o), (D, P, s2 * o)];
    if include_rr {
        states.push(R);
        b.push((R, D, s2 * o));
    }
    assemble(params, Couplings { states, a, b }, true)
}

/// Five-state collective model {G, W, P, T, D} for ℕ atoms in the blockade limit.
pub fn superatom_model(params: &PhysParams) -> Result<SymmetricModel> {
    if params.atom_count < 2 {
        return Err(Error::InvalidParams(
            "superatom model needs at least 2 atoms".into(),
        ));
    }
    use Collective::*;
    let n = params.atom_count as f64;
    let w = params.omega / 2.0;
    let o = params.omega_ryd / 2.0;
    let a = vec![
        (W, G, n.sqrt() * w),
        (P, W, (2.0 * (n - 1.0)).sqrt() * w),
        (D, T, (n - 1.0).sqrt() * w),
    ];
    let b = vec![(T, W, o), (D, P, 2f64.sqrt() * o)];
    assemble(
        params,
        Couplings {
            states: vec![G, W, P, T, D],
            a,
            b,
        },
        false,
    )
}

/// R_b = (C₆ / (√ℕ·Ω))^{1/6}, with C₆ in rad/µs·µm⁶. Returns µm.
pub fn blockade_radius(c6: f64, atom_count: u32, omega_ryd: f64) -> Result<f64> {
    if !(c6 > 0.0) || atom_count == 0 || !(omega_ryd > 0.0) {
        return Err(Error::InvalidParams(
            "blockade radius needs positive C6, atom count and Rabi frequency".into(),
        ));
    }
    Ok((c6 / ((atom_count as f64).sqrt() * omega_ryd)).powf(1.0 / 6.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoPhoton {
    /// Ω₁Ω₂/(2Δ)
    pub rabi: f64,
    /// |Δ| ≥ 10·max(Ω₁, Ω₂)
    pub adiabatic: bool,
}

/// Two-photon Rabi frequency after eliminating an intermediate level.
pub fn effective_two_photon(rabi_1: f64, rabi_2: f64, detuning: f64) -> Result<TwoPhoton> {
    if detuning == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let adiabatic = detuning.abs() >= 10.0 * rabi_1.abs().max(rabi_2.abs());
    if !adiabatic {
        log::warn!(
            "intermediate detuning {detuning} is not large against Rabi frequencies {rabi_1}, {rabi_2}"
        );
    }
    Ok(TwoPhoton {
        rabi: rabi_1 * rabi_2 / (2.0 * detuning),
        adiabatic,
    })
}
