//! Zeno projections, effective Floquet Hamiltonians and quasienergy sweeps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::PhysParams;
use crate::hilbert::{OperatorMatrix, StateVector};
use crate::linalg::{c, fix_column_phases, unitarity_deviation, unitary_eigen, CMatrix, C64};
use crate::model::{Model, ModelKind};
use crate::propagation::{floquet_cycle, unitary_of};

/// Default eigenphase clustering tolerance (rad).
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    /// φ with U = Σ exp(−iφ)·P, in (−π, π]
    pub eigenphases: Vec<f64>,
    pub projections: Vec<OperatorMatrix>,
}

impl SpectralDecomposition {
    pub fn ranks(&self) -> Vec<usize> {
        self.projections
            .iter()
            .map(|p| p.entries().trace().re.round() as usize)
            .collect()
    }
}

fn wrap(phi: f64) -> f64 {
    let mut x = phi.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Group eigenvectors of a unitary into eigenspace projectors.
pub fn spectral_projections(u: &OperatorMatrix, tol: f64) -> Result<SpectralDecomposition> {
    let n = u.dim();
    let (vals, vecs) = unitary_eigen(u.entries())?;
    let phases: Vec<f64> = vals.iter().map(|z| wrap(-z.arg())).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match groups.last_mut() {
            Some(g) if phases[k] - phases[*g.last().unwrap()] < tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    if groups.len() > 1 {
        let first = phases[groups[0][0]];
        let last = phases[*groups.last().unwrap().last().unwrap()];
        if first + 2.0 * PI - last < tol {
            let tail = groups.pop().unwrap();
            groups[0].extend(tail);
        }
    }

    let mut eigenphases = Vec::with_capacity(groups.len());
    let mut projections = Vec::with_capacity(groups.len());
    let mut total = CMatrix::zeros(n, n);
    for g in &groups {
        let mean: C64 = g.iter().map(|&k| vals[k]).sum::<C64>() / c(g.len() as f64);
        eigenphases.push(wrap(-mean.arg()));
        let mut p = CMatrix::zeros(n, n);
        for &k in g {
            let col = vecs.column(k);
            p += &col * col.adjoint();
        }
        total += &p;
        projections.push(OperatorMatrix::hermitian(p)?);
    }
    let dev = (total - CMatrix::identity(n, n)).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if dev > 1e-10 {
        let rank = projections.iter().map(|p| p.entries().trace().re).sum::<f64>();
        return Err(Error::IncompleteSpectrum {
            rank: rank.round() as usize,
            dim: n,
        });
    }
    Ok(SpectralDecomposition {
        eigenphases,
        projections,
    })
}

/// H_z = Σₙ Pₙ·H_a·Pₙ
pub fn zeno_hamiltonian(h_a: &OperatorMatrix, decomposition: &SpectralDecomposition) -> Result<OperatorMatrix> {
    let n = h_a.dim();
    let mut hz = CMatrix::zeros(n, n);
    for p in &decomposition.projections {
        h_a.check_dim(p.dim())?;
        hz += p.entries() * h_a.entries() * p.entries();
    }
    OperatorMatrix::hermitian(hz)
}

/// Zeno approximation of N cycles: U_b(t_b)^N · exp(−i·H_z·N·t_a).
pub fn effective_evolution(model: &Model, cycles: u32) -> Result<OperatorMatrix> {
    let p = model.protocol();
    let ub = unitary_of(model.h_b(), p.t_b)?;
    let dec = spectral_projections(&ub, CLUSTER_TOL)?;
    let hz = zeno_hamiltonian(model.h_a(), &dec)?;
    let zeno = unitary_of(&hz, cycles as f64 * p.t_a)?;
    ub.pow(cycles).compose(&zeno)
}

#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    /// descending, in (−π/T, π/T]
    pub quasienergies: Vec<f64>,
    /// columns match `quasienergies`
    pub vectors: CMatrix,
    pub h_eff: OperatorMatrix,
    pub period: f64,
}

impl EffectiveHamiltonian {
    pub fn vector(&self, k: usize) -> StateVector {
        StateVector::from_normalized(self.vectors.column(k).into_owned())
    }
}

/// Principal-branch logarithm of a cycle unitary: U_T = exp(−i·H_eff·T).
pub fn effective_hamiltonian_log(u_t: &OperatorMatrix, period: f64) -> Result<EffectiveHamiltonian> {
    if !(period > 0.0) {
        return Err(Error::InvalidParams("period must be positive".into()));
    }
    let deviation = unitarity_deviation(u_t.entries());
    if deviation > 1e-10 {
        return Err(Error::NotUnitary { deviation });
    }
    let n = u_t.dim();
    let (vals, vecs) = unitary_eigen(u_t.entries())?;
    let eps: Vec<f64> = vals
        .iter()
        .map(|z| {
            let x = -z.arg();
            // arg ∈ (−π, π] so −arg ∈ [−π, π); move the cut to (−π, π]
            if x <= -PI { PI / period } else { x / period }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eps[b].total_cmp(&eps[a]));
    let quasienergies: Vec<f64> = order.iter().map(|&k| eps[k]).collect();
    let mut vectors = CMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    fix_column_phases(&mut vectors);
    let mut scaled = vectors.clone();
    for (j, &e) in quasienergies.iter().enumerate() {
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= c(e));
    }
    let h = scaled * vectors.adjoint();
    Ok(EffectiveHamiltonian {
        quasienergies,
        vectors,
        h_eff: OperatorMatrix::hermitian(h)?,
        period,
    })
}

/// ε + 2πn/T
pub fn unfold_branch(quasienergy: f64, n: i32, period: f64) -> f64 {
    quasienergy + 2.0 * PI * n as f64 / period
}

/// Moduli of the effective couplings in the two-atom subspace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffectiveCouplings {
    /// ee ↔ D₂
    pub epsilon: f64,
    /// gg ↔ W₂
    pub mu: f64,
    /// ee ↔ W₂
    pub lambda: f64,
}

pub fn effective_couplings(h_eff: &OperatorMatrix, model: &Model) -> Result<EffectiveCouplings> {
    if model.params().atom_count != 2 {
        return Err(Error::InvalidParams(
            "effective couplings are defined for two atoms".into(),
        ));
    }
    let el = |a: &str, b: &str| -> Result<f64> {
        let sa = model.state(a)?;
        let sb = model.state(b)?;
        Ok(sa.inner(&sb.apply(h_eff)?).norm())
    };
    Ok(EffectiveCouplings {
        epsilon: el("ee", "D2")?,
        mu: el("gg", "W2")?,
        lambda: el("ee", "W2")?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case")]
pub enum SweepAxis {
    Cycles(Vec<u32>),
    UrrOverOmega(Vec<f64>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Cycles(_) => "cycles",
            SweepAxis::UrrOverOmega(_) => "urr_over_omega",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxis::Cycles(v) => v.len(),
            SweepAxis::UrrOverOmega(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            SweepAxis::Cycles(v) => v.iter().map(|&n| n as f64).collect(),
            SweepAxis::UrrOverOmega(v) => v.clone(),
        }
    }

    pub fn apply(&self, template: &PhysParams, k: usize) -> PhysParams {
        let mut p = template.clone();
        match self {
            SweepAxis::Cycles(v) => p.cycles = v[k],
            SweepAxis::UrrOverOmega(v) => p.u_rr = v[k] * p.omega_ryd,
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Branch {
    pub name: String,
    pub quasienergies: Vec<f64>,
    /// per sweep point, amplitude on each label
    pub compositions: Vec<Vec<C64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasienergySpectrum {
    pub axis: String,
    pub values: Vec<f64>,
    pub periods: Vec<f64>,
    pub labels: Vec<String>,
    pub branches: Vec<Branch>,
}

impl QuasienergySpectrum {
    pub fn branch(&self, name: &str) -> Option<&Branch> {
        self.branches.iter().find(|b| b.name == name)
    }

    pub fn modulus(&self, branch: &str, label: &str, point: usize) -> Option<f64> {
        let li = self.labels.iter().position(|l| l == label)?;
        Some(self.branch(branch)?.compositions[point][li].norm())
    }
}

/// Quasienergies along a one-parameter sweep with branches followed by
/// greedy maximal eigenvector overlap.
pub fn quasienergy_sweep(
    template: &PhysParams,
    kind: ModelKind,
    axis: &SweepAxis,
) -> Result<QuasienergySpectrum> {
    if axis.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut labels = Vec::new();
    let mut periods = Vec::new();
    let mut points: Vec<(Vec<f64>, Vec<StateVector>, Vec<Vec<C64>>)> = Vec::new();
    for k in 0..axis.len() {
        let params = axis.apply(template, k);
        let model = Model::build(kind, &params)?;
        if labels.is_empty() {
            labels = model.labels().to_vec();
        }
        let period = model.protocol().period();
        let heff = effective_hamiltonian_log(&floquet_cycle(&model)?, period)?;
        let vecs: Vec<StateVector> = (0..model.dim()).map(|j| heff.vector(j)).collect();
        let comps = vecs
            .iter()
            .map(|v| Ok(model.composition(v)?.into_iter().map(|(_, a)| a).collect()))
            .collect::<Result<Vec<Vec<C64>>>>()?;
        periods.push(period);
        points.push((heff.quasienergies, vecs, comps));
    }

    let dim = points[0].0.len();
    let mut branches: Vec<Branch> = (0..dim)
        .map(|b| Branch {
            name: format!("E{}", b + 1),
            quasienergies: vec![points[0].0[b]],
            compositions: vec![points[0].2[b].clone()],
        })
        .collect();
    // current eigenvector index carried by each branch
    let mut carried: Vec<usize> = (0..dim).collect();
    for k in 1..points.len() {
        let prev = &points[k - 1].1;
        let next = &points[k].1;
        let mut pairs = Vec::with_capacity(dim * dim);
        for b in 0..dim {
            for j in 0..dim {
                pairs.push((prev[carried[b]].overlap_sq(&next[j]), b, j));
            }
        }
        pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut taken_b = vec![false; dim];
        let mut taken_j = vec![false; dim];
        let mut assign = vec![0usize; dim];
        for (_, b, j) in pairs {
            if !taken_b[b] && !taken_j[j] {
                taken_b[b] = true;
                taken_j[j] = true;
                assign[b] = j;
            }
        }
        for b in 0..dim {
            let j = assign[b];
            branches[b].quasienergies.push(points[k].0[j]);
            branches[b].compositions.push(points[k].2[j].clone());
        }
        carried = assign;
    }

    Ok(QuasienergySpectrum {
        axis: axis.name().to_string(),
        values: axis.values(),
        periods,
        labels,
        branches,
    })
}

/// Distance between two quasienergies on the Brillouin circle of period T.
pub fn folded_gap(a: f64, b: f64, period: f64) -> f64 {
    let zone = 2.0 * PI / period;
    let d = (a - b).abs().rem_euclid(zone);
    d.min(zone - d)
}

/// Exact stroboscopic states against the Zeno approximation 𝒰_k, from the
/// ground state. The fidelity column is |⟨ψ_exact|ψ_zeno⟩|²; the populations
/// are the W weight of each.
pub fn zeno_comparison(model: &Model) -> Result<crate::record::TrajectoryRecord> {
    use crate::observables::Sample;
    use crate::record::TrajectoryRecord;

    let p = model.protocol();
    let ut = floquet_cycle(model)?;
    let ub = unitary_of(model.h_b(), p.t_b)?;
    let dec = spectral_projections(&ub, CLUSTER_TOL)?;
    let hz = zeno_hamiltonian(model.h_a(), &dec)?;
    let w = model.target();
    let mut rec = TrajectoryRecord {
        times: Vec::new(),
        cycles: Vec::new(),
        fidelity_target: "zeno".into(),
        fidelities: Vec::new(),
        populations: vec![("W".into(), Vec::new()), ("W_zeno".into(), Vec::new())],
        g2: None,
        meta: crate::propagation::meta_for(model),
    };
    let mut exact = model.ground();
    let mut ub_k = OperatorMatrix::identity(model.dim());
    for k in 0..=p.cycles {
        if k > 0 {
            exact = exact.apply(&ut)?;
            ub_k = ub.compose(&ub_k)?;
        }
        let zeno_op = ub_k.compose(&unitary_of(&hz, k as f64 * p.t_a)?)?;
        let zeno = model.ground().apply(&zeno_op)?;
        rec.push(
            k as f64 * p.period(),
            k,
            Sample {
                fidelity: exact.overlap_sq(&zeno),
                populations: vec![w.overlap_sq(&exact), w.overlap_sq(&zeno)],
                g2: None,
            },
        )?;
    }
    Ok(rec)
}
