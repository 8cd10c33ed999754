//! Lindblad dynamics with r-level decay.
//!
//! The density matrix is propagated in Liouville space. When the generator
//! and the initial state are invariant under atom permutations only one
//! representative per permutation orbit of (row, column) pairs is kept.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{hamiltonian_a, hamiltonian_b, PhysParams};
use crate::hilbert::{embed_single_atom, transition, Basis, Level, OperatorMatrix, StateVector};
use crate::linalg::{eigh, hermitian_deviation, CMatrix, CVector, C64};
use crate::model::Model;
use crate::noise::{cycle_params, NoisePlan, NoiseSampler, NoiseSource};
use crate::observables::{ObservableSpec, Observers};
use crate::propagation::meta_for;
use crate::record::TrajectoryRecord;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = -1e-7;
/// Maximum trace change per cycle before the step is declared too coarse.
pub const DRIFT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn pure(state: &StateVector) -> Self {
        let v = state.amplitudes();
        DensityMatrix {
            entries: v * v.adjoint(),
        }
    }

    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(entries: CMatrix) -> Result<Self> {
        let rho = DensityMatrix { entries };
        rho.check(0)?;
        Ok(rho)
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.entries).0.first().copied().unwrap_or(0.0)
    }

    pub fn check(&self, sample: usize) -> Result<()> {
        let h = hermitian_deviation(&self.entries);
        if h > HERMITICITY_TOL {
            return Err(Error::Invariant {
                what: "density-matrix Hermiticity",
                value: h,
                sample,
            });
        }
        let t = (self.trace() - 1.0).abs();
        if t > TRACE_TOL {
            return Err(Error::Invariant {
                what: "density-matrix trace drift",
                value: t,
                sample,
            });
        }
        let m = self.min_eigenvalue();
        if m < POSITIVITY_TOL {
            return Err(Error::Invariant {
                what: "density-matrix minimum eigenvalue",
                value: m,
                sample,
            });
        }
        Ok(())
    }
}

/// Jump operators with their rates: D[ρ] = Σ γⱼ (LⱼρLⱼ† − ½{Lⱼ†Lⱼ, ρ}).
#[derive(Clone, Debug)]
pub struct CollapseSet {
    pub ops: Vec<(OperatorMatrix, f64)>,
}

/// r→e and r→g on every atom, each at rate γ/2. Empty when γ = 0.
pub fn collapse_ops(basis: &Basis, gamma: f64) -> Result<CollapseSet> {
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidParams("gamma must be finite and non-negative".into()));
    }
    let mut ops = Vec::new();
    if gamma > 0.0 {
        for a in 0..basis.atom_count() as usize {
            for to in [Level::E, Level::G] {
                ops.push((embed_single_atom(&transition(to, Level::R), a, basis)?, gamma / 2.0));
            }
        }
    }
    Ok(CollapseSet { ops })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Chebyshev expansion of each constant-generator segment
    #[default]
    Chebyshev,
    /// fixed-step fourth-order Runge–Kutta
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub integrator: Integrator,
    /// Multiplies the base step (RK4: 0.02/f_max; Chebyshev: chunks with t·‖L‖ ≤ 800).
    pub step_scale: f64,
    /// Force full Liouville space even for symmetric problems.
    pub full_space: bool,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            integrator: Integrator::Chebyshev,
            step_scale: 1.0,
            full_space: false,
        }
    }
}

impl StepControl {
    pub fn rk4() -> Self {
        StepControl {
            integrator: Integrator::Rk4,
            ..Default::default()
        }
    }

    pub fn halved(&self) -> Self {
        StepControl {
            step_scale: self.step_scale / 2.0,
            ..*self
        }
    }
}

/// Liouville coordinates: one stored value per orbit of (row, col) pairs.
struct Coords {
    d: usize,
    coord_of: Vec<u32>,
    reps: Vec<(usize, usize)>,
}

impl Coords {
    fn full(d: usize) -> Self {
        Coords {
            d,
            coord_of: (0..(d * d) as u32).collect(),
            reps: (0..d * d).map(|p| (p / d, p % d)).collect(),
        }
    }

    /// Orbits under simultaneous permutation of atoms on both indices. An
    /// orbit is identified by the multiset of per-atom (row level, col level).
    fn symmetric(basis: &Basis) -> Self {
        let d = basis.dim();
        let n = basis.atom_count() as usize;
        let mut coord_of = vec![0u32; d * d];
        let mut reps = Vec::new();
        let mut seen: HashMap<u64, u32> = HashMap::new();
        let rl: Vec<Vec<usize>> = (0..d)
            .map(|i| basis.levels(i).iter().map(|&l| l as usize).collect())
            .collect();
        for r in 0..d {
            for c in 0..d {
                let mut counts = [0u64; 9];
                for a in 0..n {
                    counts[rl[r][a] * 3 + rl[c][a]] += 1;
                }
                let key = counts.iter().fold(0u64, |k, &x| k * (n as u64 + 1) + x);
                let next = reps.len() as u32;
                let id = *seen.entry(key).or_insert_with(|| {
                    reps.push((r, c));
                    next
                });
                coord_of[r * d + c] = id;
            }
        }
        Coords { d, coord_of, reps }
    }

    fn len(&self) -> usize {
        self.reps.len()
    }

    fn at(&self, r: usize, c: usize) -> usize {
        self.coord_of[r * self.d + c] as usize
    }

    fn reduce(&self, rho: &CMatrix) -> CVector {
        CVector::from_iterator(self.len(), self.reps.iter().map(|&(r, c)| rho[(r, c)]))
    }

    fn expand(&self, v: &CVector) -> CMatrix {
        CMatrix::from_fn(self.d, self.d, |r, c| v[self.at(r, c)])
    }
}

/// Sparse Liouvillian in CSR form over the stored coordinates.
struct Generator {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<C64>,
    /// bound on |Im λ|
    span: f64,
    /// bound on |Re λ|
    damping: f64,
}

fn sparse_rows(m: &CMatrix) -> Vec<Vec<(usize, C64)>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .filter_map(|j| {
                    let z = m[(i, j)];
                    (z.norm() > 0.0).then_some((j, z))
                })
                .collect()
        })
        .collect()
}

impl Generator {
    fn build(coords: &Coords, h: &CMatrix, collapse: &CollapseSet) -> Generator {
        let d = coords.d;
        let i = C64::new(0.0, 1.0);
        let mut k = CMatrix::zeros(d, d);
        for (l, g) in &collapse.ops {
            k += l.entries().adjoint() * l.entries() * C64::new(*g, 0.0);
        }
        // G = H − iK/2,  Lρ = −iGρ + iρG† + Σ γ LρL†
        let g = h - &k * C64::new(0.0, 0.5);
        let g_rows = sparse_rows(&g);
        let jumps: Vec<(Vec<Vec<(usize, C64)>>, f64)> = collapse
            .ops
            .iter()
            .map(|(l, rate)| (sparse_rows(l.entries()), *rate))
            .collect();

        let mut row_ptr = Vec::with_capacity(coords.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut acc: Vec<(u32, C64)> = Vec::new();
        row_ptr.push(0);
        for &(r, c) in &coords.reps {
            acc.clear();
            for &(kk, z) in &g_rows[r] {
                acc.push((coords.at(kk, c) as u32, -i * z));
            }
            for &(kk, z) in &g_rows[c] {
                acc.push((coords.at(r, kk) as u32, i * z.conj()));
            }
            for (rows, rate) in &jumps {
                for &(a, la) in &rows[r] {
                    for &(b, lb) in &rows[c] {
                        acc.push((coords.at(a, b) as u32, la * lb.conj() * *rate));
                    }
                }
            }
            acc.sort_by_key(|e| e.0);
            let mut last: Option<u32> = None;
            for &(col, z) in acc.iter() {
                if last == Some(col) {
                    *vals.last_mut().unwrap() += z;
                } else {
                    cols.push(col);
                    vals.push(z);
                    last = Some(col);
                }
            }
            row_ptr.push(cols.len());
        }

        // Gershgorin bounds on the spectrum of H and on the decay rates
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for r in 0..d {
            let radius: f64 = (0..d).filter(|&j| j != r).map(|j| h[(r, j)].norm()).sum();
            hi = hi.max(h[(r, r)].re + radius);
            lo = lo.min(h[(r, r)].re - radius);
        }
        let damping = (0..d)
            .map(|r| (0..d).map(|j| k[(r, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        Generator {
            row_ptr,
            cols,
            vals,
            span: (hi - lo).max(0.0),
            damping,
        }
    }

    fn apply(&self, v: &[C64], out: &mut [C64]) {
        for (row, o) in out.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for idx in self.row_ptr[row]..self.row_ptr[row + 1] {
                s += self.vals[idx] * v[self.cols[idx] as usize];
            }
            *o = s;
        }
    }
}

/// J_0(x)..J_K(x), truncated once terms past x fall below 1e-18.
fn bessel_j_series(x: f64) -> Vec<f64> {
    if x == 0.0 {
        return vec![1.0];
    }
    let kmax = (x + 20.0 * x.cbrt() + 30.0).ceil() as usize;
    let m = kmax + 20 + (160.0 * kmax as f64).sqrt() as usize;
    let m = m + (m % 2);
    let mut j = vec![0.0f64; m + 2];
    j[m] = 1e-300;
    for k in (1..=m).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j[k - 1..=m].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let norm = j[0] + 2.0 * (2..=m).step_by(2).map(|k| j[k]).sum::<f64>();
    let mut out: Vec<f64> = j[..=kmax].iter().map(|v| v / norm).collect();
    while out.len() > 1 && (out.len() as f64) > x + 1.0 && out.last().unwrap().abs() < 1e-18 {
        out.pop();
    }
    out
}

const CHEB_CHUNK: f64 = 800.0;

fn propagate_chebyshev(gen: &Generator, v: &mut CVector, t: f64, step_scale: f64) {
    let a = 1.02 * gen.span + 2.0 * gen.damping + 1e-12;
    let beta = gen.damping;
    let total = t * a;
    let chunks = (total / (CHEB_CHUNK * step_scale)).ceil().max(1.0) as usize;
    let h = t / chunks as f64;
    let x = h * a;
    let coeffs = bessel_j_series(x);
    let n = v.len();
    let i = C64::new(0.0, 1.0);
    let mut w_prev = vec![C64::new(0.0, 0.0); n];
    let mut w_cur = vec![C64::new(0.0, 0.0); n];
    let mut w_next = vec![C64::new(0.0, 0.0); n];
    let mut lw = vec![C64::new(0.0, 0.0); n];
    let mut sum = vec![C64::new(0.0, 0.0); n];
    // X = (L + β)/(i·a)
    let apply_x = |src: &[C64], lw: &mut [C64], dst: &mut [C64]| {
        gen.apply(src, lw);
        for ((d, l), s) in dst.iter_mut().zip(lw.iter()).zip(src) {
            *d = -i * (*l + *s * beta) / a;
        }
    };
    for _ in 0..chunks {
        w_prev.copy_from_slice(v.as_slice());
        for (s, w) in sum.iter_mut().zip(&w_prev) {
            *s = *w * coeffs[0];
        }
        if coeffs.len() > 1 {
            apply_x(&w_prev, &mut lw, &mut w_cur);
            let c1 = i * (2.0 * coeffs[1]);
            for (s, w) in sum.iter_mut().zip(&w_cur) {
                *s += *w * c1;
            }
            let mut ik = i;
            for &jk in &coeffs[2..] {
                ik *= i;
                apply_x(&w_cur, &mut lw, &mut w_next);
                let ck = ik * (2.0 * jk);
                for idx in 0..n {
                    let nx = 2.0 * w_next[idx] - w_prev[idx];
                    w_next[idx] = nx;
                    sum[idx] += nx * ck;
                }
                std::mem::swap(&mut w_prev, &mut w_cur);
                std::mem::swap(&mut w_cur, &mut w_next);
            }
        }
        let decay = (-h * beta).exp();
        for (dst, s) in v.iter_mut().zip(&sum) {
            *dst = *s * decay;
        }
    }
}

fn propagate_rk4(gen: &Generator, v: &mut CVector, t: f64, dt_base: f64) {
    let steps = (t / dt_base).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let n = v.len();
    let zero = C64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    for _ in 0..steps {
        let x = v.as_slice();
        gen.apply(x, &mut k1);
        for j in 0..n {
            tmp[j] = x[j] + k1[j] * (h / 2.0);
        }
        gen.apply(&tmp, &mut k2);
        for j in 0..n {
            tmp[j] = x[j] + k2[j] * (h / 2.0);
        }
        gen.apply(&tmp, &mut k3);
        for j in 0..n {
            tmp[j] = x[j] + k3[j] * h;
        }
        gen.apply(&tmp, &mut k4);
        for (j, z) in v.iter_mut().enumerate() {
            *z += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
        }
    }
}

/// Largest frequency entering the RK4 step rule: the drives, detunings and
/// the total interaction energy of the all-r configuration.
fn max_frequency(p: &PhysParams) -> f64 {
    let n = p.atom_count as usize;
    let mut urr_total = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            urr_total += p.pair_interaction(a, b);
        }
    }
    [p.omega, p.omega_ryd, urr_total, p.detuning_e.abs(), p.detuning_r.abs()]
        .into_iter()
        .fold(0.0, f64::max)
}

fn permutation_invariant(basis: &Basis, m: &CMatrix) -> bool {
    let n = basis.atom_count() as usize;
    let d = basis.dim();
    let scale = m.iter().fold(1.0f64, |a, z| a.max(z.norm()));
    for a in 0..n.saturating_sub(1) {
        let swap = |i: usize| {
            let (sa, sb) = (basis.stride(a), basis.stride(a + 1));
            let la = (i / sa) % 3;
            let lb = (i / sb) % 3;
            i - la * sa - lb * sb + lb * sa + la * sb
        };
        for r in 0..d {
            for c in 0..d {
                if (m[(swap(r), swap(c))] - m[(r, c)]).norm() > 1e-12 * scale {
                    return false;
                }
            }
        }
    }
    true
}

/// Lindblad evolution over the full protocol, sampled after every cycle.
pub fn master_evolve(
    rho0: &DensityMatrix,
    model: &Model,
    noise: Option<&NoisePlan>,
    step: &StepControl,
    observers: &[ObservableSpec],
) -> Result<TrajectoryRecord> {
    match noise {
        Some(plan) => {
            let mut sampler = NoiseSampler::new(plan)?;
            let mut rec = master_evolve_with(rho0, model, Some(&mut sampler), step, observers)?;
            rec.meta.seed = Some(plan.seed);
            Ok(rec)
        }
        None => master_evolve_with(rho0, model, None, step, observers),
    }
}

/// As [`master_evolve`] with an explicit noise source (sampler or replay).
pub fn master_evolve_with(
    rho0: &DensityMatrix,
    model: &Model,
    mut noise: Option<&mut dyn NoiseSource>,
    step: &StepControl,
    observers: &[ObservableSpec],
) -> Result<TrajectoryRecord> {
    let basis = model
        .basis()
        .ok_or_else(|| Error::InvalidParams("master equation needs the full product space".into()))?
        .clone();
    if rho0.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: rho0.dim(),
        });
    }
    if !(step.step_scale > 0.0 && step.step_scale.is_finite()) {
        return Err(Error::InvalidParams("step_scale must be positive".into()));
    }
    let obs = Observers::resolve(observers, model)?;
    let base = model.params().clone();
    let protocol = model.protocol();
    let collapse = collapse_ops(&basis, base.gamma)?;

    let symmetric = !step.full_space
        && base.uniform_interaction()
        && permutation_invariant(&basis, rho0.entries())
        && permutation_invariant(&basis, model.h_a().entries())
        && permutation_invariant(&basis, model.h_b().entries());
    let coords = if symmetric {
        Coords::symmetric(&basis)
    } else {
        Coords::full(basis.dim())
    };

    let mut meta = meta_for(model);
    meta.integrator = Some(
        match step.integrator {
            Integrator::Chebyshev => "chebyshev",
            Integrator::Rk4 => "rk4",
        }
        .to_string(),
    );
    let mut rec = TrajectoryRecord::empty(&obs, meta);

    let quiet = noise.as_ref().map(|n| n.plan().is_quiet()).unwrap_or(true);
    let build = |p: &PhysParams, stage_a: bool| -> Result<(Generator, f64)> {
        let h = if stage_a {
            hamiltonian_a(&basis, p)?
        } else {
            hamiltonian_b(&basis, p)?
        };
        Ok((Generator::build(&coords, h.entries(), &collapse), 0.02 / max_frequency(p)))
    };
    let fixed = if quiet {
        Some((build(&base, true)?, build(&base, false)?))
    } else {
        None
    };

    let mut v = coords.reduce(rho0.entries());
    let sample = |v: &CVector, k: u32, rec: &mut TrajectoryRecord| -> Result<f64> {
        let rho = DensityMatrix {
            entries: coords.expand(v),
        };
        rho.check(rec.len())?;
        rec.push(k as f64 * protocol.period(), k, obs.measure_density(rho.entries())?)?;
        Ok(rho.trace())
    };
    let mut trace = sample(&v, 0, &mut rec)?;

    for k in 0..protocol.cycles {
        let owned;
        let (ga, gb) = match &fixed {
            Some((a, b)) => (a, b),
            None => {
                let src = noise.as_deref_mut().expect("noisy run has a source");
                let (pa, pb) = cycle_params(&base, src, k)?;
                owned = (build(&pa, true)?, build(&pb, false)?);
                (&owned.0, &owned.1)
            }
        };
        for ((gen, dt), t) in [(ga, protocol.t_a), (gb, protocol.t_b)] {
            match step.integrator {
                Integrator::Chebyshev => propagate_chebyshev(gen, &mut v, t, step.step_scale),
                Integrator::Rk4 => propagate_rk4(gen, &mut v, t, dt * step.step_scale),
            }
        }
        let rho_trace = coords.expand(&v).trace().re;
        let drift = (rho_trace - trace).abs();
        if drift > DRIFT_TOL || !rho_trace.is_finite() {
            return Err(Error::StepTooCoarse { cycle: k, drift });
        }
        trace = sample(&v, k + 1, &mut rec)?;
    }
    if let Some(src) = noise {
        rec.meta.draws = src.log().to_vec();
    }
    Ok(rec)
}
