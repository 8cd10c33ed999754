use std::f64::consts::PI;

use floquet_rydberg::error::Error;
use floquet_rydberg::floquet::*;
use floquet_rydberg::hamiltonians::PhysParams;
use floquet_rydberg::linalg::{c, expm_hermitian, max_abs, op_norm, CMatrix};
use floquet_rydberg::model::{Model, ModelKind};
use floquet_rydberg::propagation::{floquet_cycle, unitary_of};
use floquet_rydberg::OperatorMatrix;
use proptest::prelude::*;

fn pair(p: &PhysParams) -> Model {
    Model::build(ModelKind::Pair, p).unwrap()
}

fn projector(m: &Model, labels: &[&str]) -> CMatrix {
    let mut out = CMatrix::zeros(m.dim(), m.dim());
    for l in labels {
        let v = m.state(l).unwrap();
        out += v.amplitudes() * v.amplitudes().adjoint();
    }
    out
}

#[test]
fn stage_b_clusters() {
    let m = pair(&PhysParams::reference());
    let ub = unitary_of(m.h_b(), m.protocol().t_b).unwrap();
    let dec = spectral_projections(&ub, CLUSTER_TOL).unwrap();
    let mut ranks = dec.ranks();
    ranks.sort();
    assert_eq!(ranks, [1, 1, 3]);
    let k = dec.ranks().iter().position(|&r| r == 3).unwrap();
    assert!(dec.eigenphases[k].abs() < 1e-10);
    // the trivial eigenspace holds the states stage b leaves alone
    let p3 = projector(&m, &["gg", "W2", "T2"]);
    assert!(max_abs(&(dec.projections[k].entries() - &p3)) < 1e-10);
    let wrapped = (2.0 * 2f64.sqrt() * PI).rem_euclid(2.0 * PI);
    let wrapped = if wrapped > PI { wrapped - 2.0 * PI } else { wrapped };
    for (phi, r) in dec.eigenphases.iter().zip(dec.ranks()) {
        if r == 1 {
            assert!((phi.abs() - wrapped.abs()).abs() < 1e-10);
        }
    }
}

#[test]
fn projector_completeness() {
    let m = Model::full(&PhysParams { atom_count: 3, ..PhysParams::reference() }).unwrap();
    let ut = floquet_cycle(&m).unwrap();
    let dec = spectral_projections(&ut, CLUSTER_TOL).unwrap();
    let mut sum = CMatrix::zeros(m.dim(), m.dim());
    for (i, p) in dec.projections.iter().enumerate() {
        sum += p.entries();
        for q in &dec.projections[i + 1..] {
            assert!(max_abs(&(p.entries() * q.entries())) < 1e-10);
        }
        assert!(max_abs(&(p.entries() * p.entries() - p.entries())) < 1e-10);
    }
    assert!(max_abs(&(sum - CMatrix::identity(m.dim(), m.dim()))) < 1e-10);

    let id = OperatorMatrix::identity(4);
    let dec = spectral_projections(&id, CLUSTER_TOL).unwrap();
    assert_eq!(dec.ranks(), [4]);
}

#[test]
fn zeno_hamiltonian_forms() {
    let p = PhysParams::reference();
    let m = pair(&p);
    let ub = unitary_of(m.h_b(), m.protocol().t_b).unwrap();
    let dec = spectral_projections(&ub, CLUSTER_TOL).unwrap();
    let hz = zeno_hamiltonian(m.h_a(), &dec).unwrap();
    let mut expect = CMatrix::zeros(5, 5);
    expect[(0, 1)] = c(2f64.sqrt() * p.omega / 2.0);
    expect[(1, 0)] = expect[(0, 1)];
    assert!(max_abs(&(hz.entries() - expect)) < 1e-10);

    let single = spectral_projections(&OperatorMatrix::identity(5), CLUSTER_TOL).unwrap();
    let hz = zeno_hamiltonian(m.h_a(), &single).unwrap();
    assert!(max_abs(&(hz.entries() - m.h_a().entries())) < 1e-14);

    let sp = PhysParams { atom_count: 50, ..p };
    let sa = Model::superatom(&sp).unwrap();
    let ub = unitary_of(sa.h_b(), sa.protocol().t_b).unwrap();
    let hz = zeno_hamiltonian(sa.h_a(), &spectral_projections(&ub, CLUSTER_TOL).unwrap()).unwrap();
    let mut expect = CMatrix::zeros(5, 5);
    expect[(0, 1)] = c(50f64.sqrt() * sp.omega / 2.0);
    expect[(1, 0)] = expect[(0, 1)];
    assert!(max_abs(&(hz.entries() - expect)) < 1e-10);

    assert!(zeno_hamiltonian(&OperatorMatrix::identity(3), &single).is_err());
}

#[test]
fn zeno_limit_and_convergence() {
    let p = PhysParams::reference();
    let m = pair(&p);
    let zeno = effective_evolution(&m, 20).unwrap();
    let exact = floquet_cycle(&m).unwrap().pow(20);
    let g = m.ground();
    let fz = g.apply(&zeno).unwrap().overlap_sq(&m.target());
    let fe = g.apply(&exact).unwrap().overlap_sq(&m.target());
    assert!(fz >= 0.99 && fe >= 0.99);
    assert!((fz - fe).abs() < 1e-2);

    let mut last = f64::INFINITY;
    for n in [5, 10, 20, 40] {
        let m = pair(&PhysParams { cycles: n, ..p.clone() });
        let diff = floquet_cycle(&m).unwrap().pow(n).entries() - effective_evolution(&m, n).unwrap().entries();
        let d = op_norm(&diff);
        assert!(d < last, "N = {n}: {d} !< {last}");
        last = d;
    }
}

#[test]
fn zeno_without_stage_a() {
    let reference = PhysParams::reference();
    let p = PhysParams { omega: 0.0, ..reference.clone() };
    let m = Model::build_with_protocol(ModelKind::Pair, &p, reference.protocol()).unwrap();
    let ub = unitary_of(m.h_b(), m.protocol().t_b).unwrap();
    let z = effective_evolution(&m, 7).unwrap();
    assert!(max_abs(&(z.entries() - ub.pow(7).entries())) < 1e-10);
}

#[test]
fn log_inverts_exp() {
    let m = Model::full(&PhysParams { atom_count: 2, ..PhysParams::reference() }).unwrap();
    let h = m.h_a().entries() * c(0.01) + m.h_b().entries() * c(0.001);
    let t = 1.0;
    let u = OperatorMatrix::unitary(expm_hermitian(&h, t)).unwrap();
    let eff = effective_hamiltonian_log(&u, t).unwrap();
    assert!(max_abs(&(eff.h_eff.entries() - h)) < 1e-9);
    for w in eff.quasienergies.windows(2) {
        assert!(w[0] >= w[1]);
    }

    let eff = effective_hamiltonian_log(&OperatorMatrix::identity(3), 2.0).unwrap();
    assert!(max_abs(eff.h_eff.entries()) < 1e-14);

    assert!(effective_hamiltonian_log(&OperatorMatrix::identity(3), 0.0).is_err());
    let bad = OperatorMatrix::general(CMatrix::identity(2, 2) * c(2.0)).unwrap();
    assert!(effective_hamiltonian_log(&bad, 1.0).is_err());
}

#[test]
fn third_branch_is_t2() {
    let p = PhysParams { cycles: 60, ..PhysParams::reference() };
    let m = Model::build(ModelKind::PairRr, &p).unwrap();
    let eff = effective_hamiltonian_log(&floquet_cycle(&m).unwrap(), m.protocol().period()).unwrap();
    let t2 = m.state("T2").unwrap();
    let best = (0..6).map(|k| eff.vector(k).overlap_sq(&t2)).fold(0.0, f64::max);
    assert!(1.0 - best < 1e-2);
}

#[test]
fn couplings_shrink_with_cycles() {
    let mut prev: Option<EffectiveCouplings> = None;
    for n in [10, 20, 40] {
        let m = pair(&PhysParams { cycles: n, ..PhysParams::reference() });
        let eff = effective_hamiltonian_log(&floquet_cycle(&m).unwrap(), m.protocol().period()).unwrap();
        let k = effective_couplings(&eff.h_eff, &m).unwrap();
        if let Some(q) = prev {
            assert!(k.mu < q.mu);
            assert!(k.lambda < q.lambda);
        }
        prev = Some(k);
    }
    let sa = Model::superatom(&PhysParams { atom_count: 3, ..PhysParams::reference() }).unwrap();
    assert!(effective_couplings(&OperatorMatrix::identity(5), &sa).is_err());
}

#[test]
fn unfolding() {
    let t = 0.4;
    assert_eq!(unfold_branch(1.3, 0, t), 1.3);
    let back = unfold_branch(unfold_branch(1.3, -1, t), 1, t);
    assert!((back - 1.3).abs() < 1e-12);
    assert!((unfold_branch(0.0, 1, t) - 2.0 * PI / t).abs() < 1e-12);
    assert!(folded_gap(PI / t - 0.01, -PI / t + 0.01, t) < 0.021);
}

#[test]
fn sweep_over_cycles() {
    let axis = SweepAxis::Cycles(vec![5, 10, 20, 40, 80]);
    let s = quasienergy_sweep(&PhysParams::reference(), ModelKind::Pair, &axis).unwrap();
    assert_eq!(s.branches.len(), 5);
    assert_eq!(s.values.len(), 5);
    // E2..E4 approach zero as N grows
    for name in ["E2", "E3", "E4"] {
        let b = s.branch(name).unwrap();
        assert!(b.quasienergies[4].abs() < b.quasienergies[0].abs() || b.quasienergies[4].abs() < 0.05);
    }
    for (k, _) in s.values.iter().enumerate() {
        let mut total = 0.0;
        for b in &s.branches {
            let w: f64 = b.compositions[k].iter().map(|z| z.norm_sqr()).sum();
            assert!((w - 1.0).abs() < 1e-10);
            total += b.compositions[k][0].norm_sqr();
        }
        // bijection: the branch vectors stay an orthonormal set
        assert!((total - 1.0).abs() < 1e-10);
    }
}

#[test]
fn empty_grid_rejected() {
    let err = quasienergy_sweep(&PhysParams::reference(), ModelKind::Pair, &SweepAxis::Cycles(vec![])).unwrap_err();
    assert!(matches!(err, Error::EmptyGrid));
}

#[test]
fn zeno_comparison_columns() {
    let m = pair(&PhysParams::reference());
    let rec = zeno_comparison(&m).unwrap();
    assert_eq!(rec.len(), 21);
    assert!((rec.fidelities[0] - 1.0).abs() < 1e-12);
    assert!(rec.population("W_zeno").is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn log_reproduces_cycle(n in 5u32..60, urr in 0.1f64..5.0) {
        let p = PhysParams { cycles: n, u_rr: urr * 10.0 * PI, ..PhysParams::reference() };
        let m = Model::build(ModelKind::PairRr, &p).unwrap();
        let ut = floquet_cycle(&m).unwrap();
        let period = m.protocol().period();
        let eff = effective_hamiltonian_log(&ut, period).unwrap();
        let cut = eff.quasienergies.iter().map(|e| (PI / period - e.abs()) * period).fold(f64::INFINITY, f64::min);
        prop_assume!(cut > 1e-6);
        let back = expm_hermitian(eff.h_eff.entries(), period);
        prop_assert!(op_norm(&(back - ut.entries())) < 1e-9);
    }
}
