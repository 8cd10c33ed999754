use std::f64::consts::PI;

use floquet_rydberg::error::Error;
use floquet_rydberg::hamiltonians::*;
use floquet_rydberg::hilbert::*;
use floquet_rydberg::linalg::{c, max_abs, CMatrix};

use Collective::*;

fn params(n: u32) -> PhysParams {
    PhysParams {
        atom_count: n,
        ..PhysParams::reference()
    }
}

fn restrict(h: &CMatrix, states: &[StateVector]) -> CMatrix {
    CMatrix::from_fn(states.len(), states.len(), |i, j| {
        states[i].amplitudes().dotc(&(h * states[j].amplitudes()))
    })
}

#[test]
fn single_atom_stage_a() {
    let b = Basis::new(1).unwrap();
    let h = hamiltonian_a(&b, &params(1)).unwrap();
    let mut expect = CMatrix::zeros(3, 3);
    expect[(0, 1)] = c(PI);
    expect[(1, 0)] = c(PI);
    assert!(max_abs(&(h.entries() - expect)) < 1e-14);

    let p = PhysParams {
        detuning_e: 0.7,
        ..params(1)
    };
    let h = hamiltonian_a(&b, &p).unwrap();
    assert!((h.entries()[(1, 1)].re - 0.7).abs() < 1e-15);
    assert_eq!(h.entries()[(2, 2)], c(0.0));
}

#[test]
fn stage_b_interactions() {
    let p = params(2);
    let b = Basis::new(2).unwrap();
    let h = hamiltonian_b(&b, &p).unwrap();
    let rr = b.index(&[Level::R, Level::R]).unwrap();
    assert!((h.entries()[(rr, rr)].re - p.u_rr).abs() < 1e-9);

    let b3 = Basis::new(3).unwrap();
    let h3 = hamiltonian_b(&b3, &params(3)).unwrap();
    let rrr = b3.dim() - 1;
    assert!((h3.entries()[(rrr, rrr)].re - 3.0 * p.u_rr).abs() < 1e-9);

    let quiet = PhysParams {
        omega_ryd: 0.0,
        u_rr: 0.0,
        detuning_r: 0.3,
        ..params(2)
    };
    let h = hamiltonian_b(&b, &quiet).unwrap();
    for i in 0..9 {
        for j in 0..9 {
            let expect = if i == j { 0.3 * b.count(i, Level::R) as f64 } else { 0.0 };
            assert!((h.entries()[(i, j)] - c(expect)).norm() < 1e-15);
        }
    }
}

#[test]
fn pair_interaction_matrix() {
    let mut p = params(3);
    p.urr_pairs = Some(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 3.0], vec![2.0, 3.0, 0.0]]);
    let b = Basis::new(3).unwrap();
    let h = hamiltonian_b(&b, &p).unwrap();
    assert!((h.entries()[(26, 26)].re - 6.0).abs() < 1e-12);
    let rrg = b.index(&[Level::R, Level::R, Level::G]).unwrap();
    assert!((h.entries()[(rrg, rrg)].re - 1.0).abs() < 1e-12);
    assert!(!p.uniform_interaction());
    assert!(two_atom_symmetric(&PhysParams { urr_pairs: Some(vec![vec![0.0, 1.0], vec![2.0, 0.0]]), ..params(2) }, false).is_err());
}

#[test]
fn two_atom_matrices() {
    let p = params(2);
    let m = two_atom_symmetric(&p, false).unwrap();
    assert_eq!(m.labels, ["gg", "W2", "ee", "T2", "D2"]);
    let (w, o, s2) = (p.omega / 2.0, p.omega_ryd / 2.0, 2f64.sqrt());
    let mut ha = CMatrix::zeros(5, 5);
    let mut hb = CMatrix::zeros(5, 5);
    for (i, j, v) in [(0, 1, s2 * w), (1, 2, s2 * w), (3, 4, w)] {
        ha[(i, j)] = c(v);
        ha[(j, i)] = c(v);
    }
    for (i, j, v) in [(1, 3, o), (2, 4, s2 * o)] {
        hb[(i, j)] = c(v);
        hb[(j, i)] = c(v);
    }
    assert!(max_abs(&(m.h_a.entries() - &ha)) < 1e-12);
    assert!(max_abs(&(m.h_b.entries() - &hb)) < 1e-12);

    let m6 = two_atom_symmetric(&p, true).unwrap();
    assert_eq!(m6.dim(), 6);
    assert_eq!(m6.labels[5], "rr");
    let sub = |x: &CMatrix| x.view((0, 0), (5, 5)).into_owned();
    assert_eq!(sub(m6.h_a.entries()), *m.h_a.entries());
    assert_eq!(sub(m6.h_b.entries()), *m.h_b.entries());
    assert!((m6.h_b.entries()[(4, 5)].re - s2 * o).abs() < 1e-12);
    assert!((m6.h_b.entries()[(5, 5)].re - p.u_rr).abs() < 1e-9);

    assert!(two_atom_symmetric(&params(3), false).is_err());
}

#[test]
fn superatom_elements() {
    let two = superatom_model(&params(2)).unwrap();
    let pair = two_atom_symmetric(&params(2), false).unwrap();
    assert!(max_abs(&(two.h_a.entries() - pair.h_a.entries())) < 1e-12);
    assert!(max_abs(&(two.h_b.entries() - pair.h_b.entries())) < 1e-12);

    for n in [3, 17, 500] {
        let p = PhysParams {
            atom_count: n,
            ..PhysParams::reference()
        };
        let m = superatom_model(&p).unwrap();
        let at = |h: &floquet_rydberg::OperatorMatrix, a: Collective, b: Collective| {
            h.entries()[(m.index_of(a).unwrap(), m.index_of(b).unwrap())].re
        };
        let nf = n as f64;
        assert!((at(&m.h_a, W, G) - nf.sqrt() * p.omega / 2.0).abs() < 1e-12);
        assert!((at(&m.h_a, P, W) - (2.0 * (nf - 1.0)).sqrt() * p.omega / 2.0).abs() < 1e-12);
        assert!((at(&m.h_a, D, T) - (nf - 1.0).sqrt() * p.omega / 2.0).abs() < 1e-12);
        assert!((at(&m.h_b, D, P) - 2f64.sqrt() * p.omega_ryd / 2.0).abs() < 1e-12);
        assert!((at(&m.h_b, T, W) - p.omega_ryd / 2.0).abs() < 1e-12);
    }
    assert!(superatom_model(&params(1)).is_err());
}

#[test]
fn full_space_restriction_matches_reduced() {
    let pair = two_atom_symmetric(&params(2), false).unwrap();
    let b2 = Basis::new(2).unwrap();
    let states: Vec<_> = pair.states.iter().map(|&s| collective_state(s, &b2).unwrap()).collect();
    let ha = restrict(hamiltonian_a(&b2, &params(2)).unwrap().entries(), &states);
    let hb = restrict(hamiltonian_b(&b2, &params(2)).unwrap().entries(), &states);
    assert!(max_abs(&(ha - pair.h_a.entries())) < 1e-12);
    assert!(max_abs(&(hb - pair.h_b.entries())) < 1e-12);

    for n in 3..=4 {
        let p = params(n);
        let sa = superatom_model(&p).unwrap();
        let b = Basis::new(n).unwrap();
        let states: Vec<_> = sa.states.iter().map(|&s| collective_state(s, &b).unwrap()).collect();
        let ha = restrict(hamiltonian_a(&b, &p).unwrap().entries(), &states);
        let hb = restrict(hamiltonian_b(&b, &p).unwrap().entries(), &states);
        assert!(max_abs(&(ha - sa.h_a.entries())) < 1e-12, "h_a, {n} atoms");
        assert!(max_abs(&(hb - sa.h_b.entries())) < 1e-12, "h_b, {n} atoms");
    }
}

#[test]
fn phase_enters_raising_elements() {
    let p = PhysParams {
        phase: 0.4,
        ..params(2)
    };
    let m = two_atom_symmetric(&p, false).unwrap();
    let z = m.h_a.entries()[(1, 0)];
    assert!((z.arg() - 0.4).abs() < 1e-12);
    assert!((m.h_a.entries()[(0, 1)] - z.conj()).norm() < 1e-15);
}

#[test]
fn timing() {
    let p = PhysParams::reference();
    assert!((p.t_a() - PI / (2f64.sqrt() * 20.0 * p.omega)).abs() < 1e-15);
    assert!((p.t_b() - 4.0 * PI / p.omega_ryd).abs() < 1e-15);
    assert!((p.period() - p.t_a() - p.t_b()).abs() < 1e-15);
}

#[test]
fn invalid_params() {
    let mut p = params(2);
    p.omega = -1.0;
    assert!(matches!(p.validate(), Err(Error::InvalidParams(_))));
    let mut p = params(2);
    p.gamma = f64::NAN;
    assert!(p.validate().is_err());
}

#[test]
fn blockade_radius_scaling() {
    let r1 = blockade_radius(64.0, 1, 1.0).unwrap();
    assert!((r1 - 2.0).abs() < 1e-12);
    let r4 = blockade_radius(64.0, 4, 1.0).unwrap();
    assert!((r4 - 2.0 / 2f64.powf(1.0 / 6.0)).abs() < 1e-12);
    assert!(blockade_radius(-1.0, 2, 1.0).is_err());
}

#[test]
fn two_photon_reduction() {
    let x = 3.0;
    let tp = effective_two_photon(x, x, x / 2.0).unwrap();
    assert!((tp.rabi - x).abs() < 1e-12);
    assert!(!tp.adiabatic);

    // ω/2π = 1.36 MHz with Δ_a/2π = −41 GHz
    let delta_a = -TWO_PI * 41e3;
    let prod = 2.0 * delta_a.abs() * TWO_PI * 1.36;
    let tp = effective_two_photon(prod.sqrt(), prod.sqrt(), delta_a).unwrap();
    assert!(tp.rabi < 0.0);
    assert!((tp.rabi.abs() / TWO_PI - 1.36).abs() < 1e-9);
    assert!(tp.adiabatic);

    // Ω₃ = Ω₄ = 2π·268.3 MHz, Δ_p chosen for Ω/2π = 4.6 MHz
    let o34 = TWO_PI * 268.3;
    let delta_p = o34 * o34 / (2.0 * TWO_PI * 4.6);
    let tp = effective_two_photon(o34, o34, delta_p).unwrap();
    assert!((tp.rabi / TWO_PI - 4.6).abs() < 1e-9);

    assert!(matches!(effective_two_photon(1.0, 1.0, 0.0), Err(Error::ZeroDetuning)));
}

#[test]
fn hermitian_always() {
    for n in 1..=3 {
        let b = Basis::new(n).unwrap();
        let p = PhysParams {
            phase: 1.1,
            detuning_e: 0.2,
            detuning_r: -0.4,
            ..params(n)
        };
        for h in [hamiltonian_a(&b, &p).unwrap(), hamiltonian_b(&b, &p).unwrap()] {
            assert!(floquet_rydberg::linalg::hermitian_deviation(h.entries()) < 1e-12);
        }
    }
}
