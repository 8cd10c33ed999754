use floquet_rydberg::error::{Error, MAX_FULL_ATOMS};
use floquet_rydberg::hilbert::*;
use floquet_rydberg::linalg::{c, CMatrix};
use proptest::prelude::*;

use Level::{E, G, R};

#[test]
fn dimensions_and_ordering() {
    let b1 = Basis::new(1).unwrap();
    assert_eq!(b1.dim(), 3);
    assert_eq!((0..3).map(|i| b1.label(i)).collect::<Vec<_>>(), ["g", "e", "r"]);
    assert_eq!(Basis::new(2).unwrap().index(&[G, E]).unwrap(), 1);
    assert_eq!(Basis::new(3).unwrap().index(&[E, G, R]).unwrap(), 11);
    assert_eq!(Basis::new(4).unwrap().dim(), 81);
}

#[test]
fn capacity_names_superatom() {
    let err = Basis::new(MAX_FULL_ATOMS + 1).unwrap_err();
    assert!(matches!(err, Error::Capacity { atom_count: 7, .. }));
    assert!(err.to_string().contains("superatom"));
    assert!(Basis::new(0).is_err());
}

#[test]
fn index_roundtrip() {
    let b = Basis::new(3).unwrap();
    for i in 0..b.dim() {
        assert_eq!(b.index(&b.levels(i)).unwrap(), i);
    }
    assert!(b.index(&[G, G]).is_err());
}

#[test]
fn embedding() {
    let b = Basis::new(2).unwrap();
    let id = embed_single_atom(&CMatrix::identity(3, 3), 1, &b).unwrap();
    assert_eq!(id.entries(), &CMatrix::identity(9, 9));
    let raise = transition(E, G);
    let gg = StateVector::basis_state(9, 0).unwrap();
    let out = gg.apply(&embed_single_atom(&raise, 0, &b).unwrap()).unwrap();
    assert_eq!(out.amplitudes()[b.index(&[E, G]).unwrap()], c(1.0));
    assert!(matches!(
        embed_single_atom(&raise, 2, &b),
        Err(Error::AtomIndex { index: 2, .. })
    ));

    let mut sum = CMatrix::zeros(9, 9);
    for a in 0..2 {
        sum += embed_single_atom(&raise, a, &b).unwrap().entries();
    }
    let v = sum * gg.amplitudes();
    let w = collective_state(Collective::W, &b).unwrap();
    let ov = w.amplitudes().dotc(&v);
    assert!((ov.norm() - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn collective_states() {
    let b2 = Basis::new(2).unwrap();
    let w = collective_state(Collective::W, &b2).unwrap();
    let s = 1.0 / 2f64.sqrt();
    assert!((w.amplitudes()[b2.index(&[G, E]).unwrap()].re - s).abs() < 1e-15);
    assert!((w.amplitudes()[b2.index(&[E, G]).unwrap()].re - s).abs() < 1e-15);
    let g = collective_state(Collective::G, &b2).unwrap();
    assert_eq!(g.amplitudes()[0], c(1.0));

    let b3 = Basis::new(3).unwrap();
    let p = collective_state(Collective::P, &b3).unwrap();
    for lv in [[E, E, G], [E, G, E], [G, E, E]] {
        let a = p.amplitudes()[b3.index(&lv).unwrap()];
        assert!((a.re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }
    assert_eq!(p.amplitudes().iter().filter(|z| z.norm() > 0.0).count(), 3);

    let b1 = Basis::new(1).unwrap();
    for which in [Collective::P, Collective::D] {
        assert!(matches!(
            collective_state(which, &b1),
            Err(Error::UnsupportedState { .. })
        ));
    }
}

#[test]
fn collective_orthogonality() {
    use Collective::*;
    for n in 1..=4 {
        let b = Basis::new(n).unwrap();
        let states: Vec<_> = [G, W, P, T, D, R]
            .into_iter()
            .filter(|s| s.min_atoms() <= n)
            .map(|s| collective_state(s, &b).unwrap())
            .collect();
        for (i, x) in states.iter().enumerate() {
            assert!((x.inner(x).re - 1.0).abs() < 1e-12);
            assert!((x.norm() - 1.0).abs() < 1e-12);
            for y in &states[i + 1..] {
                assert_eq!(x.inner(y).norm(), 0.0);
            }
        }
        let w = collective_state(W, &b).unwrap();
        assert_eq!(w.amplitudes().iter().filter(|z| z.norm() > 0.0).count(), n as usize);
    }
}

#[test]
fn zero_vector_rejected() {
    assert!(StateVector::new(floquet_rydberg::linalg::CVector::zeros(3)).is_err());
}

proptest! {
    #[test]
    fn embedding_matrix_elements(n in 1u32..=3, atom in 0usize..3, to in 0usize..3, from in 0usize..3) {
        prop_assume!(atom < n as usize);
        let b = Basis::new(n).unwrap();
        let single = transition(Level::from_digit(to), Level::from_digit(from));
        let op = embed_single_atom(&single, atom, &b).unwrap();
        for r in 0..b.dim() {
            for col in 0..b.dim() {
                let (lr, lc) = (b.levels(r), b.levels(col));
                let others_equal = (0..n as usize).filter(|&k| k != atom).all(|k| lr[k] == lc[k]);
                let expect = if others_equal {
                    single[(lr[atom] as usize, lc[atom] as usize)]
                } else {
                    c(0.0)
                };
                prop_assert_eq!(op.entries()[(r, col)], expect);
            }
        }
    }
}
