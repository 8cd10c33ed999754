//! Three-level atoms, the product basis and labelled collective states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, MAX_FULL_ATOMS};
use crate::linalg::{c, hermitian_deviation, max_abs, unitarity_deviation, CMatrix, CVector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    G = 0,
    E = 1,
    R = 2,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::G, Level::E, Level::R];

    pub fn from_digit(d: usize) -> Level {
        Level::ALL[d]
    }
}

/// Tensor-product basis of `atom_count` three-level atoms.
///
/// Basis index = Σ level(i)·3^(N-1-i); atom 0 is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    atom_count: u32,
    dim: usize,
}

pub fn build_basis(atom_count: u32) -> Result<Basis> {
    Basis::new(atom_count)
}

impl Basis {
    pub fn new(atom_count: u32) -> Result<Self> {
        if atom_count == 0 {
            return Err(Error::InvalidParams("atom_count must be at least 1".into()));
        }
        if atom_count > MAX_FULL_ATOMS {
            return Err(Error::Capacity {
                atom_count,
                max: MAX_FULL_ATOMS,
            });
        }
        Ok(Basis {
            atom_count,
            dim: 3usize.pow(atom_count),
        })
    }

    pub fn atom_count(&self) -> u32 {
        self.atom_count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stride(&self, atom: usize) -> usize {
        3usize.pow(self.atom_count - 1 - atom as u32)
    }

    pub fn index(&self, levels: &[Level]) -> Result<usize> {
        if levels.len() != self.atom_count as usize {
            return Err(Error::DimensionMismatch {
                expected: self.atom_count as usize,
                found: levels.len(),
            });
        }
        Ok(levels.iter().fold(0, |acc, &l| acc * 3 + l as usize))
    }

    pub fn level(&self, index: usize, atom: usize) -> Level {
        Level::from_digit((index / self.stride(atom)) % 3)
    }

    pub fn levels(&self, index: usize) -> Vec<Level> {
        (0..self.atom_count as usize).map(|a| self.level(index, a)).collect()
    }

    /// Number of atoms in `level` for basis state `index`.
    pub fn count(&self, index: usize, level: Level) -> usize {
        (0..self.atom_count as usize)
            .filter(|&a| self.level(index, a) == level)
            .count()
    }

    pub fn label(&self, index: usize) -> String {
        self.levels(index)
            .iter()
            .map(|l| match l {
                Level::G => 'g',
                Level::E => 'e',
                Level::R => 'r',
            })
            .collect()
    }
}

/// Normalised pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    /// Normalises `amplitudes`; fails on the zero vector.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::InvalidParams("state vector has zero norm".into()));
        }
        Ok(StateVector {
            amplitudes: amplitudes / c(norm),
        })
    }

    /// Wraps amplitudes that are already normalised (propagation output).
    pub(crate) fn from_normalized(amplitudes: CVector) -> Self {
        StateVector { amplitudes }
    }

    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0);
        Ok(StateVector { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn overlap_sq(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn apply(&self, op: &OperatorMatrix) -> Result<StateVector> {
        op.check_dim(self.dim())?;
        Ok(StateVector {
            amplitudes: &op.entries * &self.amplitudes,
        })
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        op.check_dim(self.dim())?;
        Ok(self.amplitudes.dotc(&(&op.entries * &self.amplitudes)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    Hermitian,
    Unitary,
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    entries: CMatrix,
    kind: OperatorKind,
}

const HERMITIAN_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;

impl OperatorMatrix {
    /// Checks Hermiticity (relative to the largest entry) and symmetrises exactly.
    pub fn hermitian(entries: CMatrix) -> Result<Self> {
        square(&entries)?;
        let dev = hermitian_deviation(&entries);
        if dev > HERMITIAN_TOL * max_abs(&entries).max(1.0) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let entries = (&entries + entries.adjoint()) * c(0.5);
        Ok(OperatorMatrix {
            entries,
            kind: OperatorKind::Hermitian,
        })
    }

    pub fn unitary(entries: CMatrix) -> Result<Self> {
        square(&entries)?;
        let dev = unitarity_deviation(&entries);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(OperatorMatrix {
            entries,
            kind: OperatorKind::Unitary,
        })
    }

    pub fn general(entries: CMatrix) -> Result<Self> {
        square(&entries)?;
        Ok(OperatorMatrix {
            entries,
            kind: OperatorKind::General,
        })
    }

    pub fn identity(dim: usize) -> Self {
        OperatorMatrix {
            entries: CMatrix::identity(dim, dim),
            kind: OperatorKind::Unitary,
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            entries: self.entries.adjoint(),
            kind: self.kind,
        }
    }

    /// Product self·rhs. Unitary·unitary stays unitary, anything else is general.
    pub fn compose(&self, rhs: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check_dim(rhs.dim())?;
        let kind = if self.kind == OperatorKind::Unitary && rhs.kind == OperatorKind::Unitary {
            OperatorKind::Unitary
        } else {
            OperatorKind::General
        };
        Ok(OperatorMatrix {
            entries: &self.entries * &rhs.entries,
            kind,
        })
    }

    pub fn pow(&self, n: u32) -> OperatorMatrix {
        let mut acc = CMatrix::identity(self.dim(), self.dim());
        let mut base = self.entries.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        OperatorMatrix {
            entries: acc,
            kind: if n == 0 { OperatorKind::Unitary } else { self.kind },
        }
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }
}

fn square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(())
}

/// Lift a 3×3 single-atom operator onto `atom_index`.
pub fn embed_single_atom(op: &CMatrix, atom_index: usize, basis: &Basis) -> Result<OperatorMatrix> {
    if op.nrows() != 3 || op.ncols() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: op.nrows(),
        });
    }
    if atom_index >= basis.atom_count() as usize {
        return Err(Error::AtomIndex {
            index: atom_index,
            atom_count: basis.atom_count(),
        });
    }
    let dim = basis.dim();
    let stride = basis.stride(atom_index);
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let a = basis.level(col, atom_index) as usize;
        for b in 0..3 {
            let z = op[(b, a)];
            if z != C64::new(0.0, 0.0) {
                let row = col + b * stride - a * stride;
                m[(row, col)] += z;
            }
        }
    }
    if hermitian_deviation(op) == 0.0 {
        OperatorMatrix::hermitian(m)
    } else {
        OperatorMatrix::general(m)
    }
}

/// |to⟩⟨from| on a single atom.
pub fn transition(to: Level, from: Level) -> CMatrix {
    let mut m = CMatrix::zeros(3, 3);
    m[(to as usize, from as usize)] = c(1.0);
    m
}

/// Permutation-symmetric collective states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Collective {
    /// all atoms in g
    G,
    /// one shared e excitation
    W,
    /// two e excitations
    P,
    /// one r excitation
    T,
    /// one r and one e excitation
    D,
    /// two r excitations
    R,
}

impl Collective {
    pub const ALL: [Collective; 6] = [
        Collective::G,
        Collective::W,
        Collective::P,
        Collective::T,
        Collective::D,
        Collective::R,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Collective::G => "G",
            Collective::W => "W",
            Collective::P => "P",
            Collective::T => "T",
            Collective::D => "D",
            Collective::R => "R",
        }
    }

    /// Two-atom spelling used by the symmetric pair model.
    pub fn pair_name(self) -> &'static str {
        match self {
            Collective::G => "gg",
            Collective::W => "W2",
            Collective::P => "ee",
            Collective::T => "T2",
            Collective::D => "D2",
            Collective::R => "rr",
        }
    }

    pub fn parse(label: &str) -> Result<Collective> {
        Ok(match label {
            "G" | "gg" => Collective::G,
            "W" | "W2" => Collective::W,
            "P" | "ee" => Collective::P,
            "T" | "T2" => Collective::T,
            "D" | "D2" => Collective::D,
            "R" | "rr" => Collective::R,
            _ => return Err(Error::UnknownLabel(label.to_string())),
        })
    }

    /// Excitation numbers (e count, r count).
    pub fn excitations(self) -> (usize, usize) {
        match self {
            Collective::G => (0, 0),
            Collective::W => (1, 0),
            Collective::P => (2, 0),
            Collective::T => (0, 1),
            Collective::D => (1, 1),
            Collective::R => (0, 2),
        }
    }

    pub fn min_atoms(self) -> u32 {
        let (e, r) = self.excitations();
        (e + r).max(1) as u32
    }
}

/// Equal-weight superposition of all basis states with the given excitation numbers.
pub fn collective_state(which: Collective, basis: &Basis) -> Result<StateVector> {
    if basis.atom_count() < which.min_atoms() {
        return Err(Error::UnsupportedState {
            which: which.name(),
            needed: which.min_atoms(),
            atom_count: basis.atom_count(),
        });
    }
    let (ne, nr) = which.excitations();
    let mut v = CVector::zeros(basis.dim());
    for i in 0..basis.dim() {
        if basis.count(i, Level::E) == ne && basis.count(i, Level::R) == nr {
            v[i] = c(1.0);
        }
    }
    StateVector::new(v)
}
