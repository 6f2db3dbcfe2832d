//! Dense complex operators and column-stacked superoperator helpers.
//!
//! Density matrices are vectorized by stacking columns: `vec(X)[i + j*d] = X[(i, j)]`.
//! With that convention `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// A square operator on a finite Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
}

impl Operator {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        Ok(Self { matrix })
    }

    /// Builds an operator from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Self::from_matrix(CMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) }
    }

    /// `|to⟩⟨from|`
    pub fn transition(dim: usize, to: usize, from: usize) -> Result<Self> {
        for index in [to, from] {
            if index >= dim {
                return Err(Error::IndexOutOfRange { index, dim });
            }
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(to, from)] = ONE;
        Ok(Self { matrix: m })
    }

    /// `|level⟩⟨level|`
    pub fn projector(dim: usize, level: usize) -> Result<Self> {
        Self::transition(dim, level, level)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dagger(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { matrix: self.matrix.scale(factor) }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        is_hermitian(&self.matrix, tol)
    }

    pub fn row_major_entries(&self) -> Vec<C64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.matrix[(i, j)]);
            }
        }
        out
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { matrix: &self.matrix + &rhs.matrix }
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { matrix: &self.matrix * &rhs.matrix }
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    dim: usize,
    /// Row-major `[re, im]` pairs.
    entries: Vec<[f64; 2]>,
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorRepr { dim: self.dim(), entries: self.row_major_entries().iter().map(|z| [z.re, z.im]).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = OperatorRepr::deserialize(d)?;
        let entries: Vec<C64> = repr.entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        Operator::from_row_major(repr.dim, &entries).map_err(serde::de::Error::custom)
    }
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    max_abs(&(m - m.adjoint())) <= tol
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn vectorize(m: &CMatrix) -> Vec<C64> {
    // nalgebra storage is column-major, which is exactly column stacking.
    m.as_slice().to_vec()
}

pub fn unvectorize(v: &[C64], dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v)
}

/// Superoperator of `X ↦ A X B`.
pub fn sandwich(a: &CMatrix, b: &CMatrix) -> CMatrix {
    b.transpose().kronecker(a)
}

/// Superoperator of `X ↦ A X`.
pub fn left(a: &CMatrix) -> CMatrix {
    CMatrix::identity(a.nrows(), a.nrows()).kronecker(a)
}

/// Superoperator of `X ↦ X B`.
pub fn right(b: &CMatrix) -> CMatrix {
    b.transpose().kronecker(&CMatrix::identity(b.nrows(), b.nrows()))
}

/// Superoperator of `X ↦ -i[H, X]`.
pub fn commutator_generator(h: &CMatrix) -> CMatrix {
    (left(h) - right(h)) * (-I)
}

/// Superoperator of the unit-rate dissipator `C X C† − ½{C†C, X}`.
pub fn dissipator(c: &CMatrix) -> CMatrix {
    let cdc = c.adjoint() * c;
    sandwich(c, &c.adjoint()) - (left(&cdc) + right(&cdc)).scale(0.5)
}

/// Row vector `w` such that `Tr(B X) = Σ_k w_k vec(X)_k`.
pub fn trace_weights(b: &CMatrix) -> Vec<C64> {
    let d = b.nrows();
    let mut w = vec![ZERO; d * d];
    for j in 0..d {
        for i in 0..d {
            w[i + j * d] = b[(j, i)];
        }
    }
    w
}

pub fn dot(w: &[C64], v: &[C64]) -> C64 {
    w.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Row-major dense matrix-vector product accumulating `out += scale * m * v`.
#[inline]
pub fn gemv_acc(m: &[C64], n: usize, v: &[C64], scale: C64, out: &mut [C64]) {
    for (row, o) in m.chunks_exact(n).zip(out.iter_mut()) {
        let mut acc = ZERO;
        for (a, b) in row.iter().zip(v) {
            acc += a * b;
        }
        *o += scale * acc;
    }
}

pub fn row_major(m: &CMatrix) -> Vec<C64> {
    m.transpose().as_slice().to_vec()
}
