//! Dense complex matrices in row-major storage.
//!
//! This is the storage layer for every state and operator in the crate.
//! Kets are 0-indexed throughout; the blank state used by the cloning
//! machinery is the first basis vector. Dimensions are capped at
//! [`MAX_DIM`] because the largest object the toolkit ever needs is the
//! third-generation register (2^8 = 256).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{cimag, cone, creal, czero, C, Scalar};

/// Largest supported matrix dimension on either axis.
pub const MAX_DIM: usize = 256;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix<T: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Scalar> Matrix<T> {
    /// Zero matrix. Panics if a dimension is zero or beyond [`MAX_DIM`].
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert!(
            rows <= MAX_DIM && cols <= MAX_DIM,
            "matrix dimension beyond the {MAX_DIM} cap"
        );
        Matrix {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    /// Identity of dimension `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    /// Build from a function of (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build a square matrix from rows of real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        Self::from_fn(r, c, |i, j| creal(rows[i][j]))
    }

    /// Diagonal matrix from real values.
    pub fn diagonal_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                creal(values[i])
            } else {
                czero()
            }
        })
    }

    /// Rank-one projector |k><k| in dimension `n`.
    pub fn basis_projector(n: usize, k: usize) -> Self {
        assert!(k < n, "basis index out of range");
        let mut m = Self::zeros(n, n);
        m[(k, k)] = cone();
        m
    }

    /// Pauli x.
    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    /// Pauli y.
    pub fn pauli_y() -> Self {
        let mut m = Self::zeros(2, 2);
        m[(0, 1)] = cimag(-1.0);
        m[(1, 0)] = cimag(1.0);
        m
    }

    /// Pauli z.
    pub fn pauli_z() -> Self {
        Self::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    /// The 2x2 Hadamard matrix.
    pub fn hadamard() -> Self {
        let s = 1.0 / std::f64::consts::SQRT_2;
        Self::from_real_rows(&[&[s, s], &[s, -s]])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Trace of a square matrix.
    pub fn trace(&self) -> C<T> {
        assert!(self.is_square(), "trace of a non-square matrix");
        let mut t = czero();
        for i in 0..self.rows {
            t += self[(i, i)];
        }
        t
    }

    /// Scale by a complex factor.
    pub fn scale(&self, factor: C<T>) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * factor)
    }

    /// Kronecker product. Errors if the result would exceed [`MAX_DIM`].
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        if rows > MAX_DIM || cols > MAX_DIM {
            return Err(Error::CapacityExceeded(format!(
                "tensor product of {}x{} and {}x{} exceeds the {MAX_DIM} cap",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut m = Self::zeros(rows, cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self[(i1, j1)];
                if a == czero() {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        m[(i1 * other.rows + i2, j1 * other.cols + j2)] = a * other[(i2, j2)];
                    }
                }
            }
        }
        Ok(m)
    }

    /// Kronecker product of a list of factors, left to right.
    pub fn tensor_all(factors: &[&Self]) -> Result<Self> {
        assert!(!factors.is_empty(), "empty tensor product");
        let mut acc = factors[0].clone();
        for f in &factors[1..] {
            acc = acc.tensor(f)?;
        }
        Ok(acc)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Largest entrywise difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch in matrix comparison"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Max |A - A^dagger| entry.
    pub fn hermiticity_deviation(&self) -> T {
        assert!(self.is_square());
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.hermiticity_deviation() <= tol
    }

    /// Max |U^dagger U - I| entry.
    pub fn unitarity_deviation(&self) -> T {
        assert!(self.is_square());
        (&self.dagger() * self).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_diagonal(&self, tol: T) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].norm() <= tol))
    }

    /// True when every entry is finite.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Equivalence up to a single global phase: self ~ e^{i phi} * other.
    ///
    /// Returns the largest entrywise deviation after aligning the phase on the
    /// largest entry of `other`.
    pub fn deviation_up_to_phase(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut best = czero::<T>();
        let mut best_norm = T::zero();
        let mut idx = 0;
        for (k, z) in other.data.iter().enumerate() {
            if z.norm() > best_norm {
                best_norm = z.norm();
                best = *z;
                idx = k;
            }
        }
        if best_norm == T::zero() {
            return self.max_abs();
        }
        let phase = self.data[idx] / best;
        self.max_abs_diff(&other.scale(phase))
    }

    /// Parse the on-disk matrix format.
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    /// Serialize to the on-disk matrix format.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization is infallible")
    }
}

impl<T: Scalar> Index<(usize, usize)> for Matrix<T> {
    type Output = C<T>;

    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        debug_assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        debug_assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in +");
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        m
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in -");
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(&other.data) {
            *a -= *b;
        }
        m
    }
}

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;

    fn neg(self) -> Matrix<T> {
        self.scale(creal(-1.0))
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch in *");
        let mut m = Matrix::zeros(self.rows, other.cols);
        // i-k-j loop order keeps both operands in row-major streaming access.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == czero() {
                    continue;
                }
                for j in 0..other.cols {
                    m[(i, j)] += a * other[(k, j)];
                }
            }
        }
        m
    }
}

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re.as_f64(), z.im.as_f64())?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// On-disk schema: {"rows": r, "cols": c, "entries": [[re, im], ...]} row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<(f64, f64)>,
}

impl<T: Scalar> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self
            .data
            .iter()
            .map(|z| (z.re.as_f64(), z.im.as_f64()))
            .collect();
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Matrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        if raw.rows == 0 || raw.cols == 0 {
            return Err(D::Error::custom("matrix dimensions must be positive"));
        }
        if raw.rows > MAX_DIM || raw.cols > MAX_DIM {
            return Err(D::Error::custom(format!(
                "matrix dimension beyond the {MAX_DIM} cap"
            )));
        }
        if raw.entries.len() != raw.rows * raw.cols {
            return Err(D::Error::custom(format!(
                "entry count {} does not match {}x{}",
                raw.entries.len(),
                raw.rows,
                raw.cols
            )));
        }
        if raw.entries.iter().any(|(re, im)| !re.is_finite() || !im.is_finite()) {
            return Err(D::Error::custom("non-finite matrix entry"));
        }
        let data = raw
            .entries
            .iter()
            .map(|&(re, im)| C::new(T::from_f64(re), T::from_f64(im)))
            .collect();
        Ok(Matrix {
            rows: raw.rows,
            cols: raw.cols,
            data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Matrix<f64>;

    #[test]
    fn identity_tensor_identity() {
        let i2 = M::identity(2);
        assert_eq!(i2.tensor(&i2).unwrap(), M::identity(4));
    }

    #[test]
    fn tensor_of_diagonals() {
        let z = M::pauli_z();
        let t = z.tensor(&M::identity(2)).unwrap();
        assert_eq!(t, M::diagonal_real(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn tensor_mixes_blocks() {
        let x = M::pauli_x();
        let t = M::identity(2).tensor(&x).unwrap();
        // block-diagonal with sigma_x blocks
        assert_eq!(t[(0, 1)], creal(1.0));
        assert_eq!(t[(2, 3)], creal(1.0));
        assert_eq!(t[(0, 2)], czero());
    }

    #[test]
    fn tensor_capacity_rejected() {
        let big = M::identity(32);
        let err = big.tensor(&M::identity(16)).unwrap_err();
        assert!(matches!(err, Error::CapacityExceeded(_)));
    }

    #[test]
    fn trace_is_multiplicative_under_tensor() {
        let a = M::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = M::from_real_rows(&[&[5.0, 0.0], &[1.0, 2.0]]);
        let t = a.tensor(&b).unwrap();
        assert!((t.trace() - a.trace() * b.trace()).norm() < 1e-14);
    }

    #[test]
    fn dagger_of_product_reverses() {
        let x = M::pauli_x();
        let y = M::pauli_y();
        let lhs = (&x * &y).dagger();
        let rhs = &y.dagger() * &x.dagger();
        assert!(lhs.approx_eq(&rhs, 1e-15));
    }

    #[test]
    fn paulis_are_hermitian_and_unitary() {
        for p in [M::pauli_x(), M::pauli_y(), M::pauli_z(), M::hadamard()] {
            assert!(p.hermiticity_deviation() < 1e-15);
            assert!(p.unitarity_deviation() < 1e-15);
        }
    }

    #[test]
    fn phase_equivalence() {
        let h = M::hadamard();
        let rotated = h.scale(C::from_polar(1.0, 0.7));
        assert!(rotated.deviation_up_to_phase(&h) < 1e-15);
        assert!(M::pauli_x().deviation_up_to_phase(&M::pauli_z()) > 0.5);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m = M::from_fn(2, 3, |i, j| C::new(0.1 * i as f64 + 1.0 / 3.0, j as f64 / 7.0));
        let s = m.to_json_string();
        let back = M::from_json_str(&s).unwrap();
        assert_eq!(m, back);
        assert_eq!(s, back.to_json_string());
    }

    #[test]
    fn json_rejects_length_mismatch() {
        let bad = r#"{"rows": 2, "cols": 2, "entries": [[1.0, 0.0], [0.0, 0.0]]}"#;
        assert!(M::from_json_str(bad).is_err());
    }

    #[test]
    fn json_rejects_oversized_dims() {
        let bad = format!(
            r#"{{"rows": {0}, "cols": 1, "entries": []}}"#,
            MAX_DIM + 1
        );
        assert!(M::from_json_str(&bad).is_err());
    }
}
