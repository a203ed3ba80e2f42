//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Every operator in the crate (states, witnesses, projectors) is a
//! [`DenseOperator`]: a square complex matrix stored row-major. Bipartite
//! spaces use the composite index `i * d_right + k` for `|i⟩ ⊗ |k⟩`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative Hermiticity allowance: `max|M - M†| <= HERMITIAN_RTOL * ‖M‖_F`.
pub const HERMITIAN_RTOL: f64 = 1e-12;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Numerical tolerances for positivity and equality tests.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Eigenvalue floor, relative to `max(1, ‖M‖_F)`.
    pub psd_eps: f64,
    /// Entrywise equality.
    pub eq_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            psd_eps: 1e-9,
            eq_eps: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn new(psd_eps: f64, eq_eps: f64) -> Result<Self> {
        if !(psd_eps >= 0.0 && eq_eps >= 0.0) {
            return Err(Error::InvalidParameters(format!(
                "tolerances must be nonnegative, got psd_eps={psd_eps}, eq_eps={eq_eps}"
            )));
        }
        Ok(Self { psd_eps, eq_eps })
    }
}

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperator", into = "RawOperator")]
pub struct DenseOperator {
    dim: usize,
    entries: Vec<C64>,
}

/// Wire form of a matrix: `{"dim": n, "entries": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct RawOperator {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<RawOperator> for DenseOperator {
    type Error = Error;

    fn try_from(raw: RawOperator) -> Result<Self> {
        let entries = raw.entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        DenseOperator::from_entries(raw.dim, entries)
    }
}

impl From<DenseOperator> for RawOperator {
    fn from(op: DenseOperator) -> Self {
        RawOperator {
            dim: op.dim,
            entries: op.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameters("non-finite matrix entry".into()));
        }
        Ok(Self { dim, entries })
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Self {
        let n = ket.dim();
        assert_eq!(n, bra.dim(), "outer product of vectors of different length");
        Self::from_fn(n, |i, j| ket.amplitudes[i] * bra.amplitudes[j].conj())
    }

    pub fn projector(v: &StateVector) -> Self {
        Self::outer(v, v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.entries[i * self.dim + j] = value;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, value: C64) {
        self.entries[i * self.dim + j] += value;
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul of operators of different size");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        out
    }

    /// `U M U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        assert_eq!(self.dim, v.dim(), "operator/vector size mismatch");
        let n = self.dim;
        let amplitudes = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j) * v.amplitudes[j]).sum())
            .collect();
        StateVector { amplitudes }
    }

    /// `⟨v|M|w⟩`.
    pub fn sandwich(&self, v: &StateVector, w: &StateVector) -> C64 {
        v.inner(&self.apply(w))
    }

    /// Real part of `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &StateVector) -> f64 {
        self.sandwich(v, v).re
    }

    /// `Tr(self · other)`.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.entries[i * n + k] * other.entries[k * n + i];
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_RTOL * self.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    fn check_hermitian(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        let allowed = HERMITIAN_RTOL * self.frobenius_norm();
        if defect > allowed && defect > 0.0 {
            return Err(Error::Hermiticity { defect, allowed });
        }
        Ok(())
    }

    fn to_nalgebra_hermitian(&self) -> DMatrix<C64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |i, j| 0.5 * (self.get(i, j) + self.get(j, i).conj()))
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;

    fn add(self, rhs: Self) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "sum of operators of different size");
        DenseOperator {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;

    fn sub(self, rhs: Self) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "difference of operators of different size");
        DenseOperator {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &DenseOperator {
    type Output = DenseOperator;

    fn neg(self) -> DenseOperator {
        self.scale_real(-1.0)
    }
}

impl Mul<f64> for &DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: f64) -> DenseOperator {
        self.scale_real(rhs)
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: Self) -> DenseOperator {
        self.matmul(rhs)
    }
}

impl std::iter::Sum for DenseOperator {
    /// Panics on an empty iterator, since the dimension is unknown.
    fn sum<I: Iterator<Item = Self>>(mut iter: I) -> Self {
        let first = iter.next().expect("sum of an empty operator sequence");
        iter.fold(first, |acc, x| &acc + &x)
    }
}

/// Complex column vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl TryFrom<Vec<[f64; 2]>> for StateVector {
    type Error = Error;

    fn try_from(raw: Vec<[f64; 2]>) -> Result<Self> {
        StateVector::new(raw.iter().map(|[re, im]| C64::new(*re, *im)).collect())
    }
}

impl From<StateVector> for Vec<[f64; 2]> {
    fn from(v: StateVector) -> Self {
        v.amplitudes.iter().map(|z| [z.re, z.im]).collect()
    }
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Dimension("empty state vector".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameters("non-finite amplitude".into()));
        }
        Ok(Self { amplitudes })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            amplitudes: vec![ZERO; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= 1e-12
    }

    fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Normalization("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            amplitudes: self.amplitudes.iter().map(|z| z / n).collect(),
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product of vectors of different length");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Self { amplitudes }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|z| z * s).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Which tensor factor a partial transpose acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// `result[(i·dB + k), (j·dB + l)] = A[i][j] · B[k][l]`.
pub fn kron(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    let (da, db) = (a.dim(), b.dim());
    let n = da * db;
    let mut out = DenseOperator::zeros(n);
    for i in 0..da {
        for j in 0..da {
            let aij = a.get(i, j);
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out.set(i * db + k, j * db + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Transpose on one tensor factor of a `d_left ⊗ d_right` operator.
pub fn partial_transpose(
    m: &DenseOperator,
    d_left: usize,
    d_right: usize,
    side: Side,
) -> Result<DenseOperator> {
    if m.dim() != d_left * d_right {
        return Err(Error::Dimension(format!(
            "operator of dim {} is not {d_left} x {d_right}",
            m.dim()
        )));
    }
    let mut out = DenseOperator::zeros(m.dim());
    for i in 0..d_left {
        for k in 0..d_right {
            for j in 0..d_left {
                for l in 0..d_right {
                    let src = match side {
                        Side::Left => m.get(j * d_right + k, i * d_right + l),
                        Side::Right => m.get(i * d_right + l, j * d_right + k),
                    };
                    out.set(i * d_right + k, j * d_right + l, src);
                }
            }
        }
    }
    Ok(out)
}

/// Partial transpose on the left factor of a `d ⊗ d` operator.
pub fn pt_left(m: &DenseOperator, d: usize) -> Result<DenseOperator> {
    partial_transpose(m, d, d, Side::Left)
}

/// Ascending eigenvalues of a Hermitian operator.
pub fn herm_eigvals(m: &DenseOperator) -> Result<Vec<f64>> {
    m.check_hermitian()?;
    let mut values: Vec<f64> = SymmetricEigen::new(m.to_nalgebra_hermitian())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigen-decomposition of a Hermitian operator, eigenpairs ascending by value.
pub fn herm_eigh(m: &DenseOperator) -> Result<Vec<(f64, StateVector)>> {
    m.check_hermitian()?;
    let eig = SymmetricEigen::new(m.to_nalgebra_hermitian());
    let mut pairs: Vec<(f64, StateVector)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(c, &value)| {
            let col = eig.eigenvectors.column(c);
            (
                value,
                StateVector {
                    amplitudes: col.iter().copied().collect(),
                },
            )
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

pub fn min_eigval(m: &DenseOperator) -> Result<f64> {
    Ok(herm_eigvals(m)?[0])
}

/// `min eig(M) >= -psd_eps · max(1, ‖M‖_F)`.
pub fn is_psd(m: &DenseOperator, tol: &Tolerance) -> Result<bool> {
    let floor = -tol.psd_eps * m.frobenius_norm().max(1.0);
    Ok(min_eigval(m)? >= floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> DenseOperator {
        DenseOperator::from_real_diag(values)
    }

    fn shift3() -> DenseOperator {
        DenseOperator::from_fn(3, |i, j| if i == (j + 1) % 3 { ONE } else { ZERO })
    }

    #[test]
    fn kron_identity_and_diagonals() {
        let i2 = DenseOperator::identity(2);
        assert_eq!(kron(&i2, &i2), DenseOperator::identity(4));
        assert_eq!(
            kron(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])),
            diag(&[0.0, 1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn kron_shift_moves_left_factor() {
        let op = kron(&shift3(), &DenseOperator::identity(3));
        let zero = StateVector::basis(3, 0).kron(&StateVector::basis(3, 0));
        let expected = StateVector::basis(3, 1).kron(&StateVector::basis(3, 0));
        assert_eq!(op.apply(&zero), expected);
    }

    #[test]
    fn kron_is_associative() {
        let a = DenseOperator::from_fn(2, |i, j| C64::new(i as f64 + 1.0, j as f64));
        let b = shift3();
        let c = DenseOperator::from_fn(2, |i, j| C64::new(0.5 * j as f64, -(i as f64)));
        assert_eq!(kron(&kron(&a, &b), &c), kron(&a, &kron(&b, &c)));
    }

    #[test]
    fn partial_transpose_rejects_bad_split() {
        let m = DenseOperator::identity(6);
        assert!(matches!(
            partial_transpose(&m, 2, 2, Side::Left),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn partial_transpose_identity_fixed() {
        let i9 = DenseOperator::identity(9);
        assert_eq!(partial_transpose(&i9, 3, 3, Side::Left).unwrap(), i9);
    }

    #[test]
    fn partial_transpose_of_qubit_bell_projector() {
        let s = 0.5f64.sqrt();
        let bell = StateVector::from_real(&[s, 0.0, 0.0, s]).unwrap();
        let pt = pt_left(&DenseOperator::projector(&bell), 2).unwrap();
        let eig = herm_eigvals(&pt).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in eig.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{eig:?}");
        }
    }

    #[test]
    fn left_and_right_transposes_compose_to_full_transpose() {
        let m = DenseOperator::from_fn(6, |i, j| C64::new((i * 7 + j) as f64, (i as f64) - j as f64));
        let both = partial_transpose(
            &partial_transpose(&m, 2, 3, Side::Left).unwrap(),
            2,
            3,
            Side::Right,
        )
        .unwrap();
        assert_eq!(both, m.transpose());
    }

    #[test]
    fn eigvals_of_identity() {
        assert_eq!(herm_eigvals(&DenseOperator::identity(3)).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn eigvals_reject_non_hermitian() {
        let m = DenseOperator::from_fn(2, |i, j| if i == 0 && j == 1 { ONE } else { ZERO });
        assert!(matches!(herm_eigvals(&m), Err(Error::Hermiticity { .. })));
        assert!(is_psd(&m, &Tolerance::default()).is_err());
    }

    #[test]
    fn eigh_vectors_satisfy_eigen_equation() {
        let m = DenseOperator::from_fn(4, |i, j| {
            let z = C64::new((i + j) as f64, i as f64 - j as f64);
            if i == j {
                C64::new(z.re, 0.0)
            } else {
                z
            }
        });
        for (value, v) in herm_eigh(&m).unwrap() {
            let mv = m.apply(&v);
            assert!(mv.max_abs_diff(&v.scale(C64::new(value, 0.0))) < 1e-10);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn psd_checks() {
        let tol = Tolerance::default();
        assert!(is_psd(&DenseOperator::identity(4), &tol).unwrap());
        assert!(!is_psd(&diag(&[1.0, -0.1]), &tol).unwrap());
        assert!(is_psd(&diag(&[1.0, -1e-12]), &tol).unwrap());
    }

    #[test]
    fn tolerance_rejects_negative() {
        assert!(Tolerance::new(-1.0, 0.0).is_err());
        assert_eq!(Tolerance::default(), Tolerance::new(1e-9, 1e-12).unwrap());
    }

    #[test]
    fn operator_json_is_row_major_pairs() {
        let m = DenseOperator::from_fn(2, |i, j| C64::new((2 * i + j) as f64, -(j as f64)));
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"dim":2,"entries":[[0.0,-0.0],[1.0,-1.0],[2.0,-0.0],[3.0,-1.0]]}"#);
        let back: DenseOperator = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<DenseOperator>(r#"{"dim":2,"entries":[[1,0]]}"#).is_err());
    }
}
