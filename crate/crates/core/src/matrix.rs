//! Dense square complex matrices and the handful of spectral tools the rest of
//! the crate is built on.
//!
//! [`ComplexMatrix`] wraps an `nalgebra` dense matrix and guarantees the shape
//! is square and non-empty. Everything is value-typed: operations return new
//! matrices and never mutate their inputs.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Tolerance for structural predicates (hermiticity, unitarity, orthogonality).
pub const TOL: f64 = 1e-9;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A dense `n x n` complex matrix with `n >= 1`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl ComplexMatrix {
    pub fn new(inner: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = inner.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        Ok(Self(inner))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        Self(DMatrix::from_fn(n, n, f))
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            &rows
                .iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        )
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare { rows: n, cols: r.len() });
            }
        }
        if n == 0 {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        Ok(Self(DMatrix::from_fn(n, n, |r, c| rows[r][c])))
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| ZERO)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |r, c| if r == c { ONE } else { ZERO })
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal(entries: &[C64]) -> Self {
        Self::from_fn(entries.len(), |r, c| if r == c { entries[r] } else { ZERO })
    }

    /// Matrix unit `E_{rc}` (zero-based indices).
    pub fn unit(n: usize, r: usize, c: usize) -> Self {
        Self::from_fn(n, |i, j| if i == r && j == c { ONE } else { ZERO })
    }

    /// Rank-one operator `|v><v|`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |r, c| v[r] * v[c].conj())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[(r, c)]
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    /// Column-major view of the entries.
    pub fn as_slice(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub(crate) fn from_column_major(n: usize, data: &[C64]) -> Self {
        Self(DMatrix::from_column_slice(n, n, data))
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        self.0.column(c).iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn normalized_trace(&self) -> C64 {
        self.trace() / self.dim() as f64
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// Conjugation `u x u*`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `sqrt(tau(x* x))`, the norm induced by the normalized trace.
    pub fn tau_norm(&self) -> f64 {
        self.frobenius_norm() / (self.dim() as f64).sqrt()
    }

    pub fn hermitian_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn unitary_residual(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_residual() <= tol
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && (self * self).max_abs_diff(self) <= tol
    }

    pub fn is_traceless(&self, tol: f64) -> bool {
        self.trace().norm() <= tol
    }

    /// Hermitian part `(x + x*)/2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// Eigendecomposition of a Hermitian matrix. Eigenvalues are sorted
    /// ascending and the eigenvector columns follow the same order.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        let residual = self.hermitian_residual();
        if residual > TOL * (1.0 + self.max_abs()) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(self.hermitian_eigen_unchecked())
    }

    pub(crate) fn hermitian_eigen_unchecked(&self) -> (Vec<f64>, ComplexMatrix) {
        let n = self.dim();
        let eig = self.hermitian_part().0.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        (values, Self(vectors))
    }

    /// Applies a real function to the spectrum of a Hermitian matrix.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let (values, vectors) = self.hermitian_eigen()?;
        Ok(spectral_sum(&values, &vectors, f))
    }

    /// `exp(i h)` for Hermitian `h`.
    pub fn unitary_exp(&self) -> Result<Self> {
        let (values, vectors) = self.hermitian_eigen()?;
        let phases: Vec<C64> = values.iter().map(|&x| (I * x).exp()).collect();
        let d = Self::diagonal(&phases);
        Ok(&(&vectors * &d) * &vectors.adjoint())
    }
}

fn spectral_sum(values: &[f64], vectors: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let mapped: Vec<C64> = values.iter().map(|&x| C64::new(f(x), 0.0)).collect();
    &(vectors * &ComplexMatrix::diagonal(&mapped)) * &vectors.adjoint()
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// `Tr(a) / dim(a)`.
pub fn normalized_trace(a: &ComplexMatrix) -> C64 {
    a.normalized_trace()
}

/// Hilbert-Schmidt inner product `Tr(a* b)`, conjugate-linear in `a`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x.conj() * y).sum())
}

/// Kronecker product; block `(r, c)` of the result is `a[r, c] * b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.tensor(b)
}

/// `eta(t) = -t ln t` with `eta(0) = 0`.
pub fn eta(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        -t * t.ln()
    }
}

/// `tau(eta(a))` for Hermitian positive semidefinite `a`, in nats.
///
/// Eigenvalues in `(-TOL, 0)` are clamped to zero.
pub fn spectral_eta(a: &ComplexMatrix) -> Result<f64> {
    let (values, _) = a.hermitian_eigen()?;
    spectral_eta_of_values(&values)
}

pub(crate) fn spectral_eta_of_values(values: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for &x in values {
        if x < -TOL {
            return Err(Error::NegativeEigenvalue { value: x });
        }
        acc += eta(x.max(0.0));
    }
    Ok(acc / values.len() as f64)
}

/// Pauli matrix `sigma_k`, `k = 0..=3`, with `sigma_1 sigma_2 = i sigma_3`.
pub fn pauli(k: usize) -> ComplexMatrix {
    let m = |a: C64, b: C64, c: C64, d: C64| {
        ComplexMatrix::from_rows(&[vec![a, b], vec![c, d]]).expect("2x2")
    };
    match k {
        0 => ComplexMatrix::identity(2),
        1 => m(ZERO, ONE, ONE, ZERO),
        2 => m(ZERO, -I, I, ZERO),
        3 => m(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {k} out of range 0..=3"),
    }
}

/// The signed two-qubit Pauli word `sign * sigma_i (x) sigma_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliWord {
    pub i: u8,
    pub j: u8,
    pub sign: i8,
}

impl PauliWord {
    pub fn new(i: u8, j: u8) -> Self {
        assert!(i < 4 && j < 4, "Pauli indices must lie in 0..=3");
        Self { i, j, sign: 1 }
    }

    pub fn with_sign(self, sign: i8) -> Self {
        assert!(sign == 1 || sign == -1);
        Self { sign, ..self }
    }

    pub fn identity() -> Self {
        Self::new(0, 0)
    }

    /// All 16 unsigned words ordered by `(i, j)`.
    pub fn all() -> Vec<Self> {
        (0..4).flat_map(|i| (0..4).map(move |j| Self::new(i, j))).collect()
    }

    /// Index `4 i + j` in `0..16`.
    pub fn index(&self) -> usize {
        4 * self.i as usize + self.j as usize
    }

    pub fn from_index(k: usize) -> Self {
        Self::new((k / 4) as u8, (k % 4) as u8)
    }

    pub fn is_identity(&self) -> bool {
        self.i == 0 && self.j == 0
    }

    pub fn matrix(&self) -> ComplexMatrix {
        pauli(self.i as usize)
            .tensor(&pauli(self.j as usize))
            .scale_real(self.sign as f64)
    }

    /// Label such as `s12` or `-s30`.
    pub fn label(&self) -> String {
        let prefix = if self.sign < 0 { "-" } else { "" };
        format!("{prefix}s{}{}", self.i, self.j)
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (sign, rest) = match s.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, s.strip_prefix('+').unwrap_or(s)),
        };
        let digits = rest
            .strip_prefix('s')
            .ok_or_else(|| Error::Parse(format!("Pauli word {s:?} must look like s12")))?;
        let d: Vec<u8> = digits
            .chars()
            .map(|c| c.to_digit(4).map(|x| x as u8))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Parse(format!("bad Pauli indices in {s:?}")))?;
        if d.len() != 2 {
            return Err(Error::Parse(format!("Pauli word {s:?} needs two indices")));
        }
        Ok(Self::new(d[0], d[1]).with_sign(sign))
    }
}

impl Serialize for PauliWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for PauliWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Haar-random unitary via QR of a complex Ginibre matrix with phase fixing.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            let d = r[(a, a)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                ONE
            }
        } else {
            ZERO
        }
    });
    ComplexMatrix(q * phases)
}

/// Random Hermitian matrix with independent Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    g.hermitian_part()
}

/// Wire format `{"dim": n, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        let n = m.dim();
        let re = (0..n).map(|r| (0..n).map(|c| m.get(r, c).re).collect()).collect();
        let im = (0..n).map(|r| (0..n).map(|c| m.get(r, c).im).collect()).collect();
        Self { dim: n, re, im }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let n = j.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if n == 0 || !shape_ok(&j.re) || !shape_ok(&j.im) {
            return Err(Error::Parse(format!("matrix JSON does not describe a {n}x{n} grid")));
        }
        Ok(Self::from_fn(n, |r, c| C64::new(j.re[r][c], j.im[r][c])))
    }
}
