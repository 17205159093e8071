//! Dense complex matrices sized for the handful of qutrit operators this crate
//! works with (at most a few dozen rows).
//!
//! Storage is row-major and every operation returns a fresh value. The checked
//! methods (`matmul`, `add`, `sub`, `apply`) report shape errors; the operator
//! impls on references panic with the same message and are meant for call
//! sites whose shapes are already validated.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Default absolute tolerance for entrywise comparisons.
pub const ATOL: f64 = 1e-12;
/// Default relative tolerance for entrywise comparisons.
pub const RTOL: f64 = 1e-10;

/// Off-diagonal Frobenius mass (relative to the input norm) at which the
/// Jacobi iteration stops.
pub const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `|a - b| <= atol + rtol * max(|a|, |b|)` with the crate defaults.
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= ATOL + RTOL * a.abs().max(b.abs())
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>10.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::BadShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(index) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| c64(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub(crate) fn require_square(&self, op: &'static str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                op,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                op,
                lhs: self.shape(),
                rhs: other.shape(),
            })
        }
    }

    /// Kronecker product; entry `(i*b.rows + k, j*b.cols + l)` is `a(i,j) * b(k,l)`.
    pub fn kron(&self, b: &Self) -> Self {
        let rows = self.rows * b.rows;
        let cols = self.cols * b.cols;
        let mut data = vec![ZERO; rows * cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let aij = self[(i, j)];
                if aij == ZERO {
                    continue;
                }
                for k in 0..b.rows {
                    let row = i * b.rows + k;
                    for l in 0..b.cols {
                        data[row * cols + j * b.cols + l] = aij * b[(k, l)];
                    }
                }
            }
        }
        Self { rows, cols, data }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Entrywise complex conjugate in the computational basis.
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, b: &Self) -> Result<Self> {
        if self.cols != b.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                lhs: self.shape(),
                rhs: b.shape(),
            });
        }
        let mut data = vec![ZERO; self.rows * b.cols];
        for i in 0..self.rows {
            let out = &mut data[i * b.cols..(i + 1) * b.cols];
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik == ZERO {
                    continue;
                }
                let brow = &b.data[k * b.cols..(k + 1) * b.cols];
                for (o, &bkj) in out.iter_mut().zip(brow) {
                    *o += aik * bkj;
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: b.cols,
            data,
        })
    }

    pub fn add(&self, b: &Self) -> Result<Self> {
        self.same_shape(b, "add")?;
        Ok(self.zip_with(b, |x, y| x + y))
    }

    pub fn sub(&self, b: &Self) -> Result<Self> {
        self.same_shape(b, "sub")?;
        Ok(self.zip_with(b, |x, y| x - y))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    fn zip_with(&self, b: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&b.data)
                .map(|(&x, &y)| f(x, y))
                .collect(),
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "apply",
                lhs: self.shape(),
                rhs: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(&a, &x)| a * x)
                    .sum()
            })
            .collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Result<C64> {
        let n = self.require_square("trace")?;
        Ok((0..n).map(|i| self[(i, i)]).sum())
    }

    /// `‖m†m − I‖_F ≤ tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let g = &self.dagger() * self;
        (&g - &Self::identity(self.rows)).frobenius_norm() <= tol
    }

    /// `‖m − m†‖_F ≤ tol · ‖m‖_F`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_asymmetry() <= tol
    }

    /// Relative asymmetry `‖m − m†‖_F / ‖m‖_F` (zero for the zero matrix).
    pub fn hermitian_asymmetry(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        (self - &self.dagger()).frobenius_norm() / norm
    }

    /// `m^k` by repeated squaring; `m^0` is the identity.
    pub fn mat_power(&self, k: u32) -> Result<Self> {
        let n = self.require_square("mat_power")?;
        let mut result = Self::identity(n);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Eigenvalues come back ascending, eigenvectors as columns.
    pub fn hermitian_eigen(&self, tol: f64) -> Result<EigenDecomposition> {
        let n = self.require_square("hermitian_eigen")?;
        let asymmetry = self.hermitian_asymmetry();
        if asymmetry > tol {
            return Err(Error::NotHermitian { asymmetry, tol });
        }
        let norm = self.frobenius_norm();
        // Work on the Hermitian part so tiny input asymmetry cannot stall the sweep.
        let mut h = (self + &self.dagger()).scale(c64(0.5, 0.0));
        let mut v = Self::identity(n);
        let target = JACOBI_OFF_TOL * norm;

        let mut sweeps = 0;
        let mut off = off_diagonal_norm(&h);
        while off > target {
            if sweeps == JACOBI_MAX_SWEEPS {
                return Err(Error::NoConvergence { sweeps, off });
            }
            for p in 0..n {
                for q in p + 1..n {
                    jacobi_rotate(&mut h, &mut v, p, q);
                }
            }
            sweeps += 1;
            off = off_diagonal_norm(&h);
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| h[(i, i)].re.total_cmp(&h[(j, j)].re));
        let values = order.iter().map(|&i| h[(i, i)].re).collect();
        let vectors = Self::from_fn(n, n, |i, j| v[(i, order[j])]);
        Ok(EigenDecomposition { values, vectors })
    }
}

fn off_diagonal_norm(h: &CMatrix) -> f64 {
    let n = h.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += h[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilates `h[p][q]` with `h ← R† h R`, `v ← v R`, where
/// `R = diag(1, e^{-iφ}) · [[c, s], [-s, c]]` on the `(p, q)` plane and
/// `φ = arg h[p][q]`.
fn jacobi_rotate(h: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let g = h[(p, q)];
    let mag = g.norm();
    if mag == 0.0 {
        return;
    }
    let phase = g / mag;
    let app = h[(p, p)].re;
    let aqq = h[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        0.0
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let r00 = c64(c, 0.0);
    let r01 = c64(s, 0.0);
    let r10 = -phase.conj() * s;
    let r11 = phase.conj() * c;

    let n = h.rows;
    for k in 0..n {
        let hkp = h[(k, p)];
        let hkq = h[(k, q)];
        h[(k, p)] = hkp * r00 + hkq * r10;
        h[(k, q)] = hkp * r01 + hkq * r11;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * r00 + vkq * r10;
        v[(k, q)] = vkp * r01 + vkq * r11;
    }
    for k in 0..n {
        let hpk = h[(p, k)];
        let hqk = h[(q, k)];
        h[(p, k)] = r00.conj() * hpk + r10.conj() * hqk;
        h[(q, k)] = r01.conj() * hpk + r11.conj() * hqk;
    }
    h[(p, q)] = ZERO;
    h[(q, p)] = ZERO;
    h[(p, p)] = c64(app - t * mag, 0.0);
    h[(q, q)] = c64(aqq + t * mag, 0.0);
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn max_value(&self) -> f64 {
        *self
            .values
            .last()
            .expect("eigen-decomposition of a non-empty matrix")
    }

    /// `V · diag(λ) · V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_real_diag(&self.values);
        &(&self.vectors * &d) * &self.vectors.dagger()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix::add(self, rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix::sub(self, rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(c64(-1.0, 0.0))
    }
}

impl Mul<&CMatrix> for C64 {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        rhs.scale(self)
    }
}

/// Euclidean norm of a state vector.
pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
