//! Qutrit measurement observables: the Weyl–Heisenberg clock and shift, the
//! self-tested observable `T_3(κ)`, the general Heisenberg–Weyl expansion of a
//! second observable, and seeded random order-3 observables.
//!
//! An observable here is a unitary `A` with `A³ = 1` and `A² = A†`, i.e. a
//! projective three-outcome measurement written in its Fourier form.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::cmatrix::{c64, CMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Tolerance used when a matrix is admitted as an [`Observable`].
pub const OBSERVABLE_TOL: f64 = 1e-10;

/// `|κ|` must be within this of 1.
pub const KAPPA_UNIT_TOL: f64 = 1e-12;

/// `|κ² − 1/κ|` at or below this marks κ as degenerate (κ³ = 1).
pub const DEGENERACY_TOL: f64 = 1e-8;

/// `ω = exp(2πi/3)`.
pub fn omega() -> C64 {
    C64::from_polar(1.0, 2.0 * PI / 3.0)
}

fn clock_matrix() -> CMatrix {
    let w = omega();
    CMatrix::from_diag(&[ONE, w, w * w])
}

/// Clock matrix `Z = Σ ωⁱ |i⟩⟨i|`.
pub fn clock() -> Observable {
    Observable {
        matrix: clock_matrix(),
    }
}

/// Shift matrix `X = Σ |i⟩⟨i+1|`, so `X|0⟩ = |2⟩`.
pub fn shift() -> CMatrix {
    CMatrix::from_fn(3, 3, |i, j| if j == (i + 1) % 3 { ONE } else { ZERO })
}

/// A validated order-3 unitary observable on a space of dimension `3n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, OBSERVABLE_TOL)
    }

    pub fn with_tolerance(matrix: CMatrix, tol: f64) -> Result<Self> {
        let n = matrix.require_square("observable")?;
        if n % 3 != 0 {
            return Err(Error::NotMultipleOfThree(n));
        }
        let report = check_order3(&matrix, tol)?;
        if !report.passed {
            return Err(Error::NotOrder3 {
                cube: report.cube_residual,
                unitarity: report.unitarity_residual,
                square: report.square_dagger_residual,
            });
        }
        Ok(Self { matrix })
    }

    /// Skips validation; for constructions that are order-3 by algebra.
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `U A U†` for a unitary `U`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        let m = u.matmul(&self.matrix)?.matmul(&u.dagger())?;
        Self::new(m)
    }
}

/// The unit-modulus parameter `κ = αβ*/(α*β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa(C64);

impl Kappa {
    pub fn new(value: C64) -> Result<Self> {
        let m = value.norm();
        if (m - 1.0).abs() > KAPPA_UNIT_TOL || !m.is_finite() {
            return Err(Error::KappaNotUnit(m));
        }
        Ok(Self(value))
    }

    /// `κ = e^{iφ}`.
    pub fn from_angle(phi: f64) -> Self {
        Self(C64::from_polar(1.0, phi))
    }

    pub fn value(self) -> C64 {
        self.0
    }

    /// `κ² − 1/κ`; vanishes exactly when κ³ = 1.
    pub fn incompatibility(self) -> C64 {
        self.0 * self.0 - self.0.inv()
    }

    pub fn is_degenerate(self) -> bool {
        self.incompatibility().norm() <= DEGENERACY_TOL
    }

    /// Diagonal weight `(κ² + 2/κ)/3` of `T_3` on `Z`.
    pub fn t3_diagonal(self) -> C64 {
        (self.0 * self.0 + 2.0 * self.0.inv()) / 3.0
    }

    /// Off-diagonal weight `(κ² − 1/κ)/3` of `T_3` on `ZX` and `ZX²`.
    pub fn t3_off_diagonal(self) -> C64 {
        self.incompatibility() / 3.0
    }
}

/// `T_3(κ)` together with its degeneracy flag.
#[derive(Debug, Clone)]
pub struct T3 {
    pub observable: Observable,
    /// Set when κ³ = 1: `T_3` collapses onto a multiple of `Z` and the pair
    /// `(Z, T_3)` is no longer incompatible.
    pub degenerate: bool,
}

/// The self-tested second observable
/// `T_3 = ⅓[(κ² + 2/κ) Z + (κ² − 1/κ)(ZX + ZX²)]`.
///
/// Equal weights on `ZX` and `ZX²` fix the diagonal-unitary gauge; with this
/// choice the result is unitary and cubes to the identity for every unit κ.
pub fn t3(kappa: Kappa) -> T3 {
    let z = clock_matrix();
    let x = shift();
    let zx = &z * &x;
    let zx2 = &zx * &x;
    let m = &(kappa.t3_diagonal() * &z) + &(kappa.t3_off_diagonal() * &(&zx + &zx2));
    T3 {
        observable: Observable::from_matrix_unchecked(m),
        degenerate: kappa.is_degenerate(),
    }
}

/// Coefficients of `B₁ = aZ + bZ² + X(c + dZ + eZ²) + X²(f + gZ + hZ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct B1Coefficients {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    pub e: C64,
    pub f: C64,
    pub g: C64,
    pub h: C64,
}

impl B1Coefficients {
    /// Coefficients of `T_3(κ)` in the `B₁` expansion. Uses `ZX = ω XZ`, so
    /// `ZX = X(ωZ)` and `ZX² = X²(ω²Z)`.
    pub fn for_t3(kappa: Kappa) -> Self {
        let w = omega();
        let off = kappa.t3_off_diagonal();
        Self {
            a: kappa.t3_diagonal(),
            d: w * w * off,
            g: w * off,
            ..Self::default()
        }
    }
}

pub fn b1_general(k: &B1Coefficients) -> CMatrix {
    let id = CMatrix::identity(3);
    let z = clock_matrix();
    let z2 = &z * &z;
    let x = shift();
    let x2 = &x * &x;
    let poly = |c0: C64, c1: C64, c2: C64| &(&(c0 * &id) + &(c1 * &z)) + &(c2 * &z2);
    let diag = &(k.a * &z) + &(k.b * &z2);
    let first = &x * &poly(k.c, k.d, k.e);
    let second = &x2 * &poly(k.f, k.g, k.h);
    &(&diag + &first) + &second
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Order3Report {
    /// `‖m³ − I‖_F`
    pub cube_residual: f64,
    /// `‖m†m − I‖_F`
    pub unitarity_residual: f64,
    /// `‖m² − m†‖_F`
    pub square_dagger_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Order3Report {
    pub fn max_residual(&self) -> f64 {
        self.cube_residual
            .max(self.unitarity_residual)
            .max(self.square_dagger_residual)
    }
}

pub fn check_order3(m: &CMatrix, tol: f64) -> Result<Order3Report> {
    let n = m.require_square("check_order3")?;
    let id = CMatrix::identity(n);
    let m2 = m * m;
    let m3 = &m2 * m;
    let dag = m.dagger();
    let cube_residual = (&m3 - &id).frobenius_norm();
    let unitarity_residual = (&(&dag * m) - &id).frobenius_norm();
    let square_dagger_residual = (&m2 - &dag).frobenius_norm();
    let passed = cube_residual <= tol && unitarity_residual <= tol && square_dagger_residual <= tol;
    Ok(Order3Report {
        cube_residual,
        unitarity_residual,
        square_dagger_residual,
        tol,
        passed,
    })
}

/// Seeded pseudo-random unitary.
///
/// The generator is xoshiro256++ seeded through SplitMix64
/// (`Xoshiro256PlusPlus::seed_from_u64`). A complex Gaussian matrix is drawn
/// row-major, real part before imaginary part, and its columns are
/// orthonormalised left to right by modified Gram–Schmidt.
pub fn random_unitary(dim: usize, seed: u64) -> CMatrix {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let re = draw();
        let im = draw();
        c64(re, im)
    });
    let mut cols: Vec<Vec<C64>> = (0..dim).map(|j| g.column(j)).collect();
    for j in 0..dim {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let qk = &done[k];
            let cj = &mut rest[0];
            let proj: C64 = qk.iter().zip(cj.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, q) in cj.iter_mut().zip(qk) {
                *x -= proj * q;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    CMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// `U D U†` with `D` carrying 1, ω, ω² each `dim/3` times and `U` from
/// [`random_unitary`] with the same seed.
pub fn random_order3(dim: usize, seed: u64) -> Result<Observable> {
    if dim == 0 || !dim.is_multiple_of(3) {
        return Err(Error::NotMultipleOfThree(dim));
    }
    let w = omega();
    let block = dim / 3;
    let diag: Vec<C64> = (0..dim)
        .map(|i| match i / block {
            0 => ONE,
            1 => w,
            _ => w * w,
        })
        .collect();
    let u = random_unitary(dim, seed);
    let m = &(&u * &CMatrix::from_diag(&diag)) * &u.dagger();
    Observable::new(m)
}

/// Trivial observable `ω^k · I` on dimension `dim`.
pub fn scalar_observable(k: u8, dim: usize) -> Result<Observable> {
    Observable::new(CMatrix::identity(dim).scale(omega().powu(u32::from(k % 3))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).frobenius_norm() <= tol
    }

    #[test]
    fn clock_cubes_to_identity() {
        let z = clock();
        assert!(close(
            &z.matrix().mat_power(3).unwrap(),
            &CMatrix::identity(3),
            1e-14
        ));
    }

    #[test]
    fn shift_maps_zero_to_two() {
        let e0 = vec![ONE, ZERO, ZERO];
        let out = shift().apply(&e0).unwrap();
        assert_eq!(out, vec![ZERO, ZERO, ONE]);
    }

    #[test]
    fn omega_is_primitive_cube_root() {
        let w = omega();
        assert!((w * w + w + 1.0).norm() < 1e-15);
    }

    #[test]
    fn weyl_commutation() {
        let z = clock();
        let x = shift();
        let lhs = &x * z.matrix();
        let rhs = omega() * &(z.matrix() * &x);
        assert!(close(&lhs, &rhs, 1e-14));
    }

    #[test]
    fn t3_at_kappa_one_is_clock() {
        let t = t3(Kappa::from_angle(0.0));
        assert!(t.degenerate);
        assert!(close(t.observable.matrix(), clock().matrix(), 1e-15));
    }

    #[test]
    fn t3_at_pi_over_three_is_order3_and_traceless() {
        let t = t3(Kappa::from_angle(PI / 3.0));
        assert!(!t.degenerate);
        let m = t.observable.matrix();
        let r = check_order3(m, 1e-10).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(m.trace().unwrap().norm() < 1e-12);
    }

    #[test]
    fn t3_spectrum_is_the_three_cube_roots() {
        // A normal matrix has Hermitian and anti-Hermitian parts that commute.
        // The anti-Hermitian part has non-degenerate spectrum ±√3/2, 0, so its
        // eigenbasis diagonalizes T.
        let t = t3(Kappa::from_angle(PI / 3.0)).observable.into_matrix();
        let herm = (&t - &t.dagger()).scale(c64(0.0, -0.5));
        let eig = herm.hermitian_eigen(1e-12).unwrap();
        let mut found: Vec<C64> = (0..3)
            .map(|j| {
                let v = eig.vectors.column(j);
                let tv = t.apply(&v).unwrap();
                crate::cmatrix::inner(&v, &tv)
            })
            .collect();
        found.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        let w = omega();
        let expected = [w * w, ONE, w];
        for (f, e) in found.iter().zip(expected) {
            assert!((f - e).norm() < 1e-10, "{f} vs {e}");
        }
    }

    #[test]
    fn extra_omega_on_zx2_term_breaks_unitarity() {
        // Putting an extra ω on the ZX² term breaks unitarity; the gauge used
        // by `t3` has equal weights on ZX and ZX².
        let k = Kappa::from_angle(PI / 3.0);
        let z = clock_matrix();
        let x = shift();
        let zx = &z * &x;
        let zx2 = &zx * &x;
        let off = k.t3_off_diagonal();
        let m = &(k.t3_diagonal() * &z) + &(&(off * &zx) + &((omega() * off) * &zx2));
        assert!(!check_order3(&m, 1e-3).unwrap().passed);
    }

    #[test]
    fn b1_general_basic_cases() {
        let only_a = B1Coefficients {
            a: ONE,
            ..Default::default()
        };
        assert!(close(&b1_general(&only_a), clock().matrix(), 1e-15));
        assert_eq!(b1_general(&B1Coefficients::default()).frobenius_norm(), 0.0);
    }

    #[test]
    fn b1_expansion_of_t3_matches_and_is_order3() {
        for phi in [PI / 3.0, PI / 4.0, 1.234] {
            let k = Kappa::from_angle(phi);
            let coeffs = B1Coefficients::for_t3(k);
            assert_eq!(coeffs.b, ZERO);
            let b1 = b1_general(&coeffs);
            let diff = (&b1 - t3(k).observable.matrix()).frobenius_norm();
            assert!(diff < 1e-13, "{diff}");
            assert!(check_order3(&b1, 1e-10).unwrap().passed);
        }
    }

    #[test]
    fn check_order3_detects_perturbation() {
        let perturbed = &shift()
            + &CMatrix::from_fn(3, 3, |i, j| {
                if i == 0 && j == 0 {
                    c64(1e-3, 0.0)
                } else {
                    ZERO
                }
            });
        let r = check_order3(&perturbed, 1e-10).unwrap();
        assert!(!r.passed);
        // first-order: each residual is a small multiple of the 1e-3 kick
        assert!(r.max_residual() > 5e-4 && r.max_residual() < 1e-2, "{r:?}");
        let r = check_order3(clock().matrix(), 1e-10).unwrap();
        assert!(r.passed);
        assert!(r.max_residual() < 1e-14, "{r:?}");
    }

    #[test]
    fn random_order3_contracts() {
        for seed in 0..5 {
            let o = random_order3(3, seed).unwrap();
            assert!(close(
                &o.matrix().mat_power(3).unwrap(),
                &CMatrix::identity(3),
                1e-10
            ));
            let o6 = random_order3(6, seed).unwrap();
            assert!(o6.matrix().trace().unwrap().norm() < 1e-10);
        }
        assert_eq!(random_order3(6, 99).unwrap(), random_order3(6, 99).unwrap());
        assert_ne!(
            random_order3(6, 99).unwrap(),
            random_order3(6, 100).unwrap()
        );
        assert!(matches!(
            random_order3(4, 0),
            Err(Error::NotMultipleOfThree(4))
        ));
        assert!(random_order3(0, 0).is_err());
    }

    #[test]
    fn random_unitary_is_unitary() {
        for dim in [1, 3, 9, 27] {
            assert!(random_unitary(dim, 5).is_unitary(1e-12));
        }
    }

    #[test]
    fn kappa_validation() {
        assert!(Kappa::new(c64(0.5, 0.0)).is_err());
        assert!(Kappa::new(c64(0.0, 1.0)).is_ok());
        assert!(Kappa::from_angle(2.0 * PI / 3.0).is_degenerate());
        assert!(!Kappa::from_angle(PI / 3.0).is_degenerate());
    }

    #[test]
    fn observable_rejects_non_order3() {
        assert!(matches!(
            Observable::new(CMatrix::identity(3).scale(c64(0.0, 1.0))),
            Err(Error::NotOrder3 { .. })
        ));
        assert!(matches!(
            Observable::new(CMatrix::identity(2)),
            Err(Error::NotMultipleOfThree(2))
        ));
        assert!(scalar_observable(2, 3).is_ok());
    }
}
