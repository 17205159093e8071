//! The canonical self-tested realization (maximally entangled two-qutrit
//! state, Bob measuring `(Z, T_3)`, Alice measuring the conjugated
//! combinations) and the checks that certify it: nullification, the bound
//! `T_Q = 4`, and genuine incompatibility of the measured pairs.

use serde::Serialize;

use crate::belloperator::{
    bell_value, build_w, nullifier_residuals, spectral_max, NullifierResiduals, Realization,
};
use crate::bellparams::{family_point, BellParameters, ConstraintReport};
use crate::cmatrix::{c64, CMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::observables::{clock, omega, shift, t3, Kappa, Observable};

/// Tolerance for Alice's conjugated combinations to be admitted as observables.
pub const ALICE_OBSERVABLE_TOL: f64 = 1e-9;

/// Linear-independence threshold for algebra closure, relative to the largest
/// matrix norm seen.
pub const RANK_TOL: f64 = 1e-9;

/// Rounds of pairwise products before closure is declared unstable.
pub const MAX_CLOSURE_ROUNDS: usize = 6;

/// `|b|` below this makes shift recovery impossible.
const SHIFT_COEFF_TOL: f64 = 1e-8;

/// `|φ₊⟩ = (1/√3) Σᵢ |ii⟩` on `C³ ⊗ C³`.
pub fn maximally_entangled_state() -> Vec<C64> {
    let amp = c64(1.0 / 3f64.sqrt(), 0.0);
    (0..9)
        .map(|k| if k % 4 == 0 { amp } else { ZERO })
        .collect()
}

#[derive(Debug, Clone)]
pub struct CanonicalRealization {
    pub params: BellParameters,
    pub kappa: Kappa,
    pub constraints: ConstraintReport,
    pub realization: Realization,
}

/// Builds `|φ₊⟩`, `B₀ = Z`, `B₁ = T_3(κ)`, `A₀ = (αZ + βT_3)*`,
/// `A₁ = (γZ + δT_3)*`.
///
/// `*` is entrywise conjugation in the computational basis, the basis in which
/// `Z` is diagonal and `|φ₊⟩` is written. It is not basis-covariant.
pub fn canonical_realization(p: &BellParameters) -> Result<CanonicalRealization> {
    let constraints = p.check_constraints();
    if !constraints.all_satisfied() {
        return Err(Error::ConstraintsViolated(Box::new(constraints)));
    }
    let kappa = p.kappa()?;
    let b0 = clock();
    let b1 = t3(kappa).observable;
    let [alpha, beta, gamma, delta] = p.coefficients();
    let c0 = &(alpha * b0.matrix()) + &(beta * b1.matrix());
    let c1 = &(gamma * b0.matrix()) + &(delta * b1.matrix());
    let a0 = Observable::with_tolerance(c0.conj(), ALICE_OBSERVABLE_TOL)?;
    let a1 = Observable::with_tolerance(c1.conj(), ALICE_OBSERVABLE_TOL)?;
    let realization = Realization::new(maximally_entangled_state(), a0, a1, b0, b1)?;
    Ok(CanonicalRealization {
        params: *p,
        kappa,
        constraints,
        realization,
    })
}

/// `‖Lᵢψ‖` and `‖Lᵢ†ψ‖` for `i = 1, 2`.
pub fn verify_nullifiers(p: &BellParameters, r: &Realization) -> Result<NullifierResiduals> {
    nullifier_residuals(p, r)
}

/// Orthonormal basis (in the Frobenius inner product) of the unital algebra
/// generated by two matrices.
#[derive(Debug, Clone)]
pub struct AlgebraClosure {
    pub basis: Vec<CMatrix>,
    pub dimension: usize,
    /// Rounds of products needed before the dimension stopped growing.
    pub rounds: usize,
}

impl AlgebraClosure {
    /// Burnside: the algebra is all of `M_d(C)` iff it acts irreducibly.
    pub fn is_full(&self, d: usize) -> bool {
        self.dimension == d * d
    }
}

struct SpanBuilder {
    dim: usize,
    vectors: Vec<Vec<C64>>,
    max_norm: f64,
}

impl SpanBuilder {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: Vec::new(),
            max_norm: 0.0,
        }
    }

    /// Two passes of Gram–Schmidt; keeps the candidate if its residual is
    /// above `RANK_TOL` times the largest norm seen so far.
    fn try_add(&mut self, m: &CMatrix) -> bool {
        if self.vectors.len() == self.dim * self.dim {
            return false;
        }
        let mut v = m.as_slice().to_vec();
        let norm = crate::cmatrix::vec_norm(&v);
        self.max_norm = self.max_norm.max(norm);
        for _ in 0..2 {
            for q in &self.vectors {
                let proj: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, qi) in v.iter_mut().zip(q) {
                    *x -= proj * qi;
                }
            }
        }
        let rest = crate::cmatrix::vec_norm(&v);
        if rest <= RANK_TOL * self.max_norm || rest == 0.0 {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= rest);
        self.vectors.push(v);
        true
    }

    fn matrices(&self) -> Vec<CMatrix> {
        self.vectors
            .iter()
            .map(|v| CMatrix::new(self.dim, self.dim, v.clone()).expect("finite basis vector"))
            .collect()
    }
}

/// Seeds `{I, g₁, g₂}` and appends all pairwise products of the current basis
/// until the dimension stops growing.
pub fn algebra_dimension(g1: &CMatrix, g2: &CMatrix) -> Result<AlgebraClosure> {
    let d = g1.require_square("algebra_dimension")?;
    if g1.shape() != g2.shape() {
        return Err(Error::DimensionMismatch {
            op: "algebra_dimension",
            lhs: g1.shape(),
            rhs: g2.shape(),
        });
    }
    let mut span = SpanBuilder::new(d);
    for m in [&CMatrix::identity(d), g1, g2] {
        span.try_add(m);
    }
    for round in 1..=MAX_CLOSURE_ROUNDS {
        let before = span.vectors.len();
        let current = span.matrices();
        for x in &current {
            for y in &current {
                span.try_add(&(x * y));
            }
        }
        if span.vectors.len() == before {
            return Ok(AlgebraClosure {
                dimension: before,
                basis: current,
                rounds: round,
            });
        }
    }
    Err(Error::ClosureNotStable(MAX_CLOSURE_ROUNDS))
}

/// Rebuilds the shift `X` from `B₀ = Z` and `B₁ = aZ + b(ZX + ZX²)`, `b ≠ 0`,
/// using only algebra operations:
///
/// ```text
///   M₁ = (1/b) Z²(B₁ − aB₀) = X + X²
///   M₃, M₄, M₅ = projectors onto |0⟩, |1⟩, |2⟩ (polynomials in Z)
///   M₆ = M₄M₁²M₅ + M₃M₁²M₄ + M₅M₁²M₃ = X
/// ```
///
/// The coefficients `a`, `b` are read from κ, not fitted from `B₁`.
pub fn recover_shift(b0: &CMatrix, b1: &CMatrix, p: &BellParameters) -> Result<CMatrix> {
    recover_shift_with_kappa(b0, b1, p.kappa()?)
}

pub fn recover_shift_with_kappa(b0: &CMatrix, b1: &CMatrix, kappa: Kappa) -> Result<CMatrix> {
    let z = clock().into_matrix();
    if b0.shape() != (3, 3) || b1.shape() != (3, 3) {
        return Err(Error::DimensionMismatch {
            op: "recover_shift",
            lhs: b0.shape(),
            rhs: b1.shape(),
        });
    }
    let dev = (b0 - &z).frobenius_norm();
    if dev > 1e-12 {
        return Err(Error::NotClock(dev));
    }
    let a = kappa.t3_diagonal();
    let b = kappa.t3_off_diagonal();
    if b.norm() < SHIFT_COEFF_TOL {
        return Err(Error::DegenerateKappa(kappa.incompatibility().norm()));
    }
    let id = CMatrix::identity(3);
    let z2 = b0 * b0;
    let m1 = (&z2 * &(b1 - &(a * b0))).scale(b.inv());
    let w = omega();
    let projector = |k: C64| {
        // (1/3)(1 + Z/k + Z²/k²) picks the Z-eigenvalue k
        (&(&id + &z.scale(k.inv())) + &z2.scale(k.inv() * k.inv())).scale(c64(1.0 / 3.0, 0.0))
    };
    let m3 = projector(ONE);
    let m4 = projector(w);
    let m5 = projector(w * w);
    let m1sq = &m1 * &m1;
    let block = |l: &CMatrix, r: &CMatrix| &(l * &m1sq) * r;
    Ok(&(&block(&m4, &m5) + &block(&m3, &m4)) + &block(&m5, &m3))
}

/// `‖recover_shift(...) − X‖_F`.
pub fn shift_recovery_residual(b0: &CMatrix, b1: &CMatrix, p: &BellParameters) -> Result<f64> {
    Ok((&recover_shift(b0, b1, p)? - &shift()).frobenius_norm())
}

pub fn shift_recovery_residual_with_kappa(b0: &CMatrix, b1: &CMatrix, kappa: Kappa) -> Result<f64> {
    Ok((&recover_shift_with_kappa(b0, b1, kappa)? - &shift()).frobenius_norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub nullifier: f64,
    pub bell_value: f64,
    pub spectral_max: f64,
    pub shift_recovery: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            nullifier: 1e-9,
            bell_value: 1e-9,
            spectral_max: 1e-8,
            shift_recovery: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    pub theta_beta: f64,
    pub params: BellParameters,
    pub kappa: Kappa,
    pub constraints: ConstraintReport,
    pub nullifiers: NullifierResiduals,
    pub bell_value: f64,
    pub spectral_max: f64,
    /// Dimension of the algebra generated by Bob's `(Z, T_3)`.
    pub algebra_dimension_bob: usize,
    /// Dimension of the algebra generated by Alice's `(A₀, A₁)`.
    pub algebra_dimension_alice: usize,
    pub shift_recovery_residual: f64,
    pub thresholds: Thresholds,
    pub verdict: bool,
}

pub const TSIRELSON: f64 = 4.0;

pub fn certify(theta_beta: f64) -> Result<CertificationReport> {
    certify_with(theta_beta, &Thresholds::default())
}

pub fn certify_with(theta_beta: f64, th: &Thresholds) -> Result<CertificationReport> {
    let p = family_point(theta_beta).map_err(Error::at("family_point"))?;
    let canon = canonical_realization(&p).map_err(Error::at("canonical_realization"))?;
    let r = &canon.realization;
    let nullifiers = verify_nullifiers(&p, r).map_err(Error::at("nullifiers"))?;
    let bell = bell_value(&p, r).map_err(Error::at("bell_value"))?;
    let lambda_max = spectral_max(&build_w(&p, r)).map_err(Error::at("spectral_max"))?;
    let dim_bob = algebra_dimension(r.b0().matrix(), r.b1().matrix())
        .map_err(Error::at("algebra_dimension"))?
        .dimension;
    let dim_alice = algebra_dimension(r.a0().matrix(), r.a1().matrix())
        .map_err(Error::at("algebra_dimension"))?
        .dimension;
    let shift_res = shift_recovery_residual(r.b0().matrix(), r.b1().matrix(), &p)
        .map_err(Error::at("recover_shift"))?;

    let verdict = canon.constraints.all_satisfied()
        && nullifiers.within(th.nullifier)
        && (bell - TSIRELSON).abs() <= th.bell_value
        && (lambda_max - TSIRELSON).abs() <= th.spectral_max
        && dim_bob == 9
        && dim_alice == 9
        && shift_res <= th.shift_recovery;

    Ok(CertificationReport {
        theta_beta,
        params: p,
        kappa: canon.kappa,
        constraints: canon.constraints,
        nullifiers,
        bell_value: bell,
        spectral_max: lambda_max,
        algebra_dimension_bob: dim_bob,
        algebra_dimension_alice: dim_alice,
        shift_recovery_residual: shift_res,
        thresholds: *th,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::check_order3;
    use std::f64::consts::PI;

    fn kappa_params(phi: f64) -> BellParameters {
        // only the phase difference matters for recover_shift
        BellParameters::from_polar([(1.0, phi / 2.0), (1.0, 0.0), (1.0, phi / 2.0), (1.0, 0.0)])
    }

    #[test]
    fn phi_plus_is_normalized() {
        let s = maximally_entangled_state();
        assert!((crate::cmatrix::vec_norm(&s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn commuting_generators_give_diagonal_algebra() {
        let z = clock().into_matrix();
        let c = algebra_dimension(&z, &z).unwrap();
        assert_eq!(c.dimension, 3);
        assert!(!c.is_full(3));
    }

    #[test]
    fn clock_and_shift_generate_everything() {
        let z = clock().into_matrix();
        let c = algebra_dimension(&z, &shift()).unwrap();
        assert_eq!(c.dimension, 9);
        assert!(c.is_full(3));
    }

    #[test]
    fn clock_and_t3_generate_everything() {
        let z = clock().into_matrix();
        let t = t3(Kappa::from_angle(PI / 3.0)).observable.into_matrix();
        assert_eq!(algebra_dimension(&z, &t).unwrap().dimension, 9);
        let degenerate = t3(Kappa::from_angle(0.0)).observable.into_matrix();
        assert_eq!(algebra_dimension(&z, &degenerate).unwrap().dimension, 3);
    }

    #[test]
    fn algebra_basis_is_orthonormal() {
        let z = clock().into_matrix();
        let c = algebra_dimension(&z, &shift()).unwrap();
        for (i, a) in c.basis.iter().enumerate() {
            for (j, b) in c.basis.iter().enumerate() {
                let ip: C64 = crate::cmatrix::inner(a.as_slice(), b.as_slice());
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn algebra_dimension_shape_errors() {
        assert!(algebra_dimension(&CMatrix::identity(3), &CMatrix::identity(2)).is_err());
        assert!(algebra_dimension(&CMatrix::zeros(2, 3), &CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn shift_recovered_for_valid_kappas() {
        let z = clock().into_matrix();
        for phi in [PI / 3.0, PI / 4.0, 2.5] {
            let p = kappa_params(phi);
            let t = t3(p.kappa().unwrap()).observable.into_matrix();
            let res = shift_recovery_residual(&z, &t, &p).unwrap();
            assert!(res <= 1e-10, "phi={phi}: {res}");
        }
    }

    #[test]
    fn shift_recovery_refuses_degenerate_kappa() {
        let z = clock().into_matrix();
        let p = kappa_params(0.0);
        assert!(matches!(
            recover_shift(&z, &z, &p),
            Err(Error::DegenerateKappa(_))
        ));
        assert!(matches!(
            recover_shift(&shift(), &z, &kappa_params(1.0)),
            Err(Error::NotClock(_))
        ));
    }

    #[test]
    fn canonical_realization_at_satwap_point() {
        let p = family_point(PI / 12.0).unwrap();
        let c = canonical_realization(&p).unwrap();
        let r = &c.realization;
        assert!((bell_value(&p, r).unwrap() - 4.0).abs() < 1e-9);
        for o in [r.b0(), r.b1()] {
            assert!(o.matrix().trace().unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn canonical_alice_observables_are_order3() {
        let p = family_point(PI / 24.0).unwrap();
        let c = canonical_realization(&p).unwrap();
        let a0 = c.realization.a0().matrix();
        assert!(check_order3(a0, 1e-9).unwrap().passed);
    }

    #[test]
    fn canonical_realization_rejects_degenerate_parameters() {
        // theta_alpha = theta_beta: kappa = 1, which also puts the phase
        // difference on the lattice
        let p = BellParameters::from_polar([(0.5, 0.2), (0.5, 0.2), (0.5, 0.3), (0.5, 0.3)]);
        match canonical_realization(&p) {
            Err(Error::ConstraintsViolated(rep)) => {
                assert!(!rep.incompatibility.satisfied);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nullifiers_vanish_only_on_phi_plus() {
        let p = family_point(PI / 12.0).unwrap();
        let c = canonical_realization(&p).unwrap();
        let res = verify_nullifiers(&p, &c.realization).unwrap();
        assert!(res.within(1e-10), "{res:?}");

        let mut e00 = vec![ZERO; 9];
        e00[0] = ONE;
        let product = c.realization.with_state(e00).unwrap();
        let res = verify_nullifiers(&p, &product).unwrap();
        assert!(res.min() > 0.1, "{res:?}");
    }

    #[test]
    fn perturbed_b1_gives_first_order_residuals() {
        let p = family_point(PI / 12.0).unwrap();
        let c = canonical_realization(&p).unwrap();
        let r = &c.realization;
        let eps = 1e-4;
        let v = CMatrix::from_diag(&[ONE, C64::from_polar(1.0, eps), C64::from_polar(1.0, -eps)]);
        let b1 = r.b1().conjugate_by(&v).unwrap();
        let bumped = Realization::new(
            r.state().to_vec(),
            r.a0().clone(),
            r.a1().clone(),
            r.b0().clone(),
            b1,
        )
        .unwrap();
        let res = verify_nullifiers(&p, &bumped).unwrap();
        assert!(res.max() > 1e-6 && res.max() < 1e-2, "{res:?}");
    }

    #[test]
    fn certify_passes_at_reference_points() {
        for t in [PI / 12.0, PI / 24.0] {
            let rep = certify(t).unwrap();
            assert!(rep.verdict, "{rep:?}");
            assert!((rep.bell_value - 4.0).abs() < 1e-9);
            assert_eq!(rep.algebra_dimension_bob, 9);
            assert_eq!(rep.algebra_dimension_alice, 9);
        }
    }

    #[test]
    fn certify_reports_stage_on_failure() {
        match certify(PI / 6.0 - 1e-9) {
            Err(Error::Stage { stage, source }) => {
                assert_eq!(stage, "canonical_realization");
                assert!(matches!(*source, Error::ConstraintsViolated(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
        match certify(0.0) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, "family_point"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
