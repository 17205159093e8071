//! The Bell operator
//! `W = A₀⊗(αB₀+βB₁) + A₁⊗(γB₀+δB₁) + h.c.`, its nullifiers, and the
//! sum-of-squares identity
//! `W = (2 + Σ|·|²)·1 − ½ Σᵢ (Lᵢ†Lᵢ + LᵢLᵢ†)` that bounds its quantum value.

use serde::Serialize;

use crate::bellparams::{BellParameters, EQUALITY_TOL};
use crate::cmatrix::{inner, vec_norm, CMatrix, C64};
use crate::error::{Error, Result};
use crate::observables::Observable;

pub const STATE_NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A state together with Alice's `(A₀, A₁)` and Bob's `(B₀, B₁)`.
#[derive(Debug, Clone)]
pub struct Realization {
    state: Vec<C64>,
    a0: Observable,
    a1: Observable,
    b0: Observable,
    b1: Observable,
}

impl Realization {
    pub fn new(
        state: Vec<C64>,
        a0: Observable,
        a1: Observable,
        b0: Observable,
        b1: Observable,
    ) -> Result<Self> {
        let dim_mismatch = |lhs: &Observable, rhs: &Observable| Error::DimensionMismatch {
            op: "realization",
            lhs: lhs.matrix().shape(),
            rhs: rhs.matrix().shape(),
        };
        if a0.dim() != a1.dim() {
            return Err(dim_mismatch(&a0, &a1));
        }
        if b0.dim() != b1.dim() {
            return Err(dim_mismatch(&b0, &b1));
        }
        let total = a0.dim() * b0.dim();
        if state.len() != total {
            return Err(Error::DimensionMismatch {
                op: "realization state",
                lhs: (total, 1),
                rhs: (state.len(), 1),
            });
        }
        let norm = vec_norm(&state);
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::StateNotNormalized(norm));
        }
        Ok(Self {
            state,
            a0,
            a1,
            b0,
            b1,
        })
    }

    pub fn state(&self) -> &[C64] {
        &self.state
    }

    pub fn a0(&self) -> &Observable {
        &self.a0
    }

    pub fn a1(&self) -> &Observable {
        &self.a1
    }

    pub fn b0(&self) -> &Observable {
        &self.b0
    }

    pub fn b1(&self) -> &Observable {
        &self.b1
    }

    pub fn dim_a(&self) -> usize {
        self.a0.dim()
    }

    pub fn dim_b(&self) -> usize {
        self.b0.dim()
    }

    pub fn with_state(&self, state: Vec<C64>) -> Result<Self> {
        Self::new(
            state,
            self.a0.clone(),
            self.a1.clone(),
            self.b0.clone(),
            self.b1.clone(),
        )
    }

    /// Bob's combinations `(C₀, C₁) = (αB₀ + βB₁, γB₀ + δB₁)`.
    pub fn bob_combinations(&self, p: &BellParameters) -> (CMatrix, CMatrix) {
        let [alpha, beta, gamma, delta] = p.coefficients();
        let b0 = self.b0.matrix();
        let b1 = self.b1.matrix();
        let c0 = &(alpha * b0) + &(beta * b1);
        let c1 = &(gamma * b0) + &(delta * b1);
        (c0, c1)
    }
}

#[derive(Debug, Clone)]
pub struct BellOperatorMatrix {
    w: CMatrix,
}

impl BellOperatorMatrix {
    pub fn new(w: CMatrix) -> Result<Self> {
        let asymmetry = w.hermitian_asymmetry();
        if !w.is_square() || asymmetry > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                asymmetry,
                tol: HERMITIAN_TOL,
            });
        }
        Ok(Self { w })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.w
    }
}

pub fn build_w(p: &BellParameters, r: &Realization) -> BellOperatorMatrix {
    let (c0, c1) = r.bob_combinations(p);
    let half = &r.a0.matrix().kron(&c0) + &r.a1.matrix().kron(&c1);
    BellOperatorMatrix {
        w: &half + &half.dagger(),
    }
}

#[derive(Debug, Clone)]
pub struct Nullifiers {
    /// `1 − A₀ ⊗ (αB₀ + βB₁)`
    pub l1: CMatrix,
    /// `1 − A₁ ⊗ (γB₀ + δB₁)`
    pub l2: CMatrix,
}

pub fn nullifiers(p: &BellParameters, r: &Realization) -> Nullifiers {
    let (c0, c1) = r.bob_combinations(p);
    let id = CMatrix::identity(r.dim_a() * r.dim_b());
    Nullifiers {
        l1: &id - &r.a0.matrix().kron(&c0),
        l2: &id - &r.a1.matrix().kron(&c1),
    }
}

/// `T_Q = 2 + |α|² + |β|² + |γ|² + |δ|²`.
pub fn tsirelson_bound(p: &BellParameters) -> f64 {
    2.0 + p.amplitude_norm_sq()
}

/// Frobenius norm of `W + ½Σᵢ(Lᵢ†Lᵢ + LᵢLᵢ†) − T_Q·1`.
pub fn sos_residual(p: &BellParameters, r: &Realization) -> Result<f64> {
    let cross = p.cross_term().norm();
    if cross > EQUALITY_TOL {
        return Err(Error::CrossTermsNonzero(cross));
    }
    let w = build_w(p, r);
    let n = nullifiers(p, r);
    let square = |l: &CMatrix| {
        let d = l.dagger();
        &(&d * l) + &(l * &d)
    };
    let sos = (&square(&n.l1) + &square(&n.l2)).scale(C64::new(0.5, 0.0));
    let id = CMatrix::identity(w.matrix().rows());
    let residual = &(&w.w + &sos) - &id.scale(C64::new(tsirelson_bound(p), 0.0));
    Ok(residual.frobenius_norm())
}

/// `⟨ψ|W|ψ⟩`.
pub fn bell_value(p: &BellParameters, r: &Realization) -> Result<f64> {
    let w = build_w(p, r);
    let v = quadratic_form(w.matrix(), r.state())?;
    let scale = 1.0 + w.matrix().frobenius_norm();
    if v.im.abs() > 1e-12 * scale {
        return Err(Error::ComplexBellValue(v.im));
    }
    Ok(v.re)
}

fn quadratic_form(m: &CMatrix, psi: &[C64]) -> Result<C64> {
    Ok(inner(psi, &m.apply(psi)?))
}

/// Largest eigenvalue of `W`.
pub fn spectral_max(w: &BellOperatorMatrix) -> Result<f64> {
    Ok(w.matrix().hermitian_eigen(HERMITIAN_TOL)?.max_value())
}

/// `‖L₁ψ‖, ‖L₁†ψ‖, ‖L₂ψ‖, ‖L₂†ψ‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullifierResiduals {
    pub l1: f64,
    pub l1_dagger: f64,
    pub l2: f64,
    pub l2_dagger: f64,
}

impl NullifierResiduals {
    pub fn as_array(&self) -> [f64; 4] {
        [self.l1, self.l1_dagger, self.l2, self.l2_dagger]
    }

    pub fn max(&self) -> f64 {
        self.as_array().into_iter().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.as_array().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

pub fn nullifier_residuals(p: &BellParameters, r: &Realization) -> Result<NullifierResiduals> {
    let n = nullifiers(p, r);
    let psi = r.state();
    let act = |m: &CMatrix| -> Result<f64> { Ok(vec_norm(&m.apply(psi)?)) };
    Ok(NullifierResiduals {
        l1: act(&n.l1)?,
        l1_dagger: act(&n.l1.dagger())?,
        l2: act(&n.l2)?,
        l2_dagger: act(&n.l2.dagger())?,
    })
}
