//! Bell coefficients `α, β, γ, δ` and the constraint system that makes the
//! inequality self-testing.
//!
//! Coefficients are stored in signed-polar form `r · e^{iθ}`: the amplitude
//! solution of `α²/α* + β²/β* = 1` is negative on part of the parameter range,
//! and keeping the sign lets the angles stay exactly where the family
//! construction puts them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cmatrix::C64;
use crate::error::{Error, Result};
use crate::observables::{Kappa, DEGENERACY_TOL};

/// Equality constraints count as satisfied at or below this residual.
pub const EQUALITY_TOL: f64 = 1e-10;
/// Angles closer than this to the `nπ/3` lattice violate c2.
pub const LATTICE_TOL: f64 = 1e-8;
/// Denominators below this are treated as vanishing.
const DENOMINATOR_TOL: f64 = 1e-12;

const LATTICE: f64 = PI / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellParameters {
    pub theta_alpha: f64,
    pub theta_beta: f64,
    pub theta_gamma: f64,
    pub theta_delta: f64,
    pub r_alpha: f64,
    pub r_beta: f64,
    pub r_gamma: f64,
    pub r_delta: f64,
}

fn polar(r: f64, theta: f64) -> C64 {
    C64::from_polar(1.0, theta) * r
}

/// Distance from `x` to the nearest multiple of `period`.
pub fn lattice_distance(x: f64, period: f64) -> f64 {
    (x - period * (x / period).round()).abs()
}

impl BellParameters {
    /// Parameters from `[(r_α, θ_α), (r_β, θ_β), (r_γ, θ_γ), (r_δ, θ_δ)]`.
    pub fn from_polar(coeffs: [(f64, f64); 4]) -> Self {
        let [(ra, ta), (rb, tb), (rg, tg), (rd, td)] = coeffs;
        Self {
            theta_alpha: ta,
            theta_beta: tb,
            theta_gamma: tg,
            theta_delta: td,
            r_alpha: ra,
            r_beta: rb,
            r_gamma: rg,
            r_delta: rd,
        }
    }

    pub fn zero() -> Self {
        Self::from_polar([(0.0, 0.0); 4])
    }

    pub fn alpha(&self) -> C64 {
        polar(self.r_alpha, self.theta_alpha)
    }

    pub fn beta(&self) -> C64 {
        polar(self.r_beta, self.theta_beta)
    }

    pub fn gamma(&self) -> C64 {
        polar(self.r_gamma, self.theta_gamma)
    }

    pub fn delta(&self) -> C64 {
        polar(self.r_delta, self.theta_delta)
    }

    /// `[α, β, γ, δ]`
    pub fn coefficients(&self) -> [C64; 4] {
        [self.alpha(), self.beta(), self.gamma(), self.delta()]
    }

    pub fn amplitudes(&self) -> [f64; 4] {
        [self.r_alpha, self.r_beta, self.r_gamma, self.r_delta]
    }

    pub fn angles(&self) -> [f64; 4] {
        [
            self.theta_alpha,
            self.theta_beta,
            self.theta_gamma,
            self.theta_delta,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes()
            .iter()
            .chain(self.angles().iter())
            .all(|x| x.is_finite())
    }

    /// `|α|² + |β|² + |γ|² + |δ|²`
    pub fn amplitude_norm_sq(&self) -> f64 {
        self.amplitudes().iter().map(|r| r * r).sum()
    }

    /// `αβ* + γδ*`, the cross term that must vanish for the SOS identity.
    pub fn cross_term(&self) -> C64 {
        self.alpha() * self.beta().conj() + self.gamma() * self.delta().conj()
    }

    /// Folds negative amplitudes into the phase: `(−r, θ) → (r, θ + π/3)`.
    ///
    /// This preserves every coefficient's cube (`e^{iπ} = −1`) and therefore
    /// `c3`, `c4` and the vertex values that depend on `3θ`, but it does not
    /// preserve `αβ*` or `κ`.
    pub fn normalize(&self) -> Self {
        let fold = |r: f64, t: f64| if r < 0.0 { (-r, t + LATTICE) } else { (r, t) };
        let (ra, ta) = fold(self.r_alpha, self.theta_alpha);
        let (rb, tb) = fold(self.r_beta, self.theta_beta);
        let (rg, tg) = fold(self.r_gamma, self.theta_gamma);
        let (rd, td) = fold(self.r_delta, self.theta_delta);
        Self::from_polar([(ra, ta), (rb, tb), (rg, tg), (rd, td)])
    }

    /// `κ = e^{2i(θ_α − θ_β)}`, required to agree with `e^{2i(θ_γ − θ_δ)}`.
    pub fn kappa(&self) -> Result<Kappa> {
        let first = C64::from_polar(1.0, 2.0 * (self.theta_alpha - self.theta_beta));
        let second = C64::from_polar(1.0, 2.0 * (self.theta_gamma - self.theta_delta));
        if (first - second).norm() > EQUALITY_TOL {
            return Err(Error::C1Violated { first, second });
        }
        Kappa::new(first)
    }

    /// Real and imaginary residuals of `|α| e^{3iθ_α} + |β| e^{3iθ_β} = 1` and
    /// the γδ analogue, as `[(re_αβ, im_αβ), (re_γδ, im_γδ)]`.
    pub fn c4_components(&self) -> [(f64, f64); 2] {
        let pair = |ra: f64, ta: f64, rb: f64, tb: f64| {
            (
                ra * (3.0 * ta).cos() + rb * (3.0 * tb).cos() - 1.0,
                ra * (3.0 * ta).sin() + rb * (3.0 * tb).sin(),
            )
        };
        [
            pair(self.r_alpha, self.theta_alpha, self.r_beta, self.theta_beta),
            pair(
                self.r_gamma,
                self.theta_gamma,
                self.r_delta,
                self.theta_delta,
            ),
        ]
    }

    pub fn check_constraints(&self) -> ConstraintReport {
        let c1_residual = lattice_distance(
            (self.theta_alpha - self.theta_beta) - (self.theta_gamma - self.theta_delta),
            PI,
        );

        let c2_residual = [
            self.theta_alpha - self.theta_beta,
            self.theta_gamma - self.theta_delta,
            self.theta_alpha,
            self.theta_beta,
            self.theta_gamma,
            self.theta_delta,
        ]
        .iter()
        .map(|&t| lattice_distance(t, LATTICE))
        .fold(f64::INFINITY, f64::min);

        let c3_residual = (self.amplitude_norm_sq() - 2.0).abs();

        // z²/z* with the removable singularity at z = 0 filled in by 0.
        let ratio = |z: C64| if z.norm() == 0.0 { z } else { z * z / z.conj() };
        let c4_ab = (ratio(self.alpha()) + ratio(self.beta()) - 1.0).norm();
        let c4_gd = (ratio(self.gamma()) + ratio(self.delta()) - 1.0).norm();
        let c4_residual = c4_ab.max(c4_gd);

        let c5_residual = self.cross_term().norm();

        let kappa = Kappa::from_angle(2.0 * (self.theta_alpha - self.theta_beta));
        let incompat_residual = kappa.incompatibility().norm();

        let eq = |label, residual: f64| ConstraintCheck {
            label,
            satisfied: residual <= EQUALITY_TOL,
            residual,
        };
        ConstraintReport {
            c1: eq(C1_LABEL, c1_residual),
            c2: ConstraintCheck {
                label: C2_LABEL,
                satisfied: c2_residual > LATTICE_TOL,
                residual: c2_residual,
            },
            c3: eq(C3_LABEL, c3_residual),
            c4: eq(C4_LABEL, c4_residual),
            c5: eq(C5_LABEL, c5_residual),
            incompatibility: ConstraintCheck {
                label: INCOMPAT_LABEL,
                satisfied: incompat_residual > DEGENERACY_TOL,
                residual: incompat_residual,
            },
        }
    }
}

const C1_LABEL: &str = "c1: theta_alpha - theta_beta = theta_gamma - theta_delta + n*pi";
const C2_LABEL: &str = "c2: phase differences and phases off the n*pi/3 lattice";
const C3_LABEL: &str = "c3: |alpha|^2 + |beta|^2 + |gamma|^2 + |delta|^2 = 2";
const C4_LABEL: &str = "c4: alpha^2/alpha* + beta^2/beta* = gamma^2/gamma* + delta^2/delta* = 1";
const C5_LABEL: &str = "c5: alpha beta* + gamma delta* = 0";
const INCOMPAT_LABEL: &str = "kappa^2 - 1/kappa != 0";

/// Signed amplitudes solving `α²/α* + β²/β* = 1` (and the γδ analogue) for the
/// given phases: `r_α = −sin3θ_β / sin3(θ_α−θ_β)`, `r_β = sin3θ_α / sin3(θ_α−θ_β)`.
pub fn amplitudes_from_angles(
    theta_alpha: f64,
    theta_beta: f64,
    theta_gamma: f64,
    theta_delta: f64,
) -> Result<BellParameters> {
    let d_ab = (3.0 * (theta_alpha - theta_beta)).sin();
    let d_gd = (3.0 * (theta_gamma - theta_delta)).sin();
    if d_ab.abs() < DENOMINATOR_TOL {
        return Err(Error::C2Violated {
            what: "sin 3(theta_alpha - theta_beta)",
        });
    }
    if d_gd.abs() < DENOMINATOR_TOL {
        return Err(Error::C2Violated {
            what: "sin 3(theta_gamma - theta_delta)",
        });
    }
    Ok(BellParameters {
        theta_alpha,
        theta_beta,
        theta_gamma,
        theta_delta,
        r_alpha: -(3.0 * theta_beta).sin() / d_ab,
        r_beta: (3.0 * theta_alpha).sin() / d_ab,
        r_gamma: -(3.0 * theta_delta).sin() / d_gd,
        r_delta: (3.0 * theta_gamma).sin() / d_gd,
    })
}

/// One point of the one-parameter family with `θ_α = θ_β + π/6`,
/// `θ_δ = θ_β + π/6`, `θ_γ = θ_δ + π/6`, for `θ_β ∈ (0, π/6)`.
///
/// Amplitudes keep their signs (see [`BellParameters::normalize`] for why the
/// folded form is not used here).
pub fn family_point(theta_beta: f64) -> Result<BellParameters> {
    if !(theta_beta > 0.0 && theta_beta < PI / 6.0) {
        return Err(Error::ThetaOutOfRange(theta_beta));
    }
    let theta_alpha = theta_beta + PI / 6.0;
    let theta_delta = theta_beta + PI / 6.0;
    let theta_gamma = theta_delta + PI / 6.0;
    amplitudes_from_angles(theta_alpha, theta_beta, theta_gamma, theta_delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub label: &'static str,
    pub satisfied: bool,
    /// Equality constraints: distance from equality. c2: distance to the
    /// nearest lattice point. Incompatibility: `|κ² − 1/κ|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub c1: ConstraintCheck,
    pub c2: ConstraintCheck,
    pub c3: ConstraintCheck,
    pub c4: ConstraintCheck,
    pub c5: ConstraintCheck,
    pub incompatibility: ConstraintCheck,
}

impl ConstraintReport {
    pub fn checks(&self) -> [&ConstraintCheck; 6] {
        [
            &self.c1,
            &self.c2,
            &self.c3,
            &self.c4,
            &self.c5,
            &self.incompatibility,
        ]
    }

    pub fn all_satisfied(&self) -> bool {
        self.checks().iter().all(|c| c.satisfied)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks()
            .iter()
            .filter(|c| !c.satisfied)
            .map(|c| c.label)
            .collect()
    }

    /// Largest residual among the equality constraints c1, c3, c4, c5.
    pub fn max_equality_residual(&self) -> f64 {
        [&self.c1, &self.c3, &self.c4, &self.c5]
            .iter()
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }
}
