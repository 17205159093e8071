//! Classical (local deterministic) bounds, computed three ways: brute force
//! over the 81 deterministic strategies, the closed-form vertex values, and
//! the piecewise formula along the one-parameter family.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belloperator::tsirelson_bound;
use crate::bellparams::{family_point, BellParameters};
use crate::cmatrix::C64;
use crate::error::{Error, Result};
use crate::observables::omega;

/// Enumerated and closed-form classical values must agree this closely.
pub const AGREEMENT_TOL: f64 = 1e-8;

/// Values within this of the running maximum count as ties.
const TIE_TOL: f64 = 1e-12;

const THIRD_TURN: f64 = 2.0 * PI / 3.0;

/// Outcome labels `(a₀, a₁, b₀, b₁)`, each in `{0, 1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub a0: u8,
    pub a1: u8,
    pub b0: u8,
    pub b1: u8,
}

impl DeterministicStrategy {
    pub fn new(a0: u8, a1: u8, b0: u8, b1: u8) -> Result<Self> {
        for l in [a0, a1, b0, b1] {
            if l > 2 {
                return Err(Error::BadLabel(l));
            }
        }
        Ok(Self { a0, a1, b0, b1 })
    }

    /// All 81 strategies in lexicographic order of `(a₀, a₁, b₀, b₁)`.
    pub fn all() -> impl Iterator<Item = Self> {
        (0..81u8).map(|i| Self {
            a0: i / 27,
            a1: (i / 9) % 3,
            b0: (i / 3) % 3,
            b1: i % 3,
        })
    }

    /// Every label shifted by `k` modulo 3.
    pub fn shifted(&self, k: u8) -> Self {
        let s = |x: u8| (x + k) % 3;
        Self {
            a0: s(self.a0),
            a1: s(self.a1),
            b0: s(self.b0),
            b1: s(self.b1),
        }
    }

    /// Every label negated modulo 3.
    pub fn negated(&self) -> Self {
        let n = |x: u8| (3 - x) % 3;
        Self {
            a0: n(self.a0),
            a1: n(self.a1),
            b0: n(self.b0),
            b1: n(self.b1),
        }
    }
}

/// `2·Re[ω^{a₀}(αω^{b₀} + βω^{b₁}) + ω^{a₁}(γω^{b₀} + δω^{b₁})]`.
pub fn deterministic_value(s: &DeterministicStrategy, p: &BellParameters) -> f64 {
    let w = omega();
    let pw = |k: u8| w.powu(u32::from(k));
    let [alpha, beta, gamma, delta] = p.coefficients();
    let z: C64 = pw(s.a0) * (alpha * pw(s.b0) + beta * pw(s.b1))
        + pw(s.a1) * (gamma * pw(s.b0) + delta * pw(s.b1));
    2.0 * z.re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalOptimum {
    pub value: f64,
    pub strategy: DeterministicStrategy,
}

/// Maximum of [`deterministic_value`] over all 81 strategies. Ties within
/// 1e-12 go to the lexicographically first strategy.
pub fn enumerate_classical(p: &BellParameters) -> ClassicalOptimum {
    let mut best: Option<ClassicalOptimum> = None;
    for s in DeterministicStrategy::all() {
        let v = deterministic_value(&s, p);
        match best {
            Some(b) if v <= b.value + TIE_TOL => {}
            _ => {
                best = Some(ClassicalOptimum {
                    value: v,
                    strategy: s,
                })
            }
        }
    }
    best.expect("81 strategies")
}

/// Phase labels `s ∈ {0, 1, −1}` for the four coefficients; `s` multiplies
/// `2π/3` inside each cosine of [`vertex_value`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexAssignment {
    pub s_alpha: i8,
    pub s_beta: i8,
    pub s_gamma: i8,
    pub s_delta: i8,
}

impl VertexAssignment {
    pub fn new(s_alpha: i8, s_beta: i8, s_gamma: i8, s_delta: i8) -> Result<Self> {
        for s in [s_alpha, s_beta, s_gamma, s_delta] {
            if !(-1..=1).contains(&s) {
                return Err(Error::BadSign(s));
            }
        }
        Ok(Self {
            s_alpha,
            s_beta,
            s_gamma,
            s_delta,
        })
    }

    /// All 81 sign patterns.
    pub fn all() -> impl Iterator<Item = Self> {
        const S: [i8; 3] = [0, 1, -1];
        (0..81usize).map(|i| Self {
            s_alpha: S[i / 27],
            s_beta: S[(i / 9) % 3],
            s_gamma: S[(i / 3) % 3],
            s_delta: S[i % 3],
        })
    }

    /// Phase labels seen by a deterministic strategy: the exponent of ω on
    /// α, β, γ, δ is `a₀+b₀, a₀+b₁, a₁+b₀, a₁+b₁` (mod 3, written in {0,1,−1}).
    pub fn from_strategy(s: &DeterministicStrategy) -> Self {
        let sym = |k: u8| match k % 3 {
            0 => 0,
            1 => 1,
            _ => -1,
        };
        Self {
            s_alpha: sym(s.a0 + s.b0),
            s_beta: sym(s.a0 + s.b1),
            s_gamma: sym(s.a1 + s.b0),
            s_delta: sym(s.a1 + s.b1),
        }
    }

    /// Whether some deterministic strategy produces these labels, i.e.
    /// `s_α − s_β − s_γ + s_δ ≡ 0 (mod 3)`.
    pub fn is_realizable(&self) -> bool {
        let t = i32::from(self.s_alpha) - i32::from(self.s_beta) - i32::from(self.s_gamma)
            + i32::from(self.s_delta);
        t.rem_euclid(3) == 0
    }
}

/// Closed-form value of a vertex, with amplitudes eliminated through the
/// phases:
///
/// ```text
///   −2 sin3θ_β cos(θ_α + s_α 2π/3) / sin3(θ_α−θ_β)
///   +2 sin3θ_α cos(θ_β + s_β 2π/3) / sin3(θ_α−θ_β)
///   −2 sin3θ_δ cos(θ_γ + s_γ 2π/3) / sin3(θ_γ−θ_δ)
///   +2 sin3θ_γ cos(θ_δ + s_δ 2π/3) / sin3(θ_γ−θ_δ)
/// ```
pub fn vertex_value(p: &BellParameters, v: &VertexAssignment) -> Result<f64> {
    let (ta, tb, tg, td) = (p.theta_alpha, p.theta_beta, p.theta_gamma, p.theta_delta);
    let d_ab = (3.0 * (ta - tb)).sin();
    let d_gd = (3.0 * (tg - td)).sin();
    if d_ab.abs() < 1e-12 {
        return Err(Error::C2Violated {
            what: "sin 3(theta_alpha - theta_beta)",
        });
    }
    if d_gd.abs() < 1e-12 {
        return Err(Error::C2Violated {
            what: "sin 3(theta_gamma - theta_delta)",
        });
    }
    let term = |amp_angle: f64, phase: f64, s: i8| {
        2.0 * (3.0 * amp_angle).sin() * (phase + f64::from(s) * THIRD_TURN).cos()
    };
    Ok((-term(tb, ta, v.s_alpha) + term(ta, tb, v.s_beta)) / d_ab
        + (-term(td, tg, v.s_gamma) + term(tg, td, v.s_delta)) / d_gd)
}

/// Maximum of [`vertex_value`] over the realizable sign patterns.
pub fn max_vertex_value(p: &BellParameters) -> Result<(f64, VertexAssignment)> {
    let mut best: Option<(f64, VertexAssignment)> = None;
    for v in VertexAssignment::all().filter(VertexAssignment::is_realizable) {
        let x = vertex_value(p, &v)?;
        if best.is_none_or(|(b, _)| x > b + TIE_TOL) {
            best = Some((x, v));
        }
    }
    Ok(best.expect("27 realizable patterns"))
}

/// Maximum classical value along the family, as a function of `θ_β`:
/// `3cos2θ + cos4θ` on `(0, π/12]` and `3sin(2θ + π/6) + sin(4θ − π/6)` on
/// `[π/12, π/6)`.
pub fn classical_formula(theta_beta: f64) -> Result<f64> {
    if !(theta_beta > 0.0 && theta_beta < PI / 6.0) {
        return Err(Error::ThetaOutOfRange(theta_beta));
    }
    let t = theta_beta;
    Ok(if t <= PI / 12.0 {
        lower_branch(t)
    } else {
        upper_branch(t)
    })
}

fn lower_branch(t: f64) -> f64 {
    3.0 * (2.0 * t).cos() + (4.0 * t).cos()
}

fn upper_branch(t: f64) -> f64 {
    3.0 * (2.0 * t + PI / 6.0).sin() + (4.0 * t - PI / 6.0).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub theta_beta: f64,
    pub beta_c_enumerated: f64,
    pub beta_c_formula: f64,
    pub tsirelson: f64,
    pub constraints_ok: bool,
}

impl SweepRecord {
    pub fn agrees(&self) -> bool {
        (self.beta_c_enumerated - self.beta_c_formula).abs() <= AGREEMENT_TOL
    }
}

fn sweep_record(theta_beta: f64) -> Result<SweepRecord> {
    let p = family_point(theta_beta)?;
    Ok(SweepRecord {
        theta_beta,
        beta_c_enumerated: enumerate_classical(&p).value,
        beta_c_formula: classical_formula(theta_beta)?,
        tsirelson: tsirelson_bound(&p),
        constraints_ok: p.check_constraints().all_satisfied(),
    })
}

/// Uniform grid of `steps` points from `theta_from` to `theta_to` inclusive,
/// both strictly inside `(0, π/6)`. Points failing a constraint are flagged,
/// not dropped; output is in grid order.
pub fn sweep(theta_from: f64, theta_to: f64, steps: usize) -> Result<Vec<SweepRecord>> {
    if steps < 2 {
        return Err(Error::InvalidSweep(format!(
            "steps must be at least 2, got {steps}"
        )));
    }
    let inside = |t: f64| t > 0.0 && t < PI / 6.0;
    if !(inside(theta_from) && inside(theta_to) && theta_from < theta_to) {
        return Err(Error::InvalidSweep(format!(
            "range [{theta_from}, {theta_to}] must be increasing and lie inside (0, pi/6)"
        )));
    }
    let span = theta_to - theta_from;
    let last = (steps - 1) as f64;
    (0..steps)
        .into_par_iter()
        .map(|i| {
            let t = if i == steps - 1 {
                theta_to
            } else {
                theta_from + span * (i as f64) / last
            };
            sweep_record(t)
        })
        .collect()
}

/// The `steps`-point grid `θ_k = k·(π/6)/(steps+1)`, `k = 1..=steps`, which
/// excludes both endpoints and contains `π/12` when `steps` is odd.
pub fn interior_grid(steps: usize) -> (f64, f64) {
    let h = PI / 6.0 / (steps as f64 + 1.0);
    (h, h * steps as f64)
}
