use std::f64::consts::PI;
use std::path::Path;

use qutrit_selftest::belloperator::{sos_residual, Realization};
use qutrit_selftest::bellparams::{family_point, BellParameters};
use qutrit_selftest::cmatrix::vec_norm;
use qutrit_selftest::localpolytope::{
    classical_formula, enumerate_classical, interior_grid, max_vertex_value, sweep as run_sweep,
    SweepRecord,
};
use qutrit_selftest::observables::{clock, random_order3, random_unitary, t3, Kappa};
use qutrit_selftest::selftest::{
    algebra_dimension, certify_with, shift_recovery_residual_with_kappa, Thresholds,
};
use qutrit_selftest::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{emit, sig15, sweep_csv, to_json, Envelope};
use crate::{
    CertifyArgs, ClassicalArgs, Failure, Format, IncompatArgs, OutputArgs, SweepArgs, VerifySosArgs,
};

type Outcome = Result<bool, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn verification(e: Error) -> Failure {
    Failure::Verification(e.to_string())
}

fn require_interior(name: &str, theta: f64) -> Result<(), Failure> {
    if theta > 0.0 && theta < PI / 6.0 {
        Ok(())
    } else {
        Err(usage(format!(
            "{name} = {theta} must lie strictly inside (0, pi/6)"
        )))
    }
}

/// Reports go to stdout unless stdout carries the machine-readable body.
fn report(text: &str, body_on_stdout: bool) {
    if body_on_stdout {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
}

/// Text report always; JSON when requested or when `--out` is given.
fn finish<C: Serialize, R: Serialize>(
    command: &str,
    output: &OutputArgs,
    text: &str,
    config: C,
    results: R,
    verdict: bool,
) -> Outcome {
    reject_csv(command, output)?;
    let json = output.format == Some(Format::Json) || output.out.is_some();
    if json {
        let body = to_json(&Envelope {
            command,
            config,
            results,
            verdict,
        });
        write_body(output.out.as_deref(), &body)?;
        report(text, output.out.is_none());
    } else {
        print!("{text}");
    }
    Ok(verdict)
}

fn reject_csv(command: &str, output: &OutputArgs) -> Result<(), Failure> {
    if output.format == Some(Format::Csv) {
        return Err(usage(format!(
            "{command} has no CSV output; use --format json"
        )));
    }
    Ok(())
}

fn write_body(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    emit(out, body).map_err(|e| {
        let target = out.map_or("stdout".into(), |p| p.display().to_string());
        usage(format!("cannot write {target}: {e}"))
    })
}

fn complex_text(k: Kappa) -> String {
    let z = k.value();
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{} {sign} {}i", sig15(z.re), sig15(z.im.abs()))
}

fn verdict_line(ok: bool) -> &'static str {
    if ok {
        "verdict: PASS\n"
    } else {
        "verdict: FAIL\n"
    }
}

#[derive(Serialize)]
struct SosConfig {
    theta_beta: Option<f64>,
    params: BellParameters,
    trials: u64,
    seed: u64,
    tol_sos: f64,
}

#[derive(Serialize)]
struct SosTrial {
    trial: u64,
    dim_a: usize,
    dim_b: usize,
    residual: f64,
}

#[derive(Serialize)]
struct SosResults {
    max_residual: f64,
    trials: Vec<SosTrial>,
}

const SOS_DIMS: [(usize, usize); 4] = [(3, 3), (3, 6), (6, 3), (6, 6)];

fn sos_trial(p: &BellParameters, seed: u64, trial: u64) -> Result<SosTrial, Error> {
    let (da, db) = SOS_DIMS[(trial % 4) as usize];
    let base = seed.wrapping_add(trial.wrapping_mul(16));
    let state = random_unitary(da * db, base).column(0);
    let n = vec_norm(&state);
    let r = Realization::new(
        state.into_iter().map(|z| z / n).collect(),
        random_order3(da, base + 1)?,
        random_order3(da, base + 2)?,
        random_order3(db, base + 3)?,
        random_order3(db, base + 4)?,
    )?;
    Ok(SosTrial {
        trial,
        dim_a: da,
        dim_b: db,
        residual: sos_residual(p, &r)?,
    })
}

pub fn verify_sos(a: VerifySosArgs) -> Outcome {
    reject_csv("verify-sos", &a.output)?;
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let (theta, p) = match &a.coeffs {
        Some(c) if c.len() != 8 => {
            return Err(usage(format!("--coeffs takes 8 values, got {}", c.len())))
        }
        Some(c) => {
            let p = BellParameters::from_polar([
                (c[0], c[1]),
                (c[2], c[3]),
                (c[4], c[5]),
                (c[6], c[7]),
            ]);
            (None, p)
        }
        None => {
            let t = a.theta_beta.unwrap_or(PI / 12.0);
            require_interior("--theta-beta", t)?;
            (Some(t), family_point(t).map_err(verification)?)
        }
    };
    let trials = (0..a.trials)
        .into_par_iter()
        .map(|i| sos_trial(&p, a.seed, i))
        .collect::<Result<Vec<_>, _>>()
        .map_err(verification)?;
    let max_residual = trials.iter().map(|t| t.residual).fold(0.0, f64::max);
    let verdict = max_residual <= a.tol_sos;
    let text = format!(
        "verify-sos\ntolerances: sos={:e}\ntrials: {} (seed {}, dims 3x3/3x6/6x3/6x6)\nmax residual: {}\n{}",
        a.tol_sos,
        a.trials,
        a.seed,
        sig15(max_residual),
        verdict_line(verdict)
    );
    let config = SosConfig {
        theta_beta: theta,
        params: p,
        trials: a.trials,
        seed: a.seed,
        tol_sos: a.tol_sos,
    };
    finish(
        "verify-sos",
        &a.output,
        &text,
        config,
        SosResults {
            max_residual,
            trials,
        },
        verdict,
    )
}

#[derive(Serialize)]
struct ClassicalConfig {
    theta_beta: f64,
    tol_agreement: f64,
}

#[derive(Serialize)]
struct ClassicalResults {
    beta_c_enum: f64,
    beta_c_formula: f64,
    beta_c_vertex: f64,
    strategy: [u8; 4],
}

pub fn classical(a: ClassicalArgs) -> Outcome {
    reject_csv("classical", &a.output)?;
    require_interior("--theta-beta", a.theta_beta)?;
    let p = family_point(a.theta_beta).map_err(verification)?;
    let best = enumerate_classical(&p);
    let formula = classical_formula(a.theta_beta).map_err(verification)?;
    let (vertex, _) = max_vertex_value(&p).map_err(verification)?;
    let verdict = (best.value - formula).abs() <= a.tol_agreement;
    let s = best.strategy;
    let text = format!(
        "classical\ntolerances: agreement={:e}\ntheta_beta: {}\nenumerated: {}\nformula:    {}\nvertex:     {}\nargmax (a0, a1, b0, b1): ({}, {}, {}, {})\n{}",
        a.tol_agreement,
        sig15(a.theta_beta),
        sig15(best.value),
        sig15(formula),
        sig15(vertex),
        s.a0,
        s.a1,
        s.b0,
        s.b1,
        verdict_line(verdict)
    );
    let results = ClassicalResults {
        beta_c_enum: best.value,
        beta_c_formula: formula,
        beta_c_vertex: vertex,
        strategy: [s.a0, s.a1, s.b0, s.b1],
    };
    let config = ClassicalConfig {
        theta_beta: a.theta_beta,
        tol_agreement: a.tol_agreement,
    };
    finish("classical", &a.output, &text, config, results, verdict)
}

#[derive(Serialize)]
struct SweepConfig {
    from: f64,
    to: f64,
    steps: usize,
    tol_agreement: f64,
}

pub fn sweep(a: SweepArgs) -> Outcome {
    if a.steps < 2 {
        return Err(usage("--steps must be at least 2"));
    }
    let (gf, gt) = interior_grid(a.steps);
    let from = a.from.unwrap_or(gf);
    let to = a.to.unwrap_or(gt);
    require_interior("--from", from)?;
    require_interior("--to", to)?;
    let rows = run_sweep(from, to, a.steps).map_err(|e| usage(e.to_string()))?;
    let consistent =
        |r: &SweepRecord| (r.beta_c_enumerated - r.beta_c_formula).abs() <= a.tol_agreement;
    let flagged = rows.iter().filter(|r| !r.constraints_ok).count();
    let verdict = rows.iter().filter(|r| r.constraints_ok).all(consistent);
    let body = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_csv(&rows),
        Format::Json => to_json(&Envelope {
            command: "sweep",
            config: SweepConfig {
                from,
                to,
                steps: a.steps,
                tol_agreement: a.tol_agreement,
            },
            results: &rows,
            verdict,
        }),
    };
    write_body(a.output.out.as_deref(), &body)?;
    let min = rows
        .iter()
        .min_by(|x, y| x.beta_c_formula.total_cmp(&y.beta_c_formula))
        .expect("at least two rows");
    let text = format!(
        "sweep\ntolerances: agreement={:e}\nrows: {} ({} flagged)\nminimum: {} at theta_beta {}\n{}",
        a.tol_agreement,
        rows.len(),
        flagged,
        sig15(min.beta_c_formula),
        sig15(min.theta_beta),
        verdict_line(verdict)
    );
    report(&text, a.output.out.is_none());
    Ok(verdict)
}

#[derive(Serialize)]
struct CertifyConfig {
    theta_beta: f64,
    thresholds: Thresholds,
}

pub fn certify(a: CertifyArgs) -> Outcome {
    reject_csv("certify", &a.output)?;
    require_interior("--theta-beta", a.theta_beta)?;
    let th = Thresholds {
        nullifier: a.tol_nullifier,
        bell_value: a.tol_bell,
        spectral_max: a.tol_spectral,
        shift_recovery: a.tol_shift,
    };
    let rep = certify_with(a.theta_beta, &th).map_err(verification)?;
    let n = rep.nullifiers;
    let text = format!(
        "certify\ntolerances: nullifier={:e} bell={:e} spectral={:e} shift={:e}\n\
         theta_beta: {}\nkappa: {}\nconstraints: {}\n\
         nullifiers: L1 {} L1+ {} L2 {} L2+ {}\nbell value: {:.6}\nspectral max: {:.6}\n\
         algebra dimension: bob {} alice {}\nshift recovery residual: {}\n{}",
        th.nullifier,
        th.bell_value,
        th.spectral_max,
        th.shift_recovery,
        sig15(rep.theta_beta),
        complex_text(rep.kappa),
        if rep.constraints.all_satisfied() {
            "ok"
        } else {
            "violated"
        },
        sig15(n.l1),
        sig15(n.l1_dagger),
        sig15(n.l2),
        sig15(n.l2_dagger),
        rep.bell_value,
        rep.spectral_max,
        rep.algebra_dimension_bob,
        rep.algebra_dimension_alice,
        sig15(rep.shift_recovery_residual),
        verdict_line(rep.verdict)
    );
    let config = CertifyConfig {
        theta_beta: a.theta_beta,
        thresholds: th,
    };
    if let Some(path) = &a.json {
        let body = to_json(&Envelope {
            command: "certify",
            config: &config,
            results: &rep,
            verdict: rep.verdict,
        });
        write_body(Some(path), &body)?;
    }
    let verdict = rep.verdict;
    finish("certify", &a.output, &text, config, rep, verdict)
}

#[derive(Serialize)]
struct IncompatConfig {
    kappa_angle: f64,
    tol_shift: f64,
}

#[derive(Serialize)]
struct IncompatResults {
    kappa_re: f64,
    kappa_im: f64,
    degenerate: bool,
    algebra_dimension: usize,
    shift_recovery_residual: Option<f64>,
}

pub fn incompat(a: IncompatArgs) -> Outcome {
    reject_csv("incompat", &a.output)?;
    let kappa = Kappa::from_angle(a.kappa_angle);
    let z = clock().into_matrix();
    let t = t3(kappa).observable.into_matrix();
    let dim = algebra_dimension(&z, &t).map_err(verification)?.dimension;
    let residual = match shift_recovery_residual_with_kappa(&z, &t, kappa) {
        Ok(r) => Some(r),
        Err(Error::DegenerateKappa(_)) => None,
        Err(e) => return Err(verification(e)),
    };
    let verdict = dim == 9 && residual.is_some_and(|r| r <= a.tol_shift);
    let mut text = format!(
        "incompat\ntolerances: shift={:e}\nkappa: {}\nalgebra dimension: {}\n",
        a.tol_shift,
        complex_text(kappa),
        dim
    );
    match residual {
        Some(r) => text.push_str(&format!("shift recovery residual: {}\n", sig15(r))),
        None => text.push_str(
            "shift recovery: impossible, kappa^2 - 1/kappa = 0 (kappa^3 = 1) violates the \
             incompatibility condition; T3 is a multiple of Z\n",
        ),
    }
    text.push_str(verdict_line(verdict));
    let results = IncompatResults {
        kappa_re: kappa.value().re,
        kappa_im: kappa.value().im,
        degenerate: kappa.is_degenerate(),
        algebra_dimension: dim,
        shift_recovery_residual: residual,
    };
    let config = IncompatConfig {
        kappa_angle: a.kappa_angle,
        tol_shift: a.tol_shift,
    };
    finish("incompat", &a.output, &text, config, results, verdict)
}
