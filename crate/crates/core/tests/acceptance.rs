//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fail.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use qutrit_selftest::belloperator::{build_w, sos_residual, spectral_max, Realization};
use qutrit_selftest::bellparams::family_point;
use qutrit_selftest::cmatrix::{c64, vec_norm, CMatrix};
use qutrit_selftest::localpolytope::{
    classical_formula, enumerate_classical, interior_grid, sweep,
};
use qutrit_selftest::observables::{clock, random_order3, random_unitary, t3, Kappa};
use qutrit_selftest::selftest::{
    algebra_dimension, canonical_realization, shift_recovery_residual_with_kappa, verify_nullifiers,
};
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

struct Outcome {
    pass: bool,
    detail: String,
}

fn grid(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| k as f64 * PI / 6.0 / (n as f64 + 1.0))
        .collect()
}

fn canonical_spectral_max(t: f64) -> f64 {
    let p = family_point(t).unwrap();
    let canon = canonical_realization(&p).unwrap();
    spectral_max(&build_w(&p, &canon.realization)).unwrap()
}

fn tsirelson_bound_attained(elapsed: &mut Duration) -> Outcome {
    let start = Instant::now();
    let at_satwap = canonical_spectral_max(PI / 12.0);
    let mut worst = (at_satwap - 4.0).abs();
    for t in grid(10) {
        worst = worst.max((canonical_spectral_max(t) - 4.0).abs());
    }
    *elapsed = start.elapsed();
    let secs = elapsed.as_secs_f64();
    Outcome {
        pass: worst <= 1e-9 && secs < 1.0,
        detail: format!("max |lambda_max - 4| = {worst:.3e} (tol 1e-9), {secs:.3}s (< 1s)"),
    }
}

fn satwap_point() -> Outcome {
    let e = enumerate_classical(&family_point(PI / 12.0).unwrap()).value;
    let f = classical_formula(PI / 12.0).unwrap();
    let printed = 3.09808;
    Outcome {
        pass: (e - printed).abs() <= 1e-4 && (f - printed).abs() <= 1e-4 && (e - f).abs() <= 1e-8,
        detail: format!(
            "enumerated {e:.9}, formula {f:.9}, |diff| = {:.3e}",
            (e - f).abs()
        ),
    }
}

fn classical_sweep() -> Outcome {
    let start = Instant::now();
    let (from, to) = interior_grid(101);
    let rows = sweep(from, to, 101).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let nearest = rows
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1.theta_beta - PI / 12.0)
                .abs()
                .total_cmp(&(b.1.theta_beta - PI / 12.0).abs())
        })
        .unwrap()
        .0;
    let argmin = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.beta_c_enumerated.total_cmp(&b.1.beta_c_enumerated))
        .unwrap()
        .0;
    let max_gap = rows
        .iter()
        .filter(|r| r.constraints_ok)
        .map(|r| (r.beta_c_enumerated - r.beta_c_formula).abs())
        .fold(0.0, f64::max);
    let below = rows
        .iter()
        .all(|r| r.beta_c_enumerated < 4.0 && r.beta_c_formula < 4.0);
    Outcome {
        pass: rows.len() == 101 && argmin == nearest && max_gap <= 1e-8 && below && secs < 5.0,
        detail: format!(
            "{} rows, argmin {argmin} vs nearest pi/12 {nearest}, max |enum - formula| = {max_gap:.3e}, below 4: {below}, {secs:.3}s (< 5s)",
            rows.len()
        ),
    }
}

fn sos_suite() -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for trial in 0..100u64 {
        let t = rng.gen_range(0.01..PI / 6.0 - 0.01);
        let p = family_point(t).unwrap();
        let (da, db) = [(3, 3), (3, 6), (6, 3), (6, 6)][(trial % 4) as usize];
        let seed = 10 * trial;
        let state = random_unitary(da * db, seed).column(0);
        let n = vec_norm(&state);
        let r = Realization::new(
            state.into_iter().map(|z| z / n).collect(),
            random_order3(da, seed + 1).unwrap(),
            random_order3(da, seed + 2).unwrap(),
            random_order3(db, seed + 3).unwrap(),
            random_order3(db, seed + 4).unwrap(),
        )
        .unwrap();
        worst = worst.max(sos_residual(&p, &r).unwrap());
    }
    Outcome {
        pass: worst <= 1e-10,
        detail: format!("100 draws at dims {{3, 6}}, max residual {worst:.3e} (tol 1e-10)"),
    }
}

fn nullifier_suite() -> Outcome {
    let mut worst: f64 = 0.0;
    for t in grid(25) {
        let p = family_point(t).unwrap();
        let canon = canonical_realization(&p).unwrap();
        worst = worst.max(verify_nullifiers(&p, &canon.realization).unwrap().max());
    }
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("25 grid points, max residual {worst:.3e} (tol 1e-9)"),
    }
}

fn incompatibility() -> Outcome {
    let z = clock().into_matrix();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(6);
    let mut full = 0;
    let mut sampled = 0;
    while sampled < 50 {
        let phi: f64 = rng.gen_range(0.0..2.0 * PI);
        if (0..=3).any(|k| (phi - k as f64 * 2.0 * PI / 3.0).abs() < 1e-3) {
            continue;
        }
        sampled += 1;
        let t = t3(Kappa::from_angle(phi)).observable.into_matrix();
        if algebra_dimension(&z, &t).unwrap().dimension == 9 {
            full += 1;
        }
    }
    let degenerate = t3(Kappa::from_angle(0.0)).observable.into_matrix();
    let dim_one = algebra_dimension(&z, &degenerate).unwrap().dimension;
    let k = Kappa::from_angle(PI / 3.0);
    let res = shift_recovery_residual_with_kappa(&z, t3(k).observable.matrix(), k).unwrap();
    Outcome {
        pass: full == 50 && dim_one == 3 && res <= 1e-9,
        detail: format!(
            "dimension 9 for {full}/50 kappas, kappa=1 dimension {dim_one}, shift residual {res:.3e} (tol 1e-9)"
        ),
    }
}

fn constraint_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    for t in grid(200) {
        let p = family_point(t).unwrap();
        let rep = p.check_constraints();
        let sum_rule = (2.0 + p.amplitude_norm_sq() - 4.0).abs();
        for r in [
            rep.c1.residual,
            rep.c3.residual,
            rep.c4.residual,
            rep.c5.residual,
            sum_rule,
        ] {
            worst = worst.max(r);
        }
    }
    Outcome {
        pass: worst <= 1e-10,
        detail: format!("200 grid points, max residual {worst:.3e} (tol 1e-10)"),
    }
}

fn eigensolver_gate() -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for dim in [3, 9, 27] {
        for _ in 0..200 {
            let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
            let g = CMatrix::from_fn(dim, dim, |_, _| {
                let re = draw();
                let im = draw();
                c64(re, im)
            });
            let m = (&g + &g.dagger()).scale(c64(0.5, 0.0));
            let eig = m.hermitian_eigen(1e-12).unwrap();
            worst = worst.max((&eig.reconstruct() - &m).frobenius_norm() / m.frobenius_norm());
        }
    }
    Outcome {
        pass: worst <= 1e-10,
        detail: format!(
            "600 matrices at dims {{3, 9, 27}}, max relative residual {worst:.3e} (tol 1e-10)"
        ),
    }
}

fn main() {
    let start = Instant::now();
    let mut c1_time = Duration::ZERO;
    let mut results = vec![
        ("1 Tsirelson bound", tsirelson_bound_attained(&mut c1_time)),
        ("2 SATWAP coincidence point", satwap_point()),
        ("3 classical-bound sweep", classical_sweep()),
        ("4 SOS identity suite", sos_suite()),
        ("5 nullifier suite", nullifier_suite()),
        ("6 genuine incompatibility", incompatibility()),
        ("7 constraint identities", constraint_identities()),
        ("8 eigensolver quality gate", eigensolver_gate()),
    ];
    let total = start.elapsed().as_secs_f64();
    results.push((
        "9 wall-clock",
        Outcome {
            pass: total < 60.0,
            detail: format!("acceptance workload {total:.3}s (< 60s)"),
        },
    ));
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
