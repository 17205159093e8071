use std::fs;
use std::io::{self, Write};
use std::path::Path;

use qutrit_selftest::localpolytope::SweepRecord;
use serde::Serialize;

pub const SWEEP_HEADER: &str = "theta_beta,beta_c_enum,beta_c_formula,tsirelson,constraints_ok";

/// Fixed-point with 15 significant digits; scientific outside `[1e-5, 1e15)`.
pub fn sig15(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..15).contains(&e) {
        format!("{:.*}", (14 - e) as usize, x)
    } else {
        format!("{x:.14e}")
    }
}

pub fn sweep_csv(rows: &[SweepRecord]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            sig15(r.theta_beta),
            sig15(r.beta_c_enumerated),
            sig15(r.beta_c_formula),
            sig15(r.tsirelson),
            r.constraints_ok
        ));
    }
    out
}

#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub command: &'a str,
    pub config: C,
    pub results: R,
    pub verdict: bool,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn emit(out: Option<&Path>, body: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, body),
        None => io::stdout().lock().write_all(body.as_bytes()),
    }
}
