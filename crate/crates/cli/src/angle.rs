use std::f64::consts::PI;

/// Parses decimal radians or the literal forms `pi`, `pi/N`, `Mpi`, `Mpi/N`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let bad = || format!("invalid angle '{s}': expected radians, 'pi/N' or 'Mpi/N'");
    let Some(pos) = t.find("pi") else {
        let x: f64 = t.parse().map_err(|_| bad())?;
        return if x.is_finite() { Ok(x) } else { Err(bad()) };
    };
    let (head, tail) = (&t[..pos], &t[pos + 2..]);
    let m = match head.trim_end_matches('*') {
        "" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let n = match tail {
        "" => 1.0,
        d => d
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .ok_or_else(bad)?,
    };
    if n == 0.0 || !m.is_finite() || !n.is_finite() {
        return Err(bad());
    }
    Ok(m * PI / n)
}
