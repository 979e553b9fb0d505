/// Signed natural logarithm: `sgn(x) log|x|`, and 0 at 0.
pub fn slog(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().ln()
    }
}

/// Symmetric log used for plot axes: linear on (-1, 1), `sgn(x)(1 + log10|x|)`
/// outside. Continuous and strictly increasing.
pub fn symlog(x: f64) -> f64 {
    if x.abs() < 1.0 {
        x
    } else {
        x.signum() * (1.0 + x.abs().log10())
    }
}

pub fn symlog_inv(t: f64) -> f64 {
    if t.abs() < 1.0 {
        t
    } else {
        t.signum() * 10f64.powf(t.abs() - 1.0)
    }
}
