//! Piecewise cubic Hermite interpolation from values and exact slopes.

/// Index `i` with `x[i] <= t <= x[i+1]`, clamped to the table.
pub fn locate(x: &[f64], t: f64) -> usize {
    match x.binary_search_by(|v| v.total_cmp(&t)) {
        Ok(i) => i.min(x.len() - 2),
        Err(i) => i.saturating_sub(1).min(x.len() - 2),
    }
}

/// Value and first derivative of the cubic Hermite interpolant on interval `i`.
pub fn hermite(x: &[f64], f: &[f64], df: &[f64], i: usize, t: f64) -> (f64, f64) {
    let h = x[i + 1] - x[i];
    let s = (t - x[i]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let v = h00 * f[i] + h10 * h * df[i] + h01 * f[i + 1] + h11 * h * df[i + 1];
    let d00 = (6.0 * s2 - 6.0 * s) / h;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = (-6.0 * s2 + 6.0 * s) / h;
    let d11 = 3.0 * s2 - 2.0 * s;
    let d = d00 * f[i] + d10 * df[i] + d01 * f[i + 1] + d11 * df[i + 1];
    (v, d)
}
