//! Small dense least-squares fits.

/// Least-squares coefficients `c` minimising `|A c - y|` where row `i` of `A`
/// is `basis(x[i])`. Householder QR on the column-scaled design matrix.
pub fn least_squares<F: Fn(f64) -> Vec<f64>>(x: &[f64], y: &[f64], basis: F) -> Vec<f64> {
    let mut a: Vec<Vec<f64>> = x.iter().map(|&t| basis(t)).collect();
    let m = a.len();
    let p = a.first().map_or(0, Vec::len);
    assert!(m >= p, "need at least as many samples as basis functions");
    let scale: Vec<f64> = (0..p)
        .map(|j| a.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
        .collect();
    for r in a.iter_mut() {
        for j in 0..p {
            r[j] /= scale[j];
        }
    }
    let mut b = y.to_vec();
    for k in 0..p {
        let norm = (k..m).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|t| t * t).sum();
        if vv == 0.0 {
            continue;
        }
        for j in k..p {
            let s: f64 = (k..m).map(|i| v[i - k] * a[i][j]).sum::<f64>() * 2.0 / vv;
            for i in k..m {
                a[i][j] -= s * v[i - k];
            }
        }
        let s: f64 = (k..m).map(|i| v[i - k] * b[i]).sum::<f64>() * 2.0 / vv;
        for i in k..m {
            b[i] -= s * v[i - k];
        }
    }
    let mut c = vec![0.0; p];
    for j in (0..p).rev() {
        let s: f64 = (j + 1..p).map(|k| a[j][k] * c[k]).sum();
        c[j] = (b[j] - s) / a[j][j];
    }
    c.iter().zip(&scale).map(|(v, s)| v / s).collect()
}

/// Slope and intercept of the straight-line fit `y = slope x + intercept`.
pub fn line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let c = least_squares(x, y, |t| vec![t, 1.0]);
    (c[0], c[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cubic_coefficients() {
        let x: Vec<f64> = (0..40).map(|i| 1e-2 * 0.8f64.powi(i)).collect();
        let y: Vec<f64> = x.iter().map(|t| 2.0 * t - 3.0 * t * t + 0.5 * t.powi(3)).collect();
        let c = least_squares(&x, &y, |t| vec![t, t * t, t.powi(3)]);
        assert!((c[0] - 2.0).abs() < 1e-12, "{c:?}");
        assert!((c[1] + 3.0).abs() < 1e-8, "{c:?}");
    }

    #[test]
    fn line_fit() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (s, i) = line(&x, &y);
        assert!((s - 2.0).abs() < 1e-14 && (i - 1.0).abs() < 1e-14);
    }
}
