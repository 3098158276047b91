//! Finite-difference weights on arbitrary node sets (Fornberg's recursion).

/// Weights `w[k][j]` such that `f^{(k)}(z) ~ sum_j w[k][j] f(x[j])` for
/// derivative orders `k = 0..=max_order`.
pub fn fornberg(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// First and second derivatives of samples `f` on nodes `x` using
/// `width`-point stencils, centred where possible and one-sided at the ends.
pub fn derivatives(x: &[f64], f: &[f64], width: usize) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let width = width.min(n);
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 0..n {
        let start = i.saturating_sub(width / 2).min(n - width);
        let nodes = &x[start..start + width];
        let w = fornberg(x[i], nodes, 2);
        d1[i] = w[1].iter().zip(&f[start..start + width]).map(|(a, b)| a * b).sum();
        d2[i] = w[2].iter().zip(&f[start..start + width]).map(|(a, b)| a * b).sum();
    }
    (d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quartics_nonuniform() {
        let x: Vec<f64> = (0..12).map(|i| ((i as f64) * 0.13).powi(2)).collect();
        let f: Vec<f64> = x.iter().map(|t| 1.0 - 2.0 * t + t.powi(4)).collect();
        let (d1, d2) = derivatives(&x, &f, 5);
        for i in 0..x.len() {
            let t = x[i];
            assert!((d1[i] - (-2.0 + 4.0 * t.powi(3))).abs() < 1e-9, "d1 at {i}");
            assert!((d2[i] - 12.0 * t * t).abs() < 1e-7, "d2 at {i}");
        }
    }
}
