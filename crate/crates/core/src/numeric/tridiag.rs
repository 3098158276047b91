//! Eigenpairs of real symmetric tridiagonal matrices by Sturm-sequence
//! bisection and inverse iteration.

/// Symmetric tridiagonal matrix: `diag[i]` and `off[i] = T[i][i+1]`.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length must be n-1");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let e2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin bounds on the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.bounds();
        let span = hi - lo;
        lo -= 1e-12 * span.max(1.0);
        hi += 1e-12 * span.max(1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    fn shifted_solve(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let (lo, hi) = self.bounds();
        let tiny = f64::EPSILON * hi.abs().max(lo.abs()).max(1.0);
        let d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        solve_pivoted(&self.off, &d, &self.off, b, tiny)
    }

    /// Eigenvector for an (accurate) eigenvalue by inverse iteration,
    /// normalised to unit Euclidean length. Returns the vector and the
    /// residual norm `|T v - lambda v|`.
    pub fn eigenvector(&self, lambda: f64) -> (Vec<f64>, f64) {
        let n = self.len();
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64) * 0.7).sin()).collect();
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let mut residual = f64::INFINITY;
        for _ in 0..4 {
            let w = self.shifted_solve(lambda, &v);
            let nw = norm(&w);
            v = w.into_iter().map(|a| a / nw).collect();
            let tv = self.matvec(&v);
            residual = norm(&tv.iter().zip(&v).map(|(a, b)| a - lambda * b).collect::<Vec<_>>());
        }
        (v, residual)
    }
}

/// Solves the tridiagonal system with sub-diagonal `sub`, diagonal `diag`
/// and super-diagonal `sup` by Gaussian elimination with partial pivoting.
/// Exact zero pivots are replaced by `tiny` so inverse iteration can proceed
/// at an exact eigenvalue.
pub fn solve_pivoted(sub: &[f64], diag: &[f64], sup: &[f64], b: &[f64], tiny: f64) -> Vec<f64> {
    let n = diag.len();
    let mut dl = sub.to_vec();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut x = b.to_vec();
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let m = dl[i] / d[i];
            d[i + 1] -= m * du[i];
            x[i + 1] -= m * x[i];
            dl[i] = 0.0;
        } else {
            let m = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - m * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -m;
            }
            du[i] = tmp;
            x.swap(i, i + 1);
            x[i + 1] -= m * x[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    x[n - 1] /= d[n - 1];
    if n > 1 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn dirichlet_laplacian_spectrum() {
        let n = 50;
        let t = laplacian(n);
        for k in 0..5 {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((t.eigenvalue(k) - exact).abs() < 1e-13);
            let (v, res) = t.eigenvector(t.eigenvalue(k));
            assert!(res < 1e-10, "residual {res}");
            // sign pattern: k sign changes
            let changes = v.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
            assert_eq!(changes, k);
        }
    }

    #[test]
    fn counts_are_monotone() {
        let t = laplacian(30);
        let mut prev = 0;
        for i in 0..50 {
            let c = t.count_below(-0.1 + i as f64 * 0.1);
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(prev, 30);
    }
}
