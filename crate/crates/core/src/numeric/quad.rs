//! Gauss-Legendre rules and adaptive Gauss-Kronrod quadrature.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1], `n >= 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// Fixed 8-point Gauss-Legendre integral of `f` over [a, b].
pub fn gl8_integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let (x, w) = gl8();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(w).map(|(xi, wi)| wi * f(mid + half * xi)).sum::<f64>() * half
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration with global bisection of the
/// worst interval until the summed error estimate meets the tolerance.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut intervals = vec![{
        let (v, e) = gk15(&mut f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..2000 {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if !total.is_finite() {
            return Err(Error::QuadratureFailed("non-finite integrand".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty interval list");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let m = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, m);
        let (v2, e2) = gk15(&mut f, m, hi);
        intervals.push((lo, m, v1, e1));
        intervals.push((m, hi, v2, e2));
    }
    let total: f64 = intervals.iter().map(|iv| iv.2).sum();
    let err: f64 = intervals.iter().map(|iv| iv.3).sum();
    if err <= 1e3 * abs_tol.max(rel_tol * total.abs()) {
        Ok(total)
    } else {
        Err(Error::QuadratureFailed(format!("error estimate {err:e} after subdivision limit")))
    }
}
