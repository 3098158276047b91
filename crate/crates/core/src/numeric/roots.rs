//! Scalar root finding.

use crate::error::{Error, Result};

/// Brent's method on a bracket `[a, b]` with `f(a)` and `f(b)` of opposite sign.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoConvergence(format!("root not bracketed on [{a}, {b}]")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::NoConvergence(format!("brent exceeded {max_iter} iterations")))
}

/// Newton iteration for an increasing function, kept inside a shrinking
/// bracket `[lo, hi]` and falling back to bisection when a step leaves it.
/// Stops at the residual noise floor: five accepted Newton steps in a row
/// without halving `|f|` return the best point so far.
pub fn safeguarded_newton<F>(mut f: F, mut lo: f64, mut hi: f64, x0: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut x = x0.clamp(lo, hi);
    let (mut best, mut best_f, mut stale) = (x, f64::INFINITY, 0);
    let mut newton_step = false;
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.abs() < 0.5 * best_f || !newton_step {
            stale = 0;
        } else {
            stale += 1;
        }
        if fx.abs() < best_f {
            best = x;
            best_f = fx.abs();
        }
        if stale >= 5 {
            return Ok(best);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= xtol {
            return Ok(0.5 * (lo + hi));
        }
        let mut next = x - fx / dfx;
        newton_step = next > lo && next < hi && next.is_finite();
        if !newton_step {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= xtol {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence(format!("newton exceeded {max_iter} iterations on [{lo}, {hi}] at {x}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 50).is_err());
    }

    #[test]
    fn newton_recovers_from_bad_start() {
        let r = safeguarded_newton(|x| (x.atan(), 1.0 / (1.0 + x * x)), -10.0, 20.0, 19.0, 1e-15, 200).unwrap();
        assert!(r.abs() < 1e-14);
    }
}
