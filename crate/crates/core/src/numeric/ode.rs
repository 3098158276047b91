//! Dormand-Prince 5(4) embedded Runge-Kutta pair with PI step control.
//!
//! Only single steps and the controller live here; callers own the loop so
//! they can apply their own acceptance checks and event handling.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Right-hand side `dy/dt = f(t, y)`.
pub trait OdeRhs<const N: usize> {
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> OdeRhs<N> for F {
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepOutcome<const N: usize> {
    pub y: [f64; N],
    /// Derivative at the end of the step (first stage of the next step).
    pub dy: [f64; N],
    /// Weighted RMS error norm; the step is acceptable when <= 1.
    pub err: f64,
}

#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    pub rtol: f64,
    pub atol: [f64; N],
    pub safety: f64,
    pub fac_min: f64,
    pub fac_max: f64,
    pub beta: f64,
}

impl<const N: usize> Dopri5<N> {
    pub fn new(rtol: f64, atol: [f64; N]) -> Self {
        Self { rtol, atol, safety: 0.9, fac_min: 0.2, fac_max: 5.0, beta: 0.04 }
    }

    /// One step of size `h` from `(t, y)` where `dy = f(t, y)`.
    pub fn step<F: OdeRhs<N>>(&self, f: &F, t: f64, y: &[f64; N], dy: &[f64; N], h: f64) -> StepOutcome<N> {
        let stage = |coef: &[(f64, &[f64; N])]| {
            let mut out = *y;
            for (a, k) in coef {
                for i in 0..N {
                    out[i] += h * a * k[i];
                }
            }
            out
        };
        let k1 = *dy;
        let k2 = f.eval(t + C2 * h, &stage(&[(A21, &k1)]));
        let k3 = f.eval(t + C3 * h, &stage(&[(A31, &k1), (A32, &k2)]));
        let k4 = f.eval(t + C4 * h, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f.eval(t + C5 * h, &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f.eval(t + h, &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = stage(&[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f.eval(t + h, &y_new);
        let mut sum = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = self.atol[i] + self.rtol * y[i].abs().max(y_new[i].abs());
            sum += (e / scale).powi(2);
        }
        StepOutcome { y: y_new, dy: k7, err: (sum / N as f64).sqrt() }
    }

    /// Step-size factor from the current and previous accepted error norms.
    pub fn factor(&self, err: f64, err_prev: f64) -> f64 {
        if err == 0.0 {
            return self.fac_max;
        }
        let alpha = 0.2 - 0.75 * self.beta;
        let fac = self.safety * err.powf(-alpha) * err_prev.max(1e-4).powf(self.beta);
        fac.clamp(self.fac_min, self.fac_max)
    }

    /// Integrates from `t0` to `t1` with adaptive steps, returning the state
    /// at `t1` and the last step size used.
    pub fn integrate<F: OdeRhs<N>>(&self, f: &F, t0: f64, y0: [f64; N], t1: f64, h0: f64) -> Option<([f64; N], f64)> {
        let dir = (t1 - t0).signum();
        let mut t = t0;
        let mut y = y0;
        let mut dy = f.eval(t, &y);
        let mut h = h0.abs().min((t1 - t0).abs()) * dir;
        let mut err_prev = 1.0;
        for _ in 0..1_000_000 {
            if (t1 - t) * dir <= 0.0 {
                return Some((y, h));
            }
            let last = (t + h - t1) * dir >= 0.0;
            let h_try = if last { t1 - t } else { h };
            let out = self.step(f, t, &y, &dy, h_try);
            if !out.err.is_finite() {
                h *= 0.25;
                continue;
            }
            if out.err <= 1.0 {
                t = if last { t1 } else { t + h_try };
                y = out.y;
                dy = out.dy;
                h = h_try * self.factor(out.err, err_prev);
                err_prev = out.err;
            } else {
                h = h_try * self.factor(out.err, err_prev).min(1.0);
            }
            if h.abs() < 1e-15 * t.abs().max(1.0) {
                return None;
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let solver = Dopri5::new(1e-12, [1e-14; 2]);
        let (y, _) = solver.integrate(&f, 0.0, [1.0, 0.0], 2.0 * std::f64::consts::PI, 0.1).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
    }

    #[test]
    fn fifth_order_local_error() {
        // Error of one step on y' = y shrinks ~h^6 locally.
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let s = Dopri5::new(1e-8, [1e-8]);
        let e = |h: f64| (s.step(&f, 0.0, &[1.0], &[1.0], h).y[0] - h.exp()).abs();
        let ratio = e(0.1) / e(0.05);
        assert!(ratio > 50.0, "ratio {ratio}");
    }
}
