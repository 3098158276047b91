//! Linearized radial dynamics on the finite-volume grid.
//!
//! The semi-discrete system is `M y'' = -K y` with `K = (pi/xi+)^2 A`, which
//! is the wave equation `y_tt + L y = 0` on the mode grid. It is advanced with
//! velocity Verlet in the pair `(y, y_t)` and reported as `(y, v)` with
//! `y_t = J v`.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{DiscreteOperator, ModeSet};
use crate::numeric::fd::{derivatives, fornberg};

/// Largest tolerated relative change of the discrete energy.
pub const ENERGY_GROWTH_LIMIT: f64 = 1e-3;
/// Courant factor against the largest discrete eigenvalue.
pub const CFL: f64 = 0.5;
/// Default smallness threshold for Cauchy data.
pub const DEFAULT_DELTA: f64 = 1e-3;
/// Number of derivatives controlled by the smallness check.
pub const CONTROLLED_DERIVATIVES: usize = 4;

/// Perturbation state `R = r(1 + y)`, `V = r v` on the operator nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinState {
    pub t: f64,
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    /// `r dy/dr`
    pub z: Vec<f64>,
    /// `r dv/dr`
    pub w: Vec<f64>,
}

fn radial_derivative(f: &[f64], op: &DiscreteOperator) -> Vec<f64> {
    let (d1, _) = derivatives(&op.x, f, 5);
    (0..f.len()).map(|i| op.r[i] * op.x_r[i] * d1[i]).collect()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

impl LinState {
    pub fn new(t: f64, y: Vec<f64>, v: Vec<f64>, op: &DiscreteOperator) -> Result<Self> {
        for f in [&y, &v] {
            if f.len() != op.len() {
                return Err(Error::GridMismatch { expected: op.len(), got: f.len() });
            }
        }
        if y.iter().chain(&v).any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("state has non-finite entries".into()));
        }
        if sup(&y) >= 1.0 {
            return Err(Error::InvalidInput(format!("sup|y| = {} breaks the Lagrangian map", sup(&y))));
        }
        let z = radial_derivative(&y, op);
        let w = radial_derivative(&v, op);
        Ok(Self { t, y, v, z, w })
    }

    pub fn zero(op: &DiscreteOperator) -> Self {
        let n = op.len();
        Self { t: 0.0, y: vec![0.0; n], v: vec![0.0; n], z: vec![0.0; n], w: vec![0.0; n] }
    }

    pub fn y_at_boundary(&self) -> f64 {
        *self.y.last().unwrap_or(&0.0)
    }

    pub fn v_at_boundary(&self) -> f64 {
        *self.v.last().unwrap_or(&0.0)
    }

    /// `a s1 + b s2`, at the time of `s1`.
    pub fn combine(a: f64, s1: &LinState, b: f64, s2: &LinState, op: &DiscreteOperator) -> Result<Self> {
        let y = s1.y.iter().zip(&s2.y).map(|(p, q)| a * p + b * q).collect();
        let v = s1.v.iter().zip(&s2.v).map(|(p, q)| a * p + b * q).collect();
        LinState::new(s1.t, y, v, op)
    }

    /// Same configuration with the velocity flipped.
    pub fn reversed(&self) -> Self {
        let mut s = self.clone();
        s.v.iter_mut().for_each(|a| *a = -*a);
        s.w.iter_mut().for_each(|a| *a = -*a);
        s
    }

    pub fn write_csv(&self, op: &DiscreteOperator, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "r", "y", "v", "z", "w"])?;
        for i in 0..self.y.len() {
            w.write_record([op.x[i], op.r[i], self.y[i], self.v[i], self.z[i], self.w[i]].map(|a| format!("{a:e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Time-periodic solution `eps sin(sqrt(lambda) t + theta0) psi_nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalSeed {
    pub nu: usize,
    pub eps: f64,
    #[serde(rename = "Theta0")]
    pub theta0: f64,
}

impl ModalSeed {
    pub fn new(nu: usize, eps: f64, theta0: f64) -> Self {
        Self { nu, eps, theta0 }
    }

    /// Predicted boundary displacement `y(t, x = 1)`.
    pub fn boundary_prediction(&self, modes: &ModeSet, t: f64) -> Result<f64> {
        let omega = seed_frequency(modes, self.nu)?;
        Ok(self.eps * (omega * t + self.theta0).sin())
    }
}

fn seed_frequency(modes: &ModeSet, nu: usize) -> Result<f64> {
    if nu == 0 || nu > modes.lambdas.len() {
        return Err(Error::InvalidInput(format!("mode {nu} not among the {} computed", modes.lambdas.len())));
    }
    let lambda = modes.lambdas[nu - 1];
    if !(lambda > 0.0) {
        return Err(Error::NonpositiveEigenvalue { mode: nu, lambda });
    }
    Ok(lambda.sqrt())
}

/// State of the modal solution at time `t` on the grid of `modes`.
pub fn modal_seed(modes: &ModeSet, seed: &ModalSeed, t: f64) -> Result<LinState> {
    let omega = seed_frequency(modes, seed.nu)?;
    if !(seed.eps.abs() <= 0.1) {
        return Err(Error::InvalidInput(format!("|eps| = {} exceeds 0.1", seed.eps.abs())));
    }
    let op = &modes.op;
    let psi = &modes.psis[seed.nu - 1];
    let phase = omega * t + seed.theta0;
    let y = psi.iter().map(|p| seed.eps * phase.sin() * p).collect();
    let v = psi.iter().zip(&op.j_bar).map(|(p, j)| seed.eps * omega * phase.cos() * p / j).collect();
    LinState::new(t, y, v, op)
}

/// Stable default step for `op`.
pub fn default_dt(op: &DiscreteOperator) -> f64 {
    CFL / op.lambda_max().sqrt()
}

/// Modified energy conserved exactly by velocity Verlet for linear forces.
fn verlet_energy(op: &DiscreteOperator, y: &[f64], yd: &[f64], dt: f64) -> f64 {
    let ky: Vec<f64> = op.stiffness(y).iter().map(|a| op.scale * a).collect();
    let mut e = 0.0;
    for i in 0..y.len() {
        e += 0.5 * op.mass[i] * yd[i] * yd[i] + 0.5 * y[i] * ky[i] - dt * dt / 8.0 * ky[i] * ky[i] / op.mass[i];
    }
    e
}

/// Surface density coefficient `C(t)` of `rho ~ C(t) (r+ - r)^n` at linear order.
pub fn boundary_density_law(state: &LinState, op: &DiscreteOperator) -> Result<f64> {
    let c_rho = op
        .c_rho
        .ok_or_else(|| Error::InvalidInput("operator carries no equilibrium profile".into()))?;
    if op.len() < 8 {
        return Err(Error::InsufficientResolution("boundary law needs at least 8 nodes".into()));
    }
    let m = op.len() - 1;
    Ok(c_rho * (1.0 - 3.0 * state.y[m] - state.z[m]))
}

/// Pointwise quadratic term `(1 + y)^2 (P/(c^2 rho)) v (v + w)`.
pub fn quadratic_term(state: &LinState, op: &DiscreteOperator) -> Vec<f64> {
    (0..state.y.len())
        .map(|i| (1.0 + state.y[i]).powi(2) * op.s_omega[i] * state.v[i] * (state.v[i] + state.w[i]))
        .collect()
}

/// Time series of one run, with full states every `record_every` steps.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub y_at_x1: Vec<f64>,
    pub v_at_x1: Vec<f64>,
    pub energy: Vec<f64>,
    /// `NaN` when the operator has no equilibrium behind it.
    pub c_of_t: Vec<f64>,
    pub snapshots: Vec<LinState>,
    pub final_state: LinState,
    /// Largest `|E(t) - E(0)| / |E(0)|`; zero for zero data.
    pub energy_drift: f64,
    /// Largest sup-norm of the quadratic term over the snapshots.
    pub quadratic_sup: f64,
}

impl Trajectory {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "y_at_x1", "v_at_x1", "energy", "C_of_t"])?;
        for i in 0..self.times.len() {
            w.write_record(
                [self.times[i], self.y_at_x1[i], self.v_at_x1[i], self.energy[i], self.c_of_t[i]].map(|a| format!("{a:e}")),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    /// Mean spacing of upward zero crossings of `y(t, 1)`.
    pub fn boundary_period(&self) -> Option<f64> {
        crossing_period(&self.times, &self.y_at_x1)
    }

    /// Period of the oscillation of `C(t)` about its mean.
    pub fn density_law_period(&self) -> Option<f64> {
        if self.c_of_t.iter().any(|c| c.is_nan()) || self.c_of_t.is_empty() {
            return None;
        }
        let mean = self.c_of_t.iter().sum::<f64>() / self.c_of_t.len() as f64;
        let centred: Vec<f64> = self.c_of_t.iter().map(|c| c - mean).collect();
        crossing_period(&self.times, &centred)
    }
}

/// Mean spacing of upward zero crossings, located by linear interpolation.
pub fn crossing_period(t: &[f64], f: &[f64]) -> Option<f64> {
    let mut hits = Vec::new();
    for i in 1..f.len().min(t.len()) {
        if f[i - 1] < 0.0 && f[i] >= 0.0 {
            let s = f[i - 1] / (f[i - 1] - f[i]);
            hits.push(t[i - 1] + s * (t[i] - t[i - 1]));
        }
    }
    if hits.len() < 2 {
        return None;
    }
    Some((hits[hits.len() - 1] - hits[0]) / (hits.len() - 1) as f64)
}

/// Advance `initial` over `duration` with step close to `dt`, recording
/// every step and a full snapshot every `record_every` steps.
pub fn evolve_linear(
    initial: &LinState,
    op: &DiscreteOperator,
    dt: f64,
    duration: f64,
    record_every: usize,
) -> Result<Trajectory> {
    let n = op.len();
    for f in [&initial.y, &initial.v] {
        if f.len() != n {
            return Err(Error::GridMismatch { expected: n, got: f.len() });
        }
    }
    if !(dt > 0.0) || !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::InvalidInput(format!("need dt > 0 and finite duration >= 0, got dt = {dt}, T = {duration}")));
    }
    let steps = (duration / dt).ceil() as usize;
    let dt = if steps > 0 { duration / steps as f64 } else { dt };
    let lam_max = op.lambda_max();
    if dt * dt * lam_max >= 4.0 {
        return Err(Error::UnstableStep(format!("dt sqrt(lambda_max) = {} is beyond the stability limit 2", dt * lam_max.sqrt())));
    }
    let record_every = record_every.max(1);
    let with_law = op.c_rho.is_some() && n >= 8;

    let mut y = initial.y.clone();
    let mut yd: Vec<f64> = initial.v.iter().zip(&op.j_bar).map(|(v, j)| v * j).collect();
    let accel = |y: &[f64]| -> Vec<f64> { op.stiffness(y).iter().zip(&op.mass).map(|(a, m)| -op.scale * a / m).collect() };
    let mut acc = accel(&y);
    let e0 = verlet_energy(op, &y, &yd, dt);
    let scale_e = e0.abs();

    let mut traj = Trajectory {
        dt,
        times: Vec::with_capacity(steps + 1),
        y_at_x1: Vec::with_capacity(steps + 1),
        v_at_x1: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        c_of_t: Vec::with_capacity(steps + 1),
        snapshots: Vec::new(),
        final_state: initial.clone(),
        energy_drift: 0.0,
        quadratic_sup: 0.0,
    };
    let last = n - 1;
    let boundary_law = |y: &[f64]| -> f64 {
        if !with_law {
            return f64::NAN;
        }
        // r y_r at the last node from a one-sided stencil
        let lo = n - 5;
        let wts = fornberg(op.x[last], &op.x[lo..], 1);
        let yx: f64 = wts[1].iter().zip(&y[lo..]).map(|(a, b)| a * b).sum();
        let z = op.r[last] * op.x_r[last] * yx;
        op.c_rho.unwrap_or(f64::NAN) * (1.0 - 3.0 * y[last] - z)
    };
    let record = |step: usize, y: &[f64], yd: &[f64], traj: &mut Trajectory| -> Result<()> {
        let t = initial.t + step as f64 * dt;
        let e = verlet_energy(op, y, yd, dt);
        traj.times.push(t);
        traj.y_at_x1.push(y[last]);
        traj.v_at_x1.push(yd[last] / op.j_bar[last]);
        traj.energy.push(e);
        traj.c_of_t.push(boundary_law(y));
        if scale_e > 0.0 {
            let drift = (e - e0).abs() / scale_e;
            traj.energy_drift = traj.energy_drift.max(drift);
            if drift > ENERGY_GROWTH_LIMIT {
                return Err(Error::UnstableStep(format!("energy changed by {drift:e} relative at t = {t}")));
            }
        }
        if step % record_every == 0 || step == steps {
            let v = yd.iter().zip(&op.j_bar).map(|(a, j)| a / j).collect();
            let s = LinState::new(t, y.to_vec(), v, op)?;
            traj.quadratic_sup = traj.quadratic_sup.max(sup(&quadratic_term(&s, op)));
            if step == steps {
                traj.final_state = s.clone();
            }
            traj.snapshots.push(s);
        }
        Ok(())
    };

    record(0, &y, &yd, &mut traj)?;
    for step in 1..=steps {
        for i in 0..n {
            yd[i] += 0.5 * dt * acc[i];
            y[i] += dt * yd[i];
        }
        acc = accel(&y);
        for i in 0..n {
            yd[i] += 0.5 * dt * acc[i];
        }
        record(step, &y, &yd, &mut traj)?;
    }
    Ok(traj)
}

/// Largest `k`-th angle derivative of `f` for `k = 0..=order`.
fn angle_derivative_sups(f: &[f64], op: &DiscreteOperator, order: usize) -> Vec<f64> {
    let n = f.len();
    let width = (order + 3).min(n);
    let mut out = vec![0.0f64; order + 1];
    for i in 0..n {
        let start = i.saturating_sub(width / 2).min(n - width);
        let w = fornberg(op.theta[i], &op.theta[start..start + width], order);
        for (k, wk) in w.iter().enumerate() {
            let d: f64 = wk.iter().zip(&f[start..start + width]).map(|(a, b)| a * b).sum();
            out[k] = out[k].max(d.abs());
        }
    }
    out
}

/// Rejects data whose values or first four grid derivatives exceed `delta`.
pub fn check_small(psi0: &[f64], psi1: &[f64], op: &DiscreteOperator, delta: f64) -> Result<()> {
    for (name, f) in [("psi0", psi0), ("psi1", psi1)] {
        if f.len() != op.len() {
            return Err(Error::GridMismatch { expected: op.len(), got: f.len() });
        }
        let sups = angle_derivative_sups(f, op, CONTROLLED_DERIVATIVES);
        if let Some((k, s)) = sups.iter().enumerate().find(|(_, s)| **s > delta) {
            return Err(Error::DataNotSmall(format!("derivative {k} of {name} has size {s:e} > {delta:e}")));
        }
    }
    Ok(())
}

/// Boundedness of a Cauchy run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    /// `sup|psi0| + sup|J psi1| / sqrt(lambda_1)`
    pub initial_norm: f64,
    pub max_sup_norm: f64,
    pub sup_ratio: f64,
    pub initial_energy: f64,
    pub energy_drift: f64,
}

/// Linear evolution of `y = psi0`, `v = psi1` after the smallness check.
pub fn cauchy_solve(
    psi0: &[f64],
    psi1: &[f64],
    op: &DiscreteOperator,
    dt: f64,
    duration: f64,
    delta: f64,
    record_every: usize,
) -> Result<(Trajectory, CauchyReport)> {
    check_small(psi0, psi1, op, delta)?;
    let initial = LinState::new(0.0, psi0.to_vec(), psi1.to_vec(), op)?;
    let traj = evolve_linear(&initial, op, dt, duration, record_every)?;
    let t = op.symmetric();
    let lam1 = op.scale * t.eigenvalue(0);
    let jv: Vec<f64> = psi1.iter().zip(&op.j_bar).map(|(a, j)| a * j).collect();
    let initial_norm = if lam1 > 0.0 { sup(psi0) + sup(&jv) / lam1.sqrt() } else { sup(psi0) + sup(psi1) };
    let max_sup_norm = traj.snapshots.iter().fold(0.0f64, |a, s| a.max(sup(&s.y)));
    let sup_ratio = if initial_norm > 0.0 { max_sup_norm / initial_norm } else { 0.0 };
    let report = CauchyReport {
        initial_norm,
        max_sup_norm,
        sup_ratio,
        initial_energy: traj.energy[0],
        energy_drift: traj.energy_drift,
    };
    Ok((traj, report))
}

/// Random low-degree data in `x` whose first four angle derivatives are at
/// most `size`, reproducible from `seed`.
pub fn random_smooth_data(op: &DiscreteOperator, seed: u64, size: f64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let coeffs: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f: Vec<f64> = op
            .x
            .iter()
            .map(|&x| coeffs.iter().enumerate().map(|(k, c)| c * (PI * k as f64 * x).cos()).sum())
            .collect();
        let top = angle_derivative_sups(&f, op, CONTROLLED_DERIVATIVES).into_iter().fold(0.0f64, f64::max);
        f.into_iter().map(|a| a * size / top).collect()
    };
    let psi0 = draw(&mut rng);
    let psi1 = draw(&mut rng);
    (psi0, psi1)
}
