//! Discrete spectrum of the pulsation operator.
//!
//! The angle form `-(1/4W)(W y_theta)_theta + L0 y` is discretized by finite
//! volumes on the uniform angle grid `theta_i = i (pi/2)/m`, which is the
//! Lobatto-type clustering in `x`. Unknowns sit on all `m + 1` nodes including
//! both endpoints, and the vanishing of `W` there supplies the natural
//! (bounded-solution) conditions. The result is a generalized problem
//! `A y = lambda M y` with `A` symmetric tridiagonal and `M` diagonal.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearop::{lobatto_angles, XChart};
use crate::numeric::quad::gauss_legendre;
use crate::numeric::tridiag::SymTridiag;

const CELL_QUAD: usize = 4;

/// Stiffness and mass of the finite-volume discretization on one grid.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub theta: Vec<f64>,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    /// `int W dtheta` over each dual cell.
    pub mass: Vec<f64>,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    /// `e^F (1 + P/(c^2 rho))` at the nodes.
    pub j_bar: Vec<f64>,
    /// `dx/dr` at the nodes.
    pub x_r: Vec<f64>,
    /// `P/(c^2 rho)` at the nodes.
    pub s_omega: Vec<f64>,
    /// Surface density coefficient of the underlying equilibrium.
    pub c_rho: Option<f64>,
    /// `(pi/xi+)^2`
    pub scale: f64,
    pub xi_plus: f64,
}

impl DiscreteOperator {
    pub fn build(chart: &XChart, m: usize) -> Result<Self> {
        if m < 4 {
            return Err(Error::InvalidInput(format!("grid needs at least 4 intervals, got {m}")));
        }
        let theta = lobatto_angles(m);
        let h = theta[1];
        let (gx, gw) = gauss_legendre(CELL_QUAD);
        let mut w_mid = Vec::with_capacity(m);
        let mut half_mass = vec![[0.0; 2]; m];
        let mut half_pot = vec![[0.0; 2]; m];
        for i in 0..m {
            let a = theta[i];
            w_mid.push(chart.at_theta(a + 0.5 * h)?.w);
            // interval i splits into the right half of cell i and the left half of cell i+1
            for (side, (lo, hi)) in [(a, a + 0.5 * h), (a + 0.5 * h, a + h)].into_iter().enumerate() {
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                for (xk, wk) in gx.iter().zip(&gw) {
                    let p = chart.at_theta(mid + half * xk)?;
                    half_mass[i][side] += wk * half * p.w;
                    half_pot[i][side] += wk * half * p.w * p.l0;
                }
            }
        }
        let mut mass = vec![0.0; m + 1];
        let mut diag = vec![0.0; m + 1];
        let mut off = vec![0.0; m];
        for i in 0..m {
            mass[i] += half_mass[i][0];
            mass[i + 1] += half_mass[i][1];
            let k = w_mid[i] / (4.0 * h);
            diag[i] += k + half_pot[i][0];
            diag[i + 1] += k + half_pot[i][1];
            off[i] = -k;
        }
        if mass.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InsufficientResolution("non-positive cell mass".into()));
        }
        let mut x = Vec::with_capacity(m + 1);
        let mut r = Vec::with_capacity(m + 1);
        let mut j_bar = Vec::with_capacity(m + 1);
        let mut x_r = Vec::with_capacity(m + 1);
        let mut s_omega = Vec::with_capacity(m + 1);
        for &t in &theta {
            let p = chart.at_theta(t)?;
            x.push(p.x);
            r.push(p.r);
            j_bar.push(p.j_bar);
            x_r.push(p.x_r);
            s_omega.push(p.s_omega);
        }
        Ok(Self {
            theta,
            x,
            r,
            mass,
            diag,
            off,
            j_bar,
            x_r,
            s_omega,
            c_rho: chart.profile().map(|p| p.c_rho),
            scale: chart.physical_scale(),
            xi_plus: chart.xi_plus,
        })
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// `M^{-1/2} A M^{-1/2}` in normalized units.
    pub fn symmetric(&self) -> SymTridiag {
        let n = self.len();
        let d = (0..n).map(|i| self.diag[i] / self.mass[i]).collect();
        let o = (0..n - 1).map(|i| self.off[i] / (self.mass[i] * self.mass[i + 1]).sqrt()).collect();
        SymTridiag::new(d, o)
    }

    /// Eigenvector for the normalized eigenvalue `lambda` in nodal values,
    /// with the residual of the symmetrized problem.
    ///
    /// Near the endpoints the cell masses are tiny and `phi / sqrt(M)` loses
    /// relative precision, so there the nodal values are rebuilt from the
    /// interior by the ratio recurrence of the tridiagonal rows, run in its
    /// stable direction (towards the interior).
    fn mode_vector(&self, sym: &SymTridiag, lambda: f64) -> (Vec<f64>, f64) {
        let n = self.len();
        let (phi, res) = sym.eigenvector(lambda);
        let mut psi: Vec<f64> = phi.iter().zip(&self.mass).map(|(p, w)| p / w.sqrt()).collect();
        let top = self.mass.iter().fold(0.0f64, |a, v| a.max(*v));
        let small = |i: usize| self.mass[i] < 1e-8 * top;
        let d = |i: usize| self.diag[i] - lambda * self.mass[i];
        // right end: r_i = psi_i / psi_{i-1}
        let mut i0 = n - 1;
        while i0 > n / 2 && small(i0) {
            i0 -= 1;
        }
        if i0 < n - 1 {
            let mut ratio = vec![0.0; n];
            ratio[n - 1] = -self.off[n - 2] / d(n - 1);
            for i in (i0 + 1..n - 1).rev() {
                ratio[i] = -self.off[i - 1] / (d(i) + self.off[i] * ratio[i + 1]);
            }
            for i in i0 + 1..n {
                psi[i] = ratio[i] * psi[i - 1];
            }
        }
        // left end: l_i = psi_i / psi_{i+1}
        let mut j0 = 0;
        while j0 < n / 2 && small(j0) {
            j0 += 1;
        }
        if j0 > 0 {
            let mut ratio = vec![0.0; n];
            ratio[0] = -self.off[0] / d(0);
            for i in 1..j0 {
                ratio[i] = -self.off[i] / (d(i) + self.off[i - 1] * ratio[i - 1]);
            }
            for i in (0..j0).rev() {
                psi[i] = ratio[i] * psi[i + 1];
            }
        }
        (psi, res)
    }

    /// `A y` in normalized units.
    pub fn stiffness(&self, y: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * y[i];
                if i > 0 {
                    v += self.off[i - 1] * y[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * y[i + 1];
                }
                v
            })
            .collect()
    }

    /// The discrete operator `L_h y = (pi/xi+)^2 M^{-1} A y` in physical units.
    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.len() {
            return Err(Error::GridMismatch { expected: self.len(), got: y.len() });
        }
        Ok(self.stiffness(y).iter().zip(&self.mass).map(|(a, m)| self.scale * a / m).collect())
    }

    /// Largest eigenvalue of `L_h` in physical units.
    pub fn lambda_max(&self) -> f64 {
        let t = self.symmetric();
        self.scale * t.eigenvalue(t.len() - 1)
    }

    /// Inner product of `L^2((0, r+); b dr)` pulled back to the grid.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        if f.len() != self.len() || g.len() != self.len() {
            let got = if f.len() != self.len() { f.len() } else { g.len() };
            return Err(Error::GridMismatch { expected: self.len(), got });
        }
        let sum: f64 = (0..self.len()).map(|i| self.mass[i] * f[i] * g[i]).sum();
        Ok(2.0 * self.xi_plus / std::f64::consts::PI * sum)
    }
}

/// Eigenvalues and eigenfunctions, `psis[k][i]` on the grid `x`.
#[derive(Debug, Clone)]
pub struct ModeSet {
    /// Ascending eigenvalues in physical units (time^-2).
    pub lambdas: Vec<f64>,
    /// The same eigenvalues in the normalized units of the x-form.
    pub normalized: Vec<f64>,
    /// `sqrt(lambda)` where `lambda > 0`.
    pub frequencies: Vec<Option<f64>>,
    pub psis: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// False for modes whose surface value is negligible against their peak;
    /// those are scaled to unit maximum instead of `psi(1) = 1`.
    pub surface_normalized: Vec<bool>,
    pub grid_size: usize,
    pub xi_plus: f64,
    pub op: DiscreteOperator,
}

/// The `k` lowest modes on an `m`-interval grid, each scaled to `psi(1) = 1`.
pub fn solve_modes(chart: &XChart, k: usize, m: usize) -> Result<ModeSet> {
    if k == 0 || m < 8 * k {
        return Err(Error::InvalidInput(format!("need k >= 1 and grid >= 8k, got k = {k}, grid = {m}")));
    }
    let op = DiscreteOperator::build(chart, m)?;
    let t = op.symmetric();
    let (lo, hi) = t.bounds();
    let span = (hi - lo).abs().max(1.0);
    let mut set = ModeSet {
        lambdas: Vec::with_capacity(k),
        normalized: Vec::with_capacity(k),
        frequencies: Vec::with_capacity(k),
        psis: Vec::with_capacity(k),
        residuals: Vec::with_capacity(k),
        surface_normalized: Vec::with_capacity(k),
        grid_size: m,
        xi_plus: chart.xi_plus,
        op: op.clone(),
    };
    for mode in 0..k {
        let lam = t.eigenvalue(mode);
        let (mut psi, res) = op.mode_vector(&t, lam);
        if !(res <= 1e-9 * span) {
            return Err(Error::NotConverged { mode: mode + 1, residual: res });
        }
        let peak_at = (0..=m).fold(0, |b, i| if psi[i].abs() > psi[b].abs() { i } else { b });
        let at_surface = psi[m].abs() >= 1e-12 * psi[peak_at].abs();
        let norm = if at_surface { psi[m] } else { psi[peak_at] };
        for v in psi.iter_mut() {
            *v /= norm;
        }
        let total: f64 = (0..=m).map(|i| op.mass[i] * psi[i] * psi[i]).sum();
        let ends: f64 = [0, 1, m - 1, m].iter().map(|&i| op.mass[i] * psi[i] * psi[i]).sum();
        let fraction = ends / total;
        if fraction > 0.3 {
            return Err(Error::SpuriousMode { mode: mode + 1, fraction });
        }
        let lambda = op.scale * lam;
        set.lambdas.push(lambda);
        set.normalized.push(lam);
        set.frequencies.push((lambda > 0.0).then(|| lambda.sqrt()));
        set.psis.push(psi);
        set.residuals.push(res);
        set.surface_normalized.push(at_surface);
    }
    Ok(set)
}

/// `<f, g>` in `L^2((0, r+); b dr)` for grid functions on the mode grid.
pub fn weighted_inner_product(f: &[f64], g: &[f64], op: &DiscreteOperator) -> Result<f64> {
    op.inner(f, g)
}

/// Number of sign changes of a grid function.
pub fn sign_changes(v: &[f64]) -> usize {
    let mut last = 0.0;
    let mut count = 0;
    for &a in v {
        if a == 0.0 {
            continue;
        }
        if last != 0.0 && (a > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = a;
    }
    count
}

impl ModeSet {
    pub fn x(&self) -> &[f64] {
        &self.op.x
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut head = vec!["x".to_string()];
        head.extend((1..=self.psis.len()).map(|k| format!("psi_{k}")));
        w.write_record(&head)?;
        for i in 0..self.op.len() {
            let mut row = vec![format!("{:e}", self.op.x[i])];
            row.extend(self.psis.iter().map(|p| format!("{:e}", p[i])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> ModeSummary {
        ModeSummary {
            lambdas: self.lambdas.clone(),
            frequencies: self.frequencies.clone(),
            surface_normalized: self.surface_normalized.clone(),
            xi_plus: self.xi_plus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub lambdas: Vec<f64>,
    pub frequencies: Vec<Option<f64>>,
    pub surface_normalized: Vec<bool>,
    pub xi_plus: f64,
}

/// Per-mode convergence across a refinement sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeConvergence {
    pub lambdas: Vec<f64>,
    pub extrapolated: f64,
    /// Observed order from the last three grids, when available and resolvable.
    pub order: Option<f64>,
    /// Set when the observed order falls below 1.
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub grids: Vec<usize>,
    pub modes: Vec<ModeConvergence>,
    /// Richardson-extrapolated eigenfunctions on the coarsest grid, present
    /// when each grid doubles the previous one.
    pub psis: Option<Vec<Vec<f64>>>,
    pub coarse_x: Vec<f64>,
}

fn observed_order(a: f64, b: f64, c: f64, ratio: f64) -> Option<f64> {
    let (d1, d2) = (a - b, b - c);
    let floor = 1e-13 * c.abs().max(1e-300);
    if d1.abs() <= floor || d2.abs() <= floor || d1.signum() != d2.signum() {
        return None;
    }
    Some((d1 / d2).ln() / ratio.ln())
}

/// Richardson extrapolation of a sequence on grids refined by `ratio`.
///
/// With three values and an observed order close to an even integer `p` the
/// error is taken to expand in `h^p, h^(p+2)` and both terms are removed;
/// otherwise one level with order `p` is applied to the last two values.
fn extrapolate(v: &[f64], ratio: f64, p: f64, even: bool) -> f64 {
    let n = v.len();
    let step = |a: f64, b: f64, q: f64| b + (b - a) / (ratio.powf(q) - 1.0);
    if n >= 3 && even {
        let r1 = step(v[n - 3], v[n - 2], p);
        let r2 = step(v[n - 2], v[n - 1], p);
        step(r1, r2, p + 2.0)
    } else {
        step(v[n - 2], v[n - 1], p)
    }
}

fn nearest_even(p: Option<f64>) -> (f64, bool) {
    match p {
        Some(p) => {
            let e = (p / 2.0).round() * 2.0;
            if e >= 2.0 && (p - e).abs() < 0.25 {
                (e, true)
            } else {
                (p, false)
            }
        }
        None => (2.0, false),
    }
}

/// Eigenvalues on every grid in `grids` (ascending), Richardson
/// extrapolation, and the observed order of convergence per mode.
pub fn convergence_study(chart: &XChart, k: usize, grids: &[usize]) -> Result<ConvergenceStudy> {
    if grids.len() < 2 || grids.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("need at least two increasing grid sizes".into()));
    }
    let sets = grids.iter().map(|&m| solve_modes(chart, k, m)).collect::<Result<Vec<_>>>()?;
    let nl = grids.len();
    let ratio = grids[nl - 1] as f64 / grids[nl - 2] as f64;
    let mut modes = Vec::with_capacity(k);
    let mut orders = Vec::with_capacity(k);
    for j in 0..k {
        let lambdas: Vec<f64> = sets.iter().map(|s| s.lambdas[j]).collect();
        let order = if nl >= 3 {
            observed_order(lambdas[nl - 3], lambdas[nl - 2], lambdas[nl - 1], ratio)
        } else {
            None
        };
        let (p, even) = nearest_even(order);
        let extrapolated = extrapolate(&lambdas, ratio, p, even);
        modes.push(ModeConvergence { lambdas, extrapolated, order, flagged: order.is_some_and(|p| p < 1.0) });
        orders.push((p, even));
    }
    let doubling = grids.windows(2).all(|w| w[1] == 2 * w[0]);
    let psis = doubling.then(|| {
        let m0 = grids[0];
        (0..k)
            .map(|j| {
                let (p, even) = orders[j];
                (0..=m0)
                    .map(|i| {
                        let seq: Vec<f64> = (0..nl).map(|l| sets[l].psis[j][i * (grids[l] / m0)]).collect();
                        extrapolate(&seq, 2.0, p, even)
                    })
                    .collect()
            })
            .collect()
    });
    Ok(ConvergenceStudy { grids: grids.to_vec(), modes, psis, coarse_x: sets[0].op.x.clone() })
}
