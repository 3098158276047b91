//! Static equilibria: integration of the TOV equations with a cosmological
//! constant from a series start at the centre out to the vacuum boundary.
//!
//! The integrated state is `(m, s)` with `s` the reduced EOS variable, so
//! density and pressure are explicit. The enthalpy obeys
//! `du/dr = -Q / (r^2 kappa)` and `ds/dr = (du/dr) / (du/ds)`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Eos, ModelParams};
use crate::numeric::fit;
use crate::numeric::interp::{hermite, locate};
use crate::numeric::ode::Dopri5;
use crate::numeric::roots;

/// Central density and pressure plus the step-off radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterState {
    pub rho_c: f64,
    pub p_c: f64,
    pub r0: f64,
}

impl CenterState {
    /// Centre with the default step-off radius `1e-3` times the local
    /// pressure length `sqrt(P_c / (G rho_c (rho_c + P_c/c^2)))`.
    pub fn new(rho_c: f64, eos: &Eos, params: &ModelParams) -> Result<Self> {
        if !(rho_c > 0.0 && rho_c.is_finite()) {
            return Err(Error::InvalidInput(format!("central density must be positive, got {rho_c}")));
        }
        let p_c = eos.pressure(rho_c)?;
        let c2 = params.c * params.c;
        let ell = (p_c / (params.g * rho_c * (rho_c + p_c / c2))).sqrt();
        Ok(Self { rho_c, p_c, r0: 1e-3 * ell })
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.r0 = r0;
        self
    }
}

/// Truncated centre expansion at the step-off radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterSeries {
    pub m: f64,
    pub p: f64,
    pub dp_dr: f64,
    pub u: f64,
}

/// `(4 pi G / 3)(rho_c + 3 P_c/c^2) - c^2 Lambda / 3`; the centre is a
/// pressure maximum only if this is positive.
pub fn center_curvature(center: &CenterState, params: &ModelParams) -> f64 {
    let c2 = params.c * params.c;
    4.0 * PI * params.g / 3.0 * (center.rho_c + 3.0 * center.p_c / c2) - c2 * params.lambda / 3.0
}

pub fn center_series(center: &CenterState, eos: &Eos, params: &ModelParams) -> Result<CenterSeries> {
    if !(center.rho_c > 0.0 && center.r0 > 0.0) {
        return Err(Error::InvalidInput("need rho_c > 0 and r0 > 0".into()));
    }
    let c2 = params.c * params.c;
    let k = center_curvature(center, params);
    let r0 = center.r0;
    let enth = center.rho_c + center.p_c / c2;
    let u_c = eos.enthalpy_u(center.rho_c)?;
    Ok(CenterSeries {
        m: 4.0 * PI / 3.0 * center.rho_c * r0.powi(3),
        p: center.p_c - enth * k * r0 * r0 / 2.0,
        dp_dr: -enth * k * r0,
        u: u_c - k * r0 * r0 / 2.0,
    })
}

/// Pointwise equilibrium data, derivatives taken from the field equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub r: f64,
    pub m: f64,
    pub s: f64,
    pub u: f64,
    pub rho: f64,
    pub p: f64,
    pub gamma1: f64,
    pub kappa: f64,
    pub q: f64,
    /// `du/dr`
    pub du: f64,
    /// `ds/dr`
    pub ds: f64,
    /// `dm/dr`
    pub dm: f64,
    pub f: f64,
    pub h: f64,
    /// `dH/dr`
    pub dh: f64,
}

/// Equilibrium on a strictly increasing grid `r0 = r[0] < ... < r[last] = r_plus`.
#[derive(Debug, Clone)]
pub struct EquilibriumProfile {
    pub r: Vec<f64>,
    pub m: Vec<f64>,
    pub s: Vec<f64>,
    pub rho: Vec<f64>,
    pub p: Vec<f64>,
    pub u: Vec<f64>,
    pub f: Vec<f64>,
    pub h: Vec<f64>,
    pub dm: Vec<f64>,
    pub ds: Vec<f64>,
    pub du: Vec<f64>,
    pub r_plus: f64,
    pub m_plus: f64,
    pub kappa_plus: f64,
    pub q_plus: f64,
    /// `((gamma-1)/(A gamma) Q+/(r+^2 kappa+))^(1/(gamma-1))`
    pub c_rho: f64,
    pub center: CenterState,
    pub u_c: f64,
    pub s_c: f64,
    /// Number of grid points in the outer boundary cluster.
    pub cluster_len: usize,
    pub eos: Eos,
    pub params: ModelParams,
}

/// Radius of the first zero of the Lane-Emden function, used only to size
/// steps and the radius cap.
fn lane_emden_zero(n: i32) -> f64 {
    match n {
        1 => PI,
        2 => 4.352_874_6,
        3 => 6.896_848_6,
        4 => 14.971_546,
        _ => 100.0,
    }
}

/// Newtonian length scale `sqrt((n+1) P_c / (4 pi G rho_c^2))`.
pub fn lane_emden_length(center: &CenterState, eos: &Eos, params: &ModelParams) -> f64 {
    let n = eos.index() as f64;
    ((n + 1.0) * center.p_c / (4.0 * PI * params.g * center.rho_c * center.rho_c)).sqrt()
}

fn rhs(eos: &Eos, params: &ModelParams, r: f64, y: &[f64; 2]) -> [f64; 2] {
    let (m, s) = (y[0], y[1]);
    let rho = eos.rho_of_s(s);
    let p = eos.pressure_of_s(s);
    let du = -params.q(r, m, p) / (r * r * params.kappa(r, m));
    [4.0 * PI * r * r * rho, du / eos.du_ds(s)]
}

const CLUSTER: usize = 64;

/// Integrates from the centre to the vacuum boundary `u = 0`.
///
/// `tol` is the relative tolerance of the adaptive Dormand-Prince stepper and
/// of the boundary event.
pub fn integrate_tov(center: &CenterState, eos: &Eos, params: &ModelParams, tol: f64) -> Result<EquilibriumProfile> {
    if !(tol > 0.0 && tol < 1e-2) {
        return Err(Error::InvalidInput(format!("tolerance must lie in (0, 1e-2), got {tol}")));
    }
    let k = center_curvature(center, params);
    if k <= 0.0 {
        return Err(Error::NotMonotoneShort { r: 0.0 });
    }
    let series = center_series(center, eos, params)?;
    let s_c = eos.s_of_rho(center.rho_c);
    let u_c = eos.enthalpy_u(center.rho_c)?;
    let s0 = s_c + (series.u - u_c) / eos.du_ds(s_c);

    let alpha = lane_emden_length(center, eos, params);
    let r_est = alpha * lane_emden_zero(eos.index());
    let r_cap = 10.0 * r_est;
    let h_max = r_est / 400.0;
    let m_scale = 4.0 * PI / 3.0 * center.rho_c * r_est.powi(3);
    let solver = Dopri5::new(tol, [tol * m_scale * 1e-3, tol * s_c * 1e-3]);
    let f = |r: f64, y: &[f64; 2]| rhs(eos, params, r, y);

    let mut r = center.r0;
    let mut y = [series.m, s0];
    let mut dy = f(r, &y);
    let mut nodes = vec![(r, y)];
    let mut h = (0.1 * h_max).max(center.r0);
    let mut err_prev = 1.0;
    let (r_plus, m_plus) = loop {
        if r > r_cap {
            return Err(Error::NoBoundary { r_cap });
        }
        let h_try = h.min(h_max);
        let out = solver.step(&f, r, &y, &dy, h_try);
        if !out.err.is_finite() || out.err > 1.0 {
            h = if out.err.is_finite() { h_try * solver.factor(out.err, err_prev).min(1.0) } else { 0.25 * h_try };
            if h < 1e-14 * r {
                return Err(Error::NoConvergence(format!("step size underflow at r = {r}")));
            }
            continue;
        }
        if out.y[1] <= 0.0 {
            let g = |hh: f64| solver.step(&f, r, &y, &dy, hh).y[1];
            let hs = roots::brent(g, 0.0, h_try, 1e-3 * tol * (r + h_try), 200)?;
            let end = solver.step(&f, r, &y, &dy, hs).y;
            break (r + hs, end[0]);
        }
        r += h_try;
        y = out.y;
        dy = out.dy;
        let p = eos.pressure_of_s(y[1]);
        if params.kappa(r, y[0]) <= 0.0 {
            return Err(Error::HorizonApproached { r });
        }
        if params.q(r, y[0], p) <= 0.0 {
            return Err(Error::NotMonotoneShort { r });
        }
        nodes.push((r, y));
        h = h_try * solver.factor(out.err, err_prev);
        err_prev = out.err;
    };

    let kappa_plus = params.kappa(r_plus, m_plus);
    if kappa_plus <= 0.0 {
        return Err(Error::HorizonApproached { r: r_plus });
    }
    let q_plus = params.q(r_plus, m_plus, 0.0);
    if q_plus <= 0.0 {
        return Err(Error::NotMonotoneShort { r: r_plus });
    }
    if center.r0 > r_plus / 100.0 {
        return Err(Error::InsufficientResolution(format!(
            "step-off radius {} is not small against r+ = {r_plus}",
            center.r0
        )));
    }

    // Outer layer: integrate inwards from the boundary, where s = 0 is known
    // exactly, onto a geometric cluster of depths.
    let d_max = 0.01 * r_plus;
    let d_min = 1e-7 * r_plus;
    let depths: Vec<f64> = (0..CLUSTER - 1)
        .map(|k| d_min * (d_max / d_min).powf(k as f64 / (CLUSTER - 2) as f64))
        .collect();
    let mut cluster = Vec::with_capacity(CLUSTER);
    let mut yb = [m_plus, 0.0];
    let mut rb = r_plus;
    for &d in &depths {
        let target = r_plus - d;
        let (yn, _) = solver
            .integrate(&f, rb, yb, target, rb - target)
            .ok_or_else(|| Error::NoConvergence(format!("inward integration stalled at r = {rb}")))?;
        rb = target;
        yb = yn;
        cluster.push((target, yn));
    }
    cluster.reverse();
    let r_join = cluster[0].0;
    nodes.retain(|&(rr, _)| rr < r_join * (1.0 - 1e-9));
    nodes.extend(cluster);
    nodes.push((r_plus, [m_plus, 0.0]));

    let mut prof = EquilibriumProfile {
        r: Vec::new(),
        m: Vec::new(),
        s: Vec::new(),
        rho: Vec::new(),
        p: Vec::new(),
        u: Vec::new(),
        f: Vec::new(),
        h: Vec::new(),
        dm: Vec::new(),
        ds: Vec::new(),
        du: Vec::new(),
        r_plus,
        m_plus,
        kappa_plus,
        q_plus,
        c_rho: 0.0,
        center: *center,
        u_c,
        s_c,
        cluster_len: CLUSTER,
        eos: eos.clone(),
        params: *params,
    };
    prof.c_rho = boundary_density_coeff(&prof);
    for &(rr, yy) in &nodes {
        let pt = prof.point_from_state(rr, yy[0], yy[1])?;
        prof.r.push(rr);
        prof.m.push(pt.m);
        prof.s.push(pt.s);
        prof.rho.push(pt.rho);
        prof.p.push(pt.p);
        prof.u.push(pt.u);
        prof.f.push(pt.f);
        prof.h.push(pt.h);
        prof.dm.push(pt.dm);
        prof.ds.push(pt.ds);
        prof.du.push(pt.du);
    }
    Ok(prof)
}

/// Centre state with the default step-off radius followed by [`integrate_tov`].
pub fn solve(rho_c: f64, eos: &Eos, params: &ModelParams, tol: f64) -> Result<EquilibriumProfile> {
    let center = CenterState::new(rho_c, eos, params)?;
    integrate_tov(&center, eos, params, tol)
}

fn boundary_density_coeff(p: &EquilibriumProfile) -> f64 {
    let g = p.eos.gamma();
    let slope = p.q_plus / (p.r_plus * p.r_plus * p.kappa_plus);
    ((g - 1.0) / (p.eos.a() * g) * slope).powi(p.eos.index())
}

impl EquilibriumProfile {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Boundary slope `Q+ / (r+^2 kappa+)` of `-u`.
    pub fn boundary_slope(&self) -> f64 {
        self.q_plus / (self.r_plus * self.r_plus * self.kappa_plus)
    }

    fn point_from_state(&self, r: f64, m: f64, s: f64) -> Result<Point> {
        let eos = &self.eos;
        let par = &self.params;
        let c2 = par.c * par.c;
        let rho = eos.rho_of_s(s);
        let p = eos.pressure_of_s(s);
        let u = if s == 0.0 { 0.0 } else { eos.u_of_s(s)? };
        let kappa = par.kappa(r, m);
        let q = par.q(r, m, p);
        let dm = 4.0 * PI * r * r * rho;
        let (du, dh) = if r == 0.0 {
            (0.0, 0.0)
        } else {
            let dkappa = -2.0 * par.g * dm / (c2 * r) + 2.0 * par.g * m / (c2 * r * r) - 2.0 * par.lambda * r / 3.0;
            (-q / (r * r * kappa), -0.5 * dkappa / kappa)
        };
        Ok(Point {
            r,
            m,
            s,
            u,
            rho,
            p,
            gamma1: eos.gamma_of_s(s),
            kappa,
            q,
            du,
            ds: du / eos.du_ds(s),
            dm,
            f: 0.5 * self.kappa_plus.ln() - u / c2,
            h: -0.5 * kappa.ln(),
            dh,
        })
    }

    /// Equilibrium data at any `r` in `[0, r_plus]`: cubic Hermite
    /// interpolation of `(m, s)` on the grid, the centre series below `r0`.
    pub fn at(&self, r: f64) -> Result<Point> {
        if !(r >= 0.0 && r <= self.r_plus) {
            return Err(Error::InvalidInput(format!("r = {r} outside [0, {}]", self.r_plus)));
        }
        if r <= self.r[0] {
            let k = center_curvature(&self.center, &self.params);
            let m = 4.0 * PI / 3.0 * self.center.rho_c * r.powi(3);
            let u = self.u_c - k * r * r / 2.0;
            let s = self.s_c + (u - self.u_c) / self.eos.du_ds(self.s_c);
            return self.point_from_state(r, m, s);
        }
        let i = locate(&self.r, r);
        let (m, _) = hermite(&self.r, &self.m, &self.dm, i, r);
        let (s, _) = hermite(&self.r, &self.s, &self.ds, i, r);
        self.point_from_state(r, m, s)
    }

    /// Stored grid point `i` with all derived quantities.
    pub fn point(&self, i: usize) -> Result<Point> {
        self.point_from_state(self.r[i], self.m[i], self.s[i])
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["r", "m", "rho", "P", "u", "F", "H"])?;
        for i in 0..self.len() {
            w.write_record(
                [self.r[i], self.m[i], self.rho[i], self.p[i], self.u[i], self.f[i], self.h[i]].map(|v| format!("{v:e}")),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            r_plus: self.r_plus,
            m_plus: self.m_plus,
            kappa_plus: self.kappa_plus,
            q_plus: self.q_plus,
            c_rho: self.c_rho,
        }
    }
}

/// JSON sidecar of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub r_plus: f64,
    pub m_plus: f64,
    pub kappa_plus: f64,
    #[serde(rename = "Q_plus")]
    pub q_plus: f64,
    #[serde(rename = "C_rho")]
    pub c_rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Classification {
    MonotoneShort,
    NoBoundary,
    PressureNotDecreasing { r: f64 },
    KappaNonpositive { r: f64 },
    KappaPlusNonpositive,
    QPlusNonpositive,
}

/// Checks the monotone-short conditions on a stored profile and names the
/// first one that fails.
pub fn classify(profile: &EquilibriumProfile) -> Classification {
    if !profile.r_plus.is_finite() || profile.is_empty() {
        return Classification::NoBoundary;
    }
    let par = &profile.params;
    for i in 0..profile.len() {
        let r = profile.r[i];
        if par.kappa(r, profile.m[i]) <= 0.0 {
            return Classification::KappaNonpositive { r };
        }
        if par.q(r, profile.m[i], profile.p[i]) <= 0.0 {
            return Classification::PressureNotDecreasing { r };
        }
    }
    if profile.kappa_plus <= 0.0 {
        return Classification::KappaPlusNonpositive;
    }
    if profile.q_plus <= 0.0 {
        return Classification::QPlusNonpositive;
    }
    Classification::MonotoneShort
}

/// `(F, H)` on the grid: `F = ln(kappa+)/2 - u/c^2`, `H = -ln(kappa)/2`.
pub fn metric_coeffs(profile: &EquilibriumProfile) -> (Vec<f64>, Vec<f64>) {
    (profile.f.clone(), profile.h.clone())
}

/// Least-squares boundary behaviour from the outer 1% of the star.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFit {
    /// Fitted `-du/dr` at `r+`.
    pub slope: f64,
    /// `Q+ / (r+^2 kappa+)`.
    pub slope_expected: f64,
    /// Fitted power of `(r+ - r)` in the density.
    pub exponent: f64,
    /// Fitted density prefactor.
    pub prefactor: f64,
    pub c_rho: f64,
}

pub fn boundary_asymptotics(profile: &EquilibriumProfile) -> Result<BoundaryFit> {
    let rp = profile.r_plus;
    let (mut d, mut u, mut lnd, mut lnrho) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..profile.len() {
        let di = rp - profile.r[i];
        if di > 0.0 && di <= 0.01 * rp * (1.0 + 1e-9) && profile.rho[i] > 0.0 {
            d.push(di);
            u.push(profile.u[i]);
            lnd.push(di.ln());
            lnrho.push(profile.rho[i].ln());
        }
    }
    if d.len() < 20 {
        return Err(Error::InsufficientResolution(format!(
            "{} grid points in the outer layer, need 20",
            d.len()
        )));
    }
    let cu = fit::least_squares(&d, &u, |t| vec![t, t * t, t * t * t]);
    let pairs: Vec<(f64, f64)> = lnd.iter().copied().zip(d.iter().copied()).collect();
    let idx: Vec<f64> = (0..pairs.len()).map(|i| i as f64).collect();
    let cr = fit::least_squares(&idx, &lnrho, |t| {
        let (l, dd) = pairs[t as usize];
        vec![l, 1.0, dd]
    });
    Ok(BoundaryFit {
        slope: cu[0],
        slope_expected: profile.boundary_slope(),
        exponent: cr[0],
        prefactor: cr[1].exp(),
        c_rho: profile.c_rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_spec, EosSpec};

    fn setup(lambda: f64) -> (Eos, ModelParams) {
        let params = ModelParams::geometrized(lambda);
        (validate_spec(&EosSpec::polytrope(1.0, 1.5), &params).unwrap(), params)
    }

    #[test]
    fn series_mass_at_small_radius() {
        let (eos, params) = setup(0.0);
        let c = CenterState::new(1.0, &eos, &params).unwrap().with_r0(1e-3);
        let s = center_series(&c, &eos, &params).unwrap();
        assert!((s.m / 4.18879e-9 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn flat_center_when_lambda_balances() {
        let (eos, _) = setup(0.0);
        let rho_c = 1e-3;
        let p_c = eos.pressure(rho_c).unwrap();
        let lambda = 4.0 * PI * (rho_c + 3.0 * p_c);
        let params = ModelParams::geometrized(lambda);
        let c = CenterState::new(rho_c, &eos, &params).unwrap();
        let s = center_series(&c, &eos, &params).unwrap();
        assert!((s.p - p_c).abs() <= 1e-15 * p_c);
        assert!(matches!(integrate_tov(&c, &eos, &params, 1e-10), Err(Error::NotMonotoneShort { .. })));
    }

    #[test]
    fn series_error_is_fourth_order() {
        let (eos, params) = setup(0.0);
        let base = CenterState::new(0.1, &eos, &params).unwrap();
        let solver = Dopri5::new(1e-13, [1e-30, 1e-18]);
        let disc = |r0: f64| {
            let start = 1e-6 * base.r0;
            let s = center_series(&base.with_r0(start), &eos, &params).unwrap();
            let s_c = eos.s_of_rho(0.1);
            let y0 = [s.m, s_c + (s.u - eos.enthalpy_u(0.1).unwrap()) / eos.du_ds(s_c)];
            let f = |r: f64, y: &[f64; 2]| rhs(&eos, &params, r, y);
            let (y, _) = solver.integrate(&f, start, y0, r0, start).unwrap();
            let series = center_series(&base.with_r0(r0), &eos, &params).unwrap();
            (eos.pressure_of_s(y[1]) - series.p).abs() / r0.powi(4)
        };
        let r0 = 20.0 * base.r0;
        let (a, b) = (disc(r0), disc(r0 / 2.0));
        assert!(a.is_finite() && b > 0.0);
        assert!((a / b - 1.0).abs() < 0.2, "{a} {b}");
    }

    #[test]
    fn profile_invariants() {
        let (eos, params) = setup(1e-4);
        let p = solve(0.05, &eos, &params, 1e-10).unwrap();
        assert_eq!(classify(&p), Classification::MonotoneShort);
        for w in p.r.windows(2) {
            assert!(w[1] > w[0]);
        }
        for i in 1..p.len() {
            // increments in the outer layer fall below rounding
            assert!(p.m[i] >= p.m[i - 1]);
            assert!(p.u[i] < p.u[i - 1]);
            assert!(p.rho[i] < p.rho[i - 1]);
        }
        let kp = 1.0 - 2.0 * p.m_plus / p.r_plus - 1e-4 * p.r_plus.powi(2) / 3.0;
        assert!((kp - p.kappa_plus).abs() < 1e-12);
        let qp = p.m_plus - 1e-4 * p.r_plus.powi(3) / 3.0;
        assert!((qp - p.q_plus).abs() < 1e-12 * p.m_plus);
        let last = p.len() - 1;
        assert!(((2.0 * p.f[last]).exp() - p.kappa_plus).abs() < 1e-14);
        assert!(((2.0 * p.h[last]).exp() - 1.0 / p.kappa_plus).abs() < 1e-12);
        for i in 0..p.len() {
            let ef = p.kappa_plus.sqrt() * (-p.u[i]).exp();
            assert!((p.f[i].exp() - ef).abs() < 1e-14);
        }
    }

    #[test]
    fn f_equation_holds() {
        let (eos, params) = setup(1e-4);
        let p = solve(0.05, &eos, &params, 1e-10).unwrap();
        for i in (0..p.len()).step_by(7) {
            let pt = p.point(i).unwrap();
            if pt.rho < 1e-6 * p.center.rho_c {
                continue;
            }
            let hs = 1e-6 * pt.s;
            let dp = (eos.pressure_of_s(pt.s + hs) - eos.pressure_of_s(pt.s - hs)) / (2.0 * hs) * pt.ds;
            let df = -pt.du;
            let res = dp + df * (pt.rho + pt.p);
            assert!(res.abs() <= 1e-6 * dp.abs(), "i {i} res {res} dp {dp}");
        }
    }

    #[test]
    fn lambda_zero_metric_is_classical() {
        let (eos, params) = setup(0.0);
        let p = solve(0.05, &eos, &params, 1e-10).unwrap();
        let (_, h) = metric_coeffs(&p);
        for i in 0..p.len() {
            let classical = -0.5 * (1.0 - 2.0 * p.m[i] / p.r[i]).ln();
            assert!((h[i] - classical).abs() < 1e-15);
        }
    }

    #[test]
    fn boundary_fits() {
        let (eos, params) = setup(1e-4);
        let p = solve(0.05, &eos, &params, 1e-10).unwrap();
        let b = boundary_asymptotics(&p).unwrap();
        assert!((b.slope / b.slope_expected - 1.0).abs() < 1e-4, "{b:?}");
        assert!((b.exponent - 2.0).abs() < 0.02, "{b:?}");
        assert!((b.prefactor / b.c_rho - 1.0).abs() < 0.02, "{b:?}");
    }

    #[test]
    fn too_much_lambda_is_not_monotone_short() {
        let (eos, _) = setup(0.0);
        let params = ModelParams::geometrized(1.0);
        assert!(matches!(solve(0.01, &eos, &params, 1e-10), Err(Error::NotMonotoneShort { .. })));
    }

    #[test]
    fn synthetic_classification_failures() {
        let (eos, params) = setup(0.0);
        let good = solve(0.05, &eos, &params, 1e-9).unwrap();
        let mut p = good.clone();
        p.kappa_plus = -0.1;
        assert_eq!(classify(&p), Classification::KappaPlusNonpositive);
        let mut p = good;
        p.q_plus = 0.0;
        assert_eq!(classify(&p), Classification::QPlusNonpositive);
    }

    #[test]
    fn interpolation_matches_grid() {
        let (eos, params) = setup(0.0);
        let p = solve(0.05, &eos, &params, 1e-10).unwrap();
        let i = p.len() / 3;
        let pt = p.at(p.r[i]).unwrap();
        assert!((pt.m - p.m[i]).abs() < 1e-14 * p.m[i]);
        let centre = p.at(0.0).unwrap();
        assert!((centre.rho - 0.05).abs() < 1e-14);
    }
}
