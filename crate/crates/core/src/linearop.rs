//! The linearized radial pulsation operator
//! `L y = -e^{2F}(1 + P/(c^2 rho)) (E2 y'' + E1 y' + E0 y)`
//! in raw form, in self-adjoint form `-(1/b)(a y')' + Q y`, and in the
//! regularizing chart `x = sin^2 theta`, where it becomes
//!
//! `(xi+/pi)^2 L y = -x(1-x) y'' - (5/2 (1-x) - N/2 x) y' + L1 x(1-x) y' + L0 y`.
//!
//! With `tau(r) = int_0^r g`, `g = sqrt(b/a)`, `theta = (pi/2) tau/xi+` and
//! `W = sqrt(a b)` the same operator reads `-(1/4W)(W y_theta)_theta + L0 y`,
//! which is the form the eigen-solver discretizes.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumProfile;
use crate::error::{Error, Result};
use crate::numeric::{fd, fit, quad, roots};

/// Operator coefficients at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffPoint {
    pub r: f64,
    pub e2: f64,
    pub e1: f64,
    pub e0: f64,
    pub a: f64,
    pub b: f64,
    pub q: f64,
    /// `sqrt(b/a)`, the chart speed `d tau / dr`.
    pub g: f64,
    /// `sqrt(a b)`
    pub w: f64,
    /// `d ln W / dr`
    pub dlnw: f64,
    /// `e^F (1 + P/(c^2 rho))`
    pub j_bar: f64,
    /// `P/(c^2 rho)`
    pub s_omega: f64,
}

/// Coefficients at `r` in `(0, r+)`; at `r = 0` the regular limit is taken.
pub fn coeff_point(profile: &EquilibriumProfile, r: f64) -> Result<CoeffPoint> {
    // The centre is a removable singularity of u'/r; evaluate just beside it.
    let r_eval = if r == 0.0 { 1e-9 * profile.center.r0 } else { r };
    let pt = profile.at(r_eval)?;
    let eos = &profile.eos;
    let par = &profile.params;
    let c2 = par.c * par.c;
    let n = eos.index() as f64;
    let s = pt.s;
    let (om, dom, _) = eos.omega(s);
    let gam = pt.gamma1;
    let gam_s = eos.dgamma_ds(s);
    let s_om = s * om;
    let one = 1.0 + s_om;
    let s_u = 1.0 / eos.du_ds(s);
    let ds = pt.ds;
    let dln_one = (om + s * dom) * ds / one;
    let dln_pgam = ((n + 1.0) / s + dom / om + gam_s / gam) * ds;
    let dln_rho = n / s * ds;
    let df = -pt.du / c2;
    let r4 = r_eval.powi(4);
    let e2 = (-2.0 * pt.h).exp() * pt.p * gam / (pt.rho + pt.p / c2);
    let e1 = e2 * (pt.dh + df - dln_one + dln_pgam + 4.0 / r_eval);
    let e0 = 12.0 * PI * par.g / c2 * (gam - 1.0) * pt.p
        + pt.du / r_eval * (-1.0 + 3.0 * (-2.0 * pt.h).exp() * ((gam - 1.0) + c2 * s_om * gam_s * s_u) / one)
        + par.lambda * (c2 + r_eval * pt.du);
    let a = (pt.h + pt.f).exp() * pt.p * gam * r4 / one;
    let b = (3.0 * pt.h - pt.f).exp() * r4 * pt.rho / one;
    let g = (pt.h - pt.f).exp() / (c2 * s_om * gam).sqrt();
    let w = (2.0 * pt.h).exp() * r4 * (pt.p * gam * pt.rho).sqrt() / one;
    let dlnw = 2.0 * pt.dh + 4.0 / r_eval + 0.5 * dln_pgam + 0.5 * dln_rho - dln_one;
    let q = -(2.0 * pt.f).exp() * one * e0;
    let (a, b, w) = if r == 0.0 { (0.0, 0.0, 0.0) } else { (a, b, w) };
    Ok(CoeffPoint { r, e2, e1, e0, a, b, q, g, w, dlnw, j_bar: pt.f.exp() * one, s_omega: s_om })
}

/// Raw and self-adjoint coefficients on the profile grid (the boundary
/// point itself, where `a = b = 0` and `E1` diverges, is left out).
#[derive(Debug, Clone)]
pub struct SelfAdjointCoeffs {
    pub r: Vec<f64>,
    pub e2: Vec<f64>,
    pub e1: Vec<f64>,
    pub e0: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub q: Vec<f64>,
    pub j_bar: Vec<f64>,
    /// Largest relative disagreement between the analytic `d ln W/dr` and a
    /// Richardson-extrapolated difference quotient.
    pub derivative_check: f64,
}

impl SelfAdjointCoeffs {
    pub fn sup_q(&self) -> f64 {
        self.q.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn coefficients(profile: &EquilibriumProfile) -> Result<SelfAdjointCoeffs> {
    let n = profile.len() - 1;
    let mut out = SelfAdjointCoeffs {
        r: Vec::with_capacity(n),
        e2: Vec::with_capacity(n),
        e1: Vec::with_capacity(n),
        e0: Vec::with_capacity(n),
        a: Vec::with_capacity(n),
        b: Vec::with_capacity(n),
        q: Vec::with_capacity(n),
        j_bar: Vec::with_capacity(n),
        derivative_check: 0.0,
    };
    for &r in &profile.r[..n] {
        let c = coeff_point(profile, r)?;
        out.r.push(r);
        out.e2.push(c.e2);
        out.e1.push(c.e1);
        out.e0.push(c.e0);
        out.a.push(c.a);
        out.b.push(c.b);
        out.q.push(c.q);
        out.j_bar.push(c.j_bar);
        if !(c.q.is_finite() && c.e1.is_finite()) {
            return Err(Error::InsufficientResolution(format!("non-finite coefficient at r = {r}")));
        }
    }
    // spot check of the analytic log-derivative of W against the grid data
    let rp = profile.r_plus;
    let lnw = |r: f64| coeff_point(profile, r).map(|c| c.w.ln());
    let mut worst: f64 = 0.0;
    for k in 1..10 {
        let r = rp * k as f64 / 10.0;
        let h = 1e-3 * rp;
        let d1 = (lnw(r + h)? - lnw(r - h)?) / (2.0 * h);
        let d2 = (lnw(r + h / 2.0)? - lnw(r - h / 2.0)?) / h;
        let rich = (4.0 * d2 - d1) / 3.0;
        let exact = coeff_point(profile, r)?.dlnw;
        worst = worst.max((rich - exact).abs() / exact.abs().max(1.0 / rp));
    }
    out.derivative_check = worst;
    if worst > 1e-4 {
        return Err(Error::InsufficientResolution(format!(
            "derivative of ln W disagrees with grid differences by {worst:e}"
        )));
    }
    Ok(out)
}

/// Pointwise data of the chart at one angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub theta: f64,
    pub x: f64,
    /// `1 - x`, kept separately to avoid cancellation near the surface.
    pub one_minus_x: f64,
    pub r: f64,
    /// Weight `W` of the angle form.
    pub w: f64,
    pub l0: f64,
    pub l1: f64,
    pub j_bar: f64,
    /// `dx/dr`
    pub x_r: f64,
    /// `P/(c^2 rho)`
    pub s_omega: f64,
}

#[derive(Debug, Clone)]
struct PhysicalChart {
    profile: EquilibriumProfile,
    nodes: Vec<f64>,
    tau: Vec<f64>,
    tail: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Source {
    Synthetic { l0: f64 },
    Physical(Box<PhysicalChart>),
}

/// The regularizing chart with its collocation grid.
#[derive(Debug, Clone)]
pub struct XChart {
    pub xi_plus: f64,
    pub c0: f64,
    pub c1: f64,
    pub big_n: u32,
    /// `xi+/pi`: the operator in physical time is `(pi/xi+)^2` times the
    /// normalized x-form.
    pub time_rescale: f64,
    pub theta: Vec<f64>,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub l0: Vec<f64>,
    pub l1: Vec<f64>,
    source: Source,
}

/// Collocation angles `theta_j = j (pi/2) / m`, clustering `x` quadratically
/// at both ends.
pub fn lobatto_angles(m: usize) -> Vec<f64> {
    (0..=m).map(|j| FRAC_PI_2 * j as f64 / m as f64).collect()
}

fn g_of(profile: &EquilibriumProfile, r: f64) -> f64 {
    coeff_point(profile, r).map(|c| c.g).unwrap_or(f64::NAN)
}

/// `int_{r_a}^{r_b} g dr` through `sigma = sqrt(r+ - r)`, which removes the
/// inverse square-root singularity at the surface.
fn tail_integral(profile: &EquilibriumProfile, r_a: f64, r_b: f64) -> f64 {
    let rp = profile.r_plus;
    let (sa, sb) = ((rp - r_a).max(0.0).sqrt(), (rp - r_b).max(0.0).sqrt());
    quad::gl8_integrate(|sg| 2.0 * sg * g_of(profile, rp - sg * sg), sb, sa)
}

/// Builds the physical chart from an equilibrium; `m` is the number of
/// collocation intervals (`m + 1` points).
pub fn build_xchart(profile: &EquilibriumProfile, m: usize) -> Result<XChart> {
    if m < 8 {
        return Err(Error::InvalidInput(format!("collocation grid needs at least 8 intervals, got {m}")));
    }
    let rp = profile.r_plus;
    let mut nodes = Vec::with_capacity(profile.len() + 1);
    nodes.push(0.0);
    nodes.extend_from_slice(&profile.r);
    let split = 0.9 * rp;
    let pieces: Vec<f64> = nodes
        .windows(2)
        .map(|w| {
            if w[0] >= split {
                tail_integral(profile, w[0], w[1])
            } else {
                quad::gl8_integrate(|r| g_of(profile, r), w[0], w[1])
            }
        })
        .collect();
    if pieces.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::QuadratureFailed("non-finite chart integrand".into()));
    }
    let mut tau = vec![0.0; nodes.len()];
    for k in 0..pieces.len() {
        tau[k + 1] = tau[k] + pieces[k];
    }
    let mut tail = vec![0.0; nodes.len()];
    for k in (0..pieces.len()).rev() {
        tail[k] = tail[k + 1] + pieces[k];
    }
    let xi_plus = tail[0];
    let big_n = profile.eos.big_n();
    let phys = PhysicalChart { profile: profile.clone(), nodes, tau, tail };
    let mut chart = XChart {
        xi_plus,
        c0: 0.0,
        c1: 0.0,
        big_n,
        time_rescale: xi_plus / PI,
        theta: Vec::new(),
        x: Vec::new(),
        r: Vec::new(),
        l0: Vec::new(),
        l1: Vec::new(),
        source: Source::Physical(Box::new(phys)),
    };
    chart.fill_endpoint_scales()?;
    chart.fill_grid(m)?;
    Ok(chart)
}

/// Chart whose operator is exactly the principal part plus a constant
/// `L0`: `W = sin^4(theta) cos^(N-1)(theta)`, `L1 = 0`, `xi+ = pi`.
pub fn synthetic_chart(big_n: u32, l0: f64, m: usize) -> Result<XChart> {
    if big_n < 6 || big_n % 2 != 0 {
        return Err(Error::InvalidInput(format!("N must be an even integer >= 6, got {big_n}")));
    }
    let mut chart = XChart {
        xi_plus: PI,
        c0: 1.0,
        c1: 1.0,
        big_n,
        time_rescale: 1.0,
        theta: Vec::new(),
        x: Vec::new(),
        r: Vec::new(),
        l0: Vec::new(),
        l1: Vec::new(),
        source: Source::Synthetic { l0 },
    };
    chart.fill_grid(m)?;
    Ok(chart)
}

impl XChart {
    pub fn is_synthetic(&self) -> bool {
        matches!(self.source, Source::Synthetic { .. })
    }

    pub fn profile(&self) -> Option<&EquilibriumProfile> {
        match &self.source {
            Source::Physical(p) => Some(&p.profile),
            Source::Synthetic { .. } => None,
        }
    }

    /// `(pi/xi+)^2`, converting normalized eigenvalues to physical ones.
    pub fn physical_scale(&self) -> f64 {
        (PI / self.xi_plus).powi(2)
    }

    fn fill_grid(&mut self, m: usize) -> Result<()> {
        let theta = lobatto_angles(m);
        let mut pts = Vec::with_capacity(m + 1);
        for &t in &theta {
            pts.push(self.at_theta(t)?);
        }
        // L1 has removable singularities at both ends; extrapolate from the
        // neighbouring nodes.
        let extrap = |a: f64, b: f64, c: f64| 3.0 * a - 3.0 * b + c;
        if !self.is_synthetic() {
            pts[0].l1 = extrap(pts[1].l1, pts[2].l1, pts[3].l1);
            pts[m].l1 = extrap(pts[m - 1].l1, pts[m - 2].l1, pts[m - 3].l1);
        }
        self.x = pts.iter().map(|p| p.x).collect();
        self.r = pts.iter().map(|p| p.r).collect();
        self.l0 = pts.iter().map(|p| p.l0).collect();
        self.l1 = pts.iter().map(|p| p.l1).collect();
        self.theta = theta;
        Ok(())
    }

    fn fill_endpoint_scales(&mut self) -> Result<()> {
        let Source::Physical(ph) = &self.source else { return Ok(()) };
        let p = &ph.profile;
        // x ~ r^2 / C0^2 at the centre, from the first few grid radii
        let g0 = coeff_point(p, 0.0)?.g;
        let k = (ph.nodes.len() - 1).min(6);
        let (mut rs, mut ratio) = (Vec::new(), Vec::new());
        for i in 1..=k {
            let r = ph.nodes[i];
            let th = FRAC_PI_2 * ph.tau[i] / self.xi_plus;
            rs.push(r * r);
            ratio.push(th.sin().powi(2) / (r * r));
        }
        let (_, icpt) = fit::line(&rs, &ratio);
        self.c0 = 1.0 / icpt.sqrt();
        let analytic_c0 = 2.0 * self.xi_plus / (PI * g0);
        if ((self.c0 - analytic_c0) / analytic_c0).abs() > 1e-3 {
            return Err(Error::InsufficientResolution(format!(
                "centre scale fit {} disagrees with 2 xi+/(pi g(0)) = {analytic_c0}",
                self.c0
            )));
        }
        // 1 - x ~ (r+ - r) / C1 at the surface, from the outer cluster
        let rp = p.r_plus;
        let (mut d, mut omx) = (Vec::new(), Vec::new());
        for i in 0..ph.nodes.len() - 1 {
            let di = rp - ph.nodes[i];
            if di > 0.0 && di < 1e-3 * rp {
                d.push(di);
                omx.push((FRAC_PI_2 * ph.tail[i] / self.xi_plus).sin().powi(2));
            }
        }
        if d.len() < 8 {
            return Err(Error::InsufficientResolution("too few grid points near the surface".into()));
        }
        let cf = fit::least_squares(&d, &omx, |t| vec![t, t * t, t * t * t]);
        self.c1 = 1.0 / cf[0];
        Ok(())
    }

    /// Radius at chart angle `theta`.
    pub fn r_of_theta(&self, theta: f64) -> Result<f64> {
        match &self.source {
            Source::Synthetic { .. } => Ok(theta.sin().powi(2)),
            Source::Physical(ph) => ph.r_of_theta(theta, self.xi_plus),
        }
    }

    /// All chart data at angle `theta` in `[0, pi/2]`.
    pub fn at_theta(&self, theta: f64) -> Result<ChartPoint> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidInput(format!("angle {theta} outside [0, pi/2]")));
        }
        let n = self.big_n as f64;
        let phi = FRAC_PI_2 - theta;
        let x = theta.sin().powi(2);
        let omx = phi.sin().powi(2);
        match &self.source {
            Source::Synthetic { l0 } => Ok(ChartPoint {
                theta,
                x,
                one_minus_x: omx,
                r: x,
                w: theta.sin().powi(4) * phi.sin().powi(self.big_n as i32 - 1),
                l0: *l0,
                l1: 0.0,
                j_bar: 1.0,
                x_r: 1.0,
                s_omega: 0.0,
            }),
            Source::Physical(ph) => {
                let p = &ph.profile;
                let r = ph.r_of_theta(theta, self.xi_plus)?;
                let scale = (self.xi_plus / PI).powi(2);
                if theta == 0.0 || theta == FRAC_PI_2 {
                    let c = coeff_point(p, if theta == 0.0 { 0.0 } else { r })?;
                    let x_r = if theta == 0.0 { 0.0 } else { 1.0 / self.c1 };
                    return Ok(ChartPoint {
                        theta,
                        x,
                        one_minus_x: omx,
                        r,
                        w: 0.0,
                        l0: scale * c.q,
                        l1: f64::NAN,
                        j_bar: c.j_bar,
                        x_r,
                        s_omega: c.s_omega,
                    });
                }
                let c = coeff_point(p, r)?;
                let x_r = (2.0 * theta).sin() * PI / (2.0 * self.xi_plus) * c.g;
                let l1 = (2.0 - (n + 3.0) / 2.0 * x) / (x * omx) - c.dlnw / x_r;
                Ok(ChartPoint {
                    theta,
                    x,
                    one_minus_x: omx,
                    r,
                    w: c.w,
                    l0: scale * c.q,
                    l1,
                    j_bar: c.j_bar,
                    x_r,
                    s_omega: c.s_omega,
                })
            }
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "r", "L0", "L1"])?;
        for i in 0..self.len() {
            w.write_record([self.x[i], self.r[i], self.l0[i], self.l1[i]].map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> ChartSummary {
        ChartSummary { xi_plus: self.xi_plus, c0: self.c0, c1: self.c1, n: self.big_n }
    }
}

impl PhysicalChart {
    fn r_of_theta(&self, theta: f64, xi_plus: f64) -> Result<f64> {
        let p = &self.profile;
        let rp = p.r_plus;
        if theta <= 0.0 {
            return Ok(0.0);
        }
        if theta >= FRAC_PI_2 {
            return Ok(rp);
        }
        if theta <= std::f64::consts::FRAC_PI_4 {
            let target = 2.0 * xi_plus / PI * theta;
            let k = self.tau.partition_point(|&t| t <= target).saturating_sub(1).min(self.nodes.len() - 2);
            let (ra, rb) = (self.nodes[k], self.nodes[k + 1]);
            let frac = (target - self.tau[k]) / (self.tau[k + 1] - self.tau[k]);
            let f = |r: f64| {
                let v = self.tau[k] + quad::gl8_integrate(|t| g_of(p, t), ra, r);
                (v - target, g_of(p, r))
            };
            roots::safeguarded_newton(f, ra, rb, ra + frac * (rb - ra), 1e-15 * rb, 200)
        } else {
            let target = 2.0 * xi_plus / PI * (FRAC_PI_2 - theta);
            // tail decreases along the grid
            let k = self.tail.partition_point(|&t| t > target).saturating_sub(1).min(self.nodes.len() - 2);
            let (sa, sb) = ((rp - self.nodes[k + 1]).max(0.0).sqrt(), (rp - self.nodes[k]).sqrt());
            let frac = (target - self.tail[k + 1]) / (self.tail[k] - self.tail[k + 1]);
            let f = |sg: f64| {
                let v = self.tail[k + 1] + quad::gl8_integrate(|t| 2.0 * t * g_of(p, rp - t * t), sa, sg);
                (v - target, 2.0 * sg * g_of(p, rp - sg * sg))
            };
            let sg = roots::safeguarded_newton(f, sa, sb, sa + frac * (sb - sa), 1e-15 * sb, 200)?;
            Ok(rp - sg * sg)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartSummary {
    pub xi_plus: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "N")]
    pub n: u32,
}

/// `L y` in physical time units on the chart's collocation grid, using
/// five-point finite differences in `x`.
pub fn apply_l(y: &[f64], chart: &XChart) -> Result<Vec<f64>> {
    if y.len() != chart.len() {
        return Err(Error::GridMismatch { expected: chart.len(), got: y.len() });
    }
    let (d1, d2) = fd::derivatives(&chart.x, y, 5);
    let n = chart.big_n as f64;
    let scale = chart.physical_scale();
    Ok((0..y.len())
        .map(|i| {
            let x = chart.x[i];
            let xx = x * (1.0 - x);
            scale
                * (-xx * d2[i] - (2.5 * (1.0 - x) - n / 2.0 * x) * d1[i] + chart.l1[i] * xx * d1[i] + chart.l0[i] * y[i])
        })
        .collect())
}

/// Outcome of the structural conditions on the operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    /// Both endpoint parameters (5 at the centre, N at the surface) exceed 4.
    pub endpoint_parameters_ok: bool,
    pub j_min: f64,
    pub j_max: f64,
    /// `J` positive and bounded on the grid.
    pub j_bounded: bool,
    pub l0_sup: f64,
    pub l1_sup: f64,
}

pub fn structural_checks(chart: &XChart) -> Result<StructuralReport> {
    let mut j_min = f64::INFINITY;
    let mut j_max: f64 = 0.0;
    for &t in &chart.theta {
        let j = chart.at_theta(t)?.j_bar;
        j_min = j_min.min(j);
        j_max = j_max.max(j);
    }
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(StructuralReport {
        endpoint_parameters_ok: 5 > 4 && chart.big_n > 4,
        j_min,
        j_max,
        j_bounded: j_min > 0.0 && j_max.is_finite(),
        l0_sup: sup(&chart.l0),
        l1_sup: sup(&chart.l1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve;
    use crate::model::{validate_spec, EosSpec, ModelParams};

    fn star(lambda: f64) -> EquilibriumProfile {
        let params = ModelParams::geometrized(lambda);
        let eos = validate_spec(&EosSpec::polytrope(1.0, 1.5), &params).unwrap();
        solve(0.05, &eos, &params, 1e-10).unwrap()
    }

    #[test]
    fn b_matches_direct_formula() {
        let p = star(1e-4);
        let r = 0.5 * p.r_plus;
        let c = coeff_point(&p, r).unwrap();
        let pt = p.at(r).unwrap();
        let direct = (3.0 * pt.h - pt.f).exp() * r.powi(4) * pt.rho / (1.0 + pt.p / pt.rho);
        assert!((c.b - direct).abs() < 1e-14 * direct);
    }

    #[test]
    fn lambda_term_vanishes_without_lambda() {
        let p = star(0.0);
        let c = coeff_point(&p, 0.3 * p.r_plus).unwrap();
        let pt = p.at(0.3 * p.r_plus).unwrap();
        let eos = &p.eos;
        let s = pt.s;
        let g = pt.gamma1;
        let without = 12.0 * PI * (g - 1.0) * pt.p
            + pt.du / pt.r * (-1.0 + 3.0 * (-2.0 * pt.h).exp() * (g - 1.0) / (1.0 + s * eos.omega(s).0));
        assert!((c.e0 - without).abs() < 1e-13 * without.abs());
    }

    #[test]
    fn raw_and_self_adjoint_forms_agree() {
        let p = star(1e-4);
        let rp = p.r_plus;
        for k in 2..9 {
            let r = rp * k as f64 / 10.0;
            let c = coeff_point(&p, r).unwrap();
            let pt = p.at(r).unwrap();
            let j = (2.0 * pt.f).exp() * (1.0 + pt.p / pt.rho);
            // y = r^2: raw form against -(1/b)(a y')' + Q y with a' by differences
            let h = 1e-4 * rp;
            let a = |t: f64| coeff_point(&p, t).unwrap().a;
            let da = (a(r - 2.0 * h) - 8.0 * a(r - h) + 8.0 * a(r + h) - a(r + 2.0 * h)) / (12.0 * h);
            let (y, dy, ddy) = (r * r, 2.0 * r, 2.0);
            let raw = -j * (c.e2 * ddy + c.e1 * dy + c.e0 * y);
            let sa = -(da * dy + c.a * ddy) / c.b + c.q * y;
            assert!((raw - sa).abs() < 1e-6 * raw.abs().max(sa.abs()), "r {r}: {raw} vs {sa}");
        }
    }

    #[test]
    fn q_bounded_and_grid_stable() {
        let p = star(1e-4);
        let c = coefficients(&p).unwrap();
        let params = p.params;
        let fine = solve(0.05, &p.eos, &params, 1e-12).unwrap();
        let cf = coefficients(&fine).unwrap();
        assert!(c.sup_q().is_finite());
        assert!((c.sup_q() / cf.sup_q() - 1.0).abs() < 0.01);
        assert!(c.derivative_check < 1e-4);
    }

    #[test]
    fn chart_endpoints_and_identity() {
        let p = star(1e-4);
        let chart = build_xchart(&p, 64).unwrap();
        assert_eq!(chart.x[0], 0.0);
        assert_eq!(*chart.x.last().unwrap(), 1.0);
        for w in chart.x.windows(2) {
            assert!(w[1] > w[0]);
        }
        for &t in &chart.theta {
            let tan2 = t.tan().powi(2);
            let alt = if tan2.is_finite() { tan2 / (1.0 + tan2) } else { 1.0 };
            assert!((alt - t.sin().powi(2)).abs() < 1e-12);
        }
        assert!(chart.l0.iter().chain(&chart.l1).all(|v| v.is_finite()));
    }

    #[test]
    fn round_trip_radius() {
        let p = star(1e-4);
        let chart = build_xchart(&p, 32).unwrap();
        let Source::Physical(ph) = &chart.source else { unreachable!() };
        for i in (1..p.len() - 1).step_by(5) {
            let th = if ph.tau[i + 1] < 0.5 * chart.xi_plus {
                FRAC_PI_2 * ph.tau[i + 1] / chart.xi_plus
            } else {
                FRAC_PI_2 - FRAC_PI_2 * ph.tail[i + 1] / chart.xi_plus
            };
            let r = chart.r_of_theta(th).unwrap();
            assert!((r - p.r[i]).abs() < 1e-10 * p.r_plus, "{} vs {}", r, p.r[i]);
        }
    }

    #[test]
    fn synthetic_first_polynomial_is_eigenfunction() {
        let chart = synthetic_chart(6, 0.0, 64).unwrap();
        let y: Vec<f64> = chart.x.iter().map(|x| 1.0 - 2.2 * x).collect();
        let ly = apply_l(&y, &chart).unwrap();
        for (a, b) in ly.iter().zip(&y) {
            assert!((a - 5.5 * b).abs() < 1e-9);
        }
        let ones = vec![1.0; chart.len()];
        let shifted = synthetic_chart(6, 0.7, 64).unwrap();
        assert!(apply_l(&ones, &shifted).unwrap().iter().all(|v| (v - 0.7).abs() < 1e-8));
        assert!(matches!(apply_l(&ones[1..], &chart), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn structural_conditions_hold() {
        let p = star(1e-4);
        let chart = build_xchart(&p, 64).unwrap();
        let rep = structural_checks(&chart).unwrap();
        assert!(rep.endpoint_parameters_ok && rep.j_bounded);
        assert!(rep.j_max <= 1.0 && rep.j_min > 0.5);
    }
}
