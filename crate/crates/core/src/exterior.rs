//! Schwarzschild-de Sitter exterior and its `C^1` gluing at the surface.
//!
//! The exterior chart `(t#, R#)` is known only through its jet on the
//! boundary `r = r+`: the values fixed by `R# = R`, `dR#/dr = dR/dr` and
//! the derivatives `t#_t`, `t#_r`, `t#_rr`, `R#_rr` solved from continuity of
//! the metric and its first `r`-derivative.

use std::ops::{Add, Div, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumProfile;
use crate::error::{Error, Result};
use crate::evolve::LinState;
use crate::model::ModelParams;
use crate::modes::DiscreteOperator;
use crate::numeric::fd::fornberg;

/// `1 - 2 G m+ / (c^2 R) - Lambda R^2 / 3`.
pub fn sds_kappa(r: f64, m_plus: f64, params: &ModelParams) -> f64 {
    params.kappa(r, m_plus)
}

fn sds_kappa_dr(r: f64, m_plus: f64, params: &ModelParams) -> f64 {
    2.0 * params.g * m_plus / (params.c * params.c * r * r) - 2.0 * params.lambda * r / 3.0
}

/// Positive zeros of the exterior lapse, ascending.
pub fn horizons(m_plus: f64, params: &ModelParams) -> Vec<f64> {
    let mu = params.g * m_plus / (params.c * params.c);
    let lam = params.lambda;
    if lam <= 0.0 {
        return if mu > 0.0 { vec![2.0 * mu] } else { Vec::new() };
    }
    if 9.0 * mu * mu * lam > 1.0 {
        return Vec::new();
    }
    // -R kappa = (Lambda/3) R^3 - R + 2 mu, depressed cubic R^3 + p R + q
    let p = -3.0 / lam;
    let q = 6.0 * mu / lam;
    let amp = 2.0 * (-p / 3.0).sqrt();
    let arg = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
    let phi = arg.acos() / 3.0;
    let f = |r: f64| lam / 3.0 * r * r * r - r + 2.0 * mu;
    let df = |r: f64| lam * r * r - 1.0;
    let mut roots: Vec<f64> = (0..3)
        .map(|k| amp * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
        .map(|mut r| {
            for _ in 0..8 {
                let d = df(r);
                if d == 0.0 {
                    break;
                }
                let step = f(r) / d;
                r -= step;
                if step.abs() <= 1e-15 * r.abs() {
                    break;
                }
            }
            r
        })
        .filter(|r| *r > 0.0)
        .collect();
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * b.abs());
    roots
}

/// Coefficient of the jump `R#_rr - R_rr = A (R_r)^2` of the second radial
/// derivative at the surface.
pub fn jump_coefficient(v: f64, dv_dt: f64, r: f64, m_plus: f64, kappa_plus: f64, params: &ModelParams) -> Result<f64> {
    let c2 = params.c * params.c;
    let factor = 1.0 + v * v / c2 - 2.0 * params.g * m_plus / (c2 * r) - params.lambda * r * r / 3.0;
    if !(factor > 0.0) {
        return Err(Error::DegenerateFactor { factor });
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let bracket = params.g * m_plus / (c2 * r * r) - params.lambda * r / 3.0 + dv_dt / (kappa_plus.sqrt() * c2);
    Ok(-(v * v / c2) * bracket / (factor * factor))
}

/// Interior one-sided data at `r = r+ - 0` at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryJet {
    pub r_plus: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(rename = "R_r")]
    pub r_r: f64,
    #[serde(rename = "R_rr")]
    pub r_rr: f64,
    #[serde(rename = "R_t")]
    pub r_t: f64,
    #[serde(rename = "R_tr")]
    pub r_tr: f64,
    #[serde(rename = "R_tt")]
    pub r_tt: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "V_r")]
    pub v_r: f64,
    #[serde(rename = "V_t")]
    pub v_t: f64,
    /// `du/dr` of the perturbed enthalpy.
    pub u_r: f64,
}

impl BoundaryJet {
    /// Static star: `R = r`, no motion.
    pub fn equilibrium(profile: &EquilibriumProfile) -> Self {
        Self {
            r_plus: profile.r_plus,
            big_r: profile.r_plus,
            r_r: 1.0,
            r_rr: 0.0,
            r_t: 0.0,
            r_tr: 0.0,
            r_tt: 0.0,
            v: 0.0,
            v_r: 0.0,
            v_t: 0.0,
            u_r: profile.du[profile.len() - 1],
        }
    }

    /// Linear-order jet of `R = r (1 + y)` from a state on the grid of `op`.
    pub fn from_state(state: &LinState, op: &DiscreteOperator, profile: &EquilibriumProfile) -> Result<Self> {
        let n = op.len();
        if state.y.len() != n || state.v.len() != n {
            return Err(Error::GridMismatch { expected: n, got: state.y.len() });
        }
        if n < 8 {
            return Err(Error::InsufficientResolution("boundary jet needs at least 8 nodes".into()));
        }
        let c2 = profile.params.c * profile.params.c;
        let last = n - 1;
        let lo = n - 7;
        let rp = op.r[last];
        let w = fornberg(rp, &op.r[lo..], 2);
        let d = |f: &[f64], k: usize| -> f64 { w[k].iter().zip(&f[lo..]).map(|(a, b)| a * b).sum() };
        let (y, y_r, y_rr) = (state.y[last], d(&state.y, 1), d(&state.y, 2));
        let (v, v_r) = (state.v[last], d(&state.v, 1));
        let ly = op.apply(&state.y)?;
        let jb = op.j_bar[last];
        let v_t = -ly[last] / jb;

        let u_bar_r = profile.du[profile.len() - 1];
        let s_r = profile.ds[profile.len() - 1];
        // J = e^F (1 + P/(c^2 rho)) with F = F+ - u/c^2
        let j_r = jb * (-u_bar_r / c2 + s_r);
        let gamma = profile.eos.gamma();
        Ok(Self {
            r_plus: rp,
            big_r: rp * (1.0 + y),
            r_r: 1.0 + y + rp * y_r,
            r_rr: 2.0 * y_r + rp * y_rr,
            r_t: rp * jb * v,
            r_tr: jb * v + rp * j_r * v + rp * jb * v_r,
            r_tt: rp * jb * v_t,
            v: rp * v,
            v_r: v + rp * v_r,
            v_t: rp * v_t,
            u_r: u_bar_r * (1.0 - (gamma - 1.0) * (3.0 * y + rp * y_r)),
        })
    }
}

/// One value per metric component and its radial derivative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricJet {
    pub g00: f64,
    pub g01: f64,
    pub g11: f64,
    pub g22: f64,
    pub g00_r: f64,
    pub g01_r: f64,
    pub g11_r: f64,
    pub g22_r: f64,
}

impl MetricJet {
    fn defects(&self, other: &MetricJet) -> MetricJet {
        MetricJet {
            g00: (self.g00 - other.g00).abs(),
            g01: (self.g01 - other.g01).abs(),
            g11: (self.g11 - other.g11).abs(),
            g22: (self.g22 - other.g22).abs(),
            g00_r: (self.g00_r - other.g00_r).abs(),
            g01_r: (self.g01_r - other.g01_r).abs(),
            g11_r: (self.g11_r - other.g11_r).abs(),
            g22_r: (self.g22_r - other.g22_r).abs(),
        }
    }

    fn max(&self) -> f64 {
        [self.g00, self.g01, self.g11, self.g22, self.g00_r, self.g01_r, self.g11_r, self.g22_r]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Result of gluing the exterior onto the interior at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub t: f64,
    pub jet: BoundaryJet,
    pub interior: MetricJet,
    pub exterior: MetricJet,
    /// `dt#/dt`
    pub t_sharp_t: f64,
    /// `dt#/dr`
    pub t_sharp_r: f64,
    /// `d2t#/dr2`
    pub t_sharp_rr: f64,
    /// `d2R#/dr2`
    pub r_sharp_rr: f64,
    pub kappa_sharp: f64,
    /// Jump coefficient from the closed formula.
    #[serde(rename = "jump_A")]
    pub jump_a: f64,
    /// `(R#_rr - R_rr) / R_r^2` from the solved continuity system.
    #[serde(rename = "jump_A_system")]
    pub jump_a_system: f64,
    pub c1_defects: MetricJet,
    pub max_defect: f64,
}

impl MatchReport {
    /// Plain-text defect table.
    pub fn defect_table(&self) -> String {
        let d = &self.c1_defects;
        let mut s = String::from("component    value-defect   r-derivative-defect\n");
        for (name, a, b) in [("g00", d.g00, d.g00_r), ("g01", d.g01, d.g01_r), ("g11", d.g11, d.g11_r), ("g22", d.g22, d.g22_r)] {
            s.push_str(&format!("{name:<12} {a:<14.3e} {b:.3e}\n"));
        }
        s.push_str(&format!("jump A = {:e}\n", self.jump_a));
        s
    }
}

/// Forward-mode number for one time derivative along the boundary.
#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    d: f64,
}

impl Dual {
    fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }
    fn c(v: f64) -> Self {
        Self { v, d: 0.0 }
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        Self::new(s, 0.5 * self.d / s)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual::new(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))
    }
}

/// `(t#_t, t#_r)` from continuity of `g00` and `g01`.
fn first_derivatives(big_r: Dual, r_r: Dual, r_t: Dual, m_plus: f64, kappa_plus: f64, params: &ModelParams) -> (Dual, Dual) {
    let c2 = Dual::c(params.c * params.c);
    let kap = Dual::c(1.0)
        - Dual::c(2.0 * params.g * m_plus) / (c2 * big_r)
        - Dual::c(params.lambda / 3.0) * big_r * big_r;
    let tt = ((Dual::c(kappa_plus) + r_t * r_t / (c2 * kap)) / kap).sqrt();
    let tr = r_t * r_r / (c2 * kap * kap * tt);
    (tt, tr)
}

/// Exterior jet that makes the patched metric `C^1` at `r+`, with the
/// residual defects and both forms of the jump coefficient.
pub fn match_metric(profile: &EquilibriumProfile, jet: &BoundaryJet, t: f64) -> Result<MatchReport> {
    let par = &profile.params;
    let c = par.c;
    let c2 = c * c;
    let mp = profile.m_plus;
    let kp = profile.kappa_plus;
    let j = jet;

    // interior one-sided limits
    let d = 1.0 + j.v * j.v / c2 - 2.0 * par.g * mp / (c2 * j.big_r) - par.lambda * j.big_r * j.big_r / 3.0;
    if !(d > 0.0) {
        return Err(Error::DegenerateFactor { factor: d });
    }
    let d_r = 2.0 * j.v * j.v_r / c2 + sds_kappa_dr(j.big_r, mp, par) * j.r_r;
    let interior = MetricJet {
        g00: kp,
        g01: 0.0,
        g11: -j.r_r * j.r_r / d,
        g22: -j.big_r * j.big_r,
        g00_r: -2.0 * kp / c2 * j.u_r,
        g01_r: 0.0,
        g11_r: -2.0 * j.r_r * j.r_rr / d + j.r_r * j.r_r * d_r / (d * d),
        g22_r: -2.0 * j.big_r * j.r_r,
    };

    // exterior: R# = R and R#_r = R_r on the boundary for all t
    let ks = sds_kappa(j.big_r, mp, par);
    if !(ks > 0.0) {
        return Err(Error::DegenerateFactor { factor: ks });
    }
    let ks_r = sds_kappa_dr(j.big_r, mp, par) * j.r_r;
    let (tt, tr) = first_derivatives(
        Dual::new(j.big_r, j.r_t),
        Dual::new(j.r_r, j.r_tr),
        Dual::new(j.r_t, j.r_tt),
        mp,
        kp,
        par,
    );
    let (t_t, t_tr, t_r) = (tt.v, tr.d, tr.v);

    // r-derivatives of g01 and g11 are linear in (t#_rr, R#_rr)
    let a11 = c * ks * t_t;
    let a12 = -j.r_t / (c * ks);
    let b1 = -(c * (ks_r * t_t * t_r + ks * t_tr * t_r) - (j.r_tr * j.r_r / ks - j.r_t * j.r_r * ks_r / (ks * ks)) / c);
    let a21 = 2.0 * c2 * ks * t_r;
    let a22 = -2.0 * j.r_r / ks;
    let b2 = interior.g11_r - (c2 * ks_r * t_r * t_r + j.r_r * j.r_r * ks_r / (ks * ks));
    let det = a11 * a22 - a12 * a21;
    let expected = 2.0 * c * j.r_r.abs() * kp / (ks * t_t);
    if !(det.abs() > 1e-12 * expected) {
        return Err(Error::SingularMatching { det });
    }
    let t_rr = (b1 * a22 - a12 * b2) / det;
    let rs_rr = (a11 * b2 - b1 * a21) / det;

    let exterior = MetricJet {
        g00: ks * t_t * t_t - j.r_t * j.r_t / (c2 * ks),
        g01: c * ks * t_t * t_r - j.r_t * j.r_r / (c * ks),
        g11: c2 * ks * t_r * t_r - j.r_r * j.r_r / ks,
        g22: -j.big_r * j.big_r,
        g00_r: ks_r * t_t * t_t + 2.0 * ks * t_t * t_tr - 2.0 * j.r_t * j.r_tr / (c2 * ks)
            + j.r_t * j.r_t * ks_r / (c2 * ks * ks),
        g01_r: c * (ks_r * t_t * t_r + ks * t_tr * t_r + ks * t_t * t_rr)
            - (j.r_tr * j.r_r + j.r_t * rs_rr) / (c * ks)
            + j.r_t * j.r_r * ks_r / (c * ks * ks),
        g11_r: c2 * ks_r * t_r * t_r + 2.0 * c2 * ks * t_r * t_rr - 2.0 * j.r_r * rs_rr / ks
            + j.r_r * j.r_r * ks_r / (ks * ks),
        g22_r: -2.0 * j.big_r * j.r_r,
    };
    let c1_defects = exterior.defects(&interior);
    Ok(MatchReport {
        t,
        jet: *j,
        interior,
        exterior,
        t_sharp_t: t_t,
        t_sharp_r: t_r,
        t_sharp_rr: t_rr,
        r_sharp_rr: rs_rr,
        kappa_sharp: ks,
        jump_a: jump_coefficient(j.v, j.v_t, j.big_r, mp, kp, par)?,
        jump_a_system: (rs_rr - j.r_rr) / (j.r_r * j.r_r),
        max_defect: c1_defects.max(),
        c1_defects,
    })
}
