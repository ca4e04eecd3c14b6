//! Direct quadrature of the rescaled oscillatory integral and its stationary-phase reduction.
//!
//! The inner integral is
//!
//! ```text
//! I(n, v) = P * int e^{i sqrt(lambda) Upsilon} e^{Theta} t^d u^d dtheta dt du dtau,
//! P = rho0 / (2 pi^d) (lambda / pi)^{1+d} e^{-i lambda tau0}.
//! ```
//!
//! At an isolated fixed point (`upsf = 0`) the substitution `sigma = theta + tau f0` turns
//! `Upsilon` into `-theta (t - 1/f0) + sigma (u - 1/f0)` and `Theta` into a sum of a
//! `(theta, t)` part and a `(sigma, u)` part, so the four-fold tensor Gauss-Legendre sum factors
//! into two two-fold sums. The `theta` sums do not depend on `v` and are computed once.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::profile::{theta_fn, upsilon, FixedPointDatum, PhasePoint};
use crate::quadrature::{self, Rule};
use crate::symplectic::{psi2, q_of, RMat, RVec};
use crate::{Error, Result};

const PANEL: usize = 16;
/// Gauss-Hermite nodes with `|x|^2` above this carry relative weight below `e^{-40}`.
const HERMITE_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub lambda: f64,
    /// `(t, u)` range is `[1/D, D]`.
    pub big_d: f64,
    /// Minimum node count on every axis.
    pub nodes_per_axis: usize,
    /// Half-width of the `theta` and `sigma` ranges; `None` picks the `e^{-64}` damping radius.
    pub box_radius: Option<f64>,
    /// Gauss-Hermite order per real dimension of `v`.
    pub hermite_order: usize,
    pub nodes_per_period: f64,
    /// Drop `e^{i sqrt(lambda) Upsilon}`; used for non-oscillatory sanity checks.
    pub phase_free: bool,
}

impl QuadratureSpec {
    pub fn new(lambda: f64, f0: f64) -> Self {
        Self {
            lambda,
            big_d: default_big_d(f0),
            nodes_per_axis: 16,
            box_radius: None,
            hermite_order: 24,
            nodes_per_period: 10.0,
            phase_free: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 16 {
            return Err(Error::InvalidArgument(format!("nodes_per_axis must be >= 16, got {}", self.nodes_per_axis)));
        }
        if !(self.big_d > 1.0) {
            return Err(Error::InvalidArgument(format!("D must exceed 1, got {}", self.big_d)));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.hermite_order == 0 || !(self.nodes_per_period > 0.0) {
            return Err(Error::InvalidArgument("hermite_order and nodes_per_period must be positive".into()));
        }
        Ok(())
    }

    /// Every node count doubled.
    pub fn refined(&self) -> Self {
        Self {
            nodes_per_axis: 2 * self.nodes_per_axis,
            hermite_order: 2 * self.hermite_order,
            nodes_per_period: 2.0 * self.nodes_per_period,
            ..self.clone()
        }
    }

    /// Radius where `e^{-theta^2 / (2D)}` drops to `e^{-64}`.
    pub fn radius(&self) -> f64 {
        self.box_radius.unwrap_or_else(|| (128.0 * self.big_d).sqrt())
    }
}

/// Smallest sensible `(t, u)` window containing the critical value `1/f0`, with margin 6.
pub fn default_big_d(f0: f64) -> f64 {
    6.0 * f0.max(1.0 / f0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: Complex64,
    /// `|refined - base|` under node doubling.
    pub est_error: f64,
    pub wall_time: f64,
}

fn check_inputs(datum: &FixedPointDatum, n: &RVec, spec: &QuadratureSpec) -> Result<()> {
    spec.validate()?;
    if spec.lambda < 25.0 {
        return Err(Error::Precondition(format!("lambda must be at least 25, got {}", spec.lambda)));
    }
    if n.len() != 2 * datum.dim_d() {
        return Err(Error::InvalidArgument("n has the wrong dimension".into()));
    }
    if 1.0 / datum.f0 <= 1.0 / spec.big_d || 1.0 / datum.f0 >= spec.big_d {
        return Err(Error::Precondition("the critical value 1/f0 lies outside [1/D, D]".into()));
    }
    datum.require_very_clean()
}

fn prefactor(datum: &FixedPointDatum, lambda: f64) -> Complex64 {
    let d = datum.dim_d() as i32;
    datum.rho0 / (2.0 * PI.powi(d)) * (lambda / PI).powi(d + 1) * Complex64::from_polar(1.0, -lambda * datum.tau0)
}

/// The `v`-independent half of the factorized sum: nodes in `t` with the weighted kernel
/// `w_t t^d sum_theta w_theta e^{-i s sqrt(lambda) theta (t - c) - t theta^2 / 2}`.
#[derive(Debug, Clone)]
struct HalfKernel {
    t: Vec<f64>,
    k: Vec<Complex64>,
}

impl HalfKernel {
    fn build(spec: &QuadratureSpec, c: f64, d: usize, sign: f64) -> Self {
        let sq = spec.lambda.sqrt();
        let r = spec.radius();
        let lo = 1.0 / spec.big_d;
        let hi = spec.big_d;
        let freq = if spec.phase_free { 0.0 } else { sq * (hi - c).max(c - lo) };
        // also resolve the narrowest Gaussian e^{-D theta^2 / 2}, of width 1/sqrt(D)
        let freq = freq.max(2.0 * PI * hi.sqrt());
        let theta = quadrature::oscillatory_legendre(-r, r, freq, spec.nodes_per_period, spec.nodes_per_axis, PANEL);
        // after the theta sum the t-integrand is a peak of width ~ sqrt(c / lambda)
        let width = (c / spec.lambda).sqrt().min(hi - lo);
        let trule = quadrature::oscillatory_legendre(lo, hi, 2.0 * PI / width, spec.nodes_per_period, spec.nodes_per_axis, PANEL);
        let phase_free = spec.phase_free;
        let k = trule
            .nodes
            .par_iter()
            .zip(trule.weights.par_iter())
            .map(|(&t, &wt)| {
                let s: Complex64 = theta
                    .iter()
                    .map(|(th, w)| {
                        let ph = if phase_free { 0.0 } else { sign * sq * th * (t - c) };
                        Complex64::from_polar(w * (-0.5 * t * th * th).exp(), ph)
                    })
                    .sum();
                s * (wt * t.powi(d as i32))
            })
            .collect();
        Self { t: trule.nodes, k }
    }

    /// `sum_t K(t) e^{t z}`.
    fn contract(&self, z: Complex64) -> Complex64 {
        self.t.iter().zip(&self.k).map(|(&t, &k)| k * (z * t).exp()).sum()
    }
}

#[derive(Debug, Clone)]
struct Factorized {
    theta_side: HalfKernel,
    sigma_side: HalfKernel,
    pref: Complex64,
}

impl Factorized {
    fn new(datum: &FixedPointDatum, spec: &QuadratureSpec) -> Self {
        let c = 1.0 / datum.f0;
        let d = datum.dim_d();
        let (theta_side, sigma_side) = rayon::join(
            || HalfKernel::build(spec, c, d, -1.0),
            || HalfKernel::build(spec, c, d, 1.0),
        );
        // dtheta dtau = dtheta dsigma / f0
        Self { theta_side, sigma_side, pref: prefactor(datum, spec.lambda) / datum.f0 }
    }

    fn eval(&self, datum: &FixedPointDatum, n: &RVec, v: &RVec) -> Complex64 {
        let a = self.theta_side.contract(psi2(n, v));
        let b = self.sigma_side.contract(psi2(&datum.a.apply(v), n));
        self.pref * a * b
    }
}

fn with_doubling(spec: &QuadratureSpec, eval: impl Fn(&QuadratureSpec) -> Result<Complex64>) -> Result<IntegralResult> {
    let start = Instant::now();
    let base = eval(spec)?;
    let fine = eval(&spec.refined())?;
    let est_error = (fine - base).norm();
    if !(est_error <= 0.1 * fine.norm()) {
        return Err(Error::NonConvergence { rel_change: est_error / fine.norm() });
    }
    Ok(IntegralResult { value: fine, est_error, wall_time: start.elapsed().as_secs_f64() })
}

/// `I(n, v)` at an isolated fixed point, by factorized tensor Gauss-Legendre quadrature.
pub fn inner_integral(datum: &FixedPointDatum, n: &RVec, v: &RVec, spec: &QuadratureSpec) -> Result<IntegralResult> {
    check_inputs(datum, n, spec)?;
    with_doubling(spec, |s| Ok(Factorized::new(datum, s).eval(datum, n, v)))
}

/// `I(n, v)` in the original `(theta, tau)` coordinates for an arbitrary `upsf`.
///
/// For every `(theta, tau)` node the `(t, u)` sum still splits into a `t` factor and a `u`
/// factor, but the cost is quadratic in the `(theta, tau)` node count, so this is meant for
/// small `lambda` and compact boxes. No node doubling is done.
pub fn inner_integral_general(datum: &FixedPointDatum, n: &RVec, v: &RVec, upsf: &RVec, spec: &QuadratureSpec) -> Result<Complex64> {
    spec.validate()?;
    let rules = GeneralRules::new(datum, spec);
    Ok(rules.eval(datum, n, v, upsf, spec))
}

struct GeneralRules {
    theta: Rule,
    tau: Rule,
    t: Rule,
    u: Rule,
}

impl GeneralRules {
    fn new(datum: &FixedPointDatum, spec: &QuadratureSpec) -> Self {
        let sq = spec.lambda.sqrt();
        let r = spec.radius();
        let (lo, hi) = (1.0 / spec.big_d, spec.big_d);
        let npp = spec.nodes_per_period;
        let na = spec.nodes_per_axis;
        let f0 = datum.f0;
        let theta = quadrature::oscillatory_legendre(-r, r, sq * hi, npp, na, PANEL);
        let rt = 2.0 * r / f0;
        let tau = quadrature::oscillatory_legendre(-rt, rt, sq * (hi * f0 + 1.0), npp, na, PANEL);
        let t = quadrature::oscillatory_legendre(lo, hi, sq * r, npp, na, PANEL);
        let u = quadrature::oscillatory_legendre(lo, hi, sq * (r + rt * f0), npp, na, PANEL);
        Self { theta, tau, t, u }
    }

    fn eval(&self, datum: &FixedPointDatum, n: &RVec, v: &RVec, upsf: &RVec, spec: &QuadratureSpec) -> Complex64 {
        let sq = if spec.phase_free { 0.0 } else { spec.lambda.sqrt() };
        let d = datum.dim_d() as i32;
        let f0 = datum.f0;
        let av = datum.a.apply(v);
        let psi_t = psi2(n, v);
        let om = crate::symplectic::omega0(upsf, &av);
        let tfactor: Vec<Complex64> = self
            .theta
            .nodes
            .iter()
            .map(|&th| {
                self.t
                    .iter()
                    .map(|(t, wt)| {
                        let z = Complex64::new(-0.5 * t * th * th, -sq * th * t) + psi_t * t;
                        z.exp() * (wt * t.powi(d))
                    })
                    .sum()
            })
            .collect();
        let total: Complex64 = self
            .theta
            .nodes
            .par_iter()
            .zip(self.theta.weights.par_iter())
            .zip(tfactor.par_iter())
            .map(|((&th, &wth), &tf)| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (tau, wtau) in self.tau.iter() {
                    let sigma = th + tau * f0;
                    let zu = Complex64::new(-0.5 * sigma * sigma, sq * sigma)
                        + psi2(&(&av - upsf * tau), n)
                        + Complex64::new(0.0, tau * om);
                    let uf: Complex64 = self.u.iter().map(|(u, wu)| (zu * u).exp() * (wu * u.powi(d))).sum();
                    acc += Complex64::from_polar(wtau, -sq * tau) * uf;
                }
                acc * wth * tf
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        prefactor(datum, spec.lambda) * total
    }
}

/// Gauss-Hermite integration over `v` against the damping `e^{-(v - v*)^T Q (v - v*) / (2 f0)}`,
/// centred at the minimizer `v* = Q^{-1} (I + A^T) n` of `|v - n|^2 + |Av - n|^2`.
pub fn integrate_over_v(
    datum: &FixedPointDatum,
    n: &RVec,
    order: usize,
    f: impl Fn(&RVec) -> Complex64 + Sync,
) -> Result<Complex64> {
    let dim = 2 * datum.dim_d();
    let q = q_of(&datum.a);
    let chol = q.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let center = chol.solve(&((RMat::identity(dim, dim) + datum.a.matrix().transpose()) * n));
    let linv_t = chol.l().transpose().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let scale = (2.0 * datum.f0).sqrt();
    let map = &linv_t * scale;
    let jac = map.determinant().abs();
    let gh = quadrature::hermite(order);
    let total = gh.len().pow(dim as u32);
    let values: Vec<Complex64> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut x = RVec::zeros(dim);
            let mut w = 1.0;
            for k in 0..dim {
                let i = idx % gh.len();
                idx /= gh.len();
                x[k] = gh.nodes[i];
                w *= gh.weights[i];
            }
            let r2 = x.norm_squared();
            // high-order rules reach |x|^2 ~ 2 * order, where the inner rules are not built to resolve f
            if r2 > HERMITE_CUTOFF {
                return Complex64::new(0.0, 0.0);
            }
            let v = &center + &map * &x;
            f(&v) * (w * r2.exp())
        })
        .collect();
    Ok(values.into_iter().sum::<Complex64>() * jac)
}

/// `int I(n, v) dv`.
pub fn full_profile_integral(datum: &FixedPointDatum, n: &RVec, spec: &QuadratureSpec) -> Result<IntegralResult> {
    check_inputs(datum, n, spec)?;
    with_doubling(spec, |s| {
        let fac = Factorized::new(datum, s);
        integrate_over_v(datum, n, s.hermite_order, |v| fac.eval(datum, n, v))
    })
}

/// Stationary-phase value of `I(n, v)`:
/// `2 pi rho0 / pi^d (lambda / pi)^d e^{-i lambda tau0} / f0^{2d+1} e^{(psi2(n, v) + psi2(Av, n)) / f0}`.
pub fn stationary_reduce(datum: &FixedPointDatum, lambda: f64, n: &RVec, v: &RVec) -> Complex64 {
    let d = datum.dim_d() as i32;
    let pref = datum.rho0 * (2.0 * PI / PI.powi(d)) * (lambda / PI).powi(d) / datum.f0.powi(2 * d + 1)
        * Complex64::from_polar(1.0, -lambda * datum.tau0);
    pref * ((psi2(n, v) + psi2(&datum.a.apply(v), n)) / datum.f0).exp()
}

/// `int I(0, 0)` with the phase removed: `P / f0 * 2 pi * (int_{1/D}^D t^{d - 1/2} dt)^2`.
pub fn phase_free_reference(datum: &FixedPointDatum, spec: &QuadratureSpec) -> Complex64 {
    let e = datum.dim_d() as f64 + 0.5;
    let tint = (spec.big_d.powf(e) - spec.big_d.powf(-e)) / e;
    prefactor(datum, spec.lambda) / datum.f0 * (2.0 * PI) * tint * tint
}

/// Direct four-fold evaluation of the integrand through [`upsilon`] and [`theta_fn`] on the
/// rules of [`inner_integral_general`]; only usable for very coarse rules.
#[doc(hidden)]
pub fn inner_integral_naive(datum: &FixedPointDatum, n: &RVec, v: &RVec, upsf: &RVec, spec: &QuadratureSpec) -> Complex64 {
    let rules = GeneralRules::new(datum, spec);
    let sq = if spec.phase_free { 0.0 } else { spec.lambda.sqrt() };
    let d = datum.dim_d() as i32;
    let mut acc = Complex64::new(0.0, 0.0);
    for (th, wth) in rules.theta.iter() {
        for (tau, wtau) in rules.tau.iter() {
            for (t, wt) in rules.t.iter() {
                for (u, wu) in rules.u.iter() {
                    let p = PhasePoint { theta: th, t, u, tau };
                    let z = Complex64::new(0.0, sq * upsilon(&p, datum.f0)) + theta_fn(&p, n, v, datum, upsf);
                    acc += z.exp() * (wth * wtau * wt * wu * (t * u).powi(d));
                }
            }
        }
    }
    prefactor(datum, spec.lambda) * acc
}
