//! Spectral data of the model and the brute-force smoothed kernel on the diagonal.
//!
//! The level-`k` space has the monomial basis `z0^{k-j} z1^j`. With the measure
//! `dσ_{S^3} / (2π)` (total mass `π`) the squared norms are `π (k-j)! j! / (k+1)!`, so the
//! normalized diagonal contribution of a monomial at a point of height `p = |z1|^2` is
//! `(k+1)/π` times the binomial probability `C(k, j) p^j (1-p)^{k-j}`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::window::{Window, OMEGA_MAX};
use super::{contact_lift_phases, ContactLift, RotationHamiltonian};
use crate::quadrature;
use crate::{Error, Result};

/// Frequency margin (in units of `1/eps`) past `lambda` that the spectrum must cover.
pub const TAIL_MARGIN: f64 = 600.0;
/// Minimum coverage demanded by [`brute_force_s`], in units of `1/eps`.
pub const TAIL_REQUIRED: f64 = 10.0;
/// Binomial terms more than `e^{-45}` below the mode are dropped.
const LOG_PRUNE: f64 = 45.0;

#[derive(Debug, Clone)]
pub struct SpectralModel {
    pub ham: RotationHamiltonian,
    pub lift: ContactLift,
    pub kmax: usize,
    ln_fact: Vec<f64>,
}

pub fn build_spectral_model(ham: RotationHamiltonian, kmax: usize) -> Result<SpectralModel> {
    if kmax < 1 {
        return Err(Error::InvalidArgument("kmax must be at least 1".into()));
    }
    let lift = contact_lift_phases(&ham)?;
    let mut ln_fact = Vec::with_capacity(kmax + 2);
    ln_fact.push(0.0);
    for i in 1..=kmax + 1 {
        ln_fact.push(ln_fact[i - 1] + (i as f64).ln());
    }
    let model = SpectralModel { ham, lift, kmax, ln_fact };
    // the eigenphases are affine in (k, j), so the extreme values sit at the corners
    for k in 1..=kmax {
        for j in [0, k] {
            let mu = model.eigenphase(k, j);
            if !(mu > 0.0) {
                return Err(Error::NonPositiveEigenphase { k, j, mu });
            }
        }
    }
    Ok(model)
}

impl SpectralModel {
    /// Smallest `kmax` covering `lambda + TAIL_MARGIN / eps`.
    pub fn kmax_for(ham: &RotationHamiltonian, lambda: f64, eps: f64) -> usize {
        let slope = ham.a.min(ham.a + ham.b);
        ((lambda.max(0.0) + TAIL_MARGIN / eps) / slope).ceil() as usize
    }

    /// Eigenphase of `z0^{k-j} z1^j`: the pullback by the lifted flow at time `-tau` multiplies it
    /// by `e^{i tau mu}`. Level 0 (constants) has eigenphase 0.
    pub fn eigenphase(&self, k: usize, j: usize) -> f64 {
        -((k - j) as f64 * self.lift.alpha0 + j as f64 * self.lift.alpha1)
    }

    pub fn eigenphase_table(&self) -> Vec<Vec<f64>> {
        (0..=self.kmax).map(|k| (0..=k).map(|j| self.eigenphase(k, j)).collect()).collect()
    }

    fn ln_binom(&self, k: usize, j: usize) -> f64 {
        self.ln_fact[k] - self.ln_fact[k - j] - self.ln_fact[j]
    }

    /// `ln c_{k,j}`, with `c_{k,j} = (k+1)! / (π (k-j)! j!)` the inverse squared norm.
    pub fn ln_norm_const(&self, k: usize, j: usize) -> f64 {
        self.ln_fact[k + 1] - self.ln_fact[k - j] - self.ln_fact[j] - PI.ln()
    }

    pub fn norm_const(&self, k: usize, j: usize) -> f64 {
        self.ln_norm_const(k, j).exp()
    }

    /// `sum_j c_{k,j} |z0|^{2(k-j)} |z1|^{2j}` at height `p`, term by term.
    pub fn level_diagonal(&self, k: usize, p: f64) -> f64 {
        (0..=k).map(|j| self.norm_const(k, j) * (1.0 - p).powi((k - j) as i32) * p.powi(j as i32)).sum()
    }

    /// Integral over the circle bundle of `c_{k,j} |z0^{k-j} z1^j|^2` for each `j`, by
    /// Gauss-Legendre quadrature in Hopf coordinates `z = (cos η e^{iξ0}, sin η e^{iξ1})`.
    pub fn monomial_masses(&self, k: usize) -> Vec<f64> {
        let rule = quadrature::composite_legendre(0.0, PI / 2.0, 4 + k / 4, 32);
        (0..=k)
            .map(|j| {
                let lc = self.ln_norm_const(k, j);
                // dσ = cos η sin η dη dξ0 dξ1, and dμ = dσ / (2π)
                2.0 * PI
                    * rule.integrate(|eta| {
                        let (s, c) = eta.sin_cos();
                        if s == 0.0 && j > 0 || c == 0.0 && j < k {
                            return 0.0;
                        }
                        let lnv = lc + 2.0 * (k - j) as f64 * c.ln() + 2.0 * j as f64 * s.ln();
                        lnv.exp() * c * s
                    })
            })
            .collect()
    }

    /// `int_X Π_k(x, x) dμ`, which must equal `k + 1`.
    pub fn dimension_calibration(&self, k: usize) -> f64 {
        self.monomial_masses(k).iter().sum()
    }

    /// Smallest eigenphase at level `kmax`.
    pub fn top_coverage(&self) -> f64 {
        self.eigenphase(self.kmax, 0).min(self.eigenphase(self.kmax, self.kmax))
    }

    pub fn check_tail(&self, lambda: f64, window: &Window) -> Result<()> {
        let needed = lambda + TAIL_REQUIRED / window.eps;
        let top = self.top_coverage();
        if top <= needed {
            return Err(Error::TailCoverage { top, needed });
        }
        Ok(())
    }

    /// Binomial indices `j` carrying non-negligible weight at height `p`, with their log-weights.
    fn binomial_support(&self, k: usize, p: f64) -> Vec<(usize, f64)> {
        if p <= 0.0 {
            return vec![(0, 0.0)];
        }
        if p >= 1.0 {
            return vec![(k, 0.0)];
        }
        let (lp, lq) = (p.ln(), (1.0 - p).ln());
        let lw = |j: usize| self.ln_binom(k, j) + j as f64 * lp + (k - j) as f64 * lq;
        let mode = (((k + 1) as f64 * p).floor() as usize).min(k);
        let top = lw(mode);
        let mut out = vec![(mode, top)];
        let mut j = mode;
        while j > 0 {
            j -= 1;
            let v = lw(j);
            if v < top - LOG_PRUNE {
                break;
            }
            out.push((j, v));
        }
        let mut j = mode;
        while j < k {
            j += 1;
            let v = lw(j);
            if v < top - LOG_PRUNE {
                break;
            }
            out.push((j, v));
        }
        out.sort_by_key(|e| e.0);
        out
    }
}

/// A point of the sphere `|z0|^2 + |z1|^2 = 1`, optionally tagged with the chart displacement it
/// came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPoint {
    pub z0: Complex64,
    pub z1: Complex64,
    pub disp: Option<[f64; 2]>,
}

impl ModelPoint {
    pub fn new(z0: Complex64, z1: Complex64) -> Result<Self> {
        let r = (z0.norm_sqr() + z1.norm_sqr()).sqrt();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument("homogeneous coordinates must not both vanish".into()));
        }
        Ok(Self { z0: z0 / r, z1: z1 / r, disp: None })
    }

    /// The point `[1 : w]`.
    pub fn from_chart(w: Complex64) -> Self {
        let r = (1.0 + w.norm_sqr()).sqrt();
        Self { z0: Complex64::new(1.0 / r, 0.0), z1: w / r, disp: None }
    }

    pub fn pole() -> Self {
        Self::from_chart(Complex64::new(0.0, 0.0))
    }

    /// `|z1|^2`.
    pub fn height(&self) -> f64 {
        self.z1.norm_sqr()
    }
}

/// A zeroth-order Toeplitz factor with circle-invariant symbol `g(|z1|^2 / |z|^2)`.
#[derive(Clone, Default)]
pub enum ToeplitzSymbol {
    #[default]
    Identity,
    Constant(f64),
    Invariant(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for ToeplitzSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Identity => write!(f, "Identity"),
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Invariant(_) => write!(f, "Invariant(..)"),
        }
    }
}

impl ToeplitzSymbol {
    pub fn invariant(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Invariant(Arc::new(g))
    }

    pub fn value(&self, height: f64) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Constant(c) => *c,
            Self::Invariant(g) => g(height),
        }
    }

    /// `<s, g s> / <s, s>` for `s = z0^{k-j} z1^j`. The height `|z1|^2` of `|s|^2 dμ` is
    /// Beta(`j+1`, `k-j+1`) distributed, so this is a one-dimensional average.
    pub fn diagonal_coefficient(&self, k: usize, j: usize) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Constant(c) => *c,
            Self::Invariant(g) => beta_average(g.as_ref(), k, j),
        }
    }
}

fn beta_average(g: &dyn Fn(f64) -> f64, k: usize, j: usize) -> f64 {
    let (a, b) = (j as f64, (k - j) as f64);
    let ell = |t: f64| {
        let mut v = 0.0;
        if a > 0.0 {
            v += a * t.ln();
        }
        if b > 0.0 {
            v += b * (1.0 - t).ln();
        }
        v
    };
    let mode = if k == 0 { 0.5 } else { a / (a + b) };
    let top = ell(mode);
    let edge = |mut inside: f64, mut outside: f64| {
        // ell is concave: bisect for the point where it has dropped by LOG_PRUNE
        for _ in 0..80 {
            let mid = 0.5 * (inside + outside);
            if ell(mid) > top - LOG_PRUNE {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        outside
    };
    let lo = if j == 0 { 0.0 } else { edge(mode, 0.0) };
    let hi = if j == k { 1.0 } else { edge(mode, 1.0) };
    let rule = quadrature::composite_legendre(lo, hi, 8, 16);
    let (mut num, mut den) = (0.0, 0.0);
    for (t, w) in rule.iter() {
        let e = w * (ell(t) - top).exp();
        num += e * g(t);
        den += e;
    }
    num / den
}

/// `S(x, x) = sum_{k <= kmax} sum_j W(lambda - mu_{k,j}) w_{k,j} c_{k,j} |z0^{k-j} z1^j|^2`.
pub fn brute_force_s(
    model: &SpectralModel,
    point: &ModelPoint,
    lambda: f64,
    window: &Window,
    symbol: &ToeplitzSymbol,
) -> Result<Complex64> {
    model.check_tail(lambda, window)?;
    let p = point.height();
    let cutoff = OMEGA_MAX / window.eps;
    let smin = model.ham.a.min(model.ham.a + model.ham.b);
    let smax = model.ham.a.max(model.ham.a + model.ham.b);
    let terms: Vec<Complex64> = (0..=model.kmax)
        .into_par_iter()
        .map(|k| {
            let kf = k as f64;
            if kf * smax < lambda - cutoff || kf * smin > lambda + cutoff {
                return Complex64::new(0.0, 0.0);
            }
            let level = (kf + 1.0) / PI;
            model
                .binomial_support(k, p)
                .into_iter()
                .map(|(j, lw)| window.transform(lambda - model.eigenphase(k, j)) * (level * lw.exp() * symbol.diagonal_coefficient(k, j)))
                .sum()
        })
        .collect();
    Ok(terms.into_iter().sum())
}
