//! Smooth compactly supported time window and its Fourier transform.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::quadrature;
use crate::{Error, Result};

/// `exp(1 - 1/(1 - x^2))` on `(-1, 1)`, zero outside; equals 1 at the origin.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Grid step of the cached transform, in the rescaled frequency `omega = eps s`.
const STEP: f64 = 0.02;
/// Beyond this frequency the transform is treated as zero; `|bump^(omega)| < 1e-15` there.
pub const OMEGA_MAX: f64 = 1200.0;

/// `bump^(omega) = 2 int_0^1 bump(x) cos(omega x) dx` and its derivative, by composite
/// Gauss-Legendre with at least 12 nodes per oscillation.
fn transform_direct(omega: f64, refine: usize) -> (f64, f64) {
    let per_period = 12.0 * refine as f64;
    let rule = quadrature::oscillatory_legendre(0.0, 1.0, omega, per_period, 256 * refine, 16);
    let mut v = 0.0;
    let mut dv = 0.0;
    for (x, w) in rule.iter() {
        let (s, c) = (omega * x).sin_cos();
        let b = w * bump(x);
        v += b * c;
        dv -= b * x * s;
    }
    (2.0 * v, 2.0 * dv)
}

struct TransformCache {
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl TransformCache {
    fn build() -> Result<Self> {
        let count = (OMEGA_MAX / STEP).round() as usize + 1;
        let (values, derivs): (Vec<f64>, Vec<f64>) =
            (0..count).into_par_iter().map(|i| transform_direct(i as f64 * STEP, 1)).unzip();
        // spot-check against a rule with twice the density
        for &omega in &[0.0, 3.3, 47.1, 333.3, 1111.1] {
            let i = (omega / STEP).round() as usize;
            let (fine, _) = transform_direct(i as f64 * STEP, 2);
            if (fine - values[i]).abs() > 1e-13 {
                return Err(Error::NonConvergence { rel_change: (fine - values[i]).abs() });
            }
        }
        Ok(Self { values, derivs })
    }

    /// Cubic Hermite interpolation on the grid.
    fn eval(&self, omega: f64) -> f64 {
        let x = omega.abs();
        if x >= OMEGA_MAX {
            return 0.0;
        }
        let pos = x / STEP;
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let t = pos - i as f64;
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.derivs[i] * STEP, self.derivs[i + 1] * STEP);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * p1 + (t3 - t2) * m1
    }
}

fn cache() -> Result<&'static TransformCache> {
    static CACHE: OnceLock<std::result::Result<TransformCache, Error>> = OnceLock::new();
    CACHE.get_or_init(TransformCache::build).as_ref().map_err(Clone::clone)
}

/// Fourier transform of [`bump`], `int bump(x) e^{-i omega x} dx` (real and even).
pub fn bump_transform(omega: f64) -> Result<f64> {
    Ok(cache()?.eval(omega))
}

/// Same value by direct quadrature, bypassing the cache.
pub fn bump_transform_direct(omega: f64) -> f64 {
    transform_direct(omega, 1).0
}

/// `chi(tau) = bump((tau - tau0) / eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub tau0: f64,
    pub eps: f64,
}

impl Window {
    pub fn new(tau0: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() || !tau0.is_finite() {
            return Err(Error::InvalidArgument(format!("window needs finite tau0 and eps > 0, got {tau0}, {eps}")));
        }
        cache()?;
        Ok(Self { tau0, eps })
    }

    pub fn chi(&self, tau: f64) -> f64 {
        bump((tau - self.tau0) / self.eps)
    }

    /// `W(s) = int chi(tau) e^{-i s tau} dtau = eps e^{-i s tau0} bump^(eps s)`.
    pub fn transform(&self, s: f64) -> Complex64 {
        let c = cache().expect("cache verified in Window::new");
        Complex64::from_polar(self.eps * c.eval(self.eps * s), -s * self.tau0)
    }

    /// `|s|` beyond which [`Window::transform`] returns zero.
    pub fn cutoff(&self) -> f64 {
        OMEGA_MAX / self.eps
    }

    /// Errors unless `tau0` is the only element of `periods` inside the support.
    pub fn check_isolated(&self, periods: &[f64]) -> Result<()> {
        for &p in periods {
            if (p - self.tau0).abs() > 1e-9 * (1.0 + p.abs()) && (p - self.tau0).abs() < self.eps {
                return Err(Error::WindowNotIsolated { tau0: self.tau0, other: p });
            }
        }
        Ok(())
    }
}

/// Direct quadrature of `W(s)` from `chi`, for tests.
#[doc(hidden)]
pub fn window_transform_quadrature(w: &Window, s: f64) -> Complex64 {
    let rule = quadrature::oscillatory_legendre(w.tau0 - w.eps, w.tau0 + w.eps, s * w.eps, 24.0, 512, 16);
    rule.iter().map(|(t, wt)| Complex64::from_polar(wt * w.chi(t), -s * t)).sum()
}
