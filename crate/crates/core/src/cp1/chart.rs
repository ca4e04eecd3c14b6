//! Normal coordinates at the pole `[1 : 0]`.
//!
//! A chart here is a holomorphic map `v -> w = κ v + c v^2` into the affine coordinate of
//! `[1 : w]`, with `v = n1 + i n2`. The scale `κ` is fixed numerically so that the pulled-back
//! Kähler form at the origin is the standard one. The quadratic skew `c` does not change the
//! first-order data but breaks the rotational symmetry of the linear chart, which otherwise makes
//! every diagonal profile exactly radial.

use num_complex::Complex64;

use super::spectral::ModelPoint;
use crate::symplectic::{j0, RMat, RVec};
use crate::{Error, Result};

/// Largest `|n| / sqrt(lambda)` accepted by [`heisenberg_displace`].
pub const CHART_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart {
    pub scale: f64,
    pub skew: Complex64,
}

impl Default for Chart {
    fn default() -> Self {
        Self::linear()
    }
}

impl Chart {
    pub fn linear() -> Self {
        Self::skewed(Complex64::new(0.0, 0.0))
    }

    /// Chart with quadratic term `skew`; the scale is calibrated against the Kähler form.
    pub fn skewed(skew: Complex64) -> Self {
        let raw = Self { scale: 1.0, skew };
        let density = kahler_density(&raw, 1e-3);
        Self { scale: 1.0 / density.sqrt(), skew }
    }

    pub fn map(&self, v: Complex64) -> Complex64 {
        v * self.scale + self.skew * v * v
    }

    pub fn derivative(&self, v: Complex64) -> Complex64 {
        Complex64::new(self.scale, 0.0) + self.skew * v * 2.0
    }
}

fn potential(chart: &Chart, x: f64, y: f64) -> f64 {
    (1.0 + chart.map(Complex64::new(x, y)).norm_sqr()).ln()
}

/// Coefficient of `dx ∧ dy` in the pulled-back Kähler form at `v = 0`, which is
/// `(1/4) Δ log(1 + |w|^2)` by a Richardson-extrapolated five-point Laplacian.
fn kahler_density(chart: &Chart, h: f64) -> f64 {
    (4.0 * laplacian_quarter(chart, h / 2.0) - laplacian_quarter(chart, h)) / 3.0
}

fn laplacian_quarter(chart: &Chart, h: f64) -> f64 {
    let c = potential(chart, 0.0, 0.0);
    let lap = potential(chart, h, 0.0) + potential(chart, -h, 0.0) + potential(chart, 0.0, h) + potential(chart, 0.0, -h) - 4.0 * c;
    lap / (4.0 * h * h)
}

/// Matrix of the pulled-back Kähler form at the chart origin, in the convention
/// `ω(v, w) = v^T M w`. The standard form has `M = -J0`.
pub fn kahler_form_at_origin(chart: &Chart) -> RMat {
    let k = kahler_density(chart, 1e-3);
    RMat::from_row_slice(2, 2, &[0.0, k, -k, 0.0])
}

/// Largest entrywise deviation of the pulled-back Kähler form from the standard one.
pub fn kahler_deviation(chart: &Chart) -> f64 {
    (kahler_form_at_origin(chart) + j0(1)).amax()
}

/// The base point `[1 : w(n / sqrt(lambda))]`, tagged with `n`.
pub fn heisenberg_displace(n: &RVec, lambda: f64, chart: &Chart) -> Result<ModelPoint> {
    if n.len() != 2 {
        return Err(Error::InvalidArgument(format!("displacement must have 2 components, got {}", n.len())));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let v = Complex64::new(n[0], n[1]) / lambda.sqrt();
    if !(v.norm() < CHART_RADIUS) {
        return Err(Error::ChartDomain(v.norm()));
    }
    let mut p = ModelPoint::from_chart(chart.map(v));
    p.disp = Some([n[0], n[1]]);
    Ok(p)
}

/// Fiber phase picked up by the horizontal lift of `t -> w(t s n)`, `t ∈ [0, 1]`, measured against
/// the section `[1 : w] -> (1, w) / sqrt(1 + |w|^2)`.
///
/// On the sphere the horizontal condition `<z', z> = 0` with `z1 = w z0` reads
/// `z0' = -z0^2 conj(z1) w'`.
pub fn horizontal_lift_holonomy(chart: &Chart, n: &RVec, s: f64) -> f64 {
    let dir = Complex64::new(n[0], n[1]) * s;
    let wdot = |t: f64| chart.derivative(dir * t) * dir;
    let rhs = |t: f64, z0: Complex64| {
        let z1 = chart.map(dir * t) * z0;
        -z0 * z0 * z1.conj() * wdot(t)
    };
    let steps = 400;
    let h = 1.0 / steps as f64;
    let mut z0 = Complex64::new(1.0, 0.0);
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = rhs(t, z0);
        let k2 = rhs(t + h / 2.0, z0 + k1 * (h / 2.0));
        let k3 = rhs(t + h / 2.0, z0 + k2 * (h / 2.0));
        let k4 = rhs(t + h, z0 + k3 * h);
        z0 += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    z0.arg()
}
