//! Quantization of a circle-invariant Hamiltonian on the projective line.
//!
//! The circle bundle is the unit sphere `S^3 ⊂ C^2`, the Hardy space splits into the spaces of
//! homogeneous polynomials of degree `k`, and for `f = a + b |z1|^2 / |z|^2` the lifted flow is
//! linear and diagonal on monomials. The smoothed spectral kernel is then an explicit series.
//!
//! Conventions: the Kähler form in the affine chart `[1 : w]` is `(i/2) ∂∂̄ log(1 + |w|^2)`, the
//! Hamiltonian field satisfies `ι_υ (2ω) = df`, and the contact lift is `υ^♯ - f ∂_θ` where `∂_θ`
//! generates `z -> e^{iθ} z`.

pub mod chart;
pub mod scans;
pub mod spectral;
pub mod window;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// `f = a + b |z1|^2 / |z|^2` with `a > 0` and `a + b > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationHamiltonian {
    pub a: f64,
    pub b: f64,
}

impl RotationHamiltonian {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a + b > 0.0) || !b.is_finite() || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("need a > 0 and a + b > 0, got a = {a}, b = {b}")));
        }
        Ok(Self { a, b })
    }

    /// Value on the sphere, as a function of `|z1|^2 / |z|^2`.
    pub fn value(&self, height: f64) -> f64 {
        self.a + self.b * height
    }

    /// Value in the affine chart `[1 : w]`.
    pub fn value_in_chart(&self, w: Complex64) -> f64 {
        let r2 = w.norm_sqr();
        self.value(r2 / (1.0 + r2))
    }
}

/// Hamiltonian vector field in the affine chart, as `dw/dt`.
pub fn chart_field(ham: &RotationHamiltonian, w: Complex64) -> Complex64 {
    chart_field_signed(ham, w, 1.0)
}

fn chart_field_signed(ham: &RotationHamiltonian, w: Complex64, sign: f64) -> Complex64 {
    let r2 = w.norm_sqr();
    let den = (1.0 + r2) * (1.0 + r2);
    let fx = 2.0 * ham.b * w.re / den;
    let fy = 2.0 * ham.b * w.im / den;
    // Kähler density g = 1 / (1 + r^2)^2; ι_υ(2 g dx∧dy) = df
    let g = 1.0 / den;
    Complex64::new(fy / (2.0 * g), -fx / (2.0 * g)) * sign
}

/// Contact vector field on `S^3`: horizontal lift of the chart field minus `f` times the fiber generator.
fn lifted_field(ham: &RotationHamiltonian, z: [Complex64; 2], sign: f64) -> [Complex64; 2] {
    let [z0, z1] = z;
    let w = z1 / z0;
    let wdot = chart_field_signed(ham, w, sign);
    // horizontal: <z, zdot> = 0 with z1 = w z0
    let h0 = -z0 * z0 * z1.conj() * wdot;
    let h1 = wdot * z0 + w * h0;
    let f = ham.value(z1.norm_sqr() / (z0.norm_sqr() + z1.norm_sqr()));
    let i = Complex64::i();
    [h0 - i * f * z0, h1 - i * f * z1]
}

fn rk4_sphere(ham: &RotationHamiltonian, z: [Complex64; 2], time: f64, steps: usize, sign: f64) -> [Complex64; 2] {
    let h = time / steps as f64;
    let add = |a: [Complex64; 2], b: [Complex64; 2], s: f64| [a[0] + b[0] * s, a[1] + b[1] * s];
    let mut z = z;
    for _ in 0..steps {
        let k1 = lifted_field(ham, z, sign);
        let k2 = lifted_field(ham, add(z, k1, h / 2.0), sign);
        let k3 = lifted_field(ham, add(z, k2, h / 2.0), sign);
        let k4 = lifted_field(ham, add(z, k3, h), sign);
        for c in 0..2 {
            z[c] += (k1[c] + k2[c] * 2.0 + k3[c] * 2.0 + k4[c]) * (h / 6.0);
        }
    }
    z
}

/// Rotation rates of the lifted flow: `z -> (e^{i alpha0 t} z0, e^{i alpha1 t} z1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactLift {
    pub alpha0: f64,
    pub alpha1: f64,
    /// Largest endpoint deviation between the integrated contact field and the closed form.
    pub ode_deviation: f64,
}

const ODE_SEEDS: u64 = 20;
const ODE_STEPS: usize = 1000;

fn ode_deviation(ham: &RotationHamiltonian, alpha0: f64, alpha1: f64, sign: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..ODE_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m0: f64 = rng.random_range(0.2..1.0);
        let (p0, p1): (f64, f64) = (rng.random_range(0.0..6.3), rng.random_range(0.0..6.3));
        let z = [Complex64::from_polar(m0.sqrt(), p0), Complex64::from_polar((1.0 - m0).sqrt(), p1)];
        let end = rk4_sphere(ham, z, 1.0, ODE_STEPS, sign);
        let exact = [z[0] * Complex64::from_polar(1.0, alpha0), z[1] * Complex64::from_polar(1.0, alpha1)];
        worst = worst.max((end[0] - exact[0]).norm()).max((end[1] - exact[1]).norm());
    }
    worst
}

/// The poles are fixed points of the base flow, where the lift is a pure fiber rotation at rate
/// `-f`; linearity of the flow then fixes both rates. The closed form is checked against the
/// contact field integrated from 20 seeded points.
pub fn contact_lift_phases(ham: &RotationHamiltonian) -> Result<ContactLift> {
    let alpha0 = -ham.value(0.0);
    let alpha1 = -ham.value(1.0);
    let deviation = ode_deviation(ham, alpha0, alpha1, 1.0);
    if !(deviation <= 1e-6) {
        return Err(Error::ConventionMismatch { deviation });
    }
    Ok(ContactLift { alpha0, alpha1, ode_deviation: deviation })
}

/// Real Jacobian of the chart field, by central differences.
fn chart_jacobian(ham: &RotationHamiltonian, w: Complex64) -> Matrix2<f64> {
    let h = 1e-6;
    let dx = (chart_field(ham, w + h) - chart_field(ham, w - h)) / (2.0 * h);
    let dy = (chart_field(ham, w + Complex64::new(0.0, h)) - chart_field(ham, w - Complex64::new(0.0, h))) / (2.0 * h);
    Matrix2::new(dx.re, dy.re, dx.im, dy.im)
}

/// Differential of the time-`time` base flow at the pole `w = 0`, from the variational equation.
pub fn pole_linearization_ode(ham: &RotationHamiltonian, time: f64) -> Matrix2<f64> {
    // the pole is fixed, so the variational equation has constant coefficients
    let jac = chart_jacobian(ham, Complex64::new(0.0, 0.0));
    let steps = 4000;
    let h = time / steps as f64;
    let mut x = Matrix2::identity();
    for _ in 0..steps {
        let k1 = jac * x;
        let k2 = jac * (x + k1 * (h / 2.0));
        let k3 = jac * (x + k2 * (h / 2.0));
        let k4 = jac * (x + k3 * h);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    x
}
