//! Phase-function data of the stationary-phase argument and the predicted leading-order kernel.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::symplectic::{
    self, cleanliness, f_of, g_of, image_subspace, omega0, profile_matrix, psi2, q_of, spd_inverse, ProfileMatrix,
    RMat, RVec, SymplecticMatrix, DEFAULT_RANK_TOL,
};
use crate::{quadrature, Error, Result};

/// Linear data at a fixed point: the linearization `A` of the flow at time `-tau0`, the Hamiltonian
/// value `f0 > 0`, the symbol value `rho0` and the period `tau0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointDatum {
    pub a: SymplecticMatrix,
    pub f0: f64,
    pub rho0: Complex64,
    pub tau0: f64,
}

impl FixedPointDatum {
    pub fn new(a: SymplecticMatrix, f0: f64, rho0: Complex64, tau0: f64) -> Result<Self> {
        if !(f0 > 0.0) || !f0.is_finite() {
            return Err(Error::InvalidArgument(format!("f0 must be positive, got {f0}")));
        }
        Ok(Self { a, f0, rho0, tau0 })
    }

    pub fn dim_d(&self) -> usize {
        self.a.dim_d()
    }

    pub fn require_very_clean(&self) -> Result<()> {
        if cleanliness(&self.a, DEFAULT_RANK_TOL)?.very_clean {
            Ok(())
        } else {
            Err(Error::Precondition("the linearization is not very clean".into()))
        }
    }
}

/// A point `(theta, t, u, tau)` of the inner integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub theta: f64,
    pub t: f64,
    pub u: f64,
    pub tau: f64,
}

impl PhasePoint {
    pub fn new(theta: f64, t: f64, u: f64, tau: f64) -> Result<Self> {
        if !(t > 0.0 && u > 0.0) {
            return Err(Error::InvalidArgument(format!("t and u must be positive, got t = {t}, u = {u}")));
        }
        Ok(Self { theta, t, u, tau })
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.theta, self.t, self.u, self.tau)
    }

    fn from_vector(x: &Vector4<f64>) -> Self {
        Self { theta: x[0], t: x[1], u: x[2], tau: x[3] }
    }
}

/// `theta (u - t) + tau (u f0 - 1)`.
pub fn upsilon(p: &PhasePoint, f0: f64) -> f64 {
    p.theta * (p.u - p.t) + p.tau * (p.u * f0 - 1.0)
}

/// Analytic gradient of [`upsilon`] in the order `(theta, t, u, tau)`.
pub fn upsilon_gradient(p: &PhasePoint, f0: f64) -> Vector4<f64> {
    Vector4::new(p.u - p.t, -p.theta, p.theta + p.tau * f0, p.u * f0 - 1.0)
}

/// Central-difference gradient of [`upsilon`].
pub fn upsilon_gradient_fd(p: &PhasePoint, f0: f64, h: f64) -> Vector4<f64> {
    let x = p.to_vector();
    Vector4::from_fn(|i, _| {
        let mut e = Vector4::zeros();
        e[i] = h;
        let fp = upsilon(&PhasePoint::from_vector(&(x + e)), f0);
        let fm = upsilon(&PhasePoint::from_vector(&(x - e)), f0);
        (fp - fm) / (2.0 * h)
    })
}

/// Central-difference Hessian of [`upsilon`].
pub fn upsilon_hessian_fd(p: &PhasePoint, f0: f64, h: f64) -> Matrix4<f64> {
    let x = p.to_vector();
    let at = |dx: Vector4<f64>| upsilon(&PhasePoint::from_vector(&(x + dx)), f0);
    Matrix4::from_fn(|i, k| {
        let mut ei = Vector4::zeros();
        let mut ek = Vector4::zeros();
        ei[i] = h;
        ek[k] = h;
        (at(ei + ek) - at(ei - ek) - at(ek - ei) + at(-ei - ek)) / (4.0 * h * h)
    })
}

/// The unique critical point `(0, 1/f0, 1/f0, 0)`.
pub fn stationary_point(f0: f64) -> Result<PhasePoint> {
    if !(f0 > 0.0) {
        return Err(Error::InvalidArgument(format!("f0 must be positive, got {f0}")));
    }
    PhasePoint::new(0.0, 1.0 / f0, 1.0 / f0, 0.0)
}

/// Hessian of `upsilon` at the critical point, in the order `(theta, t, u, tau)`.
pub fn upsilon_hessian(f0: f64) -> Matrix4<f64> {
    Matrix4::new(
        0.0, -1.0, 1.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, f0, //
        0.0, 0.0, f0, 0.0,
    )
}

/// Closed-form inverse of [`upsilon_hessian`].
pub fn upsilon_hessian_inverse(f0: f64) -> Matrix4<f64> {
    Matrix4::new(
        0.0, -f0, 0.0, 0.0, //
        -f0, 0.0, 0.0, 1.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 1.0, 1.0, 0.0,
    ) / f0
}

/// `sqrt(det(sqrt(lambda) / (2 pi i) H))`, on the branch where it equals `lambda f0 / (2 pi)^2`.
pub fn sqrt_hessian_factor(f0: f64, lambda: f64) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let scale = Complex64::new(0.0, -lambda.sqrt() / (2.0 * PI)); // sqrt(lambda) / (2 pi i)
    let det = scale.powi(4) * upsilon_hessian(f0).determinant();
    let root = det.sqrt();
    // the form has signature zero, so the i-powers cancel and the determinant is real positive
    let root = if root.re < 0.0 { -root } else { root };
    debug_assert!(root.re > 0.0 && root.im.abs() <= 1e-12 * root.re);
    Ok(root)
}

/// `Theta(theta, t, u, tau; n, v)`; `upsf` is the Hamiltonian vector field at the fixed point.
pub fn theta_fn(p: &PhasePoint, n: &RVec, v: &RVec, datum: &FixedPointDatum, upsf: &RVec) -> Complex64 {
    let av = datum.a.apply(v);
    let shifted = &av - upsf * p.tau;
    let sigma = p.theta + p.tau * datum.f0;
    Complex64::new(-0.5 * p.t * p.theta * p.theta - 0.5 * p.u * sigma * sigma, 0.0)
        + psi2(n, v) * p.t
        + psi2(&shifted, n) * p.u
        + Complex64::new(0.0, p.u * p.tau * omega0(upsf, &av))
}

/// Real part of `Theta` written directly as a sum of squares.
pub fn re_theta(p: &PhasePoint, n: &RVec, v: &RVec, datum: &FixedPointDatum, upsf: &RVec) -> f64 {
    let sigma = p.theta + p.tau * datum.f0;
    let av = datum.a.apply(v);
    -0.5 * p.u * sigma * sigma
        - 0.5 * p.t * p.theta * p.theta
        - 0.5 * p.t * (n - v).norm_squared()
        - 0.5 * p.u * (av - upsf * p.tau - n).norm_squared()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingOptions {
    /// Grid points per axis on `[1/D, D]^2`.
    pub tu_grid: usize,
    /// Random unit vectors used to cross-check the eigenvalue bound.
    pub sphere_samples: usize,
    pub seed: u64,
}

impl Default for DampingOptions {
    fn default() -> Self {
        Self { tu_grid: 9, sphere_samples: 2000, seed: 0 }
    }
}

/// Largest `a` with `Re Theta <= -a (theta^2 + tau^2 + |n|^2 + |v|^2)` for `n` in `im(A - I)`,
/// over a grid of `(t, u)` in `[1/D, D]^2`.
pub fn damping_bound(datum: &FixedPointDatum, big_d: f64, upsf: &RVec) -> Result<f64> {
    damping_bound_with(datum, big_d, upsf, &DampingOptions::default())
}

pub fn damping_bound_with(datum: &FixedPointDatum, big_d: f64, upsf: &RVec, opts: &DampingOptions) -> Result<f64> {
    if !(big_d > 1.0) {
        return Err(Error::InvalidArgument(format!("D must exceed 1, got {big_d}")));
    }
    datum.require_very_clean()?;
    let d2 = 2 * datum.dim_d();
    let image = image_subspace(&datum.a, DEFAULT_RANK_TOL)?.basis;
    let k = image.ncols();
    let dim = 2 + k + d2;
    let split = |x: &RVec| {
        let n = &image * x.rows(2, k);
        let v = x.rows(2 + k, d2).into_owned();
        (x[0], x[1], n, v)
    };
    // -Re Theta as a quadratic form in (theta, tau, c, v) with n = N c
    let form = |t: f64, u: f64, x: &RVec| {
        let (theta, tau, n, v) = split(x);
        -re_theta(&PhasePoint { theta, t, u, tau }, &n, &v, datum, upsf)
    };
    let steps = opts.tu_grid.max(2);
    let axis: Vec<f64> = (0..steps)
        .map(|i| {
            // geometric spacing is symmetric under t -> 1/t
            let s = i as f64 / (steps - 1) as f64;
            big_d.powf(2.0 * s - 1.0)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = f64::INFINITY;
    for &t in &axis {
        for &u in &axis {
            let e = |i: usize| RVec::from_fn(dim, |r, _| if r == i { 1.0 } else { 0.0 });
            let mut m = RMat::zeros(dim, dim);
            for i in 0..dim {
                for j in i..dim {
                    let val = 0.25 * (form(t, u, &(e(i) + e(j))) - form(t, u, &(e(i) - e(j))));
                    m[(i, j)] = val;
                    m[(j, i)] = val;
                }
            }
            let eig = m.symmetric_eigen();
            let (imin, lmin) = eig
                .eigenvalues
                .iter()
                .cloned()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty");
            if !(lmin > 0.0) {
                return Err(Error::DampingViolated {
                    ratio: -lmin,
                    t,
                    u,
                    sample: eig.eigenvectors.column(imin).iter().cloned().collect(),
                });
            }
            for _ in 0..opts.sphere_samples / (steps * steps) {
                let mut x = RVec::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
                x /= x.norm();
                let ratio = -form(t, u, &x);
                if ratio >= 0.0 {
                    return Err(Error::DampingViolated { ratio, t, u, sample: x.iter().cloned().collect() });
                }
                // the eigenvalue is the exact minimum over the sphere
                debug_assert!(-ratio >= lmin * (1.0 - 1e-9) - 1e-12);
            }
            best = best.min(lmin);
        }
    }
    Ok(best)
}

/// `-i n'^T G^T Q^{-1} F n' + n'^T G^T Q^{-1} G n' / 2`.
pub fn gamma_shift(a: &SymplecticMatrix, nprime: &RVec) -> Complex64 {
    let qinv = spd_inverse(&q_of(a)).expect("I + A^T A is positive definite");
    let g = g_of(a);
    let gq = g.transpose() * qinv;
    let f = f_of(a);
    Complex64::new(0.5 * nprime.dot(&(&gq * &g * nprime)), -nprime.dot(&(&gq * f * nprime)))
}

/// `int exp(i s^T xi - s^T Q s / 2) ds = (2 pi)^{m/2} / sqrt(det Q) exp(-xi^T Q^{-1} xi / 2)` over `R^m`.
///
/// The value is even in `xi`, so passing `F n'` or `-F n'` gives the same result.
pub fn gaussian_integral_closed(q: &RMat, xi: &RVec) -> Result<f64> {
    if q.nrows() != q.ncols() || q.nrows() != xi.len() || (q - q.transpose()).amax() > 1e-12 * (1.0 + q.amax()) {
        return Err(Error::NotPositiveDefinite);
    }
    let chol = q.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let det = chol.determinant();
    let m = q.nrows() as f64;
    let quad = xi.dot(&chol.solve(xi));
    Ok((2.0 * PI).powf(m / 2.0) / det.sqrt() * (-0.5 * quad).exp())
}

/// The same integral by tensor Gauss-Hermite quadrature after `x = sqrt(2) L^{-T} y`, `Q = L L^T`.
pub fn gaussian_integral_hermite(q: &RMat, xi: &RVec, order: usize) -> Result<Complex64> {
    let chol = q.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let m = q.nrows();
    let map = chol.l().transpose().try_inverse().ok_or(Error::NotPositiveDefinite)? * 2f64.sqrt();
    // the phase is linear in y, so it is a sum of per-axis phases
    let freq = map.transpose() * xi;
    let rule = quadrature::hermite(order);
    let mut total = Complex64::new(1.0, 0.0);
    for k in 0..m {
        total *= rule.iter().map(|(y, w)| Complex64::from_polar(w, freq[k] * y)).sum::<Complex64>();
    }
    Ok(total * 2f64.powf(m as f64 / 2.0) / chol.l().determinant())
}

/// `|LHS - RHS|` where LHS is the exponent assembled from `psi2(An, n)`, the shift `Gamma(n')`
/// and the Gaussian exponent, and RHS is `n^T P_A n / f0`.
pub fn exponent_identity_check(a: &SymplecticMatrix, n: &RVec, f0: f64) -> Result<f64> {
    if !(f0 > 0.0) {
        return Err(Error::InvalidArgument(format!("f0 must be positive, got {f0}")));
    }
    let nprime = n / f0.sqrt();
    let f = f_of(a);
    let qinv = spd_inverse(&q_of(a))?;
    let fn_ = &f * &nprime;
    let lhs = psi2(&a.apply(n), n) / f0 + gamma_shift(a, &nprime) - 0.5 * fn_.dot(&(&qinv * &fn_));
    let rhs = symplectic::psi2_a(a, n)? / f0;
    Ok((lhs - rhs).norm())
}

/// Deviation between `psi2(n, v) + psi2(Av, n)` and its expansion around `v = n`:
/// `psi2(An, n) + i u^T J0 (A^{-1} - I) n - u^T Q u / 2 - u^T A^T (A - I) n` with `u = v - n`.
pub fn exponent_split_deviation(a: &SymplecticMatrix, n: &RVec, v: &RVec) -> f64 {
    let u = v - n;
    let lhs = psi2(n, v) + psi2(&a.apply(v), n);
    let f = f_of(a);
    let rhs = psi2(&a.apply(n), n)
        + Complex64::new(-0.5 * u.dot(&(q_of(a) * &u)) - u.dot(&(g_of(a) * n)), u.dot(&(f * n)));
    (lhs - rhs).norm()
}

/// Default constant in the window `|n| <= C lambda^{1/9}`.
pub const DEFAULT_WINDOW_C: f64 = 1.0;

/// The `n`-independent prefactor and the exponent generator of the leading term.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadingProfile {
    pub coefficient: Complex64,
    pub profile: ProfileMatrix,
}

pub fn leading_profile(datum: &FixedPointDatum) -> Result<LeadingProfile> {
    let d = datum.dim_d() as i32;
    let det_q = q_of(&datum.a).determinant();
    let coefficient = datum.rho0 * (2.0 * PI / datum.f0.powi(d + 1) * 2f64.powi(d) / det_q.sqrt());
    Ok(LeadingProfile { coefficient, profile: profile_matrix(&datum.a)?.scaled(1.0 / datum.f0) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub value: Complex64,
    /// `|n|` exceeded `C lambda^{1/9}`.
    pub outside_window: bool,
}

/// Leading term of the scaling asymptotics at `x0 + n / sqrt(lambda)`.
pub fn predicted_kernel(datum: &FixedPointDatum, lambda: f64, n: &RVec, chi_at_tau0: Complex64) -> Result<Prediction> {
    predicted_kernel_with_window(datum, lambda, n, chi_at_tau0, DEFAULT_WINDOW_C)
}

pub fn predicted_kernel_with_window(
    datum: &FixedPointDatum,
    lambda: f64,
    n: &RVec,
    chi_at_tau0: Complex64,
    window_c: f64,
) -> Result<Prediction> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    datum.require_very_clean()?;
    let lp = leading_profile(datum)?;
    let d = datum.dim_d() as i32;
    let outside_window = n.norm() > window_c * lambda.powf(1.0 / 9.0);
    if outside_window {
        log::warn!("|n| = {:.3} exceeds the window {window_c} * lambda^(1/9) at lambda = {lambda}", n.norm());
    }
    let phase = Complex64::from_polar(1.0, -lambda * datum.tau0);
    let value = lp.coefficient * phase * lp.profile.quadratic_form(n).exp() * chi_at_tau0 * (lambda / PI).powi(d);
    Ok(Prediction { value, outside_window })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParityPart {
    pub n: RVec,
    pub even: Complex64,
    pub odd: Complex64,
}

/// Even and odd parts `(S(n) +- S(-n)) / 2`, one entry per input sample.
pub fn parity_split(samples: &[(RVec, Complex64)]) -> Result<Vec<ParityPart>> {
    samples
        .iter()
        .map(|(n, s)| {
            let scale = 1e-12 * (1.0 + n.amax());
            let mirror = samples
                .iter()
                .find(|(m, _)| m.len() == n.len() && (m + n).amax() <= scale)
                .ok_or_else(|| Error::MissingMirror(n.iter().cloned().collect()))?;
            let sm = mirror.1;
            Ok(ParityPart { n: n.clone(), even: (s + sm) * 0.5, odd: (s - sm) * 0.5 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::random_symplectic;
    use proptest::prelude::*;

    fn v2(x: f64, y: f64) -> RVec {
        RVec::from_vec(vec![x, y])
    }

    fn datum(a: SymplecticMatrix, f0: f64) -> FixedPointDatum {
        FixedPointDatum::new(a, f0, Complex64::new(1.0, 0.0), 0.0).unwrap()
    }

    #[test]
    fn upsilon_examples() {
        let p = stationary_point(3.0).unwrap();
        assert_eq!(upsilon(&p, 3.0), 0.0);
        assert_eq!(upsilon(&PhasePoint::new(1.0, 1.0, 2.0, 0.0).unwrap(), 1.0), 1.0);
        assert!(upsilon_gradient_fd(&p, 3.0, 1e-5).amax() < 1e-8);
        assert!(PhasePoint::new(0.0, -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn hessian_data() {
        let p = stationary_point(2.0).unwrap();
        assert_eq!((p.theta, p.t, p.u, p.tau), (0.0, 0.5, 0.5, 0.0));
        for f0 in [0.5, 1.0, 2.0, 5.0] {
            let h = upsilon_hessian(f0);
            assert!((h.determinant() - f0 * f0).abs() < 1e-12);
            assert!((h * upsilon_hessian_inverse(f0) - Matrix4::identity()).amax() < 1e-12);
            let fd = upsilon_hessian_fd(&stationary_point(f0).unwrap(), f0, 1e-3);
            assert!((fd - h).amax() < 1e-6);
        }
    }

    #[test]
    fn critical_point_is_unique_on_a_grid() {
        let f0 = 1.5;
        let big_d = 4.0;
        let mut hits = 0;
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    for l in 0..10 {
                        let lerp = |s: usize, lo: f64, hi: f64| lo + (hi - lo) * s as f64 / 9.0;
                        let p = PhasePoint::new(lerp(i, -1.0, 1.0), lerp(j, 1.0 / big_d, big_d), lerp(k, 1.0 / big_d, big_d), lerp(l, -1.0, 1.0)).unwrap();
                        if upsilon_gradient(&p, f0).norm() < 1e-6 {
                            hits += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(hits, 0, "no grid point is exactly at 1/f0, so nothing should be critical");
    }

    #[test]
    fn sqrt_factor_examples() {
        let z = sqrt_hessian_factor(1.0, (2.0 * PI).powi(2)).unwrap();
        assert!((z - 1.0).norm() < 1e-12);
        let z = sqrt_hessian_factor(2.0, 1.0).unwrap();
        assert!((z.re - 0.050660591821168886).abs() < 1e-15 && z.im.abs() < 1e-15);
        let r = sqrt_hessian_factor(1.3, 40.0).unwrap() / sqrt_hessian_factor(1.3, 10.0).unwrap();
        assert!((r - 4.0).norm() < 1e-12);
    }

    #[test]
    fn theta_examples() {
        let dt = datum(SymplecticMatrix::rotation(0.8), 1.0);
        let z = RVec::zeros(2);
        let p0 = PhasePoint::new(0.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(theta_fn(&p0, &z, &z, &dt, &z), Complex64::new(0.0, 0.0));
        let n = v2(0.3, -0.7);
        let v = v2(1.1, 0.2);
        let expected = psi2(&n, &v) + psi2(&dt.a.apply(&v), &n);
        assert!((theta_fn(&p0, &n, &v, &dt, &z) - expected).norm() < 1e-15);
    }

    #[test]
    fn damping_examples() {
        let dt = datum(SymplecticMatrix::minus_identity(1), 1.0);
        let a = damping_bound(&dt, 2.0, &RVec::zeros(2)).unwrap();
        assert!(a >= 0.05, "a = {a}");
        let dense = damping_bound_with(&dt, 2.0, &RVec::zeros(2), &DampingOptions { tu_grid: 17, ..Default::default() }).unwrap();
        assert!((dense - a).abs() <= 0.2 * a);
        let shear = SymplecticMatrix::new(RMat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap();
        assert!(matches!(damping_bound(&datum(shear, 1.0), 2.0, &RVec::zeros(2)), Err(Error::Precondition(_))));
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_shift(&SymplecticMatrix::identity(1), &v2(0.4, 2.0)), Complex64::new(0.0, 0.0));
        let g = gamma_shift(&SymplecticMatrix::minus_identity(1), &v2(1.0, 0.0));
        assert!((g - 1.0).norm() < 1e-14);
    }

    #[test]
    fn gaussian_examples() {
        let q2 = RMat::identity(2, 2) * 2.0;
        assert!((gaussian_integral_closed(&q2, &RVec::zeros(2)).unwrap() - PI).abs() < 1e-14);
        let val = gaussian_integral_closed(&RMat::identity(2, 2), &v2(1.0, 0.0)).unwrap();
        assert!((val - 2.0 * PI * (-0.5f64).exp()).abs() < 1e-14);
        let bad = RMat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(gaussian_integral_closed(&bad, &RVec::zeros(2)).is_err());
    }

    #[test]
    fn gaussian_matches_hermite_in_two_dims() {
        let q = RMat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let xi = v2(0.7, -1.1);
        let oracle = gaussian_integral_hermite(&q, &xi, 40).unwrap();
        let closed = gaussian_integral_closed(&q, &xi).unwrap();
        assert!((oracle - closed).norm() <= 1e-10 * closed);
        assert!((gaussian_integral_hermite(&RMat::identity(3, 3), &RVec::zeros(3), 4).unwrap() - (2.0 * PI).powf(1.5)).norm() < 1e-12);
    }

    #[test]
    fn exponent_examples() {
        assert!(exponent_identity_check(&SymplecticMatrix::identity(1), &v2(0.3, 0.2), 1.7).unwrap() < 1e-15);
        assert!(exponent_identity_check(&SymplecticMatrix::minus_identity(1), &v2(1.0, 0.0), 1.0).unwrap() <= 1e-10);
    }

    #[test]
    fn prediction_examples() {
        let d = datum(SymplecticMatrix::identity(1), 1.0);
        // A = I is very clean (the whole space is fixed)
        let p = predicted_kernel(&d, PI, &RVec::zeros(2), Complex64::new(1.0, 0.0)).unwrap();
        assert!((p.value - 2.0 * PI).norm() < 1e-12);
        let m = datum(SymplecticMatrix::minus_identity(1), 1.0);
        let at0 = predicted_kernel(&m, 10.0, &RVec::zeros(2), Complex64::new(1.0, 0.0)).unwrap().value;
        let at1 = predicted_kernel(&m, 10.0, &v2(1.0, 0.0), Complex64::new(1.0, 0.0)).unwrap().value;
        assert!((at1 / at0 - (-2.0f64).exp()).norm() < 1e-14);
        let mut shifted = m.clone();
        shifted.tau0 = 1.3;
        let r = predicted_kernel(&shifted, 20.0, &v2(0.5, 0.1), 1.0.into()).unwrap().value.norm()
            / predicted_kernel(&shifted, 10.0, &v2(0.5, 0.1), 1.0.into()).unwrap().value.norm();
        assert!((r - 2.0).abs() < 1e-12);
        assert!(predicted_kernel(&m, 10.0, &v2(5.0, 0.0), 1.0.into()).unwrap().outside_window);
    }

    #[test]
    fn parity_examples() {
        let pts = [v2(0.0, 0.0), v2(1.0, 0.5), v2(-1.0, -0.5), v2(0.2, -2.0), v2(-0.2, 2.0)];
        let constant: Vec<_> = pts.iter().map(|n| (n.clone(), Complex64::new(2.0, 1.0))).collect();
        assert!(parity_split(&constant).unwrap().iter().all(|p| p.odd.norm() == 0.0));
        let linear: Vec<_> = pts.iter().map(|n| (n.clone(), Complex64::new(n[0], 0.0))).collect();
        let split = parity_split(&linear).unwrap();
        assert!(split.iter().all(|p| p.even.norm() == 0.0));
        assert!(split.iter().zip(&linear).all(|(p, s)| p.even + p.odd == s.1));
        assert!(matches!(parity_split(&linear[..2]), Err(Error::MissingMirror(_))));
        let m = datum(SymplecticMatrix::rotation(2.0), 1.0);
        let pred: Vec<_> = pts
            .iter()
            .map(|n| (n.clone(), predicted_kernel(&m, 50.0, n, 1.0.into()).unwrap().value))
            .collect();
        assert!(parity_split(&pred).unwrap().iter().all(|p| p.odd.norm() == 0.0));
    }

    fn vec_strategy(n: usize) -> impl Strategy<Value = RVec> {
        proptest::collection::vec(-2.0f64..2.0, n).prop_map(RVec::from_vec)
    }

    proptest! {
        #[test]
        fn re_theta_matches_sum_of_squares(
            seed in any::<u64>(), th in -3.0f64..3.0, t in 0.1f64..5.0, u in 0.1f64..5.0, tau in -3.0f64..3.0,
            n in vec_strategy(2), v in vec_strategy(2), up in vec_strategy(2), f0 in 0.2f64..4.0,
        ) {
            let a = random_symplectic(1, 0.8, seed).unwrap();
            let dt = datum(a, f0);
            let p = PhasePoint::new(th, t, u, tau).unwrap();
            let z = theta_fn(&p, &n, &v, &dt, &up);
            prop_assert!((z.re - re_theta(&p, &n, &v, &dt, &up)).abs() <= 1e-10 * (1.0 + z.re.abs()));
        }

        #[test]
        fn exponent_collapse(seed in any::<u64>(), d in 1usize..=3, f0 in 0.1f64..10.0, n in vec_strategy(6)) {
            let a = random_symplectic(d, 0.8, seed).unwrap();
            let n = RVec::from_iterator(2 * d, n.iter().cloned().take(2 * d));
            let dev = exponent_identity_check(&a, &n, f0).unwrap();
            prop_assert!(dev <= 1e-9 * (1.0 + n.norm_squared()));
        }

        #[test]
        fn exponent_split(seed in any::<u64>(), n in vec_strategy(4), v in vec_strategy(4)) {
            let a = random_symplectic(2, 0.8, seed).unwrap();
            let scale = 1.0 + a.norm().powi(2) * (1.0 + n.norm_squared() + v.norm_squared());
            prop_assert!(exponent_split_deviation(&a, &n, &v) <= 1e-11 * scale);
        }

        #[test]
        fn prediction_modulus_is_even(seed in any::<u64>(), n in vec_strategy(2), lambda in 10.0f64..500.0) {
            let a = crate::symplectic::random_unitary_symplectic(1, 3.0, seed).unwrap();
            prop_assume!(cleanliness(&a, DEFAULT_RANK_TOL).unwrap().very_clean);
            let dt = FixedPointDatum::new(a, 1.3, Complex64::new(0.4, 0.2), 2.0).unwrap();
            let plus = predicted_kernel(&dt, lambda, &n, 1.0.into()).unwrap().value;
            let minus = predicted_kernel(&dt, lambda, &(-&n), 1.0.into()).unwrap().value;
            prop_assert!((plus - minus).norm() <= 1e-13 * plus.norm());
        }
    }
}
