//! Experiments comparing the brute-force kernel with the leading-order prediction.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::chart::{heisenberg_displace, Chart};
use super::spectral::{brute_force_s, ModelPoint, SpectralModel, ToeplitzSymbol};
use super::window::Window;
use super::{pole_linearization_ode, RotationHamiltonian};
use crate::oscillatory::{full_profile_integral, QuadratureSpec};
use crate::profile::{parity_split, predicted_kernel, FixedPointDatum, ParityPart};
use crate::symplectic::{RVec, SymplecticMatrix};
use crate::{fit_slope, loglog_slope, Error, Result};

/// Tolerance on the variational-equation cross-check of the linearization.
const VARIATIONAL_TOL: f64 = 1e-8;

/// Linear data at the pole `[1 : 0]` for the `m`-th return time `2π m / a` of its fiber.
///
/// The chart field is `w' = -i b w`, so the linearization at time `-tau0` is the rotation by
/// `b tau0`; this is checked against the variational equation.
pub fn fixed_point_datum_at_pole(ham: &RotationHamiltonian, m: u32, rho0: Complex64) -> Result<FixedPointDatum> {
    if m == 0 {
        return Err(Error::InvalidArgument("period index must be at least 1".into()));
    }
    let tau0 = 2.0 * PI * m as f64 / ham.a;
    let beta = ham.b * tau0;
    let turns = beta / (2.0 * PI);
    if ham.b != 0.0 && (turns - turns.round()).abs() < 1e-12 {
        return Err(Error::Resonant);
    }
    let a = if ham.b == 0.0 { SymplecticMatrix::identity(1) } else { SymplecticMatrix::rotation(beta) };
    let ode = pole_linearization_ode(ham, -tau0);
    let deviation = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (ode[(i, j)] - a.matrix()[(i, j)]).abs())
        .fold(0.0, f64::max);
    if deviation > VARIATIONAL_TOL {
        return Err(Error::ConventionMismatch { deviation });
    }
    FixedPointDatum::new(a, ham.a, rho0, tau0)
}

/// Periods of the lifted flow up to `horizon`: every orbit closes at the return times of one of
/// the two pole fibers.
pub fn periods_up_to(ham: &RotationHamiltonian, horizon: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for rate in [ham.a, ham.a + ham.b] {
        let base = 2.0 * PI / rate;
        let mut m = 1.0;
        while m * base <= horizon {
            out.push(m * base);
            m += 1.0;
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Window of half-width `eps` around `tau0`, checked to contain no other period.
pub fn isolated_window(ham: &RotationHamiltonian, tau0: f64, eps: f64) -> Result<Window> {
    let w = Window::new(tau0, eps)?;
    w.check_isolated(&periods_up_to(ham, tau0 + 2.0 * eps))?;
    Ok(w)
}

/// Square grid of displacements with `|n| <= radius`, symmetric under `n -> -n`.
pub fn symmetric_grid(radius: f64, per_side: usize) -> Vec<RVec> {
    let h = radius / per_side as f64;
    let k = per_side as i64;
    let mut out = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            let n = RVec::from_vec(vec![i as f64 * h, j as f64 * h]);
            if n.norm() <= radius * (1.0 + 1e-12) {
                out.push(n);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSample {
    pub n: RVec,
    pub brute: Complex64,
    pub predicted: Complex64,
}

#[derive(Debug, Clone)]
pub struct ProfileScan {
    pub lambda: f64,
    pub samples: Vec<ProfileSample>,
    pub parity: Vec<ParityPart>,
}

impl ProfileScan {
    pub fn at_origin(&self) -> Option<&ProfileSample> {
        self.samples.iter().find(|s| s.n.amax() == 0.0)
    }

    /// Least-squares slope of `log |S(n) / S(0)|` against `|n|^2`.
    pub fn gaussian_width(&self) -> Option<f64> {
        let s0 = self.at_origin()?.brute.norm();
        let xs: Vec<f64> = self.samples.iter().map(|s| s.n.norm_squared()).collect();
        let ys: Vec<f64> = self.samples.iter().map(|s| (s.brute.norm() / s0).ln()).collect();
        fit_slope(&xs, &ys)
    }

    /// Root-mean-square odd part over root-mean-square even part.
    pub fn odd_even_ratio(&self) -> f64 {
        let odd: f64 = self.parity.iter().map(|p| p.odd.norm_sqr()).sum();
        let even: f64 = self.parity.iter().map(|p| p.even.norm_sqr()).sum();
        (odd / even).sqrt()
    }
}

/// Brute-force kernel at the displaced points `pole + n / sqrt(lambda)` next to the prediction.
pub fn profile_scan(
    model: &SpectralModel,
    datum: &FixedPointDatum,
    lambda: f64,
    n_grid: &[RVec],
    window: &Window,
    symbol: &ToeplitzSymbol,
    chart: &Chart,
) -> Result<ProfileScan> {
    let chi = Complex64::new(window.chi(datum.tau0), 0.0);
    let samples = n_grid
        .par_iter()
        .map(|n| {
            let point = heisenberg_displace(n, lambda, chart)?;
            let brute = brute_force_s(model, &point, lambda, window, symbol)?;
            let predicted = predicted_kernel(datum, lambda, n, chi)?.value;
            Ok(ProfileSample { n: n.clone(), brute, predicted })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(RVec, Complex64)> = samples.iter().map(|s| (s.n.clone(), s.brute)).collect();
    let parity = parity_split(&pairs)?;
    Ok(ProfileScan { lambda, samples, parity })
}

/// The point at chart distance `r` from the pole `[1 : 0]` (or from `[0 : 1]` when `far_pole`)
/// in the direction `angle`.
pub fn off_locus_point(r: f64, angle: f64, far_pole: bool) -> Result<ModelPoint> {
    if !(r > 0.0) {
        return Err(Error::Precondition("off-locus points must avoid the poles".into()));
    }
    let u = Complex64::from_polar(r, angle);
    if far_pole {
        ModelPoint::new(u, Complex64::new(1.0, 0.0))
    } else {
        Ok(ModelPoint::from_chart(u))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub r: f64,
    pub far_pole: bool,
    pub lambda: f64,
    pub value: Complex64,
    /// `|S|` at the on-locus pole for the same `lambda`.
    pub reference: f64,
}

#[derive(Debug, Clone)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
}

impl DecayTable {
    fn series(&self, r: f64, far_pole: bool) -> (Vec<f64>, Vec<f64>) {
        self.rows.iter().filter(|row| row.r == r && row.far_pole == far_pole).map(|row| (row.lambda, row.value.norm())).unzip()
    }

    /// Log-log slope of `|S|` against `lambda` at one base point.
    pub fn slope(&self, r: f64, far_pole: bool) -> Option<f64> {
        let (l, s) = self.series(r, far_pole);
        loglog_slope(&l, &s)
    }

    /// Slopes fitted over the growing windows `[lambda_0, lambda_i]`, `i >= 1`.
    pub fn growing_window_slopes(&self, r: f64, far_pole: bool) -> Vec<Option<f64>> {
        let (l, s) = self.series(r, far_pole);
        (2..=l.len()).map(|i| loglog_slope(&l[..i], &s[..i])).collect()
    }
}

/// `|S|` at chart distance `r` from either pole over a grid of `lambda` values.
pub fn off_locus_scan(model: &SpectralModel, radii: &[f64], lambdas: &[f64], window: &Window) -> Result<DecayTable> {
    let pole = ModelPoint::pole();
    let refs = lambdas
        .par_iter()
        .map(|&l| Ok(brute_force_s(model, &pole, l, window, &ToeplitzSymbol::Identity)?.norm()))
        .collect::<Result<Vec<f64>>>()?;
    let mut jobs = Vec::new();
    for &r in radii {
        for far_pole in [false, true] {
            for (i, &lambda) in lambdas.iter().enumerate() {
                jobs.push((r, far_pole, i, lambda));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(r, far_pole, i, lambda)| {
            // a fixed direction keeps the table reproducible; the kernel is rotation invariant
            let point = off_locus_point(r, 0.0, far_pole)?;
            let value = brute_force_s(model, &point, lambda, window, &ToeplitzSymbol::Identity)?;
            Ok(DecayRow { r, far_pole, lambda, value, reference: refs[i] })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayTable { rows })
}

/// `|S(-lambda)| / |S(lambda)|` at one point.
pub fn negative_lambda_ratio(model: &SpectralModel, point: &ModelPoint, lambda: f64, window: &Window) -> Result<f64> {
    let pos = brute_force_s(model, point, lambda, window, &ToeplitzSymbol::Identity)?;
    let neg = brute_force_s(model, point, -lambda, window, &ToeplitzSymbol::Identity)?;
    Ok(neg.norm() / pos.norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub lambda: f64,
    pub brute: Complex64,
    pub integral: Complex64,
    pub integral_error: f64,
}

impl Calibration {
    pub fn ratio(&self) -> Complex64 {
        self.brute / self.integral
    }
}

/// Brute-force kernel at the pole of the model with `a = 1, b = 1/2`, whose first return has
/// linearization `-I`, against the model oscillatory integral at `n = 0`.
pub fn half_turn_calibration(lambda: f64, eps: f64) -> Result<Calibration> {
    let ham = RotationHamiltonian::new(1.0, 0.5)?;
    let datum = fixed_point_datum_at_pole(&ham, 1, Complex64::new(1.0, 0.0))?;
    let window = isolated_window(&ham, datum.tau0, eps)?;
    let model = super::spectral::build_spectral_model(ham, SpectralModel::kmax_for(&ham, lambda, eps))?;
    let brute = brute_force_s(&model, &ModelPoint::pole(), lambda, &window, &ToeplitzSymbol::Identity)?;
    let full = full_profile_integral(&datum, &RVec::zeros(2), &QuadratureSpec::new(lambda, datum.f0))?;
    Ok(Calibration { lambda, brute, integral: full.value, integral_error: full.est_error })
}
