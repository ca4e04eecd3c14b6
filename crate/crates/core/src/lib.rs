//! Local trace-formula asymptotics for Toeplitz quantizations of Hamiltonian flows.
//!
//! The crate is split by layer:
//!
//! * [`symplectic`]: linear algebra of symplectic linearizations and the quadratic profile forms
//!   they induce.
//! * [`profile`]: the phase function of the stationary-phase argument, its Hessian data and the
//!   predicted leading-order kernel.
//! * [`oscillatory`]: brute-force quadrature of the rescaled oscillatory integral.
//! * [`cp1`]: an exactly solvable quantization on the projective line used as a spectral oracle.
//!
//! Coordinates throughout are real column vectors of length `2d`, ordered `(x_1..x_d, y_1..y_d)`
//! so that `J0` acts as multiplication by `i` under `x + iy`.

pub mod cp1;
pub mod error;
pub mod oscillatory;
pub mod profile;
pub mod quadrature;
pub mod symplectic;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Least-squares slope of `ys` against `xs`, with intercept.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_slope(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 1.5).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_none());
        assert!(loglog_slope(&[1.0, 2.0], &[1.0, 0.0]).is_none());
    }
}
