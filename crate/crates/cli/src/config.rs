//! Run configuration: one TOML document with a section per command.
//!
//! Every section has defaults, so an empty file (or no file) reproduces the reference runs.
//! Unknown keys are rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub seed: u64,
    pub identities: IdentitiesConfig,
    pub stationary: StationaryConfig,
    pub oscillatory: OscillatoryConfig,
    pub cp1: Cp1Config,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            seed: 0,
            identities: IdentitiesConfig::default(),
            stationary: StationaryConfig::default(),
            oscillatory: OscillatoryConfig::default(),
            cp1: Cp1Config::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitiesConfig {
    pub dims: Vec<usize>,
    /// Random symplectic matrices per dimension.
    pub samples: usize,
    pub spread: f64,
    /// Orthogonal-symplectic matrices, cycling through `dims`.
    pub unitary_samples: usize,
    pub unitary_spread: f64,
    /// Random vectors per orthogonal sample.
    pub vectors: usize,
    pub form_tol: f64,
    pub f_identity_tol: f64,
    pub unitary_tol: f64,
}

impl Default for IdentitiesConfig {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 3],
            samples: 1000,
            spread: 1.0,
            unitary_samples: 500,
            unitary_spread: 2.0,
            vectors: 100,
            form_tol: 1e-9,
            f_identity_tol: 1e-10,
            unitary_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationaryConfig {
    pub f0: Vec<f64>,
    pub gradient_step: f64,
    pub hessian_step: f64,
    pub gradient_tol: f64,
    pub hessian_tol: f64,
    pub det_tol: f64,
    pub inverse_tol: f64,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        Self {
            f0: vec![0.5, 1.0, 2.0, 5.0],
            gradient_step: 1e-5,
            hessian_step: 1e-3,
            gradient_tol: 1e-8,
            hessian_tol: 1e-6,
            det_tol: 1e-8,
            inverse_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatoryConfig {
    pub lambda: Vec<f64>,
    pub f0: f64,
    /// The linearization is the plane rotation by this angle (`pi` gives `-I`).
    pub rotation: f64,
    pub ratio_tol: f64,
    pub slope_target: f64,
    pub slope_tol: f64,
    /// Re-run every integral with doubled rules and require agreement within this many estimated errors.
    pub stability_factor: f64,
    pub stability: bool,
    /// Compare with the projective-line kernel at the largest lambda (diagnostic only).
    pub calibration: bool,
}

impl Default for OscillatoryConfig {
    fn default() -> Self {
        Self {
            lambda: vec![50.0, 100.0, 200.0, 400.0],
            f0: 1.0,
            rotation: std::f64::consts::PI,
            ratio_tol: 0.08,
            slope_target: -0.5,
            slope_tol: 0.2,
            stability_factor: 3.0,
            stability: true,
            calibration: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Cp1Config {
    pub a: f64,
    pub b: f64,
    /// Which return time of the pole fiber to window around.
    pub period: u32,
    /// Window half-width; defaults to `1/a`.
    pub eps: Option<f64>,
    pub profile_lambda: Vec<f64>,
    pub n_radius: f64,
    pub n_per_side: usize,
    /// Quadratic term of the chart used for the parity split.
    pub parity_skew: [f64; 2],
    /// Toeplitz symbol `g(h) = symbol_pole + symbol_slope * h` in the height `h = |z1|^2 / |z|^2`.
    pub symbol_pole: f64,
    pub symbol_slope: f64,
    pub ratio_tol: f64,
    pub width_tol: f64,
    pub symbol_tol: f64,
    pub parity_tol: f64,
    pub negative_lambda: Vec<f64>,
    pub negative_points: Vec<[f64; 2]>,
    pub negative_tol: f64,
    pub decay_radii: Vec<f64>,
    pub decay_lambda: Vec<f64>,
    pub decay_slope_max: f64,
}

impl Default for Cp1Config {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 0.37,
            period: 1,
            eps: None,
            profile_lambda: vec![100.0, 400.0],
            n_radius: 1.5,
            n_per_side: 3,
            parity_skew: [0.25, 0.25],
            symbol_pole: 1.5,
            symbol_slope: -0.5,
            ratio_tol: 0.05,
            width_tol: 0.05,
            symbol_tol: 0.05,
            parity_tol: 0.2,
            negative_lambda: vec![200.0],
            negative_points: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-0.7, 0.7], [1.2, -0.5]],
            negative_tol: 1e-8,
            decay_radii: vec![0.2, 0.5, 0.8],
            decay_lambda: vec![100.0, 150.0, 200.0, 300.0, 400.0],
            decay_slope_max: -3.0,
        }
    }
}

impl Cp1Config {
    pub fn window_eps(&self) -> f64 {
        self.eps.unwrap_or(1.0 / self.a)
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Multiplies every error tolerance (not the one-sided bounds) by `factor`.
    pub fn scale_tolerances(&mut self, factor: f64) {
        let i = &mut self.identities;
        for t in [&mut i.form_tol, &mut i.f_identity_tol, &mut i.unitary_tol] {
            *t *= factor;
        }
        let s = &mut self.stationary;
        for t in [&mut s.gradient_tol, &mut s.hessian_tol, &mut s.det_tol, &mut s.inverse_tol] {
            *t *= factor;
        }
        let o = &mut self.oscillatory;
        for t in [&mut o.ratio_tol, &mut o.slope_tol, &mut o.stability_factor] {
            *t *= factor;
        }
        let c = &mut self.cp1;
        for t in [&mut c.ratio_tol, &mut c.width_tol, &mut c.symbol_tol, &mut c.parity_tol, &mut c.negative_tol] {
            *t *= factor;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            bail!("field `version`: unsupported version {} (expected {CONFIG_VERSION})", self.version);
        }
        let i = &self.identities;
        if i.dims.is_empty() || i.dims.iter().any(|&d| d == 0) {
            bail!("field `identities.dims`: dimensions must be positive and non-empty");
        }
        positive("identities.form_tol", i.form_tol)?;
        positive("identities.f_identity_tol", i.f_identity_tol)?;
        positive("identities.unitary_tol", i.unitary_tol)?;
        nonnegative("identities.spread", i.spread)?;
        nonnegative("identities.unitary_spread", i.unitary_spread)?;

        let s = &self.stationary;
        if s.f0.is_empty() {
            bail!("field `stationary.f0`: must not be empty");
        }
        for &f in &s.f0 {
            positive("stationary.f0", f)?;
        }
        for (name, v) in [
            ("stationary.gradient_step", s.gradient_step),
            ("stationary.hessian_step", s.hessian_step),
            ("stationary.gradient_tol", s.gradient_tol),
            ("stationary.hessian_tol", s.hessian_tol),
            ("stationary.det_tol", s.det_tol),
            ("stationary.inverse_tol", s.inverse_tol),
        ] {
            positive(name, v)?;
        }

        let o = &self.oscillatory;
        increasing("oscillatory.lambda", &o.lambda)?;
        positive("oscillatory.f0", o.f0)?;
        positive("oscillatory.ratio_tol", o.ratio_tol)?;
        positive("oscillatory.slope_tol", o.slope_tol)?;
        positive("oscillatory.stability_factor", o.stability_factor)?;

        let c = &self.cp1;
        positive("cp1.a", c.a)?;
        if !(c.a + c.b > 0.0) {
            bail!("field `cp1.b`: a + b must be positive");
        }
        if c.period == 0 {
            bail!("field `cp1.period`: must be at least 1");
        }
        positive("cp1.eps", c.window_eps())?;
        increasing("cp1.profile_lambda", &c.profile_lambda)?;
        increasing("cp1.negative_lambda", &c.negative_lambda)?;
        increasing("cp1.decay_lambda", &c.decay_lambda)?;
        increasing("cp1.decay_radii", &c.decay_radii)?;
        positive("cp1.n_radius", c.n_radius)?;
        if c.n_per_side == 0 {
            bail!("field `cp1.n_per_side`: must be at least 1");
        }
        for (name, v) in [
            ("cp1.ratio_tol", c.ratio_tol),
            ("cp1.width_tol", c.width_tol),
            ("cp1.symbol_tol", c.symbol_tol),
            ("cp1.parity_tol", c.parity_tol),
            ("cp1.negative_tol", c.negative_tol),
        ] {
            positive(name, v)?;
        }
        if c.negative_points.is_empty() {
            bail!("field `cp1.negative_points`: must not be empty");
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        bail!("field `{name}`: must be positive and finite, got {v}");
    }
    Ok(())
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        bail!("field `{name}`: must be nonnegative and finite, got {v}");
    }
    Ok(())
}

fn increasing(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        bail!("field `{name}`: must not be empty");
    }
    if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        bail!("field `{name}`: values must be positive and finite");
    }
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        bail!("field `{name}`: values must be strictly increasing");
    }
    Ok(())
}

/// Parses `a:b:n` into `n` evenly spaced values from `a` to `b` inclusive.
pub fn parse_lambda_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("lambda grid must look like a:b:n, got `{spec}`");
    }
    let a: f64 = parts[0].trim().parse().with_context(|| format!("bad start `{}`", parts[0]))?;
    let b: f64 = parts[1].trim().parse().with_context(|| format!("bad end `{}`", parts[1]))?;
    let n: usize = parts[2].trim().parse().with_context(|| format!("bad count `{}`", parts[2]))?;
    if n == 0 {
        bail!("lambda grid needs at least one point");
    }
    if n == 1 {
        if a != b {
            bail!("a one-point lambda grid needs a == b");
        }
        return Ok(vec![a]);
    }
    let grid: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    increasing("--lambda-grid", &grid)?;
    Ok(grid)
}
