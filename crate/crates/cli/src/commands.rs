//! The experiment commands. Each returns a [`Report`] whose rows are sorted by id.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use anyhow::{Context, Result};
use ltf_core::cp1::chart::{heisenberg_displace, Chart};
use ltf_core::cp1::scans::{
    fixed_point_datum_at_pole, half_turn_calibration, isolated_window, negative_lambda_ratio, off_locus_scan, profile_scan, symmetric_grid,
};
use ltf_core::cp1::spectral::{build_spectral_model, brute_force_s, SpectralModel, ToeplitzSymbol};
use ltf_core::cp1::RotationHamiltonian;
use ltf_core::oscillatory::{full_profile_integral, QuadratureSpec};
use ltf_core::profile::{
    predicted_kernel, stationary_point, upsilon_gradient_fd, upsilon_hessian, upsilon_hessian_fd, upsilon_hessian_inverse, FixedPointDatum,
};
use ltf_core::symplectic::{
    cleanliness, f_of, j0, negdef_on_image, profile_matrix, profile_matrix_alt, psi2, psi2_a, random_symplectic, random_unitary_symplectic, RMat,
    RVec, SymplecticMatrix, DEFAULT_RANK_TOL,
};
use ltf_core::{loglog_slope, Complex64};
use nalgebra::Matrix4;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{re, Report, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Identities,
    Stationary,
    Oscillatory,
    Cp1Profile,
    Cp1Decay,
    Cp1Negative,
}

impl Command {
    /// Base name of the output files.
    pub fn name(self) -> &'static str {
        match self {
            Command::Identities => "identities",
            Command::Stationary => "stationary",
            Command::Oscillatory => "oscillatory",
            Command::Cp1Profile => "cp1-profile",
            Command::Cp1Decay => "cp1-decay",
            Command::Cp1Negative => "cp1-negative",
        }
    }
}

/// Replaces the lambda grid used by `cmd`.
pub fn override_lambda_grid(cfg: &mut RunConfig, cmd: Command, grid: Vec<f64>) {
    match cmd {
        Command::Oscillatory => cfg.oscillatory.lambda = grid,
        Command::Cp1Profile => cfg.cp1.profile_lambda = grid,
        Command::Cp1Decay => cfg.cp1.decay_lambda = grid,
        Command::Cp1Negative => cfg.cp1.negative_lambda = grid,
        Command::Identities | Command::Stationary => log::warn!("--lambda-grid has no effect on `{}`", cmd.name()),
    }
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let mut diagnostics = BTreeMap::new();
    let (rows, section) = match cmd {
        Command::Identities => (identities(cfg)?, serde_json::to_value(&cfg.identities)?),
        Command::Stationary => (stationary(cfg)?, serde_json::to_value(&cfg.stationary)?),
        Command::Oscillatory => (oscillatory(cfg, &mut diagnostics)?, serde_json::to_value(&cfg.oscillatory)?),
        Command::Cp1Profile => (cp1_profile(cfg, &mut diagnostics)?, serde_json::to_value(&cfg.cp1)?),
        Command::Cp1Decay => (cp1_decay(cfg, &mut diagnostics)?, serde_json::to_value(&cfg.cp1)?),
        Command::Cp1Negative => (cp1_negative(cfg, &mut diagnostics)?, serde_json::to_value(&cfg.cp1)?),
    };
    let mut report = Report {
        command: cmd.name().into(),
        rows,
        diagnostics,
        config: section,
        seed: cfg.seed,
        wall_time: start.elapsed().as_secs_f64(),
    };
    report.sort();
    Ok(report)
}

/// Independent sample seeds for one named stream of the run seed.
fn sample_seeds(seed: u64, stream: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count).map(|_| rng.random::<u64>()).collect()
}

fn lam_id(l: f64) -> String {
    format!("l={l:010.3}")
}

fn n_id(n: &RVec) -> String {
    format!("n={:+.3},{:+.3}", n[0], n[1])
}

fn identities(cfg: &RunConfig) -> Result<Vec<Row>> {
    let c = &cfg.identities;
    let mut jobs = Vec::new();
    for (k, &d) in c.dims.iter().enumerate() {
        for (i, s) in sample_seeds(cfg.seed, k as u64, c.samples).into_iter().enumerate() {
            jobs.push((d, i, s));
        }
    }
    let mut rows: Vec<Row> = jobs
        .par_iter()
        .map(|&(d, i, seed)| -> Result<Vec<Row>> {
            let a = random_symplectic(d, c.spread, seed)?;
            let inputs = format!("d={d};spread={};seed={seed}", c.spread);
            let scale = 1.0 + a.norm().powi(2);
            let forms = profile_matrix(&a)?.max_deviation(&profile_matrix_alt(&a));
            let n = 2 * d;
            let alt = -(a.matrix().transpose() * j0(d) * (a.matrix() - RMat::identity(n, n)));
            let f_dev = (f_of(&a) - alt).amax();
            let mut out = vec![
                Row::check(format!("forms/d{d}/{i:05}"), inputs.clone(), re(forms), re(0.0), forms / scale, c.form_tol),
                Row::check(format!("f-identity/d{d}/{i:05}"), inputs.clone(), re(f_dev), re(0.0), f_dev / scale, c.f_identity_tol),
            ];
            let report = cleanliness(&a, DEFAULT_RANK_TOL)?;
            let id = format!("negdef/d{d}/{i:05}");
            if report.very_clean && report.im_dim > 0 {
                let top = negdef_on_image(&a)?;
                out.push(Row::check(id, inputs, re(top), re(0.0), top, 0.0).strict());
            } else {
                out.push(Row::info(id, inputs + ";skipped=not very clean or trivial image", None, None));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let seeds = sample_seeds(cfg.seed, 1_000, c.unitary_samples);
    let unitary: Vec<Row> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| -> Result<Row> {
            let d = c.dims[i % c.dims.len()];
            let a = random_unitary_symplectic(d, c.unitary_spread, seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = 0.0f64;
            for _ in 0..c.vectors {
                let v = RVec::from_iterator(2 * d, (0..2 * d).map(|_| rng.random_range(-2.0..2.0)));
                worst = worst.max((psi2_a(&a, &v)? - psi2(&a.apply(&v), &v)).norm());
            }
            let inputs = format!("d={d};spread={};seed={seed};vectors={};vector_range=2", c.unitary_spread, c.vectors);
            Ok(Row::check(format!("unitary/{i:05}"), inputs, re(worst), re(0.0), worst, c.unitary_tol))
        })
        .collect::<Result<_>>()?;
    rows.extend(unitary);
    Ok(rows)
}

fn stationary(cfg: &RunConfig) -> Result<Vec<Row>> {
    let c = &cfg.stationary;
    let mut rows = Vec::new();
    for &f0 in &c.f0 {
        let p = stationary_point(f0)?;
        let tag = format!("f0={f0:08.4}");
        let inputs = format!("f0={f0};gradient_step={};hessian_step={}", c.gradient_step, c.hessian_step);
        let grad = upsilon_gradient_fd(&p, f0, c.gradient_step).amax();
        let h = upsilon_hessian(f0);
        let hess = (upsilon_hessian_fd(&p, f0, c.hessian_step) - h).amax();
        let det = h.determinant();
        let inv = (h * upsilon_hessian_inverse(f0) - Matrix4::identity()).amax();
        rows.push(Row::check(format!("gradient/{tag}"), inputs.clone(), re(grad), re(0.0), grad, c.gradient_tol));
        rows.push(Row::check(format!("hessian/{tag}"), inputs.clone(), re(hess), re(0.0), hess, c.hessian_tol));
        rows.push(Row::check(format!("determinant/{tag}"), inputs.clone(), re(det), re(f0 * f0), (det - f0 * f0).abs(), c.det_tol));
        rows.push(Row::check(format!("inverse/{tag}"), inputs, re(inv), re(0.0), inv, c.inverse_tol));
    }
    Ok(rows)
}

fn oscillatory(cfg: &RunConfig, diag: &mut BTreeMap<String, Value>) -> Result<Vec<Row>> {
    let c = &cfg.oscillatory;
    let datum = FixedPointDatum::new(SymplecticMatrix::rotation(c.rotation), c.f0, Complex64::new(1.0, 0.0), 2.0 * PI)?;
    let n = RVec::zeros(2);
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut timings = serde_json::Map::new();
    for &l in &c.lambda {
        let inputs = format!("lambda={l};f0={};rotation={};n=0", c.f0, c.rotation);
        let spec = QuadratureSpec::new(l, c.f0);
        let full = full_profile_integral(&datum, &n, &spec).with_context(|| format!("integral at lambda = {l}"))?;
        let pred = predicted_kernel(&datum, l, &n, Complex64::new(1.0, 0.0))?.value;
        let err = (full.value / pred - 1.0).norm();
        errors.push(err);
        rows.push(Row::check(format!("ratio/{}", lam_id(l)), format!("{inputs};est_error={:e}", full.est_error), full.value, pred, err, c.ratio_tol));
        let mut t = full.wall_time;
        if c.stability {
            let fine = full_profile_integral(&datum, &n, &spec.refined())?;
            t += fine.wall_time;
            let tol = c.stability_factor * full.est_error;
            rows.push(Row::check(format!("stability/{}", lam_id(l)), inputs, fine.value, full.value, (fine.value - full.value).norm(), tol));
        }
        timings.insert(lam_id(l), json!(t));
    }
    diag.insert("integral_wall_time_s".into(), Value::Object(timings));
    let grid = c.lambda.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ");
    let inputs = format!("lambda={grid};target={}", c.slope_target);
    match loglog_slope(&c.lambda, &errors) {
        Some(slope) if c.lambda.len() >= 2 => {
            rows.push(Row::check("slope", inputs, re(slope), re(c.slope_target), (slope - c.slope_target).abs(), c.slope_tol));
        }
        _ => rows.push(Row::info("slope", inputs + ";status=n/a (fewer than two positive errors)", None, None)),
    }
    if c.calibration {
        let l = *c.lambda.last().expect("validated non-empty");
        let cal = half_turn_calibration(l, 1.0)?;
        diag.insert("calibration_constant".into(), json!([cal.ratio().re, cal.ratio().im]));
        rows.push(Row::info("calibration", format!("lambda={l};a=1;b=0.5;eps=1;pole"), Some(cal.brute), Some(cal.integral)));
    }
    Ok(rows)
}

struct Cp1Setup {
    ham: RotationHamiltonian,
    datum: FixedPointDatum,
    window: ltf_core::cp1::window::Window,
    model: SpectralModel,
}

fn cp1_setup(cfg: &RunConfig, lambda_max: f64, diag: &mut BTreeMap<String, Value>) -> Result<Cp1Setup> {
    let c = &cfg.cp1;
    let ham = RotationHamiltonian::new(c.a, c.b)?;
    let datum = fixed_point_datum_at_pole(&ham, c.period, Complex64::new(1.0, 0.0))?;
    let window = isolated_window(&ham, datum.tau0, c.window_eps())?;
    let model = build_spectral_model(ham, SpectralModel::kmax_for(&ham, lambda_max, window.eps))?;
    diag.insert("tau0".into(), json!(datum.tau0));
    diag.insert("beta".into(), json!(c.b * datum.tau0));
    diag.insert("eps".into(), json!(window.eps));
    diag.insert("kmax".into(), json!(model.kmax));
    diag.insert("alpha".into(), json!([model.lift.alpha0, model.lift.alpha1]));
    diag.insert("lift_ode_deviation".into(), json!(model.lift.ode_deviation));
    Ok(Cp1Setup { ham, datum, window, model })
}

fn cp1_inputs(cfg: &RunConfig, eps: f64) -> String {
    let c = &cfg.cp1;
    format!("a={};b={};period={};eps={eps}", c.a, c.b, c.period)
}

fn cp1_profile(cfg: &RunConfig, diag: &mut BTreeMap<String, Value>) -> Result<Vec<Row>> {
    let c = &cfg.cp1;
    let lmax = *c.profile_lambda.last().expect("validated non-empty");
    let s = cp1_setup(cfg, lmax, diag)?;
    let base = cp1_inputs(cfg, s.window.eps);
    let grid = symmetric_grid(c.n_radius, c.n_per_side);
    let linear = Chart::linear();
    let skewed = Chart::skewed(Complex64::new(c.parity_skew[0], c.parity_skew[1]));
    let (g0, g1) = (c.symbol_pole, c.symbol_slope);
    let symbol = ToeplitzSymbol::invariant(move |h| g0 + g1 * h);
    let datum_g = FixedPointDatum { rho0: Complex64::new(c.symbol_pole, 0.0), ..s.datum.clone() };
    let beta = c.b * s.datum.tau0;
    let expected_width = -2.0 * (beta / 2.0).sin().powi(2) / s.ham.a;
    let mut rows = Vec::new();
    let mut parity = Vec::new();
    for &l in &c.profile_lambda {
        let lid = lam_id(l);
        let inputs = format!("{base};lambda={l}");
        let scan = profile_scan(&s.model, &s.datum, l, &grid, &s.window, &ToeplitzSymbol::Identity, &linear)?;
        for sample in &scan.samples {
            let id = format!("profile/{lid}/{}", n_id(&sample.n));
            let row_inputs = format!("{inputs};n={},{};chart=linear", sample.n[0], sample.n[1]);
            if sample.n.amax() == 0.0 {
                let dev = (sample.brute / sample.predicted - 1.0).norm();
                rows.push(Row::check(id, row_inputs, sample.brute, sample.predicted, dev, c.ratio_tol));
            } else {
                rows.push(Row::info(id, row_inputs, Some(sample.brute), Some(sample.predicted)));
            }
        }
        let s0 = scan.at_origin().context("the displacement grid contains the origin")?.brute;
        let width = scan.gaussian_width().context("width fit needs at least two radii")?;
        rows.push(Row::check(
            format!("width/{lid}"),
            format!("{inputs};n_radius={};n_per_side={}", c.n_radius, c.n_per_side),
            re(width),
            re(expected_width),
            (width / expected_width - 1.0).abs(),
            c.width_tol,
        ));
        let at0 = heisenberg_displace(&RVec::zeros(2), l, &linear)?;
        let sg = brute_force_s(&s.model, &at0, l, &s.window, &symbol)?;
        let want = s0 * c.symbol_pole;
        rows.push(Row::check(
            format!("symbol/{lid}"),
            format!("{inputs};n=0;symbol={}{:+}h", c.symbol_pole, c.symbol_slope),
            sg,
            want,
            (sg / want - 1.0).norm(),
            c.symbol_tol,
        ));
        let pg = predicted_kernel(&datum_g, l, &RVec::zeros(2), Complex64::new(s.window.chi(s.datum.tau0), 0.0))?.value;
        rows.push(Row::info(format!("symbol-prediction/{lid}"), format!("{inputs};n=0"), Some(sg), Some(pg)));
        rows.push(Row::info(format!("parity-linear/{lid}"), format!("{inputs};chart=linear"), Some(re(scan.odd_even_ratio())), None));
        let skew_scan = profile_scan(&s.model, &s.datum, l, &grid, &s.window, &ToeplitzSymbol::Identity, &skewed)?;
        let ratio = skew_scan.odd_even_ratio();
        parity.push(ratio);
        rows.push(Row::check(
            format!("parity/{lid}"),
            format!("{inputs};chart_skew={},{}", c.parity_skew[0], c.parity_skew[1]),
            re(ratio),
            re(0.0),
            ratio,
            c.parity_tol,
        ));
    }
    if parity.len() >= 2 {
        let (first, last) = (parity[0], parity[parity.len() - 1]);
        rows.push(
            Row::check(
                "parity/trend",
                format!("{base};lambda={}..{lmax}", c.profile_lambda[0]),
                re(last),
                re(first),
                last - first,
                0.0,
            )
            .strict(),
        );
    }
    diag.insert("expected_width".into(), json!(expected_width));
    Ok(rows)
}

fn cp1_decay(cfg: &RunConfig, diag: &mut BTreeMap<String, Value>) -> Result<Vec<Row>> {
    let c = &cfg.cp1;
    let lmax = *c.decay_lambda.last().expect("validated non-empty");
    let s = cp1_setup(cfg, lmax, diag)?;
    let base = cp1_inputs(cfg, s.window.eps);
    let table = off_locus_scan(&s.model, &c.decay_radii, &c.decay_lambda, &s.window)?;
    let side = |far: bool| if far { "far" } else { "near" };
    let mut rows: Vec<Row> = table
        .rows
        .iter()
        .map(|r| {
            Row::info(
                format!("decay/r={:.3}/{}/{}", r.r, side(r.far_pole), lam_id(r.lambda)),
                format!("{base};r={};pole={};lambda={}", r.r, side(r.far_pole), r.lambda),
                Some(r.value),
                Some(re(r.reference)),
            )
        })
        .collect();
    let grid = c.decay_lambda.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ");
    for &r in &c.decay_radii {
        for far in [false, true] {
            let inputs = format!("{base};r={r};pole={};lambda={grid}", side(far));
            let id = format!("slope/r={r:.3}/{}", side(far));
            match table.slope(r, far) {
                Some(slope) if c.decay_lambda.len() >= 2 => {
                    rows.push(Row::check(id, inputs, re(slope), re(c.decay_slope_max), slope, c.decay_slope_max));
                }
                _ => rows.push(Row::info(id, inputs + ";status=n/a", None, None)),
            }
            for (k, slope) in table.growing_window_slopes(r, far).into_iter().enumerate() {
                let upto = c.decay_lambda[k + 1];
                rows.push(Row::info(
                    format!("window-slope/r={r:.3}/{}/{}", side(far), lam_id(upto)),
                    format!("{base};r={r};pole={};lambda={}..{upto}", side(far), c.decay_lambda[0]),
                    slope.map(re),
                    None,
                ));
            }
        }
    }
    Ok(rows)
}

fn cp1_negative(cfg: &RunConfig, diag: &mut BTreeMap<String, Value>) -> Result<Vec<Row>> {
    let c = &cfg.cp1;
    let lmax = *c.negative_lambda.last().expect("validated non-empty");
    let s = cp1_setup(cfg, lmax, diag)?;
    let base = cp1_inputs(cfg, s.window.eps);
    let mut jobs = Vec::new();
    for &l in &c.negative_lambda {
        for p in &c.negative_points {
            jobs.push((l, RVec::from_row_slice(p)));
        }
    }
    jobs.par_iter()
        .map(|(l, n)| -> Result<Row> {
            let point = heisenberg_displace(n, *l, &Chart::linear())?;
            let pos = brute_force_s(&s.model, &point, *l, &s.window, &ToeplitzSymbol::Identity)?;
            let neg = brute_force_s(&s.model, &point, -l, &s.window, &ToeplitzSymbol::Identity)?;
            let ratio = negative_lambda_ratio(&s.model, &point, *l, &s.window)?;
            Ok(Row::check(
                format!("negative/{}/{}", lam_id(*l), n_id(n)),
                format!("{base};lambda={l};n={},{};chart=linear", n[0], n[1]),
                neg,
                pos,
                ratio,
                c.negative_tol,
            ))
        })
        .collect()
}
