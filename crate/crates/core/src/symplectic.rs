//! Symplectic linearizations and the quadratic profile forms attached to them.
//!
//! Vectors in `R^{2d}` are ordered `(x, y)`. The standard complex structure is
//! `J0 = [[0, -I], [I, 0]]` and the symplectic form is `omega0(v, w) = -v^T J0 w`;
//! every function in this crate uses that single sign convention.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;
pub type RVec = DVector<f64>;

pub const DEFAULT_SYMPLECTIC_TOL: f64 = 1e-10;
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// `[[0, -I], [I, 0]]` of size `2d`.
pub fn j0(d: usize) -> RMat {
    let mut j = RMat::zeros(2 * d, 2 * d);
    for k in 0..d {
        j[(k, d + k)] = -1.0;
        j[(d + k, k)] = 1.0;
    }
    j
}

/// The standard symplectic form, represented by `-J0`.
pub fn omega0(v: &RVec, w: &RVec) -> f64 {
    let d = v.len() / 2;
    // -v^T J0 w = sum_k (v_x w_y - v_y w_x)
    (0..d).map(|k| v[k] * w[d + k] - v[d + k] * w[k]).sum()
}

/// Off-diagonal decay exponent `-i omega0(v, w) - |v - w|^2 / 2`.
pub fn psi2(v: &RVec, w: &RVec) -> Complex64 {
    Complex64::new(-0.5 * (v - w).norm_squared(), -omega0(v, w))
}

pub(crate) fn complexify(re: &RMat, im: &RMat) -> CMat {
    re.zip_map(im, Complex64::new)
}

pub(crate) fn spectral_norm(m: &RMat) -> f64 {
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

pub(crate) fn spd_inverse(q: &RMat) -> Result<RMat> {
    q.clone().cholesky().map(|c| c.inverse()).ok_or(Error::NotPositiveDefinite)
}

/// A real `2d x 2d` matrix with `A^T J0 A = J0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    d: usize,
    m: RMat,
}

impl SymplecticMatrix {
    pub fn new(m: RMat) -> Result<Self> {
        Self::with_tolerance(m, DEFAULT_SYMPLECTIC_TOL)
    }

    pub fn with_tolerance(m: RMat, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 || m.nrows() % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "expected a square matrix of even positive size, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let deviation = symplectic_deviation(&m);
        if !(deviation <= tol) {
            return Err(Error::NotSymplectic { deviation, tol });
        }
        Ok(Self { d: m.nrows() / 2, m })
    }

    pub fn identity(d: usize) -> Self {
        Self { d, m: RMat::identity(2 * d, 2 * d) }
    }

    pub fn minus_identity(d: usize) -> Self {
        Self { d, m: -RMat::identity(2 * d, 2 * d) }
    }

    /// Multiplication by `e^{i beta}` on `C`, as a real `2 x 2` matrix.
    pub fn rotation(beta: f64) -> Self {
        let (s, c) = beta.sin_cos();
        Self { d: 1, m: RMat::from_row_slice(2, 2, &[c, -s, s, c]) }
    }

    pub fn dim_d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &RMat {
        &self.m
    }

    pub fn apply(&self, v: &RVec) -> RVec {
        &self.m * v
    }

    pub fn inverse(&self) -> RMat {
        // invertible by symplecticity; LU keeps this independent of the J0 identities
        self.m.clone().try_inverse().expect("symplectic matrices are invertible")
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        spectral_norm(&self.m)
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        let n = 2 * self.d;
        (self.m.transpose() * &self.m - RMat::identity(n, n)).amax() <= tol
    }
}

/// `max |A^T J0 A - J0|`.
pub fn symplectic_deviation(m: &RMat) -> f64 {
    let j = j0(m.nrows() / 2);
    (m.transpose() * &j * m - j).amax()
}

/// `exp(J0 S)` for a seeded random symmetric `S` with entries uniform in `[-spread, spread]`.
pub fn random_symplectic(d: usize, spread: f64, seed: u64) -> Result<SymplecticMatrix> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be at least 1".into()));
    }
    if !(spread >= 0.0) || !spread.is_finite() {
        return Err(Error::InvalidArgument(format!("spread must be finite and >= 0, got {spread}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * d;
    let mut s = RMat::zeros(n, n);
    for i in 0..n {
        for k in i..n {
            let x = if spread > 0.0 { rng.random_range(-spread..=spread) } else { 0.0 };
            s[(i, k)] = x;
            s[(k, i)] = x;
        }
    }
    let m = (j0(d) * s).exp();
    SymplecticMatrix::new(m)
}

/// Seeded random element of `U(d)`, in real form. These are exactly the orthogonal symplectic matrices.
pub fn random_unitary_symplectic(d: usize, spread: f64, seed: u64) -> Result<SymplecticMatrix> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || if spread > 0.0 { rng.random_range(-spread..=spread) } else { 0.0 };
    // Hermitian H = X + iY with X symmetric and Y antisymmetric; real form of H is [[X, -Y], [Y, X]]
    let n = 2 * d;
    let mut h = RMat::zeros(n, n);
    for i in 0..d {
        for k in i..d {
            let x = draw();
            h[(i, k)] = x;
            h[(k, i)] = x;
            h[(d + i, d + k)] = x;
            h[(d + k, d + i)] = x;
            if k > i {
                let y = draw();
                h[(d + i, k)] = y;
                h[(d + k, i)] = -y;
                h[(i, d + k)] = -y;
                h[(k, d + i)] = y;
            }
        }
    }
    SymplecticMatrix::new((j0(d) * h).exp())
}

/// `A = O P` with `O` orthogonal and `P` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarFactors {
    pub orthogonal_part: RMat,
    pub symmetric_part: RMat,
}

pub fn polar_decompose(a: &SymplecticMatrix) -> Result<PolarFactors> {
    let ata = a.m.transpose() * &a.m;
    let eig = ata.symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min_eig >= 1e-14) {
        return Err(Error::IllConditioned { min_eig });
    }
    let v = &eig.eigenvectors;
    let sqrt = RMat::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let inv_sqrt = RMat::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let p = v * sqrt * v.transpose();
    let p = (&p + p.transpose()) * 0.5;
    let o = &a.m * (v * inv_sqrt * v.transpose());
    Ok(PolarFactors { orthogonal_part: o, symmetric_part: p })
}

/// `Q_A = I + A^T A`.
pub fn q_of(a: &SymplecticMatrix) -> RMat {
    let n = 2 * a.d;
    RMat::identity(n, n) + a.m.transpose() * &a.m
}

/// `F_A = J0 (A^{-1} - I)`.
pub fn f_of(a: &SymplecticMatrix) -> RMat {
    let n = 2 * a.d;
    j0(a.d) * (a.inverse() - RMat::identity(n, n))
}

/// `G_A = A^T (A - I)`.
pub fn g_of(a: &SymplecticMatrix) -> RMat {
    let n = 2 * a.d;
    a.m.transpose() * (&a.m - RMat::identity(n, n))
}

/// Complex symmetric matrix of a quadratic form `v -> v^T M v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMatrix {
    m: CMat,
}

impl ProfileMatrix {
    /// Stores `(M + M^T) / 2`; the antisymmetric part never contributes to `v^T M v`.
    pub fn symmetrized(raw: &CMat) -> Self {
        Self { m: (raw + raw.transpose()).map(|z| z * 0.5) }
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn real_part(&self) -> RMat {
        self.m.map(|z| z.re)
    }

    pub fn imag_part(&self) -> RMat {
        self.m.map(|z| z.im)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { m: self.m.map(|z| z * c) }
    }

    pub fn quadratic_form(&self, v: &RVec) -> Complex64 {
        let re = self.real_part();
        let im = self.imag_part();
        Complex64::new(v.dot(&(&re * v)), v.dot(&(&im * v)))
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_deviation(&self, other: &ProfileMatrix) -> f64 {
        (&self.m - &other.m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// The profile matrix built from the polar factor `O` of `A`.
pub fn profile_matrix(a: &SymplecticMatrix) -> Result<ProfileMatrix> {
    let n = 2 * a.d;
    let id = RMat::identity(n, n);
    let o = polar_decompose(a)?.orthogonal_part;
    let qinv = spd_inverse(&q_of(a))?;
    let f = f_of(a);
    let g = g_of(a);
    let am = &a.m - &id;
    let re = -(am.transpose() * &o * &qinv * o.transpose() * &am);
    let im = -(g.transpose() * &qinv * &f - a.m.transpose() * j0(a.d));
    Ok(ProfileMatrix::symmetrized(&complexify(&re, &im)))
}

/// The same profile from `F_A`, `G_A` and `Q_A` only, without polar factors.
pub fn profile_matrix_alt(a: &SymplecticMatrix) -> ProfileMatrix {
    let n = 2 * a.d;
    let id = RMat::identity(n, n);
    let qinv = spd_inverse(&q_of(a)).expect("I + A^T A is positive definite");
    let f = f_of(a);
    let g = g_of(a);
    let am = &a.m - &id;
    let re = (am.transpose() * &am + f.transpose() * &qinv * &f - g.transpose() * &qinv * &g) * -0.5;
    let im = -(g.transpose() * &qinv * &f - a.m.transpose() * j0(a.d));
    ProfileMatrix::symmetrized(&complexify(&re, &im))
}

/// `n^T P_A n`.
pub fn psi2_a(a: &SymplecticMatrix, n: &RVec) -> Result<Complex64> {
    Ok(profile_matrix(a)?.quadratic_form(n))
}

/// Orthonormal basis of a subspace of `R^{2d}`, stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    pub basis: RMat,
    /// Set to the offending singular value when one lies within a factor 10 of the rank threshold.
    pub rank_gap_warning: Option<f64>,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

struct SplitSvd {
    kernel: Subspace,
    image: Subspace,
}

fn split_svd(a: &SymplecticMatrix, tol: f64) -> Result<SplitSvd> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("rank tolerance must be > 0, got {tol}")));
    }
    let n = 2 * a.d;
    let am = &a.m - RMat::identity(n, n);
    let svd = am.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let threshold = tol * smax;
    let mut warning = None;
    if threshold > 0.0 {
        for &s in sigma.iter() {
            let r = s / threshold;
            if r > 0.1 && r < 10.0 {
                log::warn!("rank gap: singular value {s:.3e} within a factor 10 of threshold {threshold:.3e}");
                warning = Some(s);
            }
        }
    }
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &k| sigma[k].total_cmp(&sigma[i]));
    let (img, ker): (Vec<usize>, Vec<usize>) = order.into_iter().partition(|&i| smax > 0.0 && sigma[i] > threshold);
    let img_cols: Vec<RVec> = img.iter().map(|&i| u.column(i).into_owned()).collect();
    let ker_cols: Vec<RVec> = ker.iter().map(|&i| vt.row(i).transpose()).collect();
    let to_mat = |cols: &[RVec]| if cols.is_empty() { RMat::zeros(n, 0) } else { RMat::from_columns(cols) };
    Ok(SplitSvd {
        kernel: Subspace { basis: to_mat(&ker_cols), rank_gap_warning: warning },
        image: Subspace { basis: to_mat(&img_cols), rank_gap_warning: warning },
    })
}

/// `ker(A - I)`.
pub fn fixed_subspace(a: &SymplecticMatrix, tol: f64) -> Result<Subspace> {
    Ok(split_svd(a, tol)?.kernel)
}

/// `im(A - I)`.
pub fn image_subspace(a: &SymplecticMatrix, tol: f64) -> Result<Subspace> {
    Ok(split_svd(a, tol)?.image)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanlinessReport {
    pub ker_dim: usize,
    pub im_dim: usize,
    pub intersection_dim: usize,
    pub ker_symplectic: bool,
    pub very_clean: bool,
    pub rank_gap_warning: bool,
}

pub fn cleanliness(a: &SymplecticMatrix, tol: f64) -> Result<CleanlinessReport> {
    let SplitSvd { kernel, image } = split_svd(a, tol)?;
    let intersection_dim = if kernel.dim() == 0 || image.dim() == 0 {
        0
    } else {
        // cosines of the principal angles
        let c = kernel.basis.transpose() * &image.basis;
        c.singular_values().iter().filter(|&&s| s >= 1.0 - tol).count()
    };
    let ker_symplectic = if kernel.dim() == 0 {
        true
    } else {
        let k = &kernel.basis;
        let gram = -(k.transpose() * j0(a.d) * k);
        let smin = gram.singular_values().iter().cloned().fold(f64::INFINITY, f64::min);
        smin > tol
    };
    Ok(CleanlinessReport {
        ker_dim: kernel.dim(),
        im_dim: image.dim(),
        intersection_dim,
        ker_symplectic,
        very_clean: intersection_dim == 0 && ker_symplectic,
        rank_gap_warning: kernel.rank_gap_warning.is_some(),
    })
}

/// Largest eigenvalue of `Re P_A` restricted to `im(A - I)`.
pub fn negdef_on_image(a: &SymplecticMatrix) -> Result<f64> {
    let report = cleanliness(a, DEFAULT_RANK_TOL)?;
    if report.intersection_dim != 0 {
        return Err(Error::Precondition("ker(A - I) meets im(A - I) nontrivially".into()));
    }
    let image = image_subspace(a, DEFAULT_RANK_TOL)?;
    if image.dim() == 0 {
        return Err(Error::Precondition("im(A - I) is trivial".into()));
    }
    let re = profile_matrix(a)?.real_part();
    let restricted = image.basis.transpose() * re * &image.basis;
    Ok(restricted.symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}
