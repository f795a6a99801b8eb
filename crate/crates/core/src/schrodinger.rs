//! The periodic model `-d^2/dx^2 + alpha^2 e^{ix}` on `[0, 2 pi]`: Fourier
//! truncations, Bessel closed forms for its Jordan chains, and the Floquet
//! discriminant `D(z) = cos(2 pi sqrt z)`.
//!
//! In the basis `e^{inx}` multiplication by `e^{ix}` shifts mode `n` to `n + 1`,
//! so the truncation is lower bidiagonal and its spectrum is exactly `{n^2}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::riesz_projection;
use crate::error::{Error, Result};
use crate::jordan::{operator_multiplicities_within, MultiplicityReport};
use crate::numerics::{bessel_j_orders, fold_phase, inverse, log_det, lu_factor, ComplexMatrix, ComplexVector, Contour};

pub const DEFAULT_ODE_STEPS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(default = "default_alpha")]
    pub alpha: Complex64,
    /// Fourier modes `-N..=N` (periodic) or `-N..N` shifted by 1/2 (antiperiodic).
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Points of the closed grid on `[0, 2 pi]`.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_steps")]
    pub ode_steps: usize,
}

fn default_alpha() -> Complex64 {
    Complex64::new(1.0, 0.0)
}
fn default_modes() -> usize {
    12
}
fn default_grid() -> usize {
    256
}
fn default_steps() -> usize {
    DEFAULT_ODE_STEPS
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { alpha: default_alpha(), modes: default_modes(), grid: default_grid(), ode_steps: default_steps() }
    }
}

impl ModelParams {
    pub fn new(alpha: Complex64, modes: usize) -> Self {
        Self { alpha, modes, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::NonFinite("coupling"));
        }
        if self.modes < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 modes, got {}", self.modes)));
        }
        if self.grid < 64 {
            return Err(Error::InvalidArgument(format!("grid of {} points is below 64", self.grid)));
        }
        if self.ode_steps < 1000 {
            return Err(Error::InvalidArgument(format!("{} ODE steps is below 1000", self.ode_steps)));
        }
        Ok(())
    }
}

fn banded(diag: &[f64], alpha: Complex64) -> ComplexMatrix {
    let n = diag.len();
    let a2 = alpha * alpha;
    let mut m = ComplexMatrix::from_real_diag(diag);
    for i in 0..n - 1 {
        m[(i + 1, i)] = a2;
    }
    m
}

/// `(2N+1) x (2N+1)` truncation in the basis `e^{inx}`, `n = -N..=N`.
pub fn build_periodic(params: &ModelParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let n = params.modes as i64;
    let diag: Vec<f64> = (-n..=n).map(|k| (k * k) as f64).collect();
    Ok(banded(&diag, params.alpha))
}

/// `2N x 2N` truncation in the basis `e^{i(n+1/2)x}`, `n = -N..N`.
pub fn build_antiperiodic(params: &ModelParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let n = params.modes as i64;
    let diag: Vec<f64> = (-n..n).map(|k| (k as f64 + 0.5).powi(2)).collect();
    Ok(banded(&diag, params.alpha))
}

/// Rescales the basis of a lower-bidiagonal matrix so that each nonzero
/// subdiagonal entry has modulus `max(1, |a_ii - lambda0|)`.
///
/// The coupling between the two modes sharing an eigenvalue otherwise scales like
/// `alpha^{4m} / ((2m-1)!)^2` and drops below any rank threshold for `m >= 5`.
/// A diagonal similarity leaves the Jordan structure untouched.
pub fn graded(a: &ComplexMatrix, lambda0: Complex64) -> ComplexMatrix {
    let mut g = a.clone();
    for i in 1..a.rows() {
        let s = a[(i, i - 1)];
        if s.norm() > 0.0 {
            g[(i, i - 1)] = s / s.norm() * (a[(i, i)] - lambda0).norm().max(1.0);
        }
    }
    g
}

/// `min(1/2, gap/2)`, with the gap read off the diagonal of a triangular `a`.
fn diagonal_radius(a: &ComplexMatrix, lambda0: Complex64) -> f64 {
    (0..a.rows())
        .map(|i| (a[(i, i)] - lambda0).norm())
        .filter(|&d| d > 1e-12)
        .fold(1.0, f64::min)
        / 2.0
}

/// Multiplicities of the truncation `a` at `lambda0`, rank decisions in the graded basis.
fn structure(a: &ComplexMatrix, lambda0: Complex64) -> Result<MultiplicityReport> {
    operator_multiplicities_within(&graded(a, lambda0), lambda0, diagonal_radius(a, lambda0))
}

/// Multiplicities of `m^2` for the periodic truncation.
pub fn jordan_structure(params: &ModelParams, m: usize) -> Result<MultiplicityReport> {
    check_edge(params, m)?;
    structure(&build_periodic(params)?, Complex64::new((m * m) as f64, 0.0))
}

/// Same as [`jordan_structure`] but with rank decisions in the plain Fourier basis.
pub fn jordan_structure_unscaled(params: &ModelParams, m: usize) -> Result<MultiplicityReport> {
    check_edge(params, m)?;
    let a = build_periodic(params)?;
    let l = Complex64::new((m * m) as f64, 0.0);
    operator_multiplicities_within(&a, l, diagonal_radius(&a, l))
}

/// Multiplicities of `(m - 1/2)^2` for the antiperiodic truncation.
pub fn antiperiodic_structure(params: &ModelParams, m: usize) -> Result<MultiplicityReport> {
    if m == 0 {
        return Err(Error::InvalidArgument("antiperiodic eigenvalues are indexed from m = 1".into()));
    }
    check_edge(params, m)?;
    let l = m as f64 - 0.5;
    structure(&build_antiperiodic(params)?, Complex64::new(l * l, 0.0))
}

fn check_edge(params: &ModelParams, m: usize) -> Result<()> {
    if m + 2 > params.modes {
        return Err(Error::InvalidArgument(format!("m = {m} too close to the truncation edge N = {}", params.modes)));
    }
    Ok(())
}

/// `x_g = 2 pi g / (G - 1)`, both endpoints included.
pub fn grid_points(grid: usize) -> Vec<f64> {
    (0..grid).map(|g| 2.0 * PI * g as f64 / (grid - 1) as f64).collect()
}

/// Value, first and second `x`-derivatives.
type Jet = [Complex64; 3];

fn zeta(alpha: Complex64, x: f64) -> Complex64 {
    2.0 * alpha * Complex64::new(0.0, x / 2.0).exp()
}

/// `J'_k` and `J''_k` at `z` from `J'_k = -J_{k+1} + (k/z) J_k` and the Bessel equation.
fn bessel_derivs(j: &[Complex64], k: usize, z: Complex64) -> (Complex64, Complex64) {
    let kf = k as f64;
    let d1 = -j[k + 1] + kf / z * j[k];
    let d2 = -d1 / z - (1.0 - kf * kf / (z * z)) * j[k];
    (d1, d2)
}

fn check_window(m: usize, alpha: Complex64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite("coupling"));
    }
    if 2 * m + 1 > crate::numerics::bessel::MAX_ORDER || 2.0 * alpha.norm() > crate::numerics::bessel::MAX_ARG {
        return Err(Error::DomainExceeded(format!("m = {m}, alpha = {alpha} outside the Bessel window")));
    }
    Ok(())
}

/// `y(x) = J_{2m}(2 alpha e^{ix/2})` with two derivatives.
fn eigen_jet(m: usize, alpha: Complex64, x: f64) -> Result<Jet> {
    let z = zeta(alpha, x);
    let nu = 2 * m;
    if z == Complex64::new(0.0, 0.0) {
        let v = if m == 0 { 1.0 } else { 0.0 };
        return Ok([Complex64::new(v, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]);
    }
    let j = bessel_j_orders(nu + 1, z)?;
    let (d1, d2) = bessel_derivs(&j, nu, z);
    // z' = (i/2) z, z'' = -z/4.
    let zp = Complex64::new(0.0, 0.5) * z;
    Ok([j[nu], d1 * zp, d2 * zp * zp - d1 * z / 4.0])
}

/// `dot y(x) = (2m-1)! sum_{k<2m} [(2m-k) k!]^{-1} w^{k-2m} J_k(2w)`, `w = alpha e^{ix/2}`.
fn chain_jet(m: usize, alpha: Complex64, x: f64) -> Result<Jet> {
    let z = zeta(alpha, x);
    let w = z / 2.0;
    let nu = 2 * m;
    let j = bessel_j_orders(nu + 1, z)?;
    let mut out = [Complex64::new(0.0, 0.0); 3];
    let lead: f64 = (1..nu).map(|i| i as f64).product();
    let mut k_fact = 1.0;
    for k in 0..nu {
        if k > 0 {
            k_fact *= k as f64;
        }
        let a = lead / ((nu - k) as f64 * k_fact);
        let p = k as f64 - nu as f64;
        let wp = w.powf(p);
        let (d1, d2) = bessel_derivs(&j, k, z);
        let jk = j[k];
        // d/dx w^p = (ip/2) w^p; d/dx J_k(z) = (i/2) z J_k'.
        let v = a * wp * jk;
        let dv = a * wp * (Complex64::new(0.0, p / 2.0) * jk + Complex64::new(0.0, 0.5) * z * d1);
        let ddv = a * wp * (-(p * p / 4.0) * jk - (p / 2.0) * z * d1 - z * z / 4.0 * d2 - z / 4.0 * d1);
        out[0] += v;
        out[1] += dv;
        out[2] += ddv;
    }
    Ok(out)
}

/// Samples of the eigenfunction `J_{2m}(2 alpha e^{ix/2})` on the grid.
pub fn eigenfunction(m: usize, alpha: Complex64, grid: usize) -> Result<Vec<Complex64>> {
    check_window(m, alpha)?;
    if m > 0 && alpha == Complex64::new(0.0, 0.0) {
        return Err(Error::DegenerateEigenfunction);
    }
    grid_points(grid).into_iter().map(|x| Ok(eigen_jet(m, alpha, x)?[0])).collect()
}

/// Samples of the generalized eigenfunction on the grid.
pub fn generalized_eigenfunction(m: usize, alpha: Complex64, grid: usize) -> Result<Vec<Complex64>> {
    check_window(m, alpha)?;
    if m == 0 {
        return Err(Error::InvalidArgument("no generalized eigenfunction at m = 0".into()));
    }
    if alpha == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroCoupling);
    }
    grid_points(grid).into_iter().map(|x| Ok(chain_jet(m, alpha, x)?[0])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeChainResidual {
    /// `sup |(tau - m^2) y|`.
    pub eigen: f64,
    /// `sup |(tau - m^2) dot y - y|`.
    pub chain: f64,
    /// Largest mismatch of value and derivative between `x = 0` and `x = 2 pi`, over `y` and `dot y`.
    pub periodic: f64,
}

/// Pointwise residuals of the closed-form chain against `tau = -d^2/dx^2 + alpha^2 e^{ix}`.
pub fn verify_ode_chain(m: usize, alpha: Complex64, grid: usize) -> Result<OdeChainResidual> {
    check_window(m, alpha)?;
    if m > 0 && alpha == Complex64::new(0.0, 0.0) {
        return Err(Error::DegenerateEigenfunction);
    }
    let lambda = (m * m) as f64;
    let xs = grid_points(grid);
    let mut eigen = 0.0f64;
    let mut chain = 0.0f64;
    for &x in &xs {
        let q = alpha * alpha * Complex64::new(0.0, x).exp();
        let y = eigen_jet(m, alpha, x)?;
        eigen = eigen.max((-y[2] + (q - lambda) * y[0]).norm());
        if m > 0 {
            let d = chain_jet(m, alpha, x)?;
            chain = chain.max((-d[2] + (q - lambda) * d[0] - y[0]).norm());
        }
    }
    let ends = |jet: &dyn Fn(f64) -> Result<Jet>| -> Result<f64> {
        let a = jet(0.0)?;
        let b = jet(2.0 * PI)?;
        Ok((a[0] - b[0]).norm().max((a[1] - b[1]).norm()))
    };
    let mut periodic = ends(&|x| eigen_jet(m, alpha, x))?;
    if m > 0 {
        periodic = periodic.max(ends(&|x| chain_jet(m, alpha, x))?);
    }
    Ok(OdeChainResidual { eigen, chain, periodic })
}

/// Fourier coefficients of `J_{2m}(2 alpha e^{ix/2})` on modes `-N..=N`:
/// `(-1)^k alpha^{2m+2k} / (k! (2m+k)!)` at mode `m + k`.
pub fn eigenfunction_coefficients(m: usize, alpha: Complex64, modes: usize) -> ComplexVector {
    let mut v = vec![Complex64::new(0.0, 0.0); 2 * modes + 1];
    let mut term = alpha.powu(2 * m as u32) / (1..=2 * m).map(|i| i as f64).product::<f64>();
    let a2 = alpha * alpha;
    for k in 0..=modes.saturating_sub(m) {
        v[modes + m + k] = term;
        term *= -a2 / ((k + 1) as f64 * (2 * m + k + 1) as f64);
    }
    ComplexVector::new(v).expect("finite coefficients")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloquetResult {
    pub z: Complex64,
    pub monodromy: ComplexMatrix,
    pub discriminant: Complex64,
    pub reference: Complex64,
    pub gap: f64,
    /// `|det M - 1|` with `det M` accumulated as the product of the step determinants.
    pub wronskian_residual: f64,
    /// `|ad - bc - 1|` from the entries of `M`; loses `|M|^2 eps` to cancellation.
    pub entry_det_residual: f64,
}

/// `cos(2 pi sqrt z)`, principal branch.
pub fn discriminant_closed_form(z: Complex64) -> Complex64 {
    (2.0 * PI * z.sqrt()).cos()
}

type Mat2 = [[Complex64; 2]; 2];

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

/// Monodromy of `-y'' + (alpha^2 e^{ix} - z) y = 0` over `[0, 2 pi]` by fixed-step RK4.
///
/// Columns of `M` are `(theta, theta')` and `(phi, phi')`. Each step is the
/// linear RK4 propagator, applied to `M` and to the running determinant.
pub fn monodromy(z: Complex64, alpha: Complex64, steps: usize) -> Result<FloquetResult> {
    if steps < 1000 {
        return Err(Error::InvalidArgument(format!("{steps} ODE steps is below 1000")));
    }
    if !z.is_finite() || !alpha.is_finite() {
        return Err(Error::NonFinite("monodromy input"));
    }
    let a2 = alpha * alpha;
    let h = 2.0 * PI / steps as f64;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let rhs = |x: f64, v: [Complex64; 2]| -> [Complex64; 2] { [v[1], (a2 * Complex64::new(0.0, x).exp() - z) * v[0]] };
    let rk4 = |x: f64, v: [Complex64; 2]| -> [Complex64; 2] {
        let add = |a: [Complex64; 2], b: [Complex64; 2], t: f64| [a[0] + b[0] * t, a[1] + b[1] * t];
        let k1 = rhs(x, v);
        let k2 = rhs(x + h / 2.0, add(v, k1, h / 2.0));
        let k3 = rhs(x + h / 2.0, add(v, k2, h / 2.0));
        let k4 = rhs(x + h, add(v, k3, h));
        std::array::from_fn(|j| v[j] + (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0))
    };
    let mut m: Mat2 = [[one, zero], [zero, one]];
    let mut det = one;
    for i in 0..steps {
        let x = i as f64 * h;
        let c0 = rk4(x, [one, zero]);
        let c1 = rk4(x, [zero, one]);
        let p: Mat2 = [[c0[0], c1[0]], [c0[1], c1[1]]];
        det *= p[0][0] * p[1][1] - p[0][1] * p[1][0];
        m = mul2(&p, &m);
    }
    let monodromy = ComplexMatrix::new(2, 2, vec![m[0][0], m[0][1], m[1][0], m[1][1]])?;
    let discriminant = (m[0][0] + m[1][1]) / 2.0;
    let reference = discriminant_closed_form(z);
    let entry_det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    Ok(FloquetResult {
        z,
        monodromy,
        discriminant,
        reference,
        gap: (discriminant - reference).norm(),
        wronskian_residual: (det - one).norm(),
        entry_det_residual: (entry_det - one).norm(),
    })
}

pub const BAND_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandSample {
    pub z: Complex64,
    pub discriminant: Complex64,
    /// `z` is real and nonnegative.
    pub expect_inside: bool,
    pub inside: bool,
}

impl BandSample {
    pub fn pass(&self) -> bool {
        self.expect_inside == self.inside
    }
}

/// Whether `D(z)` lies in `[-1, 1]` exactly for the real nonnegative samples.
pub fn band_check(alpha: Complex64, samples: &[Complex64], steps: usize) -> Result<Vec<BandSample>> {
    samples
        .iter()
        .map(|&z| {
            let d = monodromy(z, alpha, steps)?.discriminant;
            let inside = d.im.abs() < BAND_TOLERANCE && d.re.abs() <= 1.0 + BAND_TOLERANCE;
            Ok(BandSample { z, discriminant: d, expect_inside: z.im == 0.0 && z.re >= 0.0, inside })
        })
        .collect()
}

/// `|log det(I - (z - z0)(H_p - z0)^{-1}) - log((D(z) - 1)/(D(z0) - 1))|` for the
/// truncation with `N` modes, phases compared modulo `2 pi`.
pub fn determinant_ratio_check(z: Complex64, z0: Complex64, alpha: Complex64, modes: usize) -> Result<f64> {
    let h = build_periodic(&ModelParams::new(alpha, modes))?;
    let n = h.rows();
    let r0 = inverse(&lu_factor(&h.shift_diag(z0))?)?;
    let m = ComplexMatrix::identity(n).add_scaled(-(z - z0), &r0)?;
    let (lm, ph) = log_det(&lu_factor(&m)?)?;
    let one = Complex64::new(1.0, 0.0);
    let ratio = (discriminant_closed_form(z) - one) / (discriminant_closed_form(z0) - one);
    let target = ratio.ln();
    Ok(Complex64::new(lm - target.re, fold_phase(ph - target.im)).norm())
}

/// `|tr (H_p - z)^{-1} - D'(z)/(1 - D(z))|` with `D'(z) = -pi sin(2 pi sqrt z)/sqrt z`.
pub fn trace_resolvent_check(z: Complex64, alpha: Complex64, modes: usize) -> Result<f64> {
    let h = build_periodic(&ModelParams::new(alpha, modes))?;
    let t = inverse(&lu_factor(&h.shift_diag(z))?)?.trace();
    let s = z.sqrt();
    let d = (2.0 * PI * s).cos();
    let d_dot = -PI * (2.0 * PI * s).sin() / s;
    Ok((t - d_dot / (1.0 - d)).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieszTrace {
    pub value: i64,
    pub raw: Complex64,
    /// Distance of the raw trace from `value`.
    pub residual: f64,
}

/// Rounded trace of the Riesz projection of the periodic truncation around `m^2`, radius 1/2.
pub fn riesz_trace_check(m: usize, alpha: Complex64, modes: usize) -> Result<RieszTrace> {
    let params = ModelParams::new(alpha, modes);
    check_edge(&params, m)?;
    let h = build_periodic(&params)?;
    let c = Contour::circle(Complex64::new((m * m) as f64, 0.0), 0.5)?;
    let raw = riesz_projection(&h, &c)?.trace();
    let value = raw.re.round();
    Ok(RieszTrace { value: value as i64, raw, residual: (raw - value).norm() })
}
