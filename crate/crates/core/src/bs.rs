//! Birman-Schwinger chain transfer between `H = H0 + V2^* V1` and the family
//! `z -> I + V1 (H0 - z)^{-1} V2^*`, plus the resolvent identities tying them.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize};

use crate::contour::search::{locate_spectrum, SpectrumOptions};
use crate::contour::{index, riesz_projection};
use crate::error::{Error, Result};
use crate::family::{make_bs_family, OperatorFamily};
use crate::jordan::{
    algebraic_multiplicity_with, verify_family_chain, verify_operator_chain, ChainKind, JordanChain, MultiplicityOptions,
    MultiplicityValue,
};
use crate::numerics::{inverse, lu_factor, rank_nullspace_scaled, ComplexMatrix, ComplexVector, Contour, LuFactors, DEFAULT_REL_TOL};
use crate::seeded::{self, SeededRng};

/// Tolerance an input chain must meet before it is transferred.
pub const CHAIN_TOLERANCE: f64 = 1e-8;
const ZERO_VECTOR: f64 = 1e-12;

/// `H0` on the n-dimensional space and `V1, V2` mapping it into an m-dimensional one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BsProblem {
    #[serde(rename = "H0")]
    h0: ComplexMatrix,
    #[serde(rename = "V1")]
    v1: ComplexMatrix,
    #[serde(rename = "V2")]
    v2: ComplexMatrix,
    #[serde(skip)]
    h: ComplexMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    #[serde(rename = "H0", alias = "h0")]
    h0: ComplexMatrix,
    #[serde(rename = "V1", alias = "v1")]
    v1: ComplexMatrix,
    #[serde(rename = "V2", alias = "v2")]
    v2: ComplexMatrix,
}

impl<'de> Deserialize<'de> for BsProblem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawProblem::deserialize(d)?;
        BsProblem::new(raw.h0, raw.v1, raw.v2).map_err(serde::de::Error::custom)
    }
}

impl BsProblem {
    pub fn new(h0: ComplexMatrix, v1: ComplexMatrix, v2: ComplexMatrix) -> Result<Self> {
        if !h0.is_square() {
            return Err(Error::DimensionMismatch("H0 must be square".into()));
        }
        let n = h0.rows();
        if v1.cols() != n || v2.cols() != n || v1.rows() != v2.rows() {
            return Err(Error::DimensionMismatch(format!(
                "V1 {}x{} and V2 {}x{} against H0 {n}x{n}",
                v1.rows(),
                v1.cols(),
                v2.rows(),
                v2.cols()
            )));
        }
        let h = &h0 + &v2.adjoint().matmul(&v1)?;
        Ok(Self { h0, v1, v2, h })
    }

    /// Unfactored perturbation: `V1 = V`, `V2 = I`.
    pub fn simple(h0: ComplexMatrix, v: ComplexMatrix) -> Result<Self> {
        let n = h0.rows();
        Self::new(h0, v, ComplexMatrix::identity(n))
    }

    /// Real diagonal potential split as `V1 = sign(v)|v|^{1/2}`, `V2 = |v|^{1/2}`.
    pub fn symmetrized(h0: ComplexMatrix, v: &[f64]) -> Result<Self> {
        let root: Vec<f64> = v.iter().map(|x| x.abs().sqrt()).collect();
        let signed: Vec<f64> = v.iter().zip(&root).map(|(x, r)| if *x < 0.0 { -r } else { *r }).collect();
        Self::new(h0, ComplexMatrix::from_real_diag(&signed), ComplexMatrix::from_real_diag(&root))
    }

    pub fn h0(&self) -> &ComplexMatrix {
        &self.h0
    }

    pub fn v1(&self) -> &ComplexMatrix {
        &self.v1
    }

    pub fn v2(&self) -> &ComplexMatrix {
        &self.v2
    }

    /// `H0 + V2^* V1`.
    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h0.rows()
    }

    pub fn m(&self) -> usize {
        self.v1.rows()
    }

    /// `|V2^* V1|_F`.
    pub fn coupling_norm(&self) -> f64 {
        (&self.h - &self.h0).norm_fro()
    }

    pub fn family(&self) -> Result<OperatorFamily> {
        make_bs_family(self.h0.clone(), self.v1.clone(), self.v2.clone())
    }

    fn free_lu(&self, z: Complex64) -> Result<LuFactors> {
        lu_factor(&self.h0.shift_diag(z)).map_err(|e| match e {
            Error::SingularMatrix { .. } => Error::DomainError { z },
            other => other,
        })
    }
}

pub fn bs_family(p: &BsProblem) -> Result<OperatorFamily> {
    p.family()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainTransferReport {
    pub direction: Direction,
    pub input: JordanChain,
    pub output: JordanChain,
    pub input_residual: f64,
    pub output_residual: f64,
    /// `max_j |V1 f_j - phi_j|` relative to `max(1, |phi_0|)`.
    pub consistency_residual: f64,
}

impl ChainTransferReport {
    pub fn max_residual(&self) -> f64 {
        self.input_residual.max(self.output_residual).max(self.consistency_residual)
    }
}

fn check_dim(chain: &JordanChain, n: usize, what: &str) -> Result<()> {
    if chain.dim() != n {
        return Err(Error::DimensionMismatch(format!("{what} chain of dimension {} against {n}", chain.dim())));
    }
    Ok(())
}

fn consistency(v1: &ComplexMatrix, fs: &[ComplexVector], phis: &[ComplexVector]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (f, phi) in fs.iter().zip(phis) {
        worst = worst.max((&v1.mul_vec(f)? - phi).norm());
    }
    Ok(worst / phis[0].norm().max(1.0))
}

/// Chain of `H` at `z0` to a chain of the Birman-Schwinger family: `phi_j = V1 f_j`.
pub fn chain_forward(p: &BsProblem, z0: Complex64, chain_f: &JordanChain) -> Result<ChainTransferReport> {
    check_dim(chain_f, p.n(), "H")?;
    p.free_lu(z0)?;
    let input_residual = verify_operator_chain(p.h(), z0, chain_f)?;
    if !(input_residual <= CHAIN_TOLERANCE) {
        return Err(Error::NotAChain { residual: input_residual });
    }
    let phis: Vec<ComplexVector> = chain_f.vectors().iter().map(|f| p.v1.mul_vec(f)).collect::<Result<_>>()?;
    let norm = phis[0].norm();
    if norm <= ZERO_VECTOR * chain_f.vectors()[0].norm().max(1.0) {
        return Err(Error::VanishingEigenvector { norm });
    }
    let consistency_residual = consistency(&p.v1, chain_f.vectors(), &phis)?;
    let output = JordanChain::new(z0, phis, ChainKind::FamilyChain)?;
    let output_residual = verify_family_chain(&p.family()?, z0, &output)?;
    Ok(ChainTransferReport {
        direction: Direction::Forward,
        input: chain_f.clone(),
        output,
        input_residual,
        output_residual,
        consistency_residual,
    })
}

/// Chain of the family at `z0` lifted to a chain of `H`:
/// `f_0 = -(H0 - z0)^{-1} V2^* phi_0` and `f_j = (H0 - z0)^{-1}(f_{j-1} + V2^* S_j)` with
/// `S_j = sum_{l <= j} V1 (H0 - z0)^{-(l+1)} V2^* phi_{j-l}`, which equals `-phi_j` on a chain.
pub fn chain_backward(p: &BsProblem, z0: Complex64, chain_phi: &JordanChain) -> Result<ChainTransferReport> {
    check_dim(chain_phi, p.m(), "family")?;
    let lu = p.free_lu(z0)?;
    let input_residual = verify_family_chain(&p.family()?, z0, chain_phi)?;
    if !(input_residual <= CHAIN_TOLERANCE) {
        return Err(Error::NotAChain { residual: input_residual });
    }
    let phis = chain_phi.vectors();
    let k = phis.len();
    let v2_adj = p.v2.adjoint();
    let u: Vec<ComplexVector> = phis.iter().map(|phi| v2_adj.mul_vec(phi)).collect::<Result<_>>()?;
    // powers[l][i] = (H0 - z0)^{-(l+1)} V2^* phi_i, only for l + i < k.
    let mut powers: Vec<Vec<ComplexVector>> = Vec::with_capacity(k);
    powers.push(u.iter().map(|x| lu.solve_vec(x)).collect::<Result<_>>()?);
    for l in 1..k {
        let next: Vec<ComplexVector> = powers[l - 1][..k - l].iter().map(|x| lu.solve_vec(x)).collect::<Result<_>>()?;
        powers.push(next);
    }

    let mut fs: Vec<ComplexVector> = Vec::with_capacity(k);
    fs.push(powers[0][0].scale(Complex64::new(-1.0, 0.0)));
    for j in 1..k {
        let mut inner = ComplexVector::zeros(p.n());
        for l in 0..=j {
            inner = &inner + &powers[l][j - l];
        }
        let s_j = p.v1.mul_vec(&inner)?;
        let rhs = &fs[j - 1] + &v2_adj.mul_vec(&s_j)?;
        fs.push(lu.solve_vec(&rhs)?);
    }
    let consistency_residual = consistency(&p.v1, &fs, phis)?;
    let output = JordanChain::new(z0, fs, ChainKind::OperatorChain).map_err(|_| Error::VanishingEigenvector { norm: 0.0 })?;
    let output_residual = verify_operator_chain(p.h(), z0, &output)?;
    Ok(ChainTransferReport {
        direction: Direction::Backward,
        input: chain_phi.clone(),
        output,
        input_residual,
        output_residual,
        consistency_residual,
    })
}

/// Largest gap in `-V1 R f_{j-1} = sum_{l=1}^{j} V1 R^{l+1} V2^* V1 f_{j-l}`, `R = (H0 - z0)^{-1}`,
/// relative to `max(1, |left side|)`.
pub fn chain_range_check(p: &BsProblem, z0: Complex64, chain_f: &JordanChain) -> Result<f64> {
    check_dim(chain_f, p.n(), "H")?;
    let lu = p.free_lu(z0)?;
    let input = verify_operator_chain(p.h(), z0, chain_f)?;
    if !(input <= CHAIN_TOLERANCE) {
        return Err(Error::NotAChain { residual: input });
    }
    let fs = chain_f.vectors();
    let k = fs.len();
    let v = &p.v2.adjoint() * &p.v1;
    let vf: Vec<ComplexVector> = fs.iter().map(|f| v.mul_vec(f)).collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for j in 1..=k.saturating_sub(1) {
        let lhs = p.v1.mul_vec(&lu.solve_vec(&fs[j - 1])?)?.scale(Complex64::new(-1.0, 0.0));
        let mut rhs = ComplexVector::zeros(p.m());
        for l in 1..=j {
            let mut x = vf[j - l].clone();
            for _ in 0..=l {
                x = lu.solve_vec(&x)?;
            }
            rhs = &rhs + &p.v1.mul_vec(&x)?;
        }
        worst = worst.max((&lhs - &rhs).norm() / lhs.norm().max(1.0));
    }
    Ok(worst)
}

/// `(dim ker (H - z0), dim ker (I + V1 (H0 - z0)^{-1} V2^*))`.
pub fn geometric_equality(p: &BsProblem, z0: Complex64) -> Result<(usize, usize)> {
    let m = p.family()?.eval(z0)?;
    let shifted = p.h.shift_diag(z0);
    let reference = p.h.max_abs().max(z0.norm()).max(1.0);
    let mg_h = rank_nullspace_scaled(&shifted, DEFAULT_REL_TOL, reference)?.basis.len();
    let mg_bs = rank_nullspace_scaled(&m, DEFAULT_REL_TOL, 1.0)?.basis.len();
    Ok((mg_h, mg_bs))
}

struct Resolvents {
    free: ComplexMatrix,
    full: ComplexMatrix,
    bs: ComplexMatrix,
}

fn resolvents(p: &BsProblem, z: Complex64) -> Result<Resolvents> {
    let free = inverse(&lu_factor(&p.h0.shift_diag(z))?)?;
    let full = inverse(&lu_factor(&p.h.shift_diag(z))?)?;
    let bs = ComplexMatrix::identity(p.m()).add_scaled(Complex64::new(1.0, 0.0), &p.v1.matmul(&free)?.matmul(&p.v2.adjoint())?)?;
    Ok(Resolvents { free, full, bs })
}

/// Relative gap in `(H - z)^{-1} = R0 - R0 V2^* [I + V1 R0 V2^*]^{-1} V1 R0`, `R0 = (H0 - z)^{-1}`.
pub fn resolvent_formula_check(p: &BsProblem, z0: Complex64) -> Result<f64> {
    let r = resolvents(p, z0)?;
    let bs_inv = inverse(&lu_factor(&r.bs)?)?;
    let correction = r.free.matmul(&p.v2.adjoint())?.matmul(&bs_inv)?.matmul(&p.v1)?.matmul(&r.free)?;
    let rhs = &r.free - &correction;
    Ok(r.full.max_abs_diff(&rhs)? / r.full.max_abs().max(1e-300))
}

/// Residuals of `[I + V1 R0 V2^*][I - V1 R V2^*] = I` and the product in the other order.
pub fn inverse_identities_check(p: &BsProblem, z: Complex64) -> Result<(f64, f64)> {
    let r = resolvents(p, z)?;
    let id = ComplexMatrix::identity(p.m());
    let other = id.add_scaled(Complex64::new(-1.0, 0.0), &p.v1.matmul(&r.full)?.matmul(&p.v2.adjoint())?)?;
    let ia = r.bs.matmul(&other)?.max_abs_diff(&id)?;
    let ib = other.matmul(&r.bs)?.max_abs_diff(&id)?;
    Ok((ia, ib))
}

/// For `z0` not an eigenvalue of `H`: builds
/// `xi = R0 psi - R0 V2^* [I + V1 R0 V2^*]^{-1} V1 R0 psi` and returns `|(H - z0) xi - psi| / |psi|`.
pub fn range_formula_check(p: &BsProblem, z0: Complex64, psi: &ComplexVector) -> Result<f64> {
    let lu = p.free_lu(z0)?;
    let m = p.family()?.eval(z0)?;
    let r_psi = lu.solve_vec(psi)?;
    let y = lu_factor(&m)?.solve_vec(&p.v1.mul_vec(&r_psi)?)?;
    let xi = &r_psi - &lu.solve_vec(&p.v2.adjoint().mul_vec(&y)?)?;
    let back = p.h.shift_diag(z0).mul_vec(&xi)?;
    Ok((&back - psi).norm() / psi.norm().max(1e-300))
}

#[derive(Debug, Clone, Serialize)]
pub struct BalanceReport {
    pub z0: Complex64,
    pub ma_h: i64,
    pub ma_h0: i64,
    pub index: i64,
    pub index_residual: f64,
    /// Distance of the two projection traces from the integers they round to.
    pub trace_residual: f64,
    /// Algebraic multiplicity of the zero of the family, when `z0` is not an eigenvalue of `H0`.
    pub family_ma: Option<MultiplicityValue>,
    pub holds: bool,
}

fn rounded_trace(a: &ComplexMatrix, c: &Contour) -> Result<(i64, f64)> {
    let t = riesz_projection(a, c)?.trace();
    let r = t.re.round();
    Ok((r as i64, (t - r).norm()))
}

/// `m_a(z0; H) = m_a(z0; H0) + ind(family)` on the circle `c`.
pub fn multiplicity_balance(p: &BsProblem, z0: Complex64, c: &Contour) -> Result<BalanceReport> {
    let (ma_h, rh) = rounded_trace(p.h(), c)?;
    let (ma_h0, rh0) = rounded_trace(p.h0(), c)?;
    let family = p.family()?;
    let iv = index(&family, c)?;
    let mut holds = ma_h == ma_h0 + iv.value;
    let mut family_ma = None;
    if p.free_lu(z0).is_ok() && ma_h0 == 0 {
        let r = algebraic_multiplicity_with(&family, z0, &MultiplicityOptions { contour: Some(*c), ..Default::default() })?;
        holds &= r.ma.finite().map(|m| m as i64) == Some(iv.value);
        family_ma = Some(r.ma);
    }
    Ok(BalanceReport {
        z0,
        ma_h,
        ma_h0,
        index: iv.value,
        index_residual: iv.residual,
        trace_residual: rh.max(rh0),
        family_ma,
        holds,
    })
}

/// Circle around `z0` of half the distance to the nearest other eigenvalue of `H` or `H0`, at most 1.
pub fn isolating_contour(p: &BsProblem, z0: Complex64) -> Result<Contour> {
    let opts = SpectrumOptions::default();
    let scale = p.h.max_abs().max(p.h0.max_abs()).max(1.0);
    let mut nearest = f64::INFINITY;
    for a in [p.h(), p.h0()] {
        for cl in locate_spectrum(a, &opts)? {
            let d = (cl.center - z0).norm();
            if d > 1e-6 * scale {
                nearest = nearest.min(d);
            }
        }
    }
    Contour::circle(z0, (nearest / 2.0).min(1.0))
}

/// Seeded instance with known chains of `H` at `z0`.
#[derive(Debug, Clone)]
pub struct BsTrial {
    pub problem: BsProblem,
    pub z0: Complex64,
    /// One chain per Jordan block at `z0`, longest first.
    pub chains: Vec<JordanChain>,
}

/// `H = S (J ⊕ D) S^{-1}` with Jordan blocks of the given sizes at `z0` and
/// simple eigenvalues `D` at least 0.5 away, split as `H0 = H - V2^* V1` with
/// seeded `V1, V2` of shape `n x n`. Draws are repeated until `H0 - z0` is
/// comfortably invertible.
pub fn seeded_trial(rng: &mut SeededRng, n: usize, sizes: &[usize], z0: Complex64) -> Result<BsTrial> {
    let total: usize = sizes.iter().sum();
    if total > n || sizes.contains(&0) {
        return Err(Error::InvalidArgument(format!("blocks {sizes:?} do not fit dimension {n}")));
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let mut j = ComplexMatrix::zeros(n, n);
    let mut at = 0;
    for &k in &sizes {
        j.set_block(at, at, &ComplexMatrix::jordan_block(k, z0));
        at += k;
    }
    for i in total..n {
        let mu = loop {
            let w = z0 + seeded::complex(rng) * 3.0;
            if (w - z0).norm() >= 0.5 {
                break w;
            }
        };
        j[(i, i)] = mu;
    }
    let (s, s_inv) = seeded::similarity(rng, n)?;
    let h = s.matmul(&j)?.matmul(&s_inv)?;
    let scale = (n as f64).sqrt();
    for _ in 0..64 {
        let v1 = seeded::matrix(rng, n, n).scale_real(1.0 / scale);
        let v2 = seeded::matrix(rng, n, n).scale_real(rng.gen_range(0.5..1.5) / scale);
        let h0 = &h - &v2.adjoint().matmul(&v1)?;
        let smallest = crate::numerics::singular_values(&h0.shift_diag(z0)).last().copied().unwrap_or(0.0);
        if smallest < 0.05 {
            continue;
        }
        let problem = BsProblem { h0, v1, v2, h: h.clone() };
        let mut chains = Vec::with_capacity(sizes.len());
        let mut at = 0;
        for &k in &sizes {
            let vectors: Vec<ComplexVector> = (at..at + k).map(|c| s.column(c)).collect();
            chains.push(JordanChain::new(z0, vectors, ChainKind::OperatorChain)?);
            at += k;
        }
        return Ok(BsTrial { problem, z0, chains });
    }
    Err(Error::InvalidArgument("could not draw a splitting with z0 away from the spectrum of H0".into()))
}
