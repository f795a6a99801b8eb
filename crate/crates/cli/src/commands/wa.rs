use bs_spectral::bs::{isolating_contour, BsProblem};
use bs_spectral::contour::search::{locate_spectrum, SpectrumOptions};
use bs_spectral::wa::wa_check;
use bs_spectral::{seeded, Complex64, ComplexMatrix, Contour, Error};
use serde_json::json;

use super::{run_jobs, Job};
use crate::config::{Tolerances, WaParams};
use crate::report::CaseRecord;

const WA_TOL: f64 = 1e-6;

fn seeded_problem(params: &WaParams, seed: Option<u64>) -> bs_spectral::Result<BsProblem> {
    if let Some(p) = &params.problem {
        return Ok(p.clone());
    }
    let split = params.seeded.unwrap_or_default();
    let seed = seed.ok_or_else(|| Error::InvalidArgument("a seeded wa problem needs --seed or a config seed".into()))?;
    if split.dim == 0 || split.rank == 0 {
        return Err(Error::InvalidArgument("seeded dim and rank must be positive".into()));
    }
    let mut rng = seeded::rng(seed);
    let h0 = ComplexMatrix::from_real_diag(&(1..=split.dim).map(|k| k as f64).collect::<Vec<_>>());
    let v1 = seeded::matrix(&mut rng, split.rank, split.dim).scale_real(split.scale);
    let v2 = seeded::matrix(&mut rng, split.rank, split.dim).scale_real(split.scale);
    BsProblem::new(h0, v1, v2)
}

fn default_points(p: &BsProblem) -> bs_spectral::Result<Vec<Complex64>> {
    let opts = SpectrumOptions::default();
    let mut pts: Vec<Complex64> = Vec::new();
    for a in [p.h(), p.h0()] {
        let scale = a.max_abs().max(1.0);
        for cl in locate_spectrum(a, &opts)? {
            if pts.iter().all(|q| (q - cl.center).norm() > 1e-6 * scale) {
                pts.push(cl.center);
            }
        }
    }
    Ok(pts)
}

fn point_case(k: usize, p: &BsProblem, z: Complex64, params: &WaParams, tol: f64) -> CaseRecord {
    let id = format!("point/{k:03}");
    let anchor = "det_p windings of I - K and the index equal m_a(H) - m_a(H0)";
    let contour = match params.radius {
        Some(r) => Contour::circle(z, r),
        None => isolating_contour(p, z),
    };
    match contour.and_then(|c| wa_check(p, z, &params.p, &c)) {
        Ok(r) => {
            let expected = json!({"difference": r.ma_h - r.ma_h0});
            let residual = r.index_residual.max(r.trace_residual);
            CaseRecord::new(id, anchor, expected, serde_json::to_value(&r).expect("serializable"), r.holds, Some(residual), tol)
        }
        Err(e) => CaseRecord::failed(id, anchor, serde_json::Value::Null, e),
    }
}

pub fn run_wa(params: &WaParams, seed: Option<u64>, tol: &Tolerances) -> bs_spectral::Result<Vec<CaseRecord>> {
    if params.p.is_empty() || params.p.contains(&0) {
        return Err(Error::InvalidArgument("p values must be positive".into()));
    }
    let problem = seeded_problem(params, seed)?;
    let points = if params.points.is_empty() { default_points(&problem)? } else { params.points.clone() };
    let t = tol.for_family("wa", Some(WA_TOL));
    let problem = &problem;
    let jobs: Vec<Job> = points
        .into_iter()
        .enumerate()
        .map(|(k, z)| Box::new(move || vec![point_case(k, problem, z, params, t)]) as Job)
        .collect();
    Ok(run_jobs(jobs))
}
