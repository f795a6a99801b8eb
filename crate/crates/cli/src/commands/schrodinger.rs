use bs_spectral::jordan::MultiplicityValue;
use bs_spectral::schrodinger::*;
use bs_spectral::Complex64;
use serde_json::json;

use super::{c64, run_jobs, Job};
use crate::config::{CheckFamily, SchrodingerParams, Tolerances};
use crate::report::CaseRecord;

const FLOQUET_TOL: f64 = 1e-6;
const WRONSKIAN_TOL: f64 = 1e-7;
const ODE_TOL: f64 = 1e-9;
const TRUNCATION_TOL: f64 = 1e-3;
const RIESZ_TOL: f64 = 1e-6;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn structure_case(model: ModelParams, m: usize, antiperiodic: bool, tol: f64) -> CaseRecord {
    let coupled = model.alpha != c(0.0, 0.0);
    let (id, anchor, lambda) = if antiperiodic {
        let l = m as f64 - 0.5;
        (format!("antiperiodic/m={m:02}"), "Jordan block at (m-1/2)^2 of the antiperiodic truncation", l * l)
    } else {
        (format!("jordan/m={m:02}"), "Jordan block at m^2 of the periodic truncation", (m * m) as f64)
    };
    let (mg, ma) = match (m, coupled, antiperiodic) {
        (0, _, false) => (1, 1),
        (_, true, _) => (1, 2),
        (_, false, _) => (2, 2),
    };
    let expected = json!({"lambda0": lambda, "mg": mg, "ma": ma});
    let r = if antiperiodic { antiperiodic_structure(&model, m) } else { jordan_structure(&model, m) };
    match r {
        Ok(r) => {
            let methods: Vec<_> = r.method_values().into_iter().map(|(m, v)| json!([m, v])).collect();
            let got = json!({"lambda0": lambda, "mg": r.mg, "ma": r.ma, "methods": methods});
            let exact = r.mg == mg && r.ma == MultiplicityValue::Finite(ma) && r.methods_agree();
            CaseRecord::new(id, anchor, expected, got, exact, Some(r.residual), tol)
        }
        Err(e) => CaseRecord::failed(id, anchor, expected, e),
    }
}

fn ode_case(model: ModelParams, m: usize, tol: f64) -> CaseRecord {
    let id = format!("ode-chain/m={m:02}");
    let anchor = "Bessel eigenfunction and generalized eigenfunction solve the chain equations with periodic ends";
    match verify_ode_chain(m, model.alpha, model.grid) {
        Ok(r) => {
            let worst = r.eigen.max(r.chain).max(r.periodic);
            CaseRecord::new(id, anchor, json!(0.0), json!(r), true, Some(worst), tol)
        }
        Err(e) => CaseRecord::failed(id, anchor, json!(0.0), e),
    }
}

/// 5 x 4 grid over `[-5, 20] x i[-2, 2]`.
fn floquet_points() -> Vec<Complex64> {
    (0..5)
        .flat_map(|i| (0..4).map(move |j| c(-5.0 + 6.25 * i as f64, -2.0 + 4.0 * j as f64 / 3.0)))
        .collect()
}

fn floquet_case(k: usize, z: Complex64, model: ModelParams, tol: f64) -> CaseRecord {
    let id = format!("floquet/{k:02}");
    let anchor = "monodromy discriminant equals cos(2 pi sqrt z) and det M = 1";
    let expected = json!({"z": c64(z), "discriminant": c64(discriminant_closed_form(z))});
    match monodromy(z, model.alpha, model.ode_steps) {
        Ok(r) => {
            let got = json!({"z": c64(z), "discriminant": c64(r.discriminant), "det_residual": r.wronskian_residual, "entry_det_residual": r.entry_det_residual});
            CaseRecord::new(id, anchor, expected, got, r.wronskian_residual < WRONSKIAN_TOL, Some(r.gap), tol)
        }
        Err(e) => CaseRecord::failed(id, anchor, expected, e),
    }
}

fn band_case(k: usize, z: Complex64, model: ModelParams) -> CaseRecord {
    let id = format!("band/{k:02}");
    let anchor = "discriminant lies in [-1, 1] exactly on the nonnegative real axis";
    let inside = z.im == 0.0 && z.re >= 0.0;
    let expected = json!({"z": c64(z), "inside": inside});
    match band_check(model.alpha, &[z], model.ode_steps) {
        Ok(s) => {
            let s = s[0];
            CaseRecord::new(id, anchor, expected, json!({"z": c64(z), "inside": s.inside, "discriminant": c64(s.discriminant)}), s.pass(), None, 0.0)
        }
        Err(e) => CaseRecord::failed(id, anchor, expected, e),
    }
}

fn band_points() -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = (0..20).map(|k| c(10.0 * k as f64 / 19.0, 0.0)).collect();
    pts.extend([c(-1.0, 0.0), c(-3.5, 0.0), c(2.0, 0.5), c(6.0, -1.0)]);
    pts
}

fn truncation_cases(alpha: Complex64, tol: f64) -> Vec<CaseRecord> {
    let z = c(0.5, 0.2);
    let z0 = c(-1.0, 0.0);
    let det_anchor = "truncated det(I - (z - z0)(H - z0)^{-1}) against (D(z) - 1)/(D(z0) - 1)";
    let tr_anchor = "truncated trace of the resolvent against D'(z)/(1 - D(z))";
    let mut out = Vec::new();
    let det = [200usize, 400].map(|n| (n, determinant_ratio_check(z, z0, alpha, n)));
    let tr = [300usize, 600].map(|n| (n, trace_resolvent_check(z0, alpha, n)));
    for (n, r) in &det {
        let id = format!("determinant/ratio-N{n:04}");
        out.push(match r {
            Ok(v) => CaseRecord::new(id, det_anchor, json!(0.0), json!(v), true, Some(*v), tol),
            Err(e) => CaseRecord::failed(id, det_anchor, json!(0.0), e),
        });
    }
    for (n, r) in &tr {
        let id = format!("determinant/trace-N{n:04}");
        out.push(match r {
            Ok(v) => CaseRecord::new(id, tr_anchor, json!(0.0), json!(v), true, Some(*v), tol),
            Err(e) => CaseRecord::failed(id, tr_anchor, json!(0.0), e),
        });
    }
    for (name, pair, anchor) in [("ratio", [&det[0].1, &det[1].1], det_anchor), ("trace", [&tr[0].1, &tr[1].1], tr_anchor)] {
        let id = format!("determinant/{name}-decay");
        if let (Ok(a), Ok(b)) = (pair[0], pair[1]) {
            out.push(CaseRecord::new(id, anchor, json!("decreasing"), json!([a, b]), b < a, None, 0.0));
        }
    }
    out
}

fn riesz_case(m: usize, model: ModelParams, tol: f64) -> CaseRecord {
    let id = format!("riesz/m={m:02}");
    let anchor = "trace of the Riesz projection around m^2";
    let want = if m == 0 { 1 } else { 2 };
    match riesz_trace_check(m, model.alpha, model.modes) {
        Ok(r) => CaseRecord::new(id, anchor, json!(want), json!({"value": r.value, "raw": c64(r.raw)}), r.value == want, Some(r.residual), tol),
        Err(e) => CaseRecord::failed(id, anchor, json!(want), e),
    }
}

/// Check families on the periodic model with the configured coupling.
pub fn run_schrodinger(params: &SchrodingerParams, tol: &Tolerances) -> bs_spectral::Result<Vec<CaseRecord>> {
    let model = params.model;
    model.validate()?;
    let top = 8.min(model.modes - 2);
    let mut jobs: Vec<Job> = Vec::new();
    let mut checks = params.checks.clone();
    checks.sort();
    checks.dedup();
    for check in checks {
        let t = |fixed| tol.for_family(check.as_str(), fixed);
        match check {
            CheckFamily::Jordan => {
                let t = t(None);
                for m in 0..=top {
                    jobs.push(Box::new(move || vec![structure_case(model, m, false, t)]));
                }
            }
            CheckFamily::Antiperiodic => {
                let t = t(None);
                for m in 1..=top {
                    jobs.push(Box::new(move || vec![structure_case(model, m, true, t)]));
                }
            }
            CheckFamily::OdeChain => {
                let t = t(Some(ODE_TOL));
                for m in 1..=4.min(top) {
                    jobs.push(Box::new(move || vec![ode_case(model, m, t)]));
                }
            }
            CheckFamily::Floquet => {
                let t = t(Some(FLOQUET_TOL));
                for (k, z) in floquet_points().into_iter().enumerate() {
                    jobs.push(Box::new(move || vec![floquet_case(k, z, model, t)]));
                }
                for (k, z) in band_points().into_iter().enumerate() {
                    jobs.push(Box::new(move || vec![band_case(k, z, model)]));
                }
            }
            CheckFamily::Determinant => {
                let t = t(Some(TRUNCATION_TOL));
                let alpha = model.alpha;
                jobs.push(Box::new(move || truncation_cases(alpha, t)));
            }
            CheckFamily::Riesz => {
                let t = t(Some(RIESZ_TOL));
                for m in 0..=4.min(top) {
                    jobs.push(Box::new(move || vec![riesz_case(m, model, t)]));
                }
            }
        }
    }
    Ok(run_jobs(jobs))
}
