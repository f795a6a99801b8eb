use bs_spectral::bs::{multiplicity_balance, BsProblem};
use bs_spectral::contour::index;
use bs_spectral::family::FamilySpec;
use serde_json::json;

use crate::config::{IndexParams, Tolerances};
use crate::report::CaseRecord;

const INDEX_TOL: f64 = 1e-6;

fn bs_problem(spec: &FamilySpec) -> Option<bs_spectral::Result<BsProblem>> {
    match spec.clone() {
        FamilySpec::BirmanSchwinger { h0, v1, v2 } => Some(BsProblem::new(h0, v1, v2)),
        FamilySpec::SimpleBs { h0, v } => Some(BsProblem::simple(h0, v)),
        _ => None,
    }
}

/// Index of one family on one contour; Birman-Schwinger families are also
/// compared with the difference of the Riesz projection traces of `H` and `H0`.
pub fn run_index(params: &IndexParams, tol: &Tolerances) -> bs_spectral::Result<Vec<CaseRecord>> {
    params.contour.validate()?;
    let family = params.family.build()?;
    let t = tol.for_family("index", Some(INDEX_TOL));
    let expected = params.expected.map_or(serde_json::Value::Null, |e| json!(e));
    let mut out = Vec::new();
    let iv = match index(&family, &params.contour) {
        Ok(iv) => iv,
        Err(e) => {
            out.push(CaseRecord::failed("index", "contour index of the family", expected, e));
            return Ok(out);
        }
    };
    let exact = params.expected.is_none_or(|e| e == iv.value);
    let got = json!({"value": iv.value, "raw": [iv.raw.re, iv.raw.im], "nodes": iv.nodes});
    out.push(CaseRecord::new("index", "contour index of the family", expected, got, exact, Some(iv.residual), t));

    if let Some(problem) = bs_problem(&params.family) {
        let anchor = "index equals m_a(H) - m_a(H0) inside the contour";
        let rec = problem
            .and_then(|p| multiplicity_balance(&p, params.contour.center, &params.contour))
            .map(|b| {
                let got = json!({"ma_h": b.ma_h, "ma_h0": b.ma_h0, "index": b.index});
                CaseRecord::new("index-balance", anchor, json!(iv.value), got, b.ma_h - b.ma_h0 == iv.value, Some(b.trace_residual.max(b.index_residual)), t)
            });
        out.push(rec.unwrap_or_else(|e| CaseRecord::failed("index-balance", anchor, json!(iv.value), e)));
    }
    Ok(out)
}
