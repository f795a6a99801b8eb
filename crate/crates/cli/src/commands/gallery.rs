use bs_spectral::contour::index;
use bs_spectral::jordan::{algebraic_multiplicity, default_k_max, monomial_diagonal, MultiplicityValue};
use bs_spectral::{Complex64, Contour};
use serde_json::json;

use super::{run_jobs, Job};
use crate::config::Tolerances;
use crate::report::CaseRecord;

struct Case {
    id: &'static str,
    anchor: &'static str,
    exponents: Vec<Option<usize>>,
    /// `(mg, ma, lengths)`; `None` for infinite multiplicity.
    expected: Option<(usize, usize, Vec<usize>)>,
}

fn cases() -> Vec<Case> {
    vec![
        Case {
            id: "diag-z-1-1",
            anchor: "simple zero of diag(z,1,1)",
            exponents: vec![Some(1), Some(0), Some(0)],
            expected: Some((1, 1, vec![1])),
        },
        Case {
            id: "diag-z-z2-1",
            anchor: "chains of lengths 2 and 1 for diag(z,z^2,1)",
            exponents: vec![Some(1), Some(2), Some(0)],
            expected: Some((2, 3, vec![2, 1])),
        },
        Case {
            id: "diag-z-z5-1",
            anchor: "maximal chain length k for diag(z,z^k,1), k = 5",
            exponents: vec![Some(1), Some(5), Some(0)],
            expected: Some((2, 6, vec![5, 1])),
        },
        Case {
            id: "diag-z-z2-z2-1",
            anchor: "algebraic multiplicity equals the sum of exponents for diag(z,z^2,z^2,1)",
            exponents: vec![Some(1), Some(2), Some(2), Some(0)],
            expected: Some((3, 5, vec![2, 2, 1])),
        },
        Case {
            id: "diag-0-z-1",
            anchor: "identically vanishing determinant gives unbounded chains",
            exponents: vec![None, Some(1), Some(0)],
            expected: None,
        },
    ]
}

fn run_case(case: &Case, tol: &Tolerances) -> CaseRecord {
    let origin = Complex64::new(0.0, 0.0);
    let expected = match &case.expected {
        Some((mg, ma, lengths)) => json!({"mg": mg, "ma": ma, "lengths": lengths}),
        None => json!({"ma": "exceeded_cap", "det_identically_zero": true}),
    };
    let report = monomial_diagonal(&case.exponents).and_then(|f| algebraic_multiplicity(&f, origin, default_k_max(case.exponents.len())));
    let r = match report {
        Ok(r) => r,
        Err(e) => return CaseRecord::failed(case.id, case.anchor, expected, e),
    };
    let methods: Vec<_> = r.method_values().into_iter().map(|(m, v)| json!([m, v])).collect();
    match &case.expected {
        Some((mg, ma, lengths)) => {
            let got = json!({"mg": r.mg, "ma": r.ma, "lengths": r.lengths, "methods": methods, "index_residual": r.index_residual});
            let exact = r.mg == *mg && r.ma == MultiplicityValue::Finite(*ma) && &r.lengths == lengths && r.methods_agree() && r.methods.len() >= 3;
            CaseRecord::new(case.id, case.anchor, expected, got, exact, Some(r.residual.max(r.index_residual.unwrap_or(0.0))), tol.for_family("gallery", None))
        }
        None => {
            let got = json!({"ma": r.ma, "det_identically_zero": r.det_identically_zero, "mg": r.mg});
            let exact = r.ma == MultiplicityValue::ExceededCap && r.det_identically_zero;
            CaseRecord::new(case.id, case.anchor, expected, got, exact, None, tol.default)
        }
    }
}

fn index_case(tol: &Tolerances) -> CaseRecord {
    let id = "index-diag-z-z2-1";
    let anchor = "index of diag(z,z^2,1) around the origin counts its zeros";
    let expected = json!(3);
    let res = monomial_diagonal(&[Some(1), Some(2), Some(0)])
        .and_then(|f| Contour::circle(Complex64::new(0.0, 0.0), 0.5).and_then(|c| index(&f, &c)));
    match res {
        Ok(iv) => CaseRecord::new(id, anchor, expected, json!(iv.value), iv.value == 3, Some(iv.residual), tol.for_family("index", Some(1e-6))),
        Err(e) => CaseRecord::failed(id, anchor, expected, e),
    }
}

/// Multiplicities of the diagonal monomial families by the Toeplitz, index and winding paths.
pub fn run_gallery(tol: &Tolerances) -> Vec<CaseRecord> {
    let all = cases();
    let mut jobs: Vec<Job> = all.iter().map(|c| Box::new(move || vec![run_case(c, tol)]) as Job).collect();
    jobs.push(Box::new(move || vec![index_case(tol)]));
    run_jobs(jobs)
}
