use bs_spectral::bs::{chain_backward, chain_forward, chain_range_check, geometric_equality, seeded_trial, BsProblem};
use bs_spectral::jordan::{ChainKind, JordanChain};
use bs_spectral::seeded::{self, SeededRng};
use bs_spectral::{Complex64, ComplexMatrix, ComplexVector, Error};
use rand::Rng;
use serde_json::json;

use super::{c64, run_jobs, Job};
use crate::config::{RoundtripParams, Tolerances};
use crate::report::CaseRecord;

/// Independent stream per trial so results do not depend on scheduling.
fn trial_rng(seed: u64, trial: usize) -> SeededRng {
    seeded::rng(seed ^ (trial as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn block_sizes(rng: &mut SeededRng, n: usize, max_len: usize) -> Vec<usize> {
    let blocks = rng.gen_range(1..=2usize);
    let mut sizes: Vec<usize> = (0..blocks).map(|_| rng.gen_range(1..=max_len)).collect();
    while sizes.iter().sum::<usize>() > n {
        sizes.pop();
    }
    if sizes.is_empty() {
        sizes.push(1);
    }
    sizes
}

fn trial_case(seed: u64, t: usize, params: &RoundtripParams, tol: f64) -> CaseRecord {
    let id = format!("trial/{t:04}");
    let anchor = "H chain maps to a family chain and back; range condition holds";
    let mut rng = trial_rng(seed, t);
    let sizes = block_sizes(&mut rng, params.dim, params.max_chain_len);
    let z0 = seeded::complex(&mut rng);
    let expected = json!({"mg": sizes.len(), "blocks": sizes});
    let mut run = || -> bs_spectral::Result<CaseRecord> {
        let trial = seeded_trial(&mut rng, params.dim, &sizes, z0)?;
        let p = &trial.problem;
        let mut forward = 0.0f64;
        let mut backward = 0.0f64;
        let mut range = 0.0f64;
        for chain in &trial.chains {
            let fwd = chain_forward(p, z0, chain)?;
            let back = chain_backward(p, z0, &fwd.output)?;
            forward = forward.max(fwd.output_residual);
            backward = backward.max(back.output_residual).max(back.consistency_residual);
            range = range.max(chain_range_check(p, z0, chain)?);
        }
        let (mg_h, mg_bs) = geometric_equality(p, z0)?;
        let got = json!({"z0": c64(z0), "mg_h": mg_h, "mg_family": mg_bs, "forward": forward, "backward": backward, "range": range});
        let exact = mg_h == sizes.len() && mg_bs == mg_h;
        Ok(CaseRecord::new(id.clone(), anchor, expected.clone(), got, exact, Some(forward.max(backward).max(range)), tol))
    };
    run().unwrap_or_else(|e| CaseRecord::failed(id.clone(), anchor, expected.clone(), e))
}

/// `H0 = 2`, `V1 = V2 = 1`: `H = 3`, the family `1 + 1/(2 - z)` vanishes at 3.
fn scalar_toy(tol: f64) -> CaseRecord {
    let anchor = "scalar problem H0 = 2, V = 1: eigenvector 1 at z = 3 maps to phi = 1 and back";
    let run = || -> bs_spectral::Result<CaseRecord> {
        let one = ComplexMatrix::from_real_diag(&[1.0]);
        let p = BsProblem::new(ComplexMatrix::from_real_diag(&[2.0]), one.clone(), one)?;
        let z0 = Complex64::new(3.0, 0.0);
        let chain = JordanChain::new(z0, vec![ComplexVector::from_real(&[1.0])], ChainKind::OperatorChain)?;
        let fwd = chain_forward(&p, z0, &chain)?;
        let back = chain_backward(&p, z0, &fwd.output)?;
        let phi = fwd.output.vectors()[0][0];
        let r = fwd.max_residual().max(back.max_residual());
        Ok(CaseRecord::new("scalar-toy", anchor, json!([1.0, 0.0]), json!(c64(phi)), true, Some(r.max((phi - 1.0).norm())), tol))
    };
    run().unwrap_or_else(|e| CaseRecord::failed("scalar-toy", anchor, json!([1.0, 0.0]), e))
}

/// A vector that is not in the kernel must be rejected.
fn not_a_chain() -> CaseRecord {
    let anchor = "non-eigenvector input is rejected";
    let one = ComplexMatrix::from_real_diag(&[1.0, 1.0]);
    let res = BsProblem::new(ComplexMatrix::from_real_diag(&[2.0, 5.0]), one.clone(), one).and_then(|p| {
        let z0 = Complex64::new(3.0, 0.0);
        let chain = JordanChain::new(z0, vec![ComplexVector::from_real(&[0.0, 1.0])], ChainKind::OperatorChain)?;
        chain_forward(&p, z0, &chain)
    });
    let rejected = matches!(res, Err(Error::NotAChain { .. }));
    let got = match &res {
        Ok(_) => json!("accepted"),
        Err(e) => json!(e.to_string()),
    };
    CaseRecord::new("not-a-chain", anchor, json!("not a chain"), got, rejected, None, 0.0)
}

pub fn run_bs_roundtrip(params: &RoundtripParams, seed: u64, tol: &Tolerances) -> bs_spectral::Result<Vec<CaseRecord>> {
    if params.dim < 2 || params.max_chain_len == 0 || params.max_chain_len > params.dim {
        return Err(Error::InvalidArgument(format!(
            "need dim >= 2 and 1 <= max_chain_len <= dim, got dim {} max_chain_len {}",
            params.dim, params.max_chain_len
        )));
    }
    let t = tol.for_family("bs-roundtrip", None);
    let mut jobs: Vec<Job> = (0..params.trials).map(|k| Box::new(move || vec![trial_case(seed, k, params, t)]) as Job).collect();
    jobs.push(Box::new(move || vec![scalar_toy(t), not_a_chain()]));
    Ok(run_jobs(jobs))
}
