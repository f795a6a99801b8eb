mod gallery;
mod index;
mod roundtrip;
mod schrodinger;
mod wa;

use rayon::prelude::*;

use crate::report::CaseRecord;

pub use gallery::run_gallery;
pub use index::run_index;
pub use roundtrip::run_bs_roundtrip;
pub use schrodinger::run_schrodinger;
pub use wa::run_wa;

pub(crate) type Job<'a> = Box<dyn Fn() -> Vec<CaseRecord> + Send + Sync + 'a>;

/// Runs the jobs on the current rayon pool; output order follows input order.
pub(crate) fn run_jobs(jobs: Vec<Job<'_>>) -> Vec<CaseRecord> {
    jobs.par_iter().flat_map_iter(|j| j()).collect()
}

pub(crate) fn c64(z: bs_spectral::Complex64) -> serde_json::Value {
    serde_json::json!([z.re, z.im])
}
