//! Parallel driver for the mean-square computation.

use cuspl_core::forms::CuspForm;
use cuspl_core::meanvalue::{self, MomentReport, PanelResult};
use cuspl_core::{QuadratureSpec, Result};
use rayon::prelude::*;

/// Same result as [`meanvalue::moment_report`], with panels spread over
/// `threads` workers (`0` = machine parallelism). The reduction runs in
/// panel order, so the report does not depend on the thread count.
pub fn moment_report_parallel(
    form: &CuspForm,
    m: usize,
    sigma: f64,
    t_grid: &[f64],
    quad: QuadratureSpec,
    threads: usize,
) -> Result<MomentReport> {
    let plan = meanvalue::plan(m, sigma, t_grid, quad)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| cuspl_core::Error::Domain(format!("thread pool: {e}")))?;
    let (head, results) = pool.install(|| {
        let results: Result<Vec<PanelResult>> =
            (0..plan.panels.len()).into_par_iter().map(|i| meanvalue::evaluate_panel(form, &plan, i)).collect();
        (meanvalue::head_integral(form, m, sigma), results)
    });
    meanvalue::assemble(form, &plan, head?, &results?)
}
