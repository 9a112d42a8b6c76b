//! Threaded evaluation of the local indicators.

use std::num::NonZeroUsize;

use mafem_core::adapt::Estimate;
use mafem_core::estimator::{CellIndicator, EstimatorOptions, IndicatorEvaluator, IndicatorReport, OscillationReport};
use mafem_core::lagrange::{DofMap, State};
use mafem_core::problems::Problem;

/// Splits the cells into contiguous chunks, one per thread. Results are
/// concatenated in cell order, so reports match the serial estimator
/// bit for bit.
#[derive(Debug, Clone, Copy)]
pub struct ThreadedEstimator {
    pub threads: NonZeroUsize,
}

impl ThreadedEstimator {
    pub fn new(threads: usize) -> Self {
        ThreadedEstimator { threads: NonZeroUsize::new(threads).unwrap_or(NonZeroUsize::MIN) }
    }
}

impl Estimate for ThreadedEstimator {
    fn estimate(
        &self,
        state: &State,
        dofmap: &DofMap,
        problem: &Problem,
        opts: EstimatorOptions,
    ) -> mafem_core::Result<(IndicatorReport, OscillationReport)> {
        let ev = IndicatorEvaluator::new(state, dofmap, problem, opts)?;
        let nc = ev.num_cells();
        let chunk = nc.div_ceil(self.threads.get()).max(1);
        let parts: Vec<Vec<(CellIndicator, f64)>> = std::thread::scope(|s| {
            let ev = &ev;
            let handles: Vec<_> = (0..nc)
                .step_by(chunk)
                .map(|start| {
                    s.spawn(move || (start..(start + chunk).min(nc)).map(|c| (ev.indicator(c), ev.oscillation(c))).collect())
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("estimator thread panicked")).collect()
        });
        let (cells, zeta): (Vec<_>, Vec<_>) = parts.into_iter().flatten().unzip();
        Ok((IndicatorReport { cells }, OscillationReport { cells: zeta }))
    }
}
