use crate::error::{domain, Result};

pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(domain("workers must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| domain(format!("cannot start {workers} worker threads: {e}")))
}

/// Sample mean and standard error from integer sums, scaled by `1/scale`.
pub(crate) fn mean_and_stderr(sum: u128, sum_sq: u128, samples: u64, scale: f64) -> (f64, Option<f64>) {
    let n = samples as f64;
    let mean = sum as f64 / n;
    let stderr = (samples > 1).then(|| {
        // exact numerator: N*sum_sq - sum^2
        let centered = (samples as u128 * sum_sq).saturating_sub(sum * sum) as f64;
        (centered / (n * (n - 1.0)) / n).sqrt() / scale
    });
    (mean / scale, stderr)
}
