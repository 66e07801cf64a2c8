//! Monte Carlo reduction helpers: scheduling-independent parallel folds,
//! estimates with standard errors, and least-squares slope fits.
//!
//! Parallel estimation here is deterministic by construction: samples are
//! partitioned into fixed-size chunks, each sample draws from its own
//! [`RngStream::substream`], chunks are reduced internally in sample order,
//! and chunk results are merged in chunk order on the calling thread. Thread
//! count affects wall time only, never the bits of the result.

use crate::rng::RngStream;
use crate::{Error, Result};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// Samples per scheduling unit. Fixed so that chunk boundaries (and hence
/// reduction order) do not depend on the worker pool.
const CHUNK: u64 = 4096;

/// A Monte Carlo estimate with its standard error and provenance.
#[derive(Clone, Copy, Debug)]
pub struct MCEstimate {
    pub mean: f64,
    /// Standard error of `mean`; zero for exact (non-sampled) values.
    pub stderr: f64,
    /// Number of samples that entered the estimate (zero for exact values).
    pub n_samples: u64,
    /// Stream that generated the samples.
    pub stream: RngStream,
}

impl MCEstimate {
    /// Wrap a value known exactly (no sampling performed).
    pub fn exact(value: f64, stream: RngStream) -> Self {
        MCEstimate {
            mean: value,
            stderr: 0.0,
            n_samples: 0,
            stream,
        }
    }

    /// Build an estimate from accumulated sums `sum_y`, `sum_y2` over `n`
    /// samples.
    pub(crate) fn from_sums(sum_y: f64, sum_y2: f64, n: u64, stream: RngStream) -> Self {
        let nf = n as f64;
        let mean = sum_y / nf;
        let stderr = if n >= 2 {
            let var = (sum_y2 - sum_y * sum_y / nf) / (nf - 1.0);
            (var.max(0.0) / nf).sqrt()
        } else {
            0.0
        };
        MCEstimate {
            mean,
            stderr,
            n_samples: n,
            stream,
        }
    }

    /// Two-sided z-score of this estimate against an exact reference value.
    /// An exact estimate (stderr 0) gives 0 when equal and infinity otherwise.
    pub fn z_against(&self, reference: f64) -> f64 {
        z_from(self.mean - reference, self.stderr.hypot(0.0))
    }

    /// z-score of the difference between two independent estimates.
    pub fn z_between(a: &MCEstimate, b: &MCEstimate) -> f64 {
        z_from(a.mean - b.mean, a.stderr.hypot(b.stderr))
    }
}

fn z_from(diff: f64, se: f64) -> f64 {
    if se == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / se
    }
}

/// Deterministic parallel fold over `n` Monte Carlo samples.
///
/// `step(acc, i, rng)` consumes sample `i` drawn from `stream.substream(i)`;
/// `merge` combines chunk accumulators and is applied in ascending chunk
/// order. Both must be insensitive to nothing but their arguments.
pub fn mc_fold<A, I, S, M>(n: u64, stream: RngStream, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, u64, &mut ChaCha12Rng) + Sync,
    M: Fn(A, A) -> A,
{
    let n_chunks = n.div_ceil(CHUNK);
    let partials: Vec<A> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut acc = init();
            for i in lo..hi {
                let mut rng = stream.substream(i).rng();
                step(&mut acc, i, &mut rng);
            }
            acc
        })
        .collect();
    let mut out = init();
    for p in partials {
        out = merge(out, p);
    }
    out
}

/// Estimate the mean of a scalar statistic over `n` independent samples.
pub fn estimate_mean_of<F>(n: u64, stream: RngStream, f: F) -> Result<MCEstimate>
where
    F: Fn(u64, &mut ChaCha12Rng) -> f64 + Sync,
{
    if n == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    let (sy, sy2) = mc_fold(
        n,
        stream,
        || (0.0f64, 0.0f64),
        |acc, i, rng| {
            let y = f(i, rng);
            acc.0 += y;
            acc.1 += y * y;
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    Ok(MCEstimate::from_sums(sy, sy2, n, stream))
}

/// Ordinary least squares fit of `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope under homoscedastic residuals.
    pub slope_stderr: f64,
}

/// Fit a straight line through `(x_i, y_i)`; needs at least three points for
/// a slope standard error (two for the fit itself).
pub fn ols_fit(xs: &[f64], ys: &[f64]) -> Result<OlsFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::invalid("points", "need at least 2 for a line fit"));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("points", "x values are all identical"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let ss_res: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - (intercept + slope * x);
                r * r
            })
            .sum();
        (ss_res / ((nf - 2.0) * sxx)).sqrt()
    } else {
        0.0
    };
    Ok(OlsFit {
        slope,
        intercept,
        slope_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn mean_estimate_matches_direct_sum() {
        let stream = RngStream::new(11, 0);
        let est = estimate_mean_of(10_000, stream, |_, rng| rng.random::<f64>()).unwrap();
        assert!((est.mean - 0.5).abs() < 5.0 * est.stderr.max(1e-4));
        assert!(est.stderr > 0.0 && est.stderr < 0.01);
        assert_eq!(est.n_samples, 10_000);
    }

    #[test]
    fn fold_is_identical_for_any_thread_count() {
        let stream = RngStream::new(3, 9);
        let run = || {
            mc_fold(
                20_000,
                stream,
                || 0.0f64,
                |acc, _, rng| *acc += rng.random::<f64>(),
                |a, b| a + b,
            )
        };
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = pool1.install(run);
        let b = pool4.install(run);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn exact_estimates_have_zero_error() {
        let e = MCEstimate::exact(2.5, RngStream::new(0, 0));
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.z_against(2.5), 0.0);
        assert!(e.z_against(2.6).is_infinite());
    }

    #[test]
    fn ols_recovers_a_noiseless_line() {
        let xs: Vec<f64> = (1..=8).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.75 * x).collect();
        let fit = ols_fit(&xs, &ys).unwrap();
        assert!((fit.slope + 0.75).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!(fit.slope_stderr < 1e-10);
    }
}
