//! `certificate`: Markov bound on the probability that the discarded
//! spectral tail moves the state by more than `eps`.
//!
//! The bound is `eps^{-2r} E|X|^{2r} (c'/(2^{alpha+1} alpha))^{r/alpha}`
//! times the closed-form tail sum `sum_{n > n_keep} sigma_n^{2r}
//! lambda_n^{-r/alpha}`; it is horizon-free (valid for every `t`). With
//! `empirical = true` the frequency of `||tail of Z_t|| > eps` is estimated
//! on a reference model with `n_ref` modes and compared against the bound
//! (exit 1 when the frequency exceeds it — that would falsify the bound).

use crate::{CliError, CmdOutput, Ctx};
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;
use subou::path::{conditional_variances, sample_path, truncation_certificate, TimeGrid};
use subou::rng::RngStream;
use subou::stats::estimate_mean_of;

pub fn run(ctx: &Ctx) -> Result<CmdOutput, CliError> {
    let c = ctx
        .config
        .certificate
        .as_ref()
        .ok_or_else(|| CliError::invalid("missing [certificate] block"))?;
    let spec = ctx.config.subordinator()?;
    let op = ctx.config.spectrum(&ctx.base_dir)?;

    let tail_sum = op.tail_sum_beyond(c.n_keep, c.r)?;
    let bound = truncation_certificate(&op, &spec, c.t, c.r, c.eps, tail_sum)?;

    let mut csv = ctx.csv_header("quantity,value");
    for (quantity, value) in [
        ("t", c.t),
        ("n_keep", c.n_keep as f64),
        ("r", c.r),
        ("eps", c.eps),
        ("tail_sum", tail_sum),
        ("certificate", bound),
    ] {
        let _ = writeln!(csv, "{quantity},{value}");
    }

    let mut exit = 0;
    if c.empirical {
        let n_ref = c.n_ref.ok_or_else(|| {
            CliError::invalid("[certificate] the empirical check needs key `n_ref`")
        })?;
        if n_ref <= c.n_keep {
            return Err(CliError::invalid(format!(
                "[certificate] n_ref = {n_ref} must exceed n_keep = {}",
                c.n_keep
            )));
        }
        let mc = ctx.config.mc()?;
        let op_ref = op.truncated(n_ref)?;
        let lambda_max = *op_ref.lambdas().last().unwrap();
        let grid = TimeGrid::graded(c.t, lambda_max, ctx.config.grid.rule)?;
        let n_keep = c.n_keep;
        let eps2 = c.eps * c.eps;
        let est = estimate_mean_of(mc.n_samples, RngStream::new(ctx.seed, 0), |_i, rng| {
            let path = sample_path(&spec, &grid, rng);
            let variances = conditional_variances(&op_ref, &path, c.t)
                .expect("grid horizon matches by construction");
            let mut norm2 = 0.0;
            for (sigma, variance) in op_ref.sigmas()[n_keep..]
                .iter()
                .zip(&variances[n_keep..])
            {
                let xi: f64 = rng.sample(StandardNormal);
                let coord = sigma * (variance.sqrt() * xi);
                norm2 += coord * coord;
            }
            f64::from(u8::from(norm2 > eps2))
        })?;
        let exceed = (est.mean * mc.n_samples as f64).round();
        for (quantity, value) in [
            ("empirical_frequency", est.mean),
            ("frequency_stderr", est.stderr),
            ("n_exceed", exceed),
            ("n_samples", mc.n_samples as f64),
        ] {
            let _ = writeln!(csv, "{quantity},{value}");
        }
        if !(est.mean <= bound) {
            exit = 1;
        }
    }

    Ok(CmdOutput { csv, exit })
}
