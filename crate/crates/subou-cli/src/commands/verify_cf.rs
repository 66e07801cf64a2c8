//! `verify-cf`: empirical transforms of the clock and the subordinated
//! noise against their closed forms.
//!
//! Row groups, one row per `u`:
//! - `clock_laplace`: `E[e^{-u L_t}]` vs `exp(-t c' u^alpha)`;
//! - `noise_cf`: `E[cos(u B_{L_t})]` vs `exp(-t (c'/2^alpha) u^{2 alpha})`
//!   (a `u = 0` row is always included and must be exactly 1);
//! - `projection_axis` / `projection_diag`: the two-mode projection's CF at
//!   an axis vector and at a same-norm diagonal vector — equal closed form,
//!   so matching both verifies isotropy.
//!
//! Exit 0 iff every |z| <= 3.

use crate::{CliError, CmdOutput, Ctx};
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;
use subou::rng::RngStream;
use subou::stable::cf_subordinated_bm;
use subou::stats::estimate_mean_of;

pub fn run(ctx: &Ctx) -> Result<CmdOutput, CliError> {
    let spec = ctx.config.subordinator()?;
    let cf = ctx
        .config
        .cf
        .as_ref()
        .ok_or_else(|| CliError::invalid("missing [cf] block"))?;
    let mc = ctx.config.mc()?;
    let t = cf.t;
    if !(t > 0.0 && t.is_finite()) {
        return Err(CliError::invalid(format!("[cf] t = {t} must be positive")));
    }
    if cf.u_values.is_empty() {
        return Err(CliError::invalid("[cf] u_values must be nonempty"));
    }
    if cf.u_values.iter().any(|&u| !(u > 0.0 && u.is_finite())) {
        return Err(CliError::invalid("[cf] u_values must all be positive"));
    }
    let n = mc.n_samples;
    let base = RngStream::new(ctx.seed, 0);
    let mut csv = ctx.csv_header("quantity,u,mean,stderr,exact,z");
    let mut all_pass = true;
    let mut row = 0u64;
    let push = |csv: &mut String,
                    quantity: &str,
                    u: f64,
                    mean: f64,
                    stderr: f64,
                    exact: f64,
                    z: f64,
                    all_pass: &mut bool| {
        let _ = writeln!(csv, "{quantity},{u},{mean},{stderr},{exact},{z}");
        if !(z.abs() <= 3.0) {
            *all_pass = false;
        }
    };

    for &u in &cf.u_values {
        let exact = spec.laplace_transform(u, t)?;
        let est = estimate_mean_of(n, base.substream(row), move |_i, rng| {
            (-u * spec.sample_increment(t, rng)).exp()
        })?;
        row += 1;
        push(
            &mut csv,
            "clock_laplace",
            u,
            est.mean,
            est.stderr,
            exact,
            est.z_against(exact),
            &mut all_pass,
        );
    }

    for u in std::iter::once(0.0).chain(cf.u_values.iter().copied()) {
        let exact = cf_subordinated_bm(&spec, u, t)?;
        let est = estimate_mean_of(n, base.substream(row), move |_i, rng| {
            let l = spec.sample_increment(t, rng);
            let xi: f64 = rng.sample(StandardNormal);
            (u * l.sqrt() * xi).cos()
        })?;
        row += 1;
        push(
            &mut csv,
            "noise_cf",
            u,
            est.mean,
            est.stderr,
            exact,
            est.z_against(exact),
            &mut all_pass,
        );
    }

    // Isotropy of the two-mode projection: the CF at (u, 0) and at
    // (u/sqrt2, u/sqrt2) share the closed form exp(-t c' (u^2/2)^alpha).
    for &u in &cf.u_values {
        let exact = cf_subordinated_bm(&spec, u, t)?;
        let axis = estimate_mean_of(n, base.substream(row), move |_i, rng| {
            let l = spec.sample_increment(t, rng);
            let xi1: f64 = rng.sample(StandardNormal);
            let _xi2: f64 = rng.sample(StandardNormal);
            (u * l.sqrt() * xi1).cos()
        })?;
        row += 1;
        let w = u / std::f64::consts::SQRT_2;
        let diag = estimate_mean_of(n, base.substream(row), move |_i, rng| {
            let l = spec.sample_increment(t, rng);
            let xi1: f64 = rng.sample(StandardNormal);
            let xi2: f64 = rng.sample(StandardNormal);
            (l.sqrt() * (w * xi1 + w * xi2)).cos()
        })?;
        row += 1;
        push(
            &mut csv,
            "projection_axis",
            u,
            axis.mean,
            axis.stderr,
            exact,
            axis.z_against(exact),
            &mut all_pass,
        );
        push(
            &mut csv,
            "projection_diag",
            u,
            diag.mean,
            diag.stderr,
            exact,
            diag.z_against(exact),
            &mut all_pass,
        );
    }

    Ok(CmdOutput {
        csv,
        exit: if all_pass { 0 } else { 1 },
    })
}
