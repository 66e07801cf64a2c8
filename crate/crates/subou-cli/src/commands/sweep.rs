//! `sweep`: short-time decay of the gradient norm over a horizon grid.
//!
//! One row per horizon (`t,grad_norm,bound_rhs`), followed by a footer
//! comment with the fitted decay exponent and a two-standard-error CI when
//! at least three horizons are given. The stability index must exceed 1/2
//! and, for power-law spectra, an admissible rate exponent must exist
//! (otherwise exit 2). Exit 1 when any estimated norm exceeds its ceiling.

use crate::{CliError, CmdOutput, Ctx};
use std::fmt::Write as _;
use subou::rng::RngStream;
use subou::semigroup::{default_probes, scaling_sweep};

pub fn run(ctx: &Ctx) -> Result<CmdOutput, CliError> {
    let sw = ctx
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::invalid("missing [sweep] block"))?;
    let spec = ctx.config.subordinator()?;
    let op = ctx.config.spectrum(&ctx.base_dir)?;
    let mc = ctx.config.mc()?;
    let phi = super::build_phi(&sw.phi, op.n_modes())?;
    let probes = match &sw.probes {
        Some(list) => {
            let mut resolved = Vec::with_capacity(list.len());
            for p in list {
                resolved.push(p.resolve(op.n_modes())?);
            }
            resolved
        }
        None => default_probes(op.n_modes()),
    };

    let table = scaling_sweep(
        &op,
        &spec,
        &phi,
        &sw.t_values,
        mc.n_samples,
        RngStream::new(ctx.seed, 0),
        &probes,
        ctx.config.grid.rule,
    )?;

    let mut csv = ctx.csv_header("t,grad_norm,bound_rhs");
    let mut exit = 0;
    for row in &table.rows {
        let _ = writeln!(csv, "{},{},{}", row.t, row.grad_norm, row.bound_rhs);
        if !(row.grad_norm <= row.bound_rhs) {
            exit = 1;
        }
    }
    if let (Some(gamma), Some(se)) = (table.gamma_hat, table.gamma_stderr) {
        let _ = writeln!(
            csv,
            "# gamma_hat={gamma} gamma_stderr={se} ci_lo={} ci_hi={}",
            gamma - 2.0 * se,
            gamma + 2.0 * se
        );
    }
    Ok(CmdOutput { csv, exit })
}
