//! `gradient`: directional derivative of the semigroup by the exact weight
//! formula, optionally cross-checked against common-random-number finite
//! differences.
//!
//! CSV schema `quantity,t,x_label,h_label,mean,stderr,n_samples,seed` with
//! rows `formula`, `weight_second_moment`, `rejected`, and (with `fd = true`)
//! `fd` plus `z_formula_vs_fd`. A zero direction produces exact zero rows
//! without sampling. Exit 1 when the agreement check runs and |z| > 3.

use crate::{CliError, CmdOutput, Ctx};
use std::fmt::Write as _;
use subou::path::TimeGrid;
use subou::rng::RngStream;
use subou::semigroup::{Clock, SemigroupModel};
use subou::stats::MCEstimate;

pub fn run(ctx: &Ctx) -> Result<CmdOutput, CliError> {
    let g = ctx
        .config
        .gradient
        .as_ref()
        .ok_or_else(|| CliError::invalid("missing [gradient] block"))?;
    let spec = ctx.config.subordinator()?;
    let op = ctx.config.spectrum(&ctx.base_dir)?;
    let mc = ctx.config.mc()?;
    if !(g.t > 0.0 && g.t.is_finite()) {
        return Err(CliError::invalid(format!(
            "[gradient] t = {} must be positive",
            g.t
        )));
    }
    let x = g.x.resolve(op.n_modes())?;
    let h = g.h.resolve(op.n_modes())?;
    let phi = super::build_phi(&g.phi, op.n_modes())?;
    if g.fd_eps.is_some() && !g.fd {
        return Err(CliError::invalid(
            "[gradient] key `fd_eps` only applies with fd = true",
        ));
    }

    let lambda_max = *op.lambdas().last().unwrap();
    let grid = TimeGrid::graded(g.t, lambda_max, ctx.config.grid.rule)?;
    let model = SemigroupModel::with_grid(op, Clock::Subordinated(spec), g.t, grid)?;
    let base = RngStream::new(ctx.seed, 0);

    let (x_label, h_label) = (g.x.label(), g.h.label());
    let mut csv = ctx.csv_header("quantity,t,x_label,h_label,mean,stderr,n_samples,seed");
    let push = |csv: &mut String, quantity: &str, est: &MCEstimate| {
        let _ = writeln!(
            csv,
            "{quantity},{},{x_label},{h_label},{},{},{},{}",
            g.t, est.mean, est.stderr, est.n_samples, ctx.seed
        );
    };

    let est = model.gradient(&x, &h, &phi, mc.n_samples, base.substream(0))?;
    push(&mut csv, "formula", &est.directional);
    push(&mut csv, "weight_second_moment", &est.weight_second_moment);
    let _ = writeln!(
        csv,
        "rejected,{},{x_label},{h_label},{},0,{},{}",
        g.t, est.n_rejected, mc.n_samples, ctx.seed
    );

    let mut exit = 0;
    if g.fd {
        let eps = g.fd_eps.unwrap_or(1e-2);
        let fd = model.gradient_fd(&x, &h, &phi, eps, mc.n_samples, base.substream(1))?;
        push(&mut csv, "fd", &fd);
        let z = MCEstimate::z_between(&est.directional, &fd);
        let _ = writeln!(
            csv,
            "z_formula_vs_fd,{},{x_label},{h_label},{z},0,{},{}",
            g.t,
            mc.n_samples * 2,
            ctx.seed
        );
        if !(z.abs() <= 3.0) {
            exit = 1;
        }
    }

    Ok(CmdOutput { csv, exit })
}
