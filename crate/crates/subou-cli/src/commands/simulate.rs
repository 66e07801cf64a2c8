//! `simulate`: draw one realization of the clock or of the full
//! Ornstein-Uhlenbeck state.
//!
//! `target = "path"` emits the subordinator levels on a uniform grid
//! (columns `t,level`). `target = "trajectory"` draws a clock path on the
//! graded grid and, conditionally on it, the exact Gaussian state at every
//! grid time (columns `t,mode,value`, modes 0-based).

use crate::config::SimulateTarget;
use crate::{CliError, CmdOutput, Ctx};
use std::fmt::Write as _;
use subou::path::{ou_trajectory, sample_path, TimeGrid};
use subou::rng::RngStream;

pub fn run(ctx: &Ctx) -> Result<CmdOutput, CliError> {
    let sim = ctx
        .config
        .simulate
        .as_ref()
        .ok_or_else(|| CliError::invalid("missing [simulate] block"))?;
    let spec = ctx.config.subordinator()?;
    if !(sim.t > 0.0 && sim.t.is_finite()) {
        return Err(CliError::invalid(format!(
            "[simulate] t = {} must be positive",
            sim.t
        )));
    }
    let mut rng = RngStream::new(ctx.seed, 0).rng();

    let csv = match sim.target {
        SimulateTarget::Path => {
            if sim.x.is_some() {
                return Err(CliError::invalid(
                    "[simulate] key `x` only applies to target = \"trajectory\"",
                ));
            }
            let n_cells = sim.n_cells.unwrap_or(256);
            let grid = TimeGrid::uniform(sim.t, n_cells)?;
            let path = sample_path(&spec, &grid, &mut rng);
            let mut csv = ctx.csv_header("t,level");
            for (time, level) in grid.times().iter().zip(path.levels()) {
                let _ = writeln!(csv, "{time},{level}");
            }
            csv
        }
        SimulateTarget::Trajectory => {
            if sim.n_cells.is_some() {
                return Err(CliError::invalid(
                    "[simulate] key `n_cells` only applies to target = \"path\"",
                ));
            }
            let op = ctx.config.spectrum(&ctx.base_dir)?;
            let x = match &sim.x {
                Some(spec_x) => spec_x.resolve(op.n_modes())?,
                None => vec![0.0; op.n_modes()],
            };
            let lambda_max = *op.lambdas().last().unwrap();
            let grid = TimeGrid::graded(sim.t, lambda_max, ctx.config.grid.rule)?;
            let path = sample_path(&spec, &grid, &mut rng);
            let states = ou_trajectory(&op, &x, &path, &mut rng)?;
            let mut csv = ctx.csv_header("t,mode,value");
            for state in &states {
                for (mode, value) in state.coords.iter().enumerate() {
                    let _ = writeln!(csv, "{},{mode},{value}", state.t);
                }
            }
            csv
        }
    };

    Ok(CmdOutput { csv, exit: 0 })
}
