//! Subcommand implementations. Each takes the shared [`crate::Ctx`] and
//! returns CSV text plus an exit code.

pub mod certificate;
pub mod gradient;
pub mod hypotheses;
pub mod simulate;
pub mod sweep;
pub mod verify_cf;

use crate::config::{PhiConfig, PhiKind, VecSpec};
use crate::CliError;
use subou::semigroup::TestFunction;

/// Build the observable described by a `phi`/`v`/`threshold` key group.
pub fn build_phi(cfg: &PhiConfig, n_modes: usize) -> Result<TestFunction, CliError> {
    if cfg.threshold.is_some() && cfg.phi != PhiKind::Indicator {
        return Err(CliError::invalid(
            "key `threshold` only applies to phi = \"indicator\"",
        ));
    }
    let v = cfg
        .v
        .clone()
        .unwrap_or_else(|| VecSpec::Named("e1".into()));
    let coords = v.resolve(n_modes)?;
    Ok(match cfg.phi {
        PhiKind::Cosine => TestFunction::cosine(coords),
        PhiKind::Indicator => TestFunction::indicator(coords, cfg.threshold.unwrap_or(0.0)),
        PhiKind::Linear => TestFunction::custom(
            move |z: &[f64]| z.iter().zip(&coords).map(|(a, b)| a * b).sum(),
            f64::INFINITY,
        ),
    })
}
