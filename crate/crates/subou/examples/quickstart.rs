//! The README quick-start: estimate `R_t phi` and a directional derivative
//! on a 32-mode torus model with a stable clock.

use subou::path::TimeGrid;
use subou::rng::RngStream;
use subou::semigroup::{Clock, SemigroupModel, TestFunction};
use subou::spectral::{torus_spectrum, QKind, TorusSpec};
use subou::stable::SubordinatorSpec;

fn main() -> Result<(), subou::Error> {
    let alpha = 0.75;
    let clock = SubordinatorSpec::new(alpha, 1.0)?;
    let op = torus_spectrum(
        &TorusSpec { d: 1, q: QKind::Identity, max_wavenumber: 16 },
        alpha,
    )?; // 32 modes, lambda_k = (2 pi k)^2

    let t = 0.05;
    let grid = TimeGrid::graded(t, *op.lambdas().last().unwrap(), 0.05)?;
    let model = SemigroupModel::with_grid(op, Clock::Subordinated(clock), t, grid)?;

    let phi = TestFunction::cosine(vec![1.0; 32]);
    let mut x = vec![0.0; 32];
    x[0] = 0.8;
    let mut h = vec![0.0; 32];
    h[0] = 1.0;

    let value = model.estimate_rt(&x, &phi, 100_000, RngStream::new(42, 0))?;
    let grad = model.gradient(&x, &h, &phi, 100_000, RngStream::new(42, 1))?;
    println!(
        "R_t phi = {} +- {},  d/dh R_t phi = {} +- {}",
        value.mean, value.stderr, grad.directional.mean, grad.directional.stderr,
    );
    Ok(())
}
