//! Monte Carlo evaluation of the Markov semigroup and its gradient formula.
//!
//! For the diagonal model `dZ = A Z dt + sigma dW_{L_t}` the semigroup is
//! `R_t phi(x) = E[phi(Z^x_t)]`. Conditioning on the clock makes each
//! coordinate Gaussian, `Z^n = e^{-lambda_n t} x_n + sigma_n sqrt(V_n) xi_n`,
//! and Gaussian integration by parts gives the exact stochastic gradient
//! representation
//!
//! ```text
//! <grad R_t phi(x), h> = E[ phi(Z^x_t) W ],
//! W = Sum_n (h_n / sigma_n) e^{-lambda_n t} xi_n / sqrt(V_n(t)),
//! ```
//!
//! valid for every *bounded measurable* `phi` — no smoothness needed, which
//! is exactly what makes it worth testing against finite differences. The
//! weight obeys `E[W^2] <= c_alpha C_t^2 |h|^2` with `c_alpha = E[1/L_1]`
//! and `C_t` the spectral constant of
//! [`SpectralOperator::gradient_constant`], so `|grad R_t phi| <=
//! sup|phi| sqrt(c_alpha) C_t`: bounded functions acquire a Lipschitz
//! estimate that blows up like `t^{-gamma}` as `t -> 0`.
//!
//! All estimators run through a deterministic parallel fold (fixed chunking,
//! per-sample substreams, ordered merges), so results are byte-identical for
//! any worker-thread count. The per-mode gradient sums are accumulated
//! independently of the direction `h`, and the directional estimate is their
//! ordered dot product with `h`; consequently scaling `h` by a power of two
//! scales the directional mean and standard error *bitwise exactly*, a
//! property the test suite pins down.

use crate::path::{cell_averaged_decay, TimeGrid};
use crate::rng::RngStream;
use crate::spectral::SpectralOperator;
use crate::stable::{sample_unit_positive_stable, SubordinatorSpec};
use crate::stats::{mc_fold, ols_fit, MCEstimate};
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::sync::Arc;

/// Default geometric grading rule for automatically built clock grids.
pub const DEFAULT_GRID_RULE: f64 = 0.05;

/// Shared callable used by [`TestFunction::Custom`].
pub type ObservableFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Observables `phi` accepted by the estimators. `Cosine` and `Indicator`
/// are the workhorses (bounded by 1, with closed-form references in the
/// Gaussian limit); `Custom` wraps any function with a declared sup bound.
#[derive(Clone)]
pub enum TestFunction {
    /// `phi(z) = cos(<v, z>)`.
    Cosine { v: Vec<f64> },
    /// `phi(z) = 1` on the half-space `<v, z> <= threshold`, else 0.
    Indicator { v: Vec<f64>, threshold: f64 },
    /// Arbitrary function with `sup |phi| <= bound` (use
    /// `f64::INFINITY` for unbounded observables).
    Custom {
        f: ObservableFn,
        bound: f64,
    },
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Cosine { v } => f.debug_struct("Cosine").field("v", v).finish(),
            TestFunction::Indicator { v, threshold } => f
                .debug_struct("Indicator")
                .field("v", v)
                .field("threshold", threshold)
                .finish(),
            TestFunction::Custom { bound, .. } => {
                f.debug_struct("Custom").field("bound", bound).finish()
            }
        }
    }
}

impl TestFunction {
    pub fn cosine(v: Vec<f64>) -> Self {
        TestFunction::Cosine { v }
    }

    pub fn indicator(v: Vec<f64>, threshold: f64) -> Self {
        TestFunction::Indicator { v, threshold }
    }

    pub fn custom<F>(f: F, bound: f64) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        TestFunction::Custom {
            f: Arc::new(f),
            bound,
        }
    }

    /// The constant function 1 in `n_modes` variables (a cosine with zero
    /// frequency, so it is evaluated exactly).
    pub fn constant_one(n_modes: usize) -> Self {
        TestFunction::Cosine {
            v: vec![0.0; n_modes],
        }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        match self {
            TestFunction::Cosine { v } => dot(v, z).cos(),
            TestFunction::Indicator { v, threshold } => {
                if dot(v, z) <= *threshold {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Custom { f, .. } => f(z),
        }
    }

    /// Declared sup-norm bound.
    pub fn sup_bound(&self) -> f64 {
        match self {
            TestFunction::Cosine { .. } | TestFunction::Indicator { .. } => 1.0,
            TestFunction::Custom { bound, .. } => *bound,
        }
    }

    /// Dimension the observable insists on, if any.
    fn required_dim(&self) -> Option<usize> {
        match self {
            TestFunction::Cosine { v } => Some(v.len()),
            TestFunction::Indicator { v, .. } => Some(v.len()),
            TestFunction::Custom { .. } => None,
        }
    }
}

/// Ordered dot product (ascending index); the fixed order is what makes
/// directional gradients bit-linear in `h`.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The random clock driving the noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Clock {
    /// Increasing stable subordinator (the object of study).
    Subordinated(SubordinatorSpec),
    /// Deterministic clock `L_s = rate * s`: the classical Gaussian
    /// Ornstein–Uhlenbeck process, with closed forms used for calibration.
    Linear { rate: f64 },
}

/// A semigroup evaluation context: operator, clock, horizon, and the
/// precomputed discretization (graded grid, per-mode cell weights, stable
/// increment scales, or exact Gaussian variances for linear clocks).
#[derive(Clone, Debug)]
pub struct SemigroupModel {
    op: SpectralOperator,
    clock: Clock,
    t: f64,
    grid: Option<TimeGrid>,
    /// `e^{-lambda_n t}` per mode.
    decay: Vec<f64>,
    /// Row-major `[mode][cell]` averaged decay weights.
    weights: Vec<f64>,
    /// `(width_j c')^{1/alpha}` per cell: multiplies a unit positive stable
    /// draw to produce the cell increment.
    cell_scales: Vec<f64>,
    /// Exact conditional variances for a linear clock.
    linear_variances: Option<Vec<f64>>,
    /// Reject gradient samples whose smallest conditional variance falls
    /// below this threshold (the weight divides by `sqrt(V_n)`).
    v_floor: f64,
}

impl SemigroupModel {
    /// Build a model with the default graded grid (rule
    /// [`DEFAULT_GRID_RULE`]). `t = 0` is allowed and makes
    /// [`SemigroupModel::estimate_rt`] exact; gradients need `t > 0`.
    pub fn new(op: SpectralOperator, clock: Clock, t: f64) -> Result<SemigroupModel> {
        SemigroupModel::build(op, clock, t, None)
    }

    /// Build with an explicit clock grid (subordinated clocks only); the
    /// grid horizon must equal `t`.
    pub fn with_grid(
        op: SpectralOperator,
        clock: Clock,
        t: f64,
        grid: TimeGrid,
    ) -> Result<SemigroupModel> {
        if !matches!(clock, Clock::Subordinated(_)) {
            return Err(Error::Unsupported(
                "custom grids only apply to subordinated clocks".into(),
            ));
        }
        SemigroupModel::build(op, clock, t, Some(grid))
    }

    fn build(
        op: SpectralOperator,
        clock: Clock,
        t: f64,
        grid: Option<TimeGrid>,
    ) -> Result<SemigroupModel> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::invalid("t", format!("{t} must be nonnegative")));
        }
        match clock {
            Clock::Subordinated(spec) => {
                if spec.alpha() != op.alpha() {
                    return Err(Error::invalid(
                        "clock",
                        format!(
                            "stability index mismatch: operator has {}, clock has {}",
                            op.alpha(),
                            spec.alpha()
                        ),
                    ));
                }
            }
            Clock::Linear { rate } => {
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(Error::invalid("rate", format!("{rate} must be positive")));
                }
            }
        }
        let decay: Vec<f64> = op.lambdas().iter().map(|&l| (-l * t).exp()).collect();
        let mut model = SemigroupModel {
            op,
            clock,
            t,
            grid: None,
            decay,
            weights: Vec::new(),
            cell_scales: Vec::new(),
            linear_variances: None,
            v_floor: 1e-30,
        };
        if t == 0.0 {
            if grid.is_some() {
                return Err(Error::invalid("grid", "no grid is meaningful at t = 0"));
            }
            return Ok(model);
        }
        match clock {
            Clock::Subordinated(spec) => {
                let grid = match grid {
                    Some(g) => {
                        if (g.horizon() - t).abs() > 1e-12 * t.max(1.0) {
                            return Err(Error::HorizonMismatch {
                                path_horizon: g.horizon(),
                                requested: t,
                            });
                        }
                        g
                    }
                    None => {
                        let lmax = *model.op.lambdas().last().unwrap();
                        TimeGrid::graded(t, lmax, DEFAULT_GRID_RULE)?
                    }
                };
                let n_cells = grid.n_cells();
                let mut weights = Vec::with_capacity(model.op.n_modes() * n_cells);
                for &l in model.op.lambdas() {
                    for j in 0..n_cells {
                        let (a, b) = grid.cell(j);
                        weights.push(cell_averaged_decay(l, a, b, t));
                    }
                }
                let alpha = spec.alpha();
                let cell_scales = (0..n_cells)
                    .map(|j| {
                        let (a, b) = grid.cell(j);
                        ((b - a) * spec.c_prime()).powf(1.0 / alpha)
                    })
                    .collect();
                model.grid = Some(grid);
                model.weights = weights;
                model.cell_scales = cell_scales;
            }
            Clock::Linear { rate } => {
                let variances: Vec<f64> = model
                    .op
                    .lambdas()
                    .iter()
                    .map(|&l| rate * (-libm::expm1(-2.0 * l * t)) / (2.0 * l))
                    .collect();
                model.linear_variances = Some(variances);
            }
        }
        Ok(model)
    }

    pub fn op(&self) -> &SpectralOperator {
        &self.op
    }

    pub fn clock(&self) -> &Clock {
        &self.clock
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> Option<&TimeGrid> {
        self.grid.as_ref()
    }

    /// Change the rejection threshold for conditional variances in gradient
    /// estimation. The default (1e-30) never fires in practice, since the
    /// variances are strictly positive stable integrals.
    pub fn set_v_floor(&mut self, v_floor: f64) -> Result<()> {
        if !(v_floor >= 0.0 && v_floor.is_finite()) {
            return Err(Error::invalid(
                "v_floor",
                format!("{v_floor} must be nonnegative and finite"),
            ));
        }
        self.v_floor = v_floor;
        Ok(())
    }

    fn check_phi(&self, phi: &TestFunction) -> Result<()> {
        if let Some(d) = phi.required_dim() {
            if d != self.op.n_modes() {
                return Err(Error::DimensionMismatch {
                    expected: self.op.n_modes(),
                    got: d,
                });
            }
        }
        Ok(())
    }

    fn check_vec(&self, name: &'static str, v: &[f64]) -> Result<()> {
        if v.len() != self.op.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.op.n_modes(),
                got: v.len(),
            });
        }
        if v.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid(name, "entries must be finite"));
        }
        Ok(())
    }

    /// Draw the conditional variances for one sample into `v`, using `dl`
    /// as the per-cell increment buffer (unused for linear clocks).
    fn fill_variances(&self, rng: &mut ChaCha12Rng, dl: &mut [f64], v: &mut [f64]) {
        match self.clock {
            Clock::Subordinated(spec) => {
                let alpha = spec.alpha();
                for (slot, &scale) in dl.iter_mut().zip(&self.cell_scales) {
                    *slot = scale * sample_unit_positive_stable(alpha, rng);
                }
                let n_cells = dl.len();
                for (n, slot) in v.iter_mut().enumerate() {
                    let row = &self.weights[n * n_cells..(n + 1) * n_cells];
                    *slot = dot(row, dl);
                }
            }
            Clock::Linear { .. } => {
                v.copy_from_slice(self.linear_variances.as_ref().unwrap());
            }
        }
    }

    fn n_cells(&self) -> usize {
        self.grid.as_ref().map_or(0, TimeGrid::n_cells)
    }

    /// Monte Carlo estimate of `R_t phi(x) = E[phi(Z^x_t)]`.
    /// At `t = 0` the value `phi(x)` is returned exactly (no sampling).
    pub fn estimate_rt(
        &self,
        x: &[f64],
        phi: &TestFunction,
        n_samples: u64,
        stream: RngStream,
    ) -> Result<MCEstimate> {
        self.check_vec("x", x)?;
        self.check_phi(phi)?;
        if self.t == 0.0 {
            return Ok(MCEstimate::exact(phi.eval(x), stream));
        }
        if n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be at least 1"));
        }
        let n_modes = self.op.n_modes();
        let n_cells = self.n_cells();
        struct Acc {
            sy: f64,
            sy2: f64,
            dl: Vec<f64>,
            v: Vec<f64>,
            z: Vec<f64>,
        }
        let out = mc_fold(
            n_samples,
            stream,
            || Acc {
                sy: 0.0,
                sy2: 0.0,
                dl: vec![0.0; n_cells],
                v: vec![0.0; n_modes],
                z: vec![0.0; n_modes],
            },
            |acc, _i, rng| {
                let Acc { dl, v, z, .. } = acc;
                self.fill_variances(rng, dl, v);
                for n in 0..n_modes {
                    let xi: f64 = rng.sample(StandardNormal);
                    z[n] = self.decay[n] * x[n] + self.op.sigmas()[n] * (v[n].sqrt() * xi);
                }
                let y = phi.eval(z);
                acc.sy += y;
                acc.sy2 += y * y;
            },
            |mut a, b| {
                a.sy += b.sy;
                a.sy2 += b.sy2;
                a
            },
        );
        Ok(MCEstimate::from_sums(out.sy, out.sy2, n_samples, stream))
    }

    /// Monte Carlo estimate of the gradient representation at `x`.
    ///
    /// One pass produces the full gradient vector (`E[phi(Z) zeta_n]` per
    /// mode, independent of `h`), the directional derivative along `h` (the
    /// ordered dot product of that vector with `h`, with a standard error
    /// from the per-sample directional weights), and the empirical second
    /// moment of the weight `W`. Samples whose smallest conditional variance
    /// falls below the model's floor are rejected and counted.
    ///
    /// `h = 0` short-circuits: every output is exactly zero.
    pub fn gradient(
        &self,
        x: &[f64],
        h: &[f64],
        phi: &TestFunction,
        n_samples: u64,
        stream: RngStream,
    ) -> Result<GradientEstimate> {
        self.check_vec("x", x)?;
        self.check_vec("h", h)?;
        self.check_phi(phi)?;
        if self.t == 0.0 {
            return Err(Error::invalid("t", "the gradient representation needs t > 0"));
        }
        if n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be at least 1"));
        }
        let n_modes = self.op.n_modes();
        if h.iter().all(|&a| a == 0.0) {
            return Ok(GradientEstimate {
                directional: MCEstimate::exact(0.0, stream),
                gradient: vec![0.0; n_modes],
                weight_second_moment: MCEstimate::exact(0.0, stream),
                n_rejected: 0,
            });
        }
        let n_cells = self.n_cells();
        let v_floor = self.v_floor;
        struct Acc {
            g: Vec<f64>,
            sy: f64,
            sy2: f64,
            sw2: f64,
            sw4: f64,
            n_acc: u64,
            n_rej: u64,
            dl: Vec<f64>,
            v: Vec<f64>,
            z: Vec<f64>,
            zeta: Vec<f64>,
        }
        let out = mc_fold(
            n_samples,
            stream,
            || Acc {
                g: vec![0.0; n_modes],
                sy: 0.0,
                sy2: 0.0,
                sw2: 0.0,
                sw4: 0.0,
                n_acc: 0,
                n_rej: 0,
                dl: vec![0.0; n_cells],
                v: vec![0.0; n_modes],
                z: vec![0.0; n_modes],
                zeta: vec![0.0; n_modes],
            },
            |acc, _i, rng| {
                let Acc { dl, v, z, zeta, .. } = acc;
                self.fill_variances(rng, dl, v);
                if v.iter().any(|&vn| vn < v_floor) {
                    acc.n_rej += 1;
                    return;
                }
                for n in 0..n_modes {
                    let xi: f64 = rng.sample(StandardNormal);
                    let sv = v[n].sqrt();
                    z[n] = self.decay[n] * x[n] + self.op.sigmas()[n] * (sv * xi);
                    zeta[n] = self.decay[n] / self.op.sigmas()[n] * (xi / sv);
                }
                let y = phi.eval(z);
                for n in 0..n_modes {
                    acc.g[n] += y * acc.zeta[n];
                }
                let w = dot(&acc.zeta, h);
                let yw = y * w;
                acc.sy += yw;
                acc.sy2 += yw * yw;
                let w2 = w * w;
                acc.sw2 += w2;
                acc.sw4 += w2 * w2;
                acc.n_acc += 1;
            },
            |mut a, b| {
                for (ga, gb) in a.g.iter_mut().zip(&b.g) {
                    *ga += gb;
                }
                a.sy += b.sy;
                a.sy2 += b.sy2;
                a.sw2 += b.sw2;
                a.sw4 += b.sw4;
                a.n_acc += b.n_acc;
                a.n_rej += b.n_rej;
                a
            },
        );
        if out.n_acc == 0 {
            return Err(Error::AllSamplesRejected {
                requested: n_samples,
            });
        }
        let gradient: Vec<f64> = out.g.iter().map(|&g| g / out.n_acc as f64).collect();
        let directional_mean = dot(&gradient, h);
        let se_probe = MCEstimate::from_sums(out.sy, out.sy2, out.n_acc, stream);
        let directional = MCEstimate {
            mean: directional_mean,
            stderr: se_probe.stderr,
            n_samples: out.n_acc,
            stream,
        };
        let weight_second_moment =
            MCEstimate::from_sums(out.sw2, out.sw4, out.n_acc, stream);
        Ok(GradientEstimate {
            directional,
            gradient,
            weight_second_moment,
            n_rejected: out.n_rej,
        })
    }

    /// Central finite difference `(R_t phi(x + eps h) - R_t phi(x - eps h)) / (2 eps)`
    /// with common random numbers: both endpoints reuse the same clock path
    /// and Gaussian draws sample by sample, which removes almost all of the
    /// difference's variance. At `t = 0` the deterministic quotient is
    /// returned exactly.
    pub fn gradient_fd(
        &self,
        x: &[f64],
        h: &[f64],
        phi: &TestFunction,
        eps: f64,
        n_samples: u64,
        stream: RngStream,
    ) -> Result<MCEstimate> {
        self.check_vec("x", x)?;
        self.check_vec("h", h)?;
        self.check_phi(phi)?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid("eps", format!("{eps} must be positive")));
        }
        let n_modes = self.op.n_modes();
        if self.t == 0.0 {
            let xp: Vec<f64> = x.iter().zip(h).map(|(a, b)| a + eps * b).collect();
            let xm: Vec<f64> = x.iter().zip(h).map(|(a, b)| a - eps * b).collect();
            let value = (phi.eval(&xp) - phi.eval(&xm)) / (2.0 * eps);
            return Ok(MCEstimate::exact(value, stream));
        }
        if n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be at least 1"));
        }
        let n_cells = self.n_cells();
        struct Acc {
            sy: f64,
            sy2: f64,
            dl: Vec<f64>,
            v: Vec<f64>,
            zp: Vec<f64>,
            zm: Vec<f64>,
        }
        let out = mc_fold(
            n_samples,
            stream,
            || Acc {
                sy: 0.0,
                sy2: 0.0,
                dl: vec![0.0; n_cells],
                v: vec![0.0; n_modes],
                zp: vec![0.0; n_modes],
                zm: vec![0.0; n_modes],
            },
            |acc, _i, rng| {
                let Acc { dl, v, zp, zm, .. } = acc;
                self.fill_variances(rng, dl, v);
                for n in 0..n_modes {
                    let xi: f64 = rng.sample(StandardNormal);
                    let noise = self.op.sigmas()[n] * (v[n].sqrt() * xi);
                    zp[n] = self.decay[n] * (x[n] + eps * h[n]) + noise;
                    zm[n] = self.decay[n] * (x[n] - eps * h[n]) + noise;
                }
                let y = (phi.eval(zp) - phi.eval(zm)) / (2.0 * eps);
                acc.sy += y;
                acc.sy2 += y * y;
            },
            |mut a, b| {
                a.sy += b.sy;
                a.sy2 += b.sy2;
                a
            },
        );
        Ok(MCEstimate::from_sums(out.sy, out.sy2, n_samples, stream))
    }

    /// Estimate `E[W^2]` for direction `h` and compare it against the
    /// closed bound `c_alpha * C_t^2 |h|^2`. `within` is true when the
    /// empirical moment does not exceed the bound by more than three
    /// standard errors.
    pub fn weight_check(
        &self,
        h: &[f64],
        c_alpha: f64,
        n_samples: u64,
        stream: RngStream,
    ) -> Result<WeightCheck> {
        if !(c_alpha > 0.0 && c_alpha.is_finite()) {
            return Err(Error::invalid(
                "c_alpha",
                format!("{c_alpha} must be positive"),
            ));
        }
        let x = vec![0.0; self.op.n_modes()];
        let phi = TestFunction::constant_one(self.op.n_modes());
        let est = self.gradient(&x, h, &phi, n_samples, stream)?;
        let ct = self.op.gradient_constant(self.t)?;
        let h_norm2 = dot(h, h);
        let bound = c_alpha * ct * ct * h_norm2;
        let empirical = est.weight_second_moment;
        let within = empirical.mean <= bound + 3.0 * empirical.stderr;
        Ok(WeightCheck {
            empirical,
            ct,
            h_norm2,
            c_alpha,
            bound,
            within,
        })
    }
}

/// Output of [`SemigroupModel::gradient`].
#[derive(Clone, Debug)]
pub struct GradientEstimate {
    /// `<grad R_t phi(x), h>` with standard error.
    pub directional: MCEstimate,
    /// Estimated gradient vector `E[phi(Z) zeta_n]`, independent of `h`.
    pub gradient: Vec<f64>,
    /// Empirical `E[W^2]` for the supplied `h`.
    pub weight_second_moment: MCEstimate,
    /// Samples rejected by the conditional-variance floor.
    pub n_rejected: u64,
}

/// Output of [`SemigroupModel::weight_check`].
#[derive(Clone, Debug)]
pub struct WeightCheck {
    pub empirical: MCEstimate,
    /// Spectral gradient constant `C_t`.
    pub ct: f64,
    pub h_norm2: f64,
    pub c_alpha: f64,
    /// `c_alpha * C_t^2 |h|^2`.
    pub bound: f64,
    pub within: bool,
}

/// The sharp constant in `E[W^2] <= c_alpha C_t^2 |h|^2`: the exact inverse
/// clock moment `c_alpha = E[1/L_1] = Gamma(1 + 1/alpha) c'^{-1/alpha}`.
pub fn weight_bound_constant(spec: &SubordinatorSpec) -> f64 {
    spec.inverse_moment_exact(1.0, 1.0)
        .expect("unit-time inverse moment exists for every valid spec")
}

/// Closed-form `E[W^2]` for direction `h` (continuum, no discretization):
///
/// ```text
/// E[W^2] = Sum_n (h_n / sigma_n)^2 e^{-2 lambda_n t}
///          (2 alpha lambda_n / (1 - e^{-2 alpha lambda_n t}))^{1/alpha}
///          * E[1/L_1].
/// ```
pub fn exact_weight_second_moment(
    op: &SpectralOperator,
    spec: &SubordinatorSpec,
    t: f64,
    h: &[f64],
) -> Result<f64> {
    if op.alpha() != spec.alpha() {
        return Err(Error::invalid(
            "spec",
            format!(
                "stability index mismatch: operator has {}, clock has {}",
                op.alpha(),
                spec.alpha()
            ),
        ));
    }
    if h.len() != op.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: op.n_modes(),
            got: h.len(),
        });
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("{t} must be positive")));
    }
    let a = spec.alpha();
    let inv_l1 = weight_bound_constant(spec);
    let mut sum = 0.0;
    for ((&l, &s), &hn) in op.lambdas().iter().zip(op.sigmas()).zip(h) {
        let ratio = 2.0 * a * l / (-libm::expm1(-2.0 * a * l * t));
        sum += (hn / s).powi(2) * (-2.0 * l * t).exp() * ratio.powf(1.0 / a) * inv_l1;
    }
    Ok(sum)
}

/// One horizon of a short-time scaling sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepRow {
    pub t: f64,
    /// Largest estimated gradient norm over the probe points.
    pub grad_norm: f64,
    /// Theoretical ceiling `sup|phi| sqrt(c_alpha) C_t`.
    pub bound_rhs: f64,
}

/// Result of [`scaling_sweep`]: per-horizon rows plus the fitted decay
/// exponent `gamma_hat` of `grad_norm ~ t^{-gamma_hat}` (absent with fewer
/// than three horizons).
#[derive(Clone, Debug)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub gamma_hat: Option<f64>,
    pub gamma_stderr: Option<f64>,
}

/// Default probe points for gradient-norm sweeps: the origin, both signs of
/// the lowest and highest basis directions, and one mixed vector with
/// decaying alternating entries.
pub fn default_probes(n_modes: usize) -> Vec<Vec<f64>> {
    let mut probes = vec![vec![0.0; n_modes]];
    for (index, sign) in [(0usize, 1.0f64), (0, -1.0)] {
        let mut v = vec![0.0; n_modes];
        v[index] = sign;
        probes.push(v);
    }
    if n_modes > 1 {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; n_modes];
            v[n_modes - 1] = sign;
            probes.push(v);
        }
    }
    probes.push(
        (0..n_modes)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / (k + 1) as f64)
            .collect(),
    );
    probes
}

/// Measure the short-time decay of the gradient norm.
///
/// For each horizon the gradient vector is estimated at every probe point
/// (with `n_samples` each) and the largest Euclidean norm is recorded next
/// to the theoretical ceiling `sup|phi| sqrt(c_alpha) C_t`; with at least
/// three horizons the exponent of `grad_norm ~ t^{-gamma}` is fitted by
/// least squares in log-log coordinates.
///
/// Requires `alpha > 1/2` (the rate regime) and, when the operator carries a
/// power-law family, a nonempty admissible exponent window.
#[allow(clippy::too_many_arguments)]
pub fn scaling_sweep(
    op: &SpectralOperator,
    spec: &SubordinatorSpec,
    phi: &TestFunction,
    t_values: &[f64],
    n_samples: u64,
    stream: RngStream,
    probes: &[Vec<f64>],
    rule: f64,
) -> Result<SweepTable> {
    if op.alpha() <= 0.5 {
        return Err(Error::Unsupported(format!(
            "scaling sweeps need alpha > 1/2; got alpha = {}",
            op.alpha()
        )));
    }
    if op.family().is_some() && op.feasible_gamma_window()?.is_none() {
        return Err(Error::Unsupported(
            "no admissible rate exponent: the noise decays too fast for the \
             gradient bound to hold at any gamma < 1"
                .into(),
        ));
    }
    if t_values.is_empty() {
        return Err(Error::invalid("t_values", "must be nonempty"));
    }
    if t_values.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::invalid("t_values", "must all be positive"));
    }
    if probes.is_empty() {
        return Err(Error::invalid("probes", "must be nonempty"));
    }
    let c_alpha = weight_bound_constant(spec);
    let mut h = vec![0.0; op.n_modes()];
    h[0] = 1.0;
    let mut rows = Vec::with_capacity(t_values.len());
    for (i, &t) in t_values.iter().enumerate() {
        let lmax = *op.lambdas().last().unwrap();
        let grid = TimeGrid::graded(t, lmax, rule)?;
        let model =
            SemigroupModel::with_grid(op.clone(), Clock::Subordinated(*spec), t, grid)?;
        let mut grad_norm = 0.0f64;
        for (j, probe) in probes.iter().enumerate() {
            let est = model.gradient(
                probe,
                &h,
                phi,
                n_samples,
                stream.substream((i * probes.len() + j) as u64),
            )?;
            let norm = dot(&est.gradient, &est.gradient).sqrt();
            grad_norm = grad_norm.max(norm);
        }
        let bound_rhs = phi.sup_bound() * c_alpha.sqrt() * op.gradient_constant(t)?;
        rows.push(SweepRow {
            t,
            grad_norm,
            bound_rhs,
        });
    }
    let (gamma_hat, gamma_stderr) = if rows.len() >= 3 {
        let xs: Vec<f64> = rows.iter().map(|r| r.t.ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.grad_norm.ln()).collect();
        let fit = ols_fit(&xs, &ys)?;
        (Some(-fit.slope), Some(fit.slope_stderr))
    } else {
        (None, None)
    };
    Ok(SweepTable {
        rows,
        gamma_hat,
        gamma_stderr,
    })
}
