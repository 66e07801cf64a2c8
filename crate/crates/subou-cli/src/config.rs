//! Typed experiment configuration.
//!
//! The file format is TOML with one block per concern. Unknown keys are hard
//! errors everywhere (a silent typo would corrupt an experiment), and every
//! validation message names the offending key.

use serde::Deserialize;
use std::path::Path;
use subou::spectral::{torus_spectrum_scaled, QKind, SpectralOperator, TorusSpec};
use subou::stable::SubordinatorSpec;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub subordinator: SubordinatorConfig,
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    pub mc: Option<McConfig>,
    pub cf: Option<CfConfig>,
    pub hypotheses: Option<HypothesesConfig>,
    pub simulate: Option<SimulateConfig>,
    pub gradient: Option<GradientConfig>,
    pub sweep: Option<SweepConfig>,
    pub certificate: Option<CertificateConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubordinatorConfig {
    pub alpha: f64,
    pub c_prime: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub kind: SpectrumKind,
    pub d: Option<u32>,
    #[serde(default)]
    pub q: QConfig,
    pub eta: Option<f64>,
    pub max_wavenumber: Option<u32>,
    #[serde(default)]
    pub lattice: LatticeConfig,
    pub path: Option<String>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    Torus,
    File,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum QConfig {
    #[default]
    Identity,
    Fractional,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeConfig {
    /// Eigenvalues `4 pi^2 |k|^2` of the negative Laplacian on the unit torus.
    #[default]
    Standard,
    /// Eigenvalues `|k|^2` (convenient for scaling studies).
    Unit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub rule: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { rule: 0.05 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfConfig {
    pub t: f64,
    pub u_values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesesConfig {
    /// Rate exponent to test the noise lower bound at; when absent, only the
    /// existence of an admissible exponent window is reported.
    pub gamma: Option<f64>,
    /// Horizon at which the uniform smoothing constant is evaluated.
    pub t_probe: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub t: f64,
    pub target: SimulateTarget,
    pub x: Option<VecSpec>,
    /// Cells for the `path` target's uniform grid (default 256).
    pub n_cells: Option<usize>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum SimulateTarget {
    /// Subordinator levels on the grid: columns `t,level`.
    Path,
    /// One Ornstein-Uhlenbeck trajectory: columns `t,mode,value`.
    Trajectory,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientConfig {
    pub t: f64,
    pub x: VecSpec,
    pub h: VecSpec,
    #[serde(flatten)]
    pub phi: PhiConfig,
    /// Also run the finite-difference oracle and emit an agreement z row.
    #[serde(default)]
    pub fd: bool,
    pub fd_eps: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub t_values: Vec<f64>,
    #[serde(flatten)]
    pub phi: PhiConfig,
    /// Probe start points (default: origin, lowest/highest basis directions
    /// with both signs, one mixed vector).
    pub probes: Option<Vec<VecSpec>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    pub t: f64,
    /// Modes kept by the truncation under scrutiny.
    pub n_keep: usize,
    /// Reference mode count treated as the full model.
    pub n_ref: Option<usize>,
    /// Markov moment order, in `(0, alpha)`.
    pub r: f64,
    pub eps: f64,
    /// Estimate the empirical tail-exceedance frequency against the bound.
    #[serde(default)]
    pub empirical: bool,
}

/// Test-function description shared by the gradient and sweep blocks.
#[derive(Debug, Deserialize)]
pub struct PhiConfig {
    pub phi: PhiKind,
    /// Frequency (cosine), hyperplane normal (indicator), or coefficient
    /// vector (linear). Defaults to `e1`.
    pub v: Option<VecSpec>,
    /// Indicator threshold (default 0).
    pub threshold: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum PhiKind {
    Cosine,
    Indicator,
    Linear,
}

/// A vector given either by name (`"zero"`, `"e<k>"` with 1-based `k`,
/// `"mixed"` for alternating-sign harmonic decay) or as explicit
/// coordinates.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum VecSpec {
    Named(String),
    Coords(Vec<f64>),
}

impl VecSpec {
    /// Resolve to `n_modes` coordinates; the label is reused in CSV output.
    pub fn resolve(&self, n_modes: usize) -> Result<Vec<f64>, CliError> {
        match self {
            VecSpec::Coords(c) => {
                if c.len() != n_modes {
                    return Err(CliError::invalid(format!(
                        "vector has {} coordinates but the spectrum has {n_modes} modes",
                        c.len()
                    )));
                }
                if c.iter().any(|a| !a.is_finite()) {
                    return Err(CliError::invalid("vector coordinates must be finite"));
                }
                Ok(c.clone())
            }
            VecSpec::Named(name) => match name.as_str() {
                "zero" => Ok(vec![0.0; n_modes]),
                "mixed" => Ok((0..n_modes)
                    .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / (k + 1) as f64)
                    .collect()),
                _ => {
                    if let Some(k) = name.strip_prefix('e').and_then(|s| s.parse::<usize>().ok())
                    {
                        if k == 0 || k > n_modes {
                            return Err(CliError::invalid(format!(
                                "basis vector {name} is out of range for {n_modes} modes \
                                 (indices are 1-based)"
                            )));
                        }
                        let mut v = vec![0.0; n_modes];
                        v[k - 1] = 1.0;
                        Ok(v)
                    } else {
                        Err(CliError::invalid(format!(
                            "unknown vector name {name:?}: expected \"zero\", \"mixed\", \
                             \"e<k>\", or an array of coordinates"
                        )))
                    }
                }
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            VecSpec::Named(name) => name.clone(),
            VecSpec::Coords(_) => "coords".into(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, CliError> {
        toml::from_str(text).map_err(|e| CliError::invalid(format!("config error: {e}")))
    }

    pub fn subordinator(&self) -> Result<SubordinatorSpec, CliError> {
        SubordinatorSpec::new(self.subordinator.alpha, self.subordinator.c_prime)
            .map_err(|e| CliError::invalid(format!("[subordinator] {e}")))
    }

    pub fn mc(&self) -> Result<&McConfig, CliError> {
        self.mc
            .as_ref()
            .ok_or_else(|| CliError::invalid("missing [mc] block"))
    }

    /// Build the spectral operator from the `[spectrum]` block, reading a
    /// two-column `lambda,sigma` file when `kind = "file"`.
    pub fn spectrum(&self, base_dir: &Path) -> Result<SpectralOperator, CliError> {
        let s = self
            .spectrum
            .as_ref()
            .ok_or_else(|| CliError::invalid("missing [spectrum] block"))?;
        let alpha = self.subordinator.alpha;
        match s.kind {
            SpectrumKind::Torus => {
                let d = s
                    .d
                    .ok_or_else(|| CliError::invalid("[spectrum] torus needs key `d`"))?;
                let max_wavenumber = s.max_wavenumber.ok_or_else(|| {
                    CliError::invalid("[spectrum] torus needs key `max_wavenumber`")
                })?;
                if s.path.is_some() {
                    return Err(CliError::invalid(
                        "[spectrum] key `path` only applies to kind = \"file\"",
                    ));
                }
                let q = match s.q {
                    QConfig::Identity => {
                        if s.eta.is_some() {
                            return Err(CliError::invalid(
                                "[spectrum] key `eta` only applies to q = \"fractional\"",
                            ));
                        }
                        QKind::Identity
                    }
                    QConfig::Fractional => {
                        let eta = s.eta.ok_or_else(|| {
                            CliError::invalid("[spectrum] q = \"fractional\" needs key `eta`")
                        })?;
                        QKind::NegativeLaplacianPower { eta }
                    }
                };
                let scale = match s.lattice {
                    LatticeConfig::Standard => 4.0 * std::f64::consts::PI.powi(2),
                    LatticeConfig::Unit => 1.0,
                };
                torus_spectrum_scaled(
                    &TorusSpec {
                        d,
                        q,
                        max_wavenumber,
                    },
                    alpha,
                    scale,
                )
                .map_err(|e| CliError::invalid(format!("[spectrum] {e}")))
            }
            SpectrumKind::File => {
                for (key, present) in [
                    ("d", s.d.is_some()),
                    ("eta", s.eta.is_some()),
                    ("max_wavenumber", s.max_wavenumber.is_some()),
                ] {
                    if present {
                        return Err(CliError::invalid(format!(
                            "[spectrum] key `{key}` only applies to kind = \"torus\""
                        )));
                    }
                }
                let rel = s
                    .path
                    .as_ref()
                    .ok_or_else(|| CliError::invalid("[spectrum] file needs key `path`"))?;
                let path = base_dir.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    CliError::invalid(format!("cannot read spectrum file {}: {e}", path.display()))
                })?;
                let mut lambdas = Vec::new();
                let mut sigmas = Vec::new();
                for (i, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let mut parts = line.split(',');
                    let parse = |part: Option<&str>| -> Result<f64, CliError> {
                        part.map(str::trim)
                            .and_then(|p| p.parse::<f64>().ok())
                            .ok_or_else(|| {
                                CliError::invalid(format!(
                                    "spectrum file line {}: expected `lambda,sigma`",
                                    i + 1
                                ))
                            })
                    };
                    lambdas.push(parse(parts.next())?);
                    sigmas.push(parse(parts.next())?);
                }
                SpectralOperator::from_parts(lambdas, sigmas, alpha)
                    .map_err(|e| CliError::invalid(format!("spectrum file: {e}")))
            }
        }
    }

}
