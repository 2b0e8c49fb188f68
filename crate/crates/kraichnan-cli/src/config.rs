//! Run configuration: a single TOML file, schema-validated with unknown
//! keys rejected and the seed mandatory. Every experiment also accepts
//! `--seed`, `--threads`, and `--out` flag overrides; the output directory
//! alone can come from the `KRAICHNAN_OUT` environment variable.

use serde::Deserialize;
use std::path::PathBuf;
use std::sync::Arc;

use kraichnan_core::kernels::{CorrelationKernel, ModelParams};
use kraichnan_core::noise::{MollifierSpec, SpaceTimeGrid};
use kraichnan_core::solver_fk::InitialProfile;
use kraichnan_core::solver_wz::y_gaussian_profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    GammaTrajectory,
    FkSolve,
    SpectralSolve,
    WzConverge,
    DimEstimate,
    NuLimit,
    WalshCheck,
    SelfTest,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::GammaTrajectory => "gamma-trajectory",
            Experiment::FkSolve => "fk-solve",
            Experiment::SpectralSolve => "spectral-solve",
            Experiment::WzConverge => "wz-converge",
            Experiment::DimEstimate => "dim-estimate",
            Experiment::NuLimit => "nu-limit",
            Experiment::WalshCheck => "walsh-check",
            Experiment::SelfTest => "self-test",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub kernel: Option<KernelConfig>,
    pub params: Option<ParamsConfig>,
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub sampling: SamplingConfig,
    pub trajectory: Option<TrajectoryConfig>,
    pub solve: Option<SolveConfig>,
    pub spectral: Option<SpectralConfig>,
    pub wz: Option<WzConfig>,
    pub dim: Option<DimConfig>,
    pub nu_limit: Option<NuLimitConfig>,
    pub walsh: Option<WalshConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct KernelConfig {
    pub family: KernelFamily,
    pub rho0: f64,
    pub length_scale: Option<f64>,
    pub abscissa: Option<Vec<f64>>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    Constant,
    GaussianBell,
    Tabulated,
}

impl KernelConfig {
    pub fn build(&self) -> Result<CorrelationKernel, String> {
        match self.family {
            KernelFamily::Constant => {
                CorrelationKernel::constant(self.rho0).map_err(|e| e.to_string())
            }
            KernelFamily::GaussianBell => CorrelationKernel::gaussian_bell(
                self.rho0,
                self.length_scale
                    .ok_or("gaussian-bell needs length-scale")?,
            )
            .map_err(|e| e.to_string()),
            KernelFamily::Tabulated => CorrelationKernel::tabulated(
                self.abscissa
                    .clone()
                    .ok_or("tabulated kernel needs abscissa")?,
                self.values.clone().ok_or("tabulated kernel needs values")?,
            )
            .map_err(|e| e.to_string()),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ParamsConfig {
    /// Isotropic viscosity; exclusive with (nu1, nu2).
    pub nu: Option<f64>,
    pub nu1: Option<f64>,
    pub nu2: Option<f64>,
    #[serde(default)]
    pub mu: f64,
}

impl ParamsConfig {
    pub fn build(&self) -> Result<ModelParams, String> {
        let params = match (self.nu, self.nu1, self.nu2) {
            (Some(nu), None, None) => ModelParams::isotropic(nu),
            (None, Some(nu1), Some(nu2)) => ModelParams::new(nu1, nu2),
            _ => return Err("params need either nu, or both nu1 and nu2".to_string()),
        };
        params
            .map(|p| p.with_drift(self.mu))
            .map_err(|e| e.to_string())
    }

    pub fn nu(&self) -> Result<f64, String> {
        self.nu
            .or(self.nu1)
            .ok_or_else(|| "params need nu (or nu1)".to_string())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub horizon: f64,
    pub n_steps: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<Arc<SpaceTimeGrid>, String> {
        SpaceTimeGrid::uniform(self.x_min, self.x_max, self.n_x, self.horizon, self.n_steps)
            .map(Arc::new)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SamplingConfig {
    pub n_samples: Option<usize>,
    pub n_noise: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct TrajectoryConfig {
    pub horizon: f64,
    pub n_points: usize,
    /// Optional second viscosity factor for the coupled twin run
    /// (same noise motion).
    pub nu2_factor: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SolveConfig {
    pub solver: SolverKind,
    pub mode: ModeKind,
    pub times: Vec<f64>,
    pub x: f64,
    pub y: f64,
    pub profile: ProfileConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Ito,
    Stratonovich,
    Gamma,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    Unconditional,
    Conditional,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "shape")]
pub enum ProfileConfig {
    /// Unit-mass Gaussian density in y (x-independent).
    YGaussian {
        sigma: f64,
    },
    /// Unit-peak product Gaussian in (x, y).
    Gaussian {
        sigma_x: f64,
        sigma_y: f64,
    },
    GaussianStrip,
    DiracProduct,
}

impl ProfileConfig {
    pub fn build(&self) -> InitialProfile {
        match *self {
            ProfileConfig::YGaussian { sigma } => y_gaussian_profile(sigma),
            ProfileConfig::Gaussian { sigma_x, sigma_y } => InitialProfile::function(
                move |x: f64, y: f64| {
                    (-0.5 * (x * x / (sigma_x * sigma_x) + y * y / (sigma_y * sigma_y))).exp()
                },
                1.0,
                Some((1.0, 1.0)),
            ),
            ProfileConfig::GaussianStrip => InitialProfile::GaussianStrip,
            ProfileConfig::DiracProduct => InitialProfile::DiracProduct,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpectralConfig {
    pub xi_radius: f64,
    #[serde(default = "default_xi_points")]
    pub xi_points: usize,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub ys: Vec<f64>,
    pub probe_x: Vec<f64>,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

fn default_xi_points() -> usize {
    257
}
fn default_tail_tol() -> f64 {
    1e-4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct WzConfig {
    pub eps0: f64,
    pub delta0: f64,
    pub levels: usize,
    pub sigma0: f64,
    pub t: f64,
    pub x: f64,
    pub n_noise: usize,
    pub n_paths: usize,
}

impl WzConfig {
    pub fn spec0(&self, nu: f64) -> Result<MollifierSpec, String> {
        MollifierSpec::heat_kernel(nu, self.eps0, self.delta0).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DimConfig {
    pub set: DimSet,
    pub horizon: usize,
    #[serde(default = "default_refinement")]
    pub refinement_levels: u32,
    pub z: Option<f64>,
    pub alpha: Option<f64>,
    pub k_level: Option<f64>,
    pub delta: Option<f64>,
    /// Pass tolerance on |slope − target| for the summary row.
    #[serde(default = "default_dim_tol")]
    pub tolerance: f64,
}

fn default_refinement() -> u32 {
    4
}
fn default_dim_tol() -> f64 {
    0.15
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DimSet {
    BmLevel,
    BmCone,
    OuExceedance,
    GammaExceedance,
    GammaDecay,
    PerfectSquares,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct NuLimitConfig {
    pub kind: NuLimitKind,
    pub nus: Vec<f64>,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub x_prime: f64,
    #[serde(default)]
    pub y_prime: f64,
    pub sigma0: Option<f64>,
    pub n_paths: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NuLimitKind {
    Inviscid,
    GammaMean,
    GammaDichotomy,
    GammaCov,
    NegativeMoment,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct WalshConfig {
    pub phi: WalshPhi,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalshPhi {
    Indicator,
    GaussianBump,
    CosineBump,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("config parse error: {e}"))
    }

    pub fn kernel(&self) -> Result<CorrelationKernel, String> {
        self.kernel
            .as_ref()
            .ok_or("missing [kernel] section")?
            .build()
    }

    pub fn grid(&self) -> Result<Arc<SpaceTimeGrid>, String> {
        self.grid.as_ref().ok_or("missing [grid] section")?.build()
    }

    pub fn params(&self) -> Result<ModelParams, String> {
        self.params
            .as_ref()
            .ok_or("missing [params] section")?
            .build()
    }

    pub fn nu(&self) -> Result<f64, String> {
        self.params.as_ref().ok_or("missing [params] section")?.nu()
    }

    pub fn n_samples(&self, default: usize) -> usize {
        self.sampling.n_samples.unwrap_or(default)
    }

    pub fn n_noise(&self, default: usize) -> usize {
        self.sampling.n_noise.unwrap_or(default)
    }
}
