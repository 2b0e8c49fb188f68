//! Feynman–Kac Monte Carlo solver.
//!
//! The Itô/Walsh solution of ∂ₜθ = ν₁∂²ₓθ + ν₂∂²_yθ + ∂_yθ·V is
//!
//!   θ(t,x,y) = E[ θ₀(x + B_t, y + B̄_t + μt − ∫₀ᵗ V(s, x+B_{t−s}) ds) | V ],
//!
//! with Var(B₁) = 2ν₁ and Var(B̄₁) = 2κ, κ = ν₂ − ½ρ(0) > 0. The solver
//! estimates this in two modes:
//!
//! * `UnconditionalMoment` — averages over the noise as well, so the
//!   estimate targets E[θ]. The curvilinear integral is drawn from its
//!   conditional-Gaussian law N(0, t·ρ(0)) per path, which is
//!   path-independent for a single anchor and removes all grid bias.
//! * `ConditionalTrajectory` — a fixed `NoiseRealization` is shared by
//!   every path (the curvilinear term comes from the grid Riemann sum), so
//!   the estimate targets θ itself for that noise, and common random
//!   numbers couple runs across ν values.
//!
//! Point-mass initial data is handled by the fundamental field Γ^{(ν)}
//! (`gamma_field`), never pushed through `solve_ito` directly.

use rand::Rng;
use rand_distr::StandardNormal;
use std::io::Write;
use std::sync::Arc;

use crate::curvilinear::sample_grid;
use crate::error::Error;
use crate::kernels::{heat_kernel_unchecked, CorrelationKernel, ModelParams};
use crate::noise::NoiseRealization;
use crate::paths::{sample_bm, to_bridge};
use crate::rng::{derive_seed, stream, tag};
use crate::stats::mean_stderr;
use crate::{exec, Result};

/// Initial profile θ₀.
#[derive(Clone)]
pub enum InitialProfile {
    /// A bounded function with optional Hölder exponents (α, ζ).
    Function(FunctionProfile),
    /// δ₀ ⊗ δ₀ point mass; routed through Γ, not `solve_ito`.
    DiracProduct,
    /// θ₀(x,y) = p₁^{(κ)}(y), the sharp-dissipation profile. κ is taken
    /// from the model parameters at solve time.
    GaussianStrip,
}

#[derive(Clone)]
pub struct FunctionProfile {
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    /// Uniform bound M with |θ₀| ≤ M.
    pub bound: f64,
    /// Hölder exponents (α, ζ) in x and y, when declared.
    pub holder: Option<(f64, f64)>,
}

impl FunctionProfile {
    pub fn new(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        bound: f64,
        holder: Option<(f64, f64)>,
    ) -> Self {
        Self {
            f: Arc::new(f),
            bound,
            holder,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }
}

impl InitialProfile {
    pub fn function(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        bound: f64,
        holder: Option<(f64, f64)>,
    ) -> Self {
        InitialProfile::Function(FunctionProfile::new(f, bound, holder))
    }

    /// Evaluate the profile; `kappa` feeds the GaussianStrip variant.
    pub fn eval(&self, x: f64, y: f64, kappa: f64) -> f64 {
        match self {
            InitialProfile::Function(p) => p.eval(x, y),
            InitialProfile::GaussianStrip => heat_kernel_unchecked(kappa, 1.0, y),
            // point masses are never evaluated pointwise; the solvers
            // route them through gamma_field
            InitialProfile::DiracProduct => f64::NAN,
        }
    }
}

/// Estimation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    UnconditionalMoment,
    ConditionalTrajectory,
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::UnconditionalMoment => "unconditional",
            Mode::ConditionalTrajectory => "conditional",
        }
    }
}

/// Monte Carlo estimate at a space-time point.
#[derive(Debug, Clone, Copy)]
pub struct ScalarEstimate {
    pub value: f64,
    /// Sample standard deviation / √n.
    pub stderr: f64,
    pub n_samples: usize,
    pub mode: Mode,
    pub point: (f64, f64, f64),
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("need t > 0, got {t}")));
    }
    Ok(())
}

/// Per-sample values behind `solve_ito` (exposed so ordering/positivity
/// properties can be checked sample-wise under shared seeds).
#[allow(clippy::too_many_arguments)]
pub fn solve_ito_samples(
    profile: &InitialProfile,
    params: &ModelParams,
    kernel: &CorrelationKernel,
    point: (f64, f64, f64),
    n_samples: usize,
    seed: u64,
    mode: Mode,
    noise: Option<&NoiseRealization>,
) -> Result<Vec<f64>> {
    let kappa = params.require_low_turbulence(kernel)?;
    if matches!(profile, InitialProfile::DiracProduct) {
        return Err(Error::domain(
            "point-mass initial data goes through gamma_field, not solve_ito".to_string(),
        ));
    }
    let (t, x, y) = point;
    check_time(t)?;
    if n_samples == 0 {
        return Err(Error::domain("n_samples must be positive".to_string()));
    }
    let rho0 = kernel.rho0();
    let drift = params.mu * t;

    match mode {
        Mode::UnconditionalMoment => {
            let scale_x = (2.0 * params.nu1 * t).sqrt();
            let scale_y = (2.0 * kappa * t).sqrt();
            let scale_c = (t * rho0).sqrt();
            Ok(exec::map_indexed(n_samples, |i| {
                let mut rng = stream(seed, &[tag::SOLVER_FK, i as u64]);
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let z3: f64 = rng.sample(StandardNormal);
                profile.eval(
                    x + scale_x * z1,
                    y + scale_y * z2 + drift - scale_c * z3,
                    kappa,
                )
            }))
        }
        Mode::ConditionalTrajectory => {
            let noise = noise.ok_or_else(|| {
                Error::domain("ConditionalTrajectory mode requires a noise realization".to_string())
            })?;
            let grid = noise.grid();
            let jt = grid.time_index(t)?;
            if jt == 0 {
                return Err(Error::domain(
                    "t must be at least one noise step".to_string(),
                ));
            }
            let times = Arc::new(grid.t_points()[..=jt].to_vec());
            let scale_y = (2.0 * kappa * t).sqrt();
            let results = exec::map_indexed(n_samples, |i| -> Result<f64> {
                let path_seed = derive_seed(seed, &[tag::SOLVER_FK, i as u64]);
                let path = sample_bm(2.0 * params.nu1, &times, path_seed)?;
                let curv = sample_grid(noise, x, &path, t)?;
                let mut rng = stream(seed, &[tag::SOLVER_FK, i as u64, 1]);
                let z: f64 = rng.sample(StandardNormal);
                Ok(profile.eval(
                    x + path.endpoint_value(),
                    y + scale_y * z + drift - curv,
                    kappa,
                ))
            });
            results.into_iter().collect()
        }
    }
}

/// Itô/Walsh solution estimate at `point = (t, x, y)`.
#[allow(clippy::too_many_arguments)]
pub fn solve_ito(
    profile: &InitialProfile,
    params: &ModelParams,
    kernel: &CorrelationKernel,
    point: (f64, f64, f64),
    n_samples: usize,
    seed: u64,
    mode: Mode,
    noise: Option<&NoiseRealization>,
) -> Result<ScalarEstimate> {
    let samples = solve_ito_samples(profile, params, kernel, point, n_samples, seed, mode, noise)?;
    let m = mean_stderr(&samples);
    Ok(ScalarEstimate {
        value: m.mean,
        stderr: m.stderr,
        n_samples,
        mode,
        point,
    })
}

/// Stratonovich solution at viscosity ν: the Itô solution with ν₁ = ν and
/// ν₂ = ν + ½ρ(0) (hence κ = ν), draw-for-draw under a shared seed.
#[allow(clippy::too_many_arguments)]
pub fn solve_stratonovich(
    profile: &InitialProfile,
    nu: f64,
    kernel: &CorrelationKernel,
    point: (f64, f64, f64),
    n_samples: usize,
    seed: u64,
    mode: Mode,
    noise: Option<&NoiseRealization>,
) -> Result<ScalarEstimate> {
    let params = ModelParams::stratonovich(nu, kernel.rho0())?;
    solve_ito(
        profile, &params, kernel, point, n_samples, seed, mode, noise,
    )
}

/// Curvilinear draws along Γ's bridges: one value of
/// 𝒴 = ∫₀ᵗ V(s, x + B^{(t,−x)}_{t−s}) ds per bridge.
///
/// Given the bridge, 𝒴 is N(0, t·ρ(0)) whatever the bridge looks like, so
/// the unconditional mode draws it directly; the conditional mode walks
/// each sampled bridge through the fixed noise.
#[allow(clippy::too_many_arguments)]
pub fn gamma_curvilinear_draws(
    nu: f64,
    kernel: &CorrelationKernel,
    t: f64,
    x: f64,
    n_bridges: usize,
    seed: u64,
    mode: Mode,
    noise: Option<&NoiseRealization>,
) -> Result<Vec<f64>> {
    if !(nu > 0.0) {
        return Err(Error::domain(format!("need nu > 0, got {nu}")));
    }
    check_time(t)?;
    if n_bridges == 0 {
        return Err(Error::domain("n_bridges must be positive".to_string()));
    }
    match mode {
        Mode::UnconditionalMoment => {
            let scale = (t * kernel.rho0()).sqrt();
            Ok(exec::map_indexed(n_bridges, |i| {
                let mut rng = stream(seed, &[tag::SOLVER_FK, i as u64, 2]);
                let z: f64 = rng.sample(StandardNormal);
                scale * z
            }))
        }
        Mode::ConditionalTrajectory => {
            let noise = noise.ok_or_else(|| {
                Error::domain("ConditionalTrajectory mode requires a noise realization".to_string())
            })?;
            let grid = noise.grid();
            let jt = grid.time_index(t)?;
            if jt == 0 {
                return Err(Error::domain(
                    "t must be at least one noise step".to_string(),
                ));
            }
            let times = Arc::new(grid.t_points()[..=jt].to_vec());
            let results = exec::map_indexed(n_bridges, |i| -> Result<f64> {
                let path_seed = derive_seed(seed, &[tag::SOLVER_FK, i as u64, 3]);
                let motion = sample_bm(2.0 * nu, &times, path_seed)?;
                let bridge = to_bridge(&motion, t, -x)?;
                sample_grid(noise, x, &bridge, t)
            });
            results.into_iter().collect()
        }
    }
}

/// The fundamental field Γ^{(ν)}_t(x,y) = p_t^{(ν)}(x) ·
/// E[ p_t^{(ν)}(y − 𝒴) | V ], averaged over `n_bridges` bridges. This is
/// the Stratonovich solution for θ₀ = δ₀ ⊗ δ₀.
pub fn gamma_field(
    nu: f64,
    kernel: &CorrelationKernel,
    point: (f64, f64, f64),
    n_bridges: usize,
    seed: u64,
    mode: Mode,
    noise: Option<&NoiseRealization>,
) -> Result<ScalarEstimate> {
    let (t, x, y) = point;
    let draws = gamma_curvilinear_draws(nu, kernel, t, x, n_bridges, seed, mode, noise)?;
    let px = heat_kernel_unchecked(nu, t, x);
    let values: Vec<f64> = draws
        .iter()
        .map(|&c| heat_kernel_unchecked(nu, t, y - c))
        .collect();
    let m = mean_stderr(&values);
    Ok(ScalarEstimate {
        value: px * m.mean,
        stderr: px * m.stderr,
        n_samples: n_bridges,
        mode,
        point,
    })
}

/// Closed-form Γ for constant kernels:
/// Γ_t(x,y) = p_t^{(ν)}(x) · p_t^{(ν)}(y − √ρ(0)·W_t), exact given the
/// standard Brownian value W_t.
pub fn gamma_closed_form(
    nu: f64,
    kernel: &CorrelationKernel,
    w_t: f64,
    t: f64,
    x: f64,
    y: f64,
) -> Result<f64> {
    if !kernel.is_constant() {
        return Err(Error::UnsupportedKernel(
            "gamma_closed_form needs the constant kernel".to_string(),
        ));
    }
    if !(nu > 0.0) {
        return Err(Error::domain(format!("need nu > 0, got {nu}")));
    }
    check_time(t)?;
    let shift = kernel.rho0().sqrt() * w_t;
    Ok(heat_kernel_unchecked(nu, t, x) * heat_kernel_unchecked(nu, t, y - shift))
}

/// Initial measure for `convolve_profile`.
pub enum Measure {
    /// Point masses (a, b, weight).
    Atoms(Vec<(f64, f64, f64)>),
    /// A density integrated with the midpoint rule on its support box.
    Density {
        f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        support: (f64, f64, f64, f64), // (a0, a1, b0, b1)
        cells: (usize, usize),
    },
}

/// A field sampled on a rectangular (x, y) grid.
#[derive(Debug, Clone)]
pub struct GridField {
    pub t: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major: index = ix * ys.len() + iy.
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl GridField {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.ys.len() + iy]
    }

    /// Bilinear interpolation; errors when (x, y) leaves the grid.
    pub fn interpolate(&self, x: f64, y: f64) -> Result<f64> {
        let locate = |pts: &[f64], v: f64| -> Result<(usize, f64)> {
            let d = pts[1] - pts[0];
            let u = (v - pts[0]) / d;
            if u < -1e-12 || u > (pts.len() - 1) as f64 + 1e-12 {
                return Err(Error::OutOfDomain(format!(
                    "{v} outside sampled field grid; widen the grid"
                )));
            }
            let i = (u.floor().max(0.0) as usize).min(pts.len() - 2);
            Ok((i, u - i as f64))
        };
        let (ix, fx) = locate(&self.xs, x)?;
        let (iy, fy) = locate(&self.ys, y)?;
        let ny = self.ys.len();
        let v00 = self.values[ix * ny + iy];
        let v01 = self.values[ix * ny + iy + 1];
        let v10 = self.values[(ix + 1) * ny + iy];
        let v11 = self.values[(ix + 1) * ny + iy + 1];
        Ok(v00 * (1.0 - fx) * (1.0 - fy)
            + v01 * (1.0 - fx) * fy
            + v10 * fx * (1.0 - fy)
            + v11 * fx * fy)
    }

    /// Field CSV: one metadata header line, then (x, y, value, stderr).
    pub fn write_csv(&self, meta: &str, out: &mut impl Write) -> Result<()> {
        writeln!(
            out,
            "# t={} nx={} ny={} {}",
            self.t,
            self.xs.len(),
            self.ys.len(),
            meta
        )?;
        writeln!(out, "x,y,value,stderr")?;
        let ny = self.ys.len();
        for (ix, &x) in self.xs.iter().enumerate() {
            for (iy, &y) in self.ys.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{}",
                    x,
                    y,
                    self.values[ix * ny + iy],
                    self.stderr[ix * ny + iy]
                )?;
            }
        }
        Ok(())
    }
}

/// Sample Γ on a rectangular grid; bridge draws are shared across the y
/// axis for each x, so y-slices are smooth in y.
#[allow(clippy::too_many_arguments)]
pub fn gamma_field_grid(
    nu: f64,
    kernel: &CorrelationKernel,
    t: f64,
    xs: &[f64],
    ys: &[f64],
    n_bridges: usize,
    seed: u64,
    mode: Mode,
    noise: Option<&NoiseRealization>,
) -> Result<GridField> {
    let mut values = vec![0.0; xs.len() * ys.len()];
    let mut stderr = vec![0.0; xs.len() * ys.len()];
    for (ix, &x) in xs.iter().enumerate() {
        let draws = gamma_curvilinear_draws(
            nu,
            kernel,
            t,
            x,
            n_bridges,
            derive_seed(seed, &[ix as u64]),
            mode,
            noise,
        )?;
        let px = heat_kernel_unchecked(nu, t, x);
        for (iy, &y) in ys.iter().enumerate() {
            let vals: Vec<f64> = draws
                .iter()
                .map(|&c| heat_kernel_unchecked(nu, t, y - c))
                .collect();
            let m = mean_stderr(&vals);
            values[ix * ys.len() + iy] = px * m.mean;
            stderr[ix * ys.len() + iy] = px * m.stderr;
        }
    }
    Ok(GridField {
        t,
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        values,
        stderr,
    })
}

/// G_μ(t,·,·) = (μ * Γ_t) by atom summation or midpoint quadrature over
/// the measure's support, evaluated at the requested output points. Every
/// shift (x − a, y − b) must stay inside the sampled Γ grid; otherwise the
/// grid was too small and the call fails with an out-of-domain error.
pub fn convolve_profile(
    mu: &Measure,
    gamma: &GridField,
    out_xs: &[f64],
    out_ys: &[f64],
) -> Result<GridField> {
    let ny = out_ys.len();
    let mut values = vec![0.0; out_xs.len() * ny];
    let stderr = vec![0.0; out_xs.len() * ny];
    match mu {
        Measure::Atoms(atoms) => {
            for (ix, &x) in out_xs.iter().enumerate() {
                for (iy, &y) in out_ys.iter().enumerate() {
                    let mut acc = 0.0;
                    for &(a, b, w) in atoms {
                        acc += w * gamma.interpolate(x - a, y - b)?;
                    }
                    values[ix * ny + iy] = acc;
                }
            }
        }
        Measure::Density { f, support, cells } => {
            let (a0, a1, b0, b1) = *support;
            let (na, nb) = *cells;
            let da = (a1 - a0) / na as f64;
            let db = (b1 - b0) / nb as f64;
            for (ix, &x) in out_xs.iter().enumerate() {
                for (iy, &y) in out_ys.iter().enumerate() {
                    let mut acc = 0.0;
                    for ia in 0..na {
                        let a = a0 + (ia as f64 + 0.5) * da;
                        for ib in 0..nb {
                            let b = b0 + (ib as f64 + 0.5) * db;
                            let w = f(a, b);
                            if w != 0.0 {
                                acc += w * gamma.interpolate(x - a, y - b)? * da * db;
                            }
                        }
                    }
                    values[ix * ny + iy] = acc;
                }
            }
        }
    }
    Ok(GridField {
        t: gamma.t,
        xs: out_xs.to_vec(),
        ys: out_ys.to_vec(),
        values,
        stderr,
    })
}

/// One row of the trajectory CSV (t, value, stderr, mode, nu, rho0, seed).
#[derive(Debug, Clone)]
pub struct TrajectoryRow {
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
    pub mode: &'static str,
    pub nu: f64,
    pub rho0: f64,
    pub seed: u64,
}

pub fn write_trajectory_csv(rows: &[TrajectoryRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "t,value,stderr,mode,nu,rho0,seed")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.t, r.value, r.stderr, r.mode, r.nu, r.rho0, r.seed
        )?;
    }
    Ok(())
}
