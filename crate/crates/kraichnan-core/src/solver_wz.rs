//! Wong–Zakai programme: solve the mollified classical equation through
//! its path representation and demonstrate convergence, as ε,δ → 0, to
//! the Stratonovich solution (the Itô solution with ν₂ shifted by ½ρ(0)).
//!
//! The mollified solution is
//!
//!   θ_{ε,δ}(t,x,y) = E[ θ₀(x + B_t, y + B′_t − ∫₀ᵗ V_{ε,δ}(s, x+B_{t−s}) ds) | V ],
//!
//! with B, B′ independent speed-2ν motions. The curvilinear term is a
//! trapezoid quadrature of the precomputed mollified field along each
//! sampled path. Common random numbers (shared noise, shared path seeds,
//! shared transverse normals) couple every mollification level to the
//! Stratonovich reference, so the study measures pure mollification error.

use rand::Rng;
use rand_distr::StandardNormal;
use std::io::Write;
use std::sync::Arc;

use crate::curvilinear::sample_grid;
use crate::error::Error;
use crate::kernels::{heat_kernel_unchecked, CorrelationKernel};
use crate::noise::{
    mollified_field, MollifiedField, MollifierSpec, NoiseRealization, SpaceTimeGrid, SpatialFactor,
};
use crate::paths::{sample_bm, TimePath};
use crate::quad::trapezoid_uniform;
use crate::rng::{derive_seed, stream, tag};
use crate::solver_fk::{InitialProfile, Mode, ScalarEstimate};
use crate::stats::{mean_stderr, weighted_line_fit, LineFit};
use crate::{exec, Result};

/// Trapezoid quadrature of the mollified field along x + B_{t−s}.
fn mollified_curvilinear(
    field: &MollifiedField,
    grid: &SpaceTimeGrid,
    x: f64,
    path_values: &[f64],
    jt: usize,
) -> Result<f64> {
    let dt = grid.dt();
    let mut nodes = Vec::with_capacity(jt + 1);
    for k in 0..=jt {
        let s = k as f64 * dt;
        let pos = x + path_values[jt - k];
        nodes.push(field.eval(s, pos)?);
    }
    Ok(trapezoid_uniform(&nodes, dt))
}

/// The random ingredients of one mollified/reference sample pair.
struct SampleParts {
    x_end: f64,
    transverse: f64,
    /// Mollified curvilinear quadrature per requested field.
    q_levels: Vec<f64>,
    /// Grid Riemann sum of the raw increments (the Stratonovich term).
    curv: f64,
}

/// Draws paths and curvilinear terms for the mollified solver; every
/// sample index is a pure function of (seed, index), so levels and the
/// reference share randomness exactly.
struct WzSampler<'a> {
    nu: f64,
    noise: &'a NoiseRealization,
    times: Arc<Vec<f64>>,
    jt: usize,
    t: f64,
    x: f64,
    seed: u64,
}

impl<'a> WzSampler<'a> {
    fn new(nu: f64, noise: &'a NoiseRealization, t: f64, x: f64, seed: u64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::domain(format!("need nu > 0, got {nu}")));
        }
        let grid = noise.grid();
        let jt = grid.time_index(t)?;
        if jt == 0 {
            return Err(Error::domain(
                "t must be at least one noise step".to_string(),
            ));
        }
        Ok(Self {
            nu,
            noise,
            times: Arc::new(grid.t_points()[..=jt].to_vec()),
            jt,
            t,
            x,
            seed,
        })
    }

    fn parts(&self, i: usize, fields: &[&MollifiedField]) -> Result<SampleParts> {
        let path_seed = derive_seed(self.seed, &[tag::WZ, i as u64]);
        let path = sample_bm(2.0 * self.nu, &self.times, path_seed)?;
        let mut rng = stream(self.seed, &[tag::WZ, i as u64, 1]);
        let z: f64 = rng.sample(StandardNormal);
        let q_levels: Result<Vec<f64>> = fields
            .iter()
            .map(|field| {
                mollified_curvilinear(field, self.noise.grid(), self.x, path.values(), self.jt)
            })
            .collect();
        Ok(SampleParts {
            x_end: self.x + path.endpoint_value(),
            transverse: (2.0 * self.nu * self.t).sqrt() * z,
            q_levels: q_levels?,
            curv: sample_grid(self.noise, self.x, &path, self.t)?,
        })
    }
}

/// Estimate θ_{ε,δ}(t,x,y) for one noise realization.
#[allow(clippy::too_many_arguments)]
pub fn solve_mollified(
    profile: &InitialProfile,
    nu: f64,
    kernel: &CorrelationKernel,
    spec: &MollifierSpec,
    noise: &NoiseRealization,
    point: (f64, f64, f64),
    n_paths: usize,
    seed: u64,
) -> Result<ScalarEstimate> {
    if kernel.content_hash() != noise.kernel().content_hash() {
        return Err(Error::domain(
            "kernel does not match the noise realization".to_string(),
        ));
    }
    if matches!(profile, InitialProfile::DiracProduct) {
        return Err(Error::domain(
            "point-mass data is not supported by the mollified solver".to_string(),
        ));
    }
    let (t, x, y) = point;
    let field = mollified_field(noise, spec)?;
    let sampler = WzSampler::new(nu, noise, t, x, seed)?;
    let values: Result<Vec<f64>> = exec::map_indexed(n_paths, |i| {
        let parts = sampler.parts(i, &[&field])?;
        Ok(profile.eval(parts.x_end, y + parts.transverse - parts.q_levels[0], nu))
    })
    .into_iter()
    .collect();
    let values = values?;
    let m = mean_stderr(&values);
    Ok(ScalarEstimate {
        value: m.mean,
        stderr: m.stderr,
        n_samples: n_paths,
        mode: Mode::ConditionalTrajectory,
        point,
    })
}

/// The halving sequence (ε_k, δ_k) = 2^{−k}(ε₀, δ₀), k = 0..levels−1.
pub fn halving_specs(spec0: &MollifierSpec, levels: usize) -> Vec<MollifierSpec> {
    (0..levels)
        .map(|k| {
            let f = 0.5f64.powi(k as i32);
            MollifierSpec {
                shape: spec0.shape,
                eps: spec0.eps * f,
                delta: spec0.delta * f,
            }
        })
        .collect()
}

/// One row of the convergence table.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub level: usize,
    pub eps: f64,
    pub delta: f64,
    /// L² distance (over shared noise realizations and paths) between the
    /// mollified sample and the Stratonovich reference sample.
    pub distance: f64,
    pub stderr: f64,
    /// Effective ν₂ fitted from the y-smoothing variance of the mean field.
    pub fitted_nu2: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// RMS of the reference samples; "field scale" for relative bounds.
    pub field_scale: f64,
}

impl ConvergenceTable {
    /// CSV: (level, eps, delta, distance, stderr, fitted_nu2).
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "level,eps,delta,distance,stderr,fitted_nu2")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.level, r.eps, r.delta, r.distance, r.stderr, r.fitted_nu2
            )?;
        }
        Ok(())
    }
}

/// The y-Gaussian profile used by the study and the drift fit: a unit-mass
/// density in y of standard deviation σ₀, independent of x.
pub fn y_gaussian_profile(sigma0: f64) -> InitialProfile {
    let var = sigma0 * sigma0;
    InitialProfile::function(
        move |_x: f64, y: f64| heat_kernel_unchecked(0.5, var, y),
        heat_kernel_unchecked(0.5, var, 0.0),
        Some((1.0, 1.0)),
    )
}

/// Convergence study over a decreasing mollifier sequence with common
/// random numbers: the same noise realizations (the shared cache), path
/// seeds, and transverse normals feed every level and the Stratonovich
/// reference. The initial profile is the y-Gaussian density of width
/// `sigma0`, whose exact mean field stays Gaussian and pins the drift fit.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study(
    sigma0: f64,
    nu: f64,
    kernel: &CorrelationKernel,
    specs: &[MollifierSpec],
    factor: &SpatialFactor,
    point: (f64, f64, f64),
    n_noise: usize,
    n_paths: usize,
    seed: u64,
) -> Result<ConvergenceTable> {
    if specs.is_empty() {
        return Err(Error::domain(
            "need at least one mollifier level".to_string(),
        ));
    }
    for pair in specs.windows(2) {
        if !(pair[1].eps < pair[0].eps && pair[1].delta < pair[0].delta) {
            return Err(Error::domain(
                "mollifier sequence must be strictly decreasing".to_string(),
            ));
        }
    }
    if kernel.content_hash() != factor.kernel().content_hash() {
        return Err(Error::domain(
            "kernel does not match the noise factor".to_string(),
        ));
    }
    let profile = y_gaussian_profile(sigma0);
    let levels = specs.len();
    let (t, x, _y) = point;
    let y_probe: Vec<f64> = (-4..=4).map(|i| i as f64 * 0.45 * sigma0).collect();

    let mut sq_diff: Vec<Vec<f64>> = vec![Vec::new(); levels];
    let mut ref_sq: Vec<f64> = Vec::new();
    let mut probe_sums = vec![vec![0.0; y_probe.len()]; levels];
    let mut n_total = 0usize;

    for r in 0..n_noise {
        let noise = factor.sample(derive_seed(seed, &[tag::WZ, r as u64, 100]));
        let fields: Result<Vec<MollifiedField>> =
            specs.iter().map(|s| mollified_field(&noise, s)).collect();
        let fields = fields?;
        let field_refs: Vec<&MollifiedField> = fields.iter().collect();
        let sampler = WzSampler::new(
            nu,
            &noise,
            t,
            x,
            derive_seed(seed, &[tag::WZ, r as u64, 101]),
        )?;
        let samples: Result<Vec<SampleParts>> =
            exec::map_indexed(n_paths, |i| sampler.parts(i, &field_refs))
                .into_iter()
                .collect();
        for parts in samples? {
            let reference = profile.eval(parts.x_end, point.2 + parts.transverse - parts.curv, nu);
            for k in 0..levels {
                let mollified = profile.eval(
                    parts.x_end,
                    point.2 + parts.transverse - parts.q_levels[k],
                    nu,
                );
                let d = mollified - reference;
                sq_diff[k].push(d * d);
                for (jp, &yp) in y_probe.iter().enumerate() {
                    probe_sums[k][jp] +=
                        profile.eval(parts.x_end, yp + parts.transverse - parts.q_levels[k], nu);
                }
            }
            ref_sq.push(reference * reference);
            n_total += 1;
        }
    }

    let field_scale = mean_stderr(&ref_sq).mean.sqrt();
    let rows = specs
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            let msq = mean_stderr(&sq_diff[k]);
            let distance = msq.mean.max(0.0).sqrt();
            let stderr = if distance > 0.0 {
                msq.stderr / (2.0 * distance)
            } else {
                0.0
            };
            let mean_field: Vec<f64> = probe_sums[k].iter().map(|&s| s / n_total as f64).collect();
            let fitted_nu2 = match fit_log_gaussian(&y_probe, &mean_field) {
                Ok((fit, _)) => width_to_nu2(fit.slope, sigma0, t),
                Err(_) => f64::NAN,
            };
            ConvergenceRow {
                level: k,
                eps: spec.eps,
                delta: spec.delta,
                distance,
                stderr,
                fitted_nu2,
            }
        })
        .collect();
    Ok(ConvergenceTable { rows, field_scale })
}

/// Regression of log m(y) on y²; returns the fit and the max residual.
fn fit_log_gaussian(ys: &[f64], mean_field: &[f64]) -> Result<(LineFit, f64)> {
    let mut xs = Vec::new();
    let mut logs = Vec::new();
    for (&y, &m) in ys.iter().zip(mean_field) {
        if m > 0.0 {
            xs.push(y * y);
            logs.push(m.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(
            "mean field vanished on the probe grid".to_string(),
        ));
    }
    let w = vec![1.0; xs.len()];
    let fit = weighted_line_fit(&xs, &logs, &w)?;
    let residual = xs
        .iter()
        .zip(&logs)
        .map(|(&x, &l)| (l - fit.slope * x - fit.intercept).abs())
        .fold(0.0f64, f64::max);
    Ok((fit, residual))
}

/// Convert the log-Gaussian slope −1/(2s²) into the effective ν₂ via
/// s² = σ₀² + 2·ν₂·t.
fn width_to_nu2(log_slope: f64, sigma0: f64, t: f64) -> f64 {
    if log_slope >= 0.0 {
        return f64::NAN;
    }
    let s2 = -0.5 / log_slope;
    (s2 - sigma0 * sigma0) / (2.0 * t)
}

/// Drift identification: fit the effective ν₂ of the mean mollified
/// field; the contract is ν₂ → ν + ½ρ(0) as ε,δ → 0. A Gaussian log-fit
/// residual above `residual_tol` is a fit failure.
#[allow(clippy::too_many_arguments)]
pub fn drift_identification(
    nu: f64,
    kernel: &CorrelationKernel,
    spec: &MollifierSpec,
    factor: &SpatialFactor,
    sigma0: f64,
    point: (f64, f64, f64),
    n_noise: usize,
    n_paths: usize,
    seed: u64,
    residual_tol: f64,
) -> Result<f64> {
    if kernel.content_hash() != factor.kernel().content_hash() {
        return Err(Error::domain(
            "kernel does not match the noise factor".to_string(),
        ));
    }
    let profile = y_gaussian_profile(sigma0);
    let (t, x, _) = point;
    let y_probe: Vec<f64> = (-4..=4).map(|i| i as f64 * 0.45 * sigma0).collect();
    let mut probe_sums = vec![0.0; y_probe.len()];
    let mut n_total = 0usize;
    for r in 0..n_noise {
        let noise = factor.sample(derive_seed(seed, &[tag::WZ, r as u64, 100]));
        let field = mollified_field(&noise, spec)?;
        let sampler = WzSampler::new(
            nu,
            &noise,
            t,
            x,
            derive_seed(seed, &[tag::WZ, r as u64, 101]),
        )?;
        let samples: Result<Vec<SampleParts>> =
            exec::map_indexed(n_paths, |i| sampler.parts(i, &[&field]))
                .into_iter()
                .collect();
        for parts in samples? {
            for (jp, &yp) in y_probe.iter().enumerate() {
                probe_sums[jp] +=
                    profile.eval(parts.x_end, yp + parts.transverse - parts.q_levels[0], nu);
            }
            n_total += 1;
        }
    }
    let mean_field: Vec<f64> = probe_sums.iter().map(|&s| s / n_total as f64).collect();
    let (fit, residual) = fit_log_gaussian(&y_probe, &mean_field)?;
    if residual > residual_tol {
        return Err(Error::InsufficientData(format!(
            "non-Gaussian mean-field residual {residual:.3e} > tol {residual_tol:.1e}"
        )));
    }
    let nu2 = width_to_nu2(fit.slope, sigma0, t);
    if !nu2.is_finite() || nu2 <= 0.0 {
        return Err(Error::InsufficientData(format!(
            "drift fit outside physical range: {nu2}"
        )));
    }
    Ok(nu2)
}
