//! The ν → 0 programme: inviscid limits for function data, mean and
//! covariance limits of the fundamental field Γ, and stabilization
//! diagnostics for the negative moments of 1 − K̃.
//!
//! As ν ↓ 0 the Stratonovich solution with nice data converges to the
//! method-of-characteristics value θ₀(x, y − W(t,x)), while for point-mass
//! data E[Γ(t,0,·)] blows up like ν^{−1/2} and E[Γ(t,x≠0,·)] collapses —
//! the dichotomy that separates function data from singular data.

use rand::Rng;
use rand_distr::StandardNormal;
use std::io::Write;

use crate::curvilinear::{ktilde_bridges, ktilde_from_bridges, ktilde_motions};
use crate::error::Error;
use crate::kernels::{heat_kernel_unchecked, CorrelationKernel};
use crate::noise::SpatialFactor;
use crate::paths::to_bridge;
use crate::rng::{derive_seed, stream, tag};
use crate::solver_fk::{solve_stratonovich, InitialProfile, Mode};
use crate::stats::{mean_stderr, weighted_line_fit, MeanStderr};
use crate::{exec, Result};

/// L² distance (over shared noise realizations) between the Stratonovich
/// solution at viscosity ν and the method-of-characteristics value
/// θ₀(x, y − W(t,x)) computed from the same noise. Path seeds are shared
/// across calls, so a ν-sweep is coupled by common random numbers.
#[allow(clippy::too_many_arguments)]
pub fn inviscid_distance(
    profile: &InitialProfile,
    kernel: &CorrelationKernel,
    nu: f64,
    point: (f64, f64, f64),
    factor: &SpatialFactor,
    n_noise: usize,
    n_paths: usize,
    seed: u64,
) -> Result<MeanStderr> {
    let func = match profile {
        InitialProfile::Function(f) => f,
        _ => {
            return Err(Error::domain(
                "inviscid limit needs a bounded Function profile".to_string(),
            ))
        }
    };
    if !func.bound.is_finite() {
        return Err(Error::domain("profile bound must be finite".to_string()));
    }
    if func.holder.is_none() {
        return Err(Error::domain(
            "inviscid limit needs declared Hoelder data".to_string(),
        ));
    }
    let (_t, x, y) = point;
    let sq: Result<Vec<f64>> = (0..n_noise)
        .map(|r| -> Result<f64> {
            let noise = factor.sample(derive_seed(seed, &[tag::NU_LIMIT, r as u64]));
            let est = solve_stratonovich(
                profile,
                nu,
                kernel,
                point,
                n_paths,
                derive_seed(seed, &[tag::NU_LIMIT, r as u64, 1]),
                Mode::ConditionalTrajectory,
                Some(&noise),
            )?;
            let w = *noise.w_series_at(x)?.last().unwrap();
            let characteristics = func.eval(x, y - w);
            Ok((est.value - characteristics) * (est.value - characteristics))
        })
        .collect();
    let msq = mean_stderr(&sq?);
    let distance = msq.mean.max(0.0).sqrt();
    let stderr = if distance > 0.0 {
        msq.stderr / (2.0 * distance)
    } else {
        0.0
    };
    Ok(MeanStderr {
        mean: distance,
        stderr,
        n: n_noise,
    })
}

/// One row of the Γ mean-limit table.
#[derive(Debug, Clone, Copy)]
pub struct GammaMeanRow {
    pub nu: f64,
    /// Exact identity E[Γ]/p_t^{(ν)}(x) = p_t^{(ν+ρ0/2)}(y).
    pub analytic: f64,
    pub mc_estimate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone)]
pub struct GammaMeanTable {
    pub rows: Vec<GammaMeanRow>,
    /// The ν → 0 limit p_t^{(ρ0/2)}(y).
    pub limit: f64,
}

impl GammaMeanTable {
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "nu,analytic,mc_estimate,stderr")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{}",
                r.nu, r.analytic, r.mc_estimate, r.stderr
            )?;
        }
        writeln!(out, "# limit,{}", self.limit)?;
        Ok(())
    }
}

/// Mean limit of Γ: both the symbolic identity and a Monte Carlo estimate
/// of E[Γ_t(x,y)]/p_t^{(ν)}(x) per ν, with the limit column p_t^{(ρ0/2)}(y).
pub fn gamma_mean_limit(
    kernel: &CorrelationKernel,
    t: f64,
    x: f64,
    y: f64,
    nu_sequence: &[f64],
    n_bridges: usize,
    seed: u64,
) -> Result<GammaMeanTable> {
    let rho0 = kernel.rho0();
    let mut rows = Vec::with_capacity(nu_sequence.len());
    for (i, &nu) in nu_sequence.iter().enumerate() {
        let est = crate::solver_fk::gamma_field(
            nu,
            kernel,
            (t, x, y),
            n_bridges,
            derive_seed(seed, &[i as u64]),
            Mode::UnconditionalMoment,
            None,
        )?;
        let px = heat_kernel_unchecked(nu, t, x);
        rows.push(GammaMeanRow {
            nu,
            analytic: heat_kernel_unchecked(nu + 0.5 * rho0, t, y),
            mc_estimate: est.value / px,
            stderr: est.stderr / px,
        });
    }
    Ok(GammaMeanTable {
        rows,
        limit: heat_kernel_unchecked(0.5 * rho0, t, y),
    })
}

/// Dichotomy of E[Γ] as ν → 0: divergence like ν^{−1/2} at x = 0, decay
/// to 0 at x ≠ 0, evaluated from the exact formula
/// E[Γ_t(x,y)] = p_t^{(ν)}(x)·p_t^{(ν+ρ0/2)}(y).
#[derive(Debug, Clone)]
pub struct DichotomyReport {
    /// (ν, E[Γ](t,0,y), E[Γ](t,x_off,y)) rows.
    pub rows: Vec<(f64, f64, f64)>,
    /// Fitted exponent of E[Γ](t,0,y) in ν (target −1/2).
    pub exponent_at_zero: f64,
    pub x_off: f64,
}

pub fn gamma_mean_dichotomy(
    kernel: &CorrelationKernel,
    t: f64,
    y: f64,
    x_off: f64,
    nu_sequence: &[f64],
) -> Result<DichotomyReport> {
    if x_off == 0.0 {
        return Err(Error::domain("x_off must be nonzero".to_string()));
    }
    let rho0 = kernel.rho0();
    let mut rows = Vec::with_capacity(nu_sequence.len());
    for &nu in nu_sequence {
        if !(nu > 0.0) {
            return Err(Error::domain(format!("need nu > 0, got {nu}")));
        }
        let at_zero =
            heat_kernel_unchecked(nu, t, 0.0) * heat_kernel_unchecked(nu + 0.5 * rho0, t, y);
        let at_x =
            heat_kernel_unchecked(nu, t, x_off) * heat_kernel_unchecked(nu + 0.5 * rho0, t, y);
        rows.push((nu, at_zero, at_x));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let w = vec![1.0; xs.len()];
    let fit = weighted_line_fit(&xs, &ys, &w)?;
    Ok(DichotomyReport {
        rows,
        exponent_at_zero: fit.slope,
        x_off,
    })
}

/// Monte Carlo estimate over bridge pairs of the ν → 0 covariance limit
///
///   E[ (2πtρ(0)√(1−K̃²))^{−1} · exp(−(y² + y′² − 2yy′K̃)/(2tρ(0)(1−K̃²))) ].
///
/// Draws with K̃ ≥ 1 − 1e−12 are rejected and counted (the negative
/// moments of 1 − K̃ are finite, so the rejection rate must be tiny).
/// Bridge pairs are antithetically coupled unless `antithetic` is off.
#[derive(Debug, Clone, Copy)]
pub struct CovLimitEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_pairs: usize,
    pub rejected: usize,
}

const KTILDE_REJECT: f64 = 1.0 - 1e-12;

fn require_cov_limit_kernel(kernel: &CorrelationKernel, same_point: bool) -> Result<()> {
    if !kernel.monotone_on_halfline() {
        return Err(Error::domain(
            "covariance limit needs rho non-increasing on [0, inf)".to_string(),
        ));
    }
    if !kernel.strictly_peaked() {
        return Err(Error::DegenerateKernel(
            "K~ is identically 1 for kernels that are not strictly peaked".to_string(),
        ));
    }
    if same_point && kernel.holder().is_none() {
        return Err(Error::domain(
            "x = x' needs the lower Hoelder branch (declared Hoelder pair)".to_string(),
        ));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn gamma_cov_limit(
    kernel: &CorrelationKernel,
    t: f64,
    x: f64,
    x_prime: f64,
    y: f64,
    y_prime: f64,
    bridge_speed: f64,
    n_pairs: usize,
    seed: u64,
    antithetic: bool,
    quadrature_steps: usize,
) -> Result<CovLimitEstimate> {
    require_cov_limit_kernel(kernel, x == x_prime)?;
    let rho0 = kernel.rho0();
    let limit_value = |ktilde: f64| -> Option<f64> {
        if ktilde >= KTILDE_REJECT {
            return None;
        }
        let one_m = 1.0 - ktilde * ktilde;
        let denom = 2.0 * std::f64::consts::PI * t * rho0 * one_m.sqrt();
        let expo =
            -(y * y + y_prime * y_prime - 2.0 * y * y_prime * ktilde) / (2.0 * t * rho0 * one_m);
        Some(expo.exp() / denom)
    };
    let draws = exec::map_indexed(n_pairs, |i| -> Result<Vec<Option<f64>>> {
        let pair_seed = derive_seed(seed, &[tag::NU_LIMIT, i as u64, 7]);
        let (m1, m2) = ktilde_motions(t, bridge_speed, pair_seed, quadrature_steps)?;
        let b1 = to_bridge(&m1, t, -x)?;
        let b2 = to_bridge(&m2, t, -x_prime)?;
        let mut out = Vec::with_capacity(2);
        out.push(limit_value(ktilde_from_bridges(
            kernel, t, x, x_prime, &b1, &b2,
        )));
        if antithetic {
            // antithetic partner: bridges built from the sign-flipped motions
            let f1 = to_bridge(&m1.negated(), t, -x)?;
            let f2 = to_bridge(&m2.negated(), t, -x_prime)?;
            out.push(limit_value(ktilde_from_bridges(
                kernel, t, x, x_prime, &f1, &f2,
            )));
        }
        Ok(out)
    });
    let mut values = Vec::new();
    let mut rejected = 0usize;
    for d in draws {
        for v in d? {
            match v {
                Some(v) => values.push(v),
                None => rejected += 1,
            }
        }
    }
    if values.is_empty() {
        return Err(Error::DegenerateKernel(
            "every K~ draw was rejected".to_string(),
        ));
    }
    let m = mean_stderr(&values);
    Ok(CovLimitEstimate {
        value: m.mean,
        stderr: m.stderr,
        n_pairs,
        rejected,
    })
}

/// Direct small-ν estimator of E[(Γ/p)(t,x,y)·(Γ/p)(t,x′,y′)]: per bridge
/// pair, draw the jointly Gaussian curvilinear pair with covariance
/// t·ρ(0)·K̃ and average p_t^{(ν)}(y−𝒴)·p_t^{(ν)}(y′−𝒴′).
#[allow(clippy::too_many_arguments)]
pub fn gamma_pair_moment(
    kernel: &CorrelationKernel,
    t: f64,
    x: f64,
    x_prime: f64,
    y: f64,
    y_prime: f64,
    nu: f64,
    n_pairs: usize,
    seed: u64,
    quadrature_steps: usize,
) -> Result<MeanStderr> {
    if !(nu > 0.0) {
        return Err(Error::domain(format!("need nu > 0, got {nu}")));
    }
    let rho0 = kernel.rho0();
    let values: Result<Vec<f64>> = exec::map_indexed(n_pairs, |i| -> Result<f64> {
        let pair_seed = derive_seed(seed, &[tag::NU_LIMIT, i as u64, 8]);
        let (b1, b2) = ktilde_bridges(t, x, x_prime, 2.0 * nu, pair_seed, quadrature_steps)?;
        let ktilde = ktilde_from_bridges(kernel, t, x, x_prime, &b1, &b2);
        // joint Gaussian (Y, Y') with Var = t rho0, Corr = K~
        let mut rng = stream(pair_seed, &[9]);
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let sd = (t * rho0).sqrt();
        let curv = sd * z1;
        let curv_prime = sd * (ktilde * z1 + (1.0 - ktilde * ktilde).max(0.0).sqrt() * z2);
        Ok(heat_kernel_unchecked(nu, t, y - curv)
            * heat_kernel_unchecked(nu, t, y_prime - curv_prime))
    })
    .into_iter()
    .collect();
    Ok(mean_stderr(&values?))
}

/// Tail/negative-moment diagnostics for 1 − K̃: a soft check that the
/// stabilized estimate of E[(1−K̃)^{−2}] does not drift when the sample
/// doubles, plus a fitted exponential tail log P{1−K̃ < r} ~ −c/r.
#[derive(Debug, Clone)]
pub struct NegativeMomentReport {
    pub e_inv2_half: f64,
    pub e_inv2_full: f64,
    /// Relative change when doubling the sample; stabilized if < 5%.
    pub relative_change: f64,
    pub stabilized: bool,
    /// Fitted slope of log P{1−K̃ < r} against −1/r (positive when the
    /// tail is exponentially thin, as the bound K·e^{−K/r} predicts).
    pub tail_slope: f64,
    pub min_gap: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn negative_moment_probe(
    kernel: &CorrelationKernel,
    t: f64,
    x: f64,
    x_prime: f64,
    bridge_speed: f64,
    n_pairs: usize,
    seed: u64,
    quadrature_steps: usize,
) -> Result<NegativeMomentReport> {
    require_cov_limit_kernel(kernel, x == x_prime)?;
    let gaps: Result<Vec<f64>> = exec::map_indexed(2 * n_pairs, |i| -> Result<f64> {
        let pair_seed = derive_seed(seed, &[tag::NU_LIMIT, i as u64, 10]);
        let (b1, b2) = ktilde_bridges(t, x, x_prime, bridge_speed, pair_seed, quadrature_steps)?;
        Ok(1.0 - ktilde_from_bridges(kernel, t, x, x_prime, &b1, &b2))
    })
    .into_iter()
    .collect();
    let gaps = gaps?;
    let inv2 = |slice: &[f64]| -> f64 {
        let vals: Vec<f64> = slice.iter().map(|&g| 1.0 / (g * g)).collect();
        mean_stderr(&vals).mean
    };
    let e_half = inv2(&gaps[..n_pairs]);
    let e_full = inv2(&gaps);
    let relative_change = (e_full - e_half).abs() / e_full.abs().max(f64::MIN_POSITIVE);
    // empirical tail: P{gap < r} at the lower quantiles vs 1/r
    let mut sorted = gaps.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for q in [0.001, 0.002, 0.005, 0.01, 0.02, 0.05] {
        let idx = ((n as f64 * q) as usize).max(1).min(n - 1);
        let r = sorted[idx];
        if r > 0.0 {
            xs.push(-1.0 / r);
            ys.push(q.ln());
        }
    }
    let tail_slope = if xs.len() >= 3 {
        let w = vec![1.0; xs.len()];
        weighted_line_fit(&xs, &ys, &w)?.slope
    } else {
        f64::NAN
    };
    Ok(NegativeMomentReport {
        e_inv2_half: e_half,
        e_inv2_full: e_full,
        relative_change,
        stabilized: relative_change < 0.05,
        tail_slope,
        min_gap: sorted[0],
    })
}

/// CSV with (nu, analytic, mc_estimate, stderr) columns for ν-sweep tables.
pub fn write_nu_table_csv(rows: &[GammaMeanRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "nu,analytic,mc_estimate,stderr")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.nu, r.analytic, r.mc_estimate, r.stderr
        )?;
    }
    Ok(())
}
