//! Experiment runners: each produces CSV artifacts in the output
//! directory and returns the list of files it wrote.

use std::fs;
use std::path::{Path, PathBuf};

use kraichnan_core::error::Error as CoreError;
use kraichnan_core::fractal::{
    bm_cone_set, bm_level_set, default_m_grid, estimate_dim, gamma_decay_logset,
    gamma_exceedance_set, ou_exceedance, write_counts_csv, DimEstimate, TimeSet,
};
use kraichnan_core::kernels::heat_kernel_unchecked;
use kraichnan_core::noise::{sample_noise, walsh_variance_test, SpatialFactor};
use kraichnan_core::paths::{sample_bm, uniform_times, TimePath};
use kraichnan_core::rng::derive_seed;
use kraichnan_core::solver_fk::{
    gamma_closed_form, gamma_field, solve_ito, solve_stratonovich, write_trajectory_csv, GridField,
    Mode, TrajectoryRow,
};
use kraichnan_core::solver_spectral::{attenuate, inverse_fourier, SpectralSolver, TailBound};
use kraichnan_core::solver_wz::{convergence_study, halving_specs};
use kraichnan_core::stats::mean_stderr;

use crate::config::{DimSet, Experiment, ModeKind, NuLimitKind, RunConfig, SolverKind, WalshPhi};

/// CLI failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: msg.into(),
        }
    }
    pub fn acceptance(msg: impl Into<String>) -> Self {
        CliError {
            code: 4,
            message: msg.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = if e.is_numerical() {
            3
        } else {
            match e {
                CoreError::Io(_) | CoreError::Format(_) => 1,
                _ => 2,
            }
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<String> for CliError {
    fn from(message: String) -> Self {
        CliError { code: 2, message }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    match config.experiment {
        Experiment::GammaTrajectory => gamma_trajectory(config, out_dir),
        Experiment::FkSolve => fk_solve(config, out_dir),
        Experiment::SpectralSolve => spectral_solve(config, out_dir),
        Experiment::WzConverge => wz_converge(config, out_dir),
        Experiment::DimEstimate => dim_estimate(config, out_dir),
        Experiment::NuLimit => nu_limit(config, out_dir),
        Experiment::WalshCheck => walsh_check(config, out_dir),
        Experiment::SelfTest => self_test(out_dir, None),
    }
}

/// t·Γ_t(0,0) along one sampled motion, from the constant-kernel closed
/// form; the optional twin run reuses the same motion at a scaled ν.
fn gamma_trajectory(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let kernel = config.kernel()?;
    if !kernel.is_constant() {
        return Err(CliError::config(
            "gamma-trajectory needs the constant kernel (closed form)",
        ));
    }
    let nu = config.nu()?;
    let traj = config
        .trajectory
        .as_ref()
        .ok_or_else(|| CliError::config("missing [trajectory] section"))?;
    let times = uniform_times(traj.horizon, traj.n_points);
    let motion = sample_bm(1.0, &times, config.seed)?;
    let mut rows = Vec::new();
    let mut push_run = |nu_run: f64| -> Result<(), CliError> {
        for (j, &t) in times.iter().enumerate().skip(1) {
            let w_t = motion.values()[j];
            let g = gamma_closed_form(nu_run, &kernel, w_t, t, 0.0, 0.0)?;
            rows.push(TrajectoryRow {
                t,
                value: t * g,
                stderr: 0.0,
                mode: "closed-form",
                nu: nu_run,
                rho0: kernel.rho0(),
                seed: config.seed,
            });
        }
        Ok(())
    };
    push_run(nu)?;
    if let Some(factor) = traj.nu2_factor {
        push_run(nu * factor)?;
    }
    let mut buf = Vec::new();
    write_trajectory_csv(&rows, &mut buf)?;
    let path = out_dir.join("gamma-trajectory.csv");
    write_file(&path, &buf)?;
    Ok(vec![path])
}

fn fk_solve(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let kernel = config.kernel()?;
    let solve = config
        .solve
        .as_ref()
        .ok_or_else(|| CliError::config("missing [solve] section"))?;
    let profile = solve.profile.build();
    let n_samples = config.n_samples(10_000);
    let mode = match solve.mode {
        ModeKind::Unconditional => Mode::UnconditionalMoment,
        ModeKind::Conditional => Mode::ConditionalTrajectory,
    };
    let noise = match mode {
        Mode::ConditionalTrajectory => Some(sample_noise(&kernel, &config.grid()?, config.seed)?),
        Mode::UnconditionalMoment => None,
    };
    let mut rows = Vec::new();
    for (i, &t) in solve.times.iter().enumerate() {
        let point = (t, solve.x, solve.y);
        let run_seed = derive_seed(config.seed, &[i as u64]);
        let est = match solve.solver {
            SolverKind::Ito => solve_ito(
                &profile,
                &config.params()?,
                &kernel,
                point,
                n_samples,
                run_seed,
                mode,
                noise.as_ref(),
            )?,
            SolverKind::Stratonovich => solve_stratonovich(
                &profile,
                config.nu()?,
                &kernel,
                point,
                n_samples,
                run_seed,
                mode,
                noise.as_ref(),
            )?,
            SolverKind::Gamma => gamma_field(
                config.nu()?,
                &kernel,
                point,
                n_samples,
                run_seed,
                mode,
                noise.as_ref(),
            )?,
        };
        rows.push(TrajectoryRow {
            t,
            value: est.value,
            stderr: est.stderr,
            mode: est.mode.label(),
            nu: config.nu()?,
            rho0: kernel.rho0(),
            seed: config.seed,
        });
    }
    let mut buf = Vec::new();
    write_trajectory_csv(&rows, &mut buf)?;
    let path = out_dir.join("fk-solve.csv");
    write_file(&path, &buf)?;
    Ok(vec![path])
}

fn spectral_solve(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    use kraichnan_core::solver_spectral::Complex64;
    let kernel = config.kernel()?;
    let params = config.params()?;
    let grid = config.grid()?;
    let sp = config
        .spectral
        .as_ref()
        .ok_or_else(|| CliError::config("missing [spectral] section"))?;
    if sp.xi_points < 2 || sp.xi_points % 2 == 0 {
        return Err(CliError::config("xi-points must be an odd count >= 3"));
    }
    let n_half = sp.xi_points / 2 + 1;
    let h_xi = sp.xi_radius / (n_half - 1) as f64;
    let solver = SpectralSolver::new(&grid);
    let factor = SpatialFactor::new(&kernel, &grid)?;
    let n_steps = grid.n_steps();
    let t = grid.horizon();
    let (sx, sy) = (sp.sigma_x, sp.sigma_y);
    let u0_mass = sy * (2.0 * std::f64::consts::PI).sqrt();
    let tail = TailBound {
        nu2: params.nu2,
        rho0: kernel.rho0(),
        u0_mass,
        tol: sp.tail_tol,
    };
    let u0_per_xi: Vec<Vec<Complex64>> = (0..n_half)
        .map(|k| {
            let xi = k as f64 * h_xi;
            let amp = u0_mass * (-0.5 * sy * sy * xi * xi).exp();
            grid.x_points()
                .iter()
                .map(|&x| Complex64::new(amp * (-0.5 * x * x / (sx * sx)).exp(), 0.0))
                .collect()
        })
        .collect();
    // nearest grid index per probe
    let probe_idx: Result<Vec<usize>, CliError> = sp
        .probe_x
        .iter()
        .map(|&x| {
            grid.x_points()
                .iter()
                .position(|&g| (g - x).abs() < 0.5 * grid.dx())
                .ok_or_else(|| CliError::config(format!("probe x = {x} is not on the grid")))
        })
        .collect();
    let probe_idx = probe_idx?;
    let n_noise = config.n_noise(200);
    let per_seed: Vec<Vec<f64>> = kraichnan_core::exec::map_indexed(n_noise, |s| {
        let noise = factor.sample(derive_seed(config.seed, &[s as u64]));
        let slices: Vec<_> = (0..n_half)
            .map(|k| {
                let xi = k as f64 * h_xi;
                let out = solver
                    .evolve(&u0_per_xi[k], params.nu1, xi, &noise, n_steps, &[n_steps])
                    .expect("evolve")
                    .remove(0);
                attenuate(&out, params.nu2)
            })
            .collect();
        let field = inverse_fourier(&slices, &sp.ys, &tail).expect("inverse transform");
        let mut vals = Vec::with_capacity(probe_idx.len() * sp.ys.len());
        for &ix in &probe_idx {
            vals.extend_from_slice(&field[ix]);
        }
        vals
    });
    let ny = sp.ys.len();
    let mut values = vec![0.0; probe_idx.len() * ny];
    let mut stderr = vec![0.0; probe_idx.len() * ny];
    for p in 0..probe_idx.len() {
        for q in 0..ny {
            let idx = p * ny + q;
            let samples: Vec<f64> = per_seed.iter().map(|v| v[idx]).collect();
            let m = mean_stderr(&samples);
            values[idx] = m.mean;
            stderr[idx] = m.stderr;
        }
    }
    let field = GridField {
        t,
        xs: sp.probe_x.clone(),
        ys: sp.ys.clone(),
        values,
        stderr,
    };
    let mut buf = Vec::new();
    field.write_csv(
        &format!("nu1={} nu2={} seed={}", params.nu1, params.nu2, config.seed),
        &mut buf,
    )?;
    let path = out_dir.join("spectral-solve.csv");
    write_file(&path, &buf)?;
    Ok(vec![path])
}

fn wz_converge(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let kernel = config.kernel()?;
    let nu = config.nu()?;
    let grid = config.grid()?;
    let wz = config
        .wz
        .as_ref()
        .ok_or_else(|| CliError::config("missing [wz] section"))?;
    let factor = SpatialFactor::new(&kernel, &grid)?;
    let specs = halving_specs(&wz.spec0(nu)?, wz.levels);
    let table = convergence_study(
        wz.sigma0,
        nu,
        &kernel,
        &specs,
        &factor,
        (wz.t, wz.x, 0.0),
        wz.n_noise,
        wz.n_paths,
        config.seed,
    )?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    let path = out_dir.join("wz-converge.csv");
    write_file(&path, &buf)?;
    Ok(vec![path])
}

fn dim_estimate(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let dim = config
        .dim
        .as_ref()
        .ok_or_else(|| CliError::config("missing [dim] section"))?;
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| CliError::config(format!("dim set needs `{name}`")))
    };
    let (set, target): (TimeSet, f64) = match dim.set {
        DimSet::BmLevel => (
            bm_level_set(
                dim.z.unwrap_or(0.0),
                dim.horizon,
                dim.refinement_levels,
                config.seed,
            ),
            0.5,
        ),
        DimSet::BmCone => (
            bm_cone_set(
                dim.z.unwrap_or(0.0),
                need(dim.alpha, "alpha")?,
                dim.horizon,
                config.seed,
            ),
            1.0,
        ),
        DimSet::OuExceedance => {
            let alpha = need(dim.alpha, "alpha")?;
            (
                ou_exceedance(alpha, dim.horizon, config.seed)?,
                (1.0 - alpha / 2.0).max(0.0),
            )
        }
        DimSet::GammaExceedance => {
            let kernel = config.kernel()?;
            let nu = config.nu()?;
            let k_level = need(dim.k_level, "k-level")?;
            let cap = 1.0 / (4.0 * std::f64::consts::PI * nu);
            (
                gamma_exceedance_set(nu, kernel.rho0(), k_level, dim.horizon, config.seed)?,
                if k_level < cap { 1.0 } else { 0.0 },
            )
        }
        DimSet::GammaDecay => {
            let kernel = config.kernel()?;
            let nu = config.nu()?;
            let delta = need(dim.delta, "delta")?;
            (
                gamma_decay_logset(nu, kernel.rho0(), delta, dim.horizon, config.seed)?,
                (1.0 - 2.0 * delta * nu / kernel.rho0()).max(0.0),
            )
        }
        DimSet::PerfectSquares => {
            let mut set = TimeSet::empty(dim.horizon);
            let mut k = 0usize;
            while k * k <= dim.horizon {
                set.mark(k * k);
                k += 1;
            }
            (set, 0.5)
        }
    };
    let grid = default_m_grid(dim.horizon);
    let est = match estimate_dim(&set, &grid) {
        Ok(est) => est,
        // an (almost) empty set has dimension 0; report it as such
        Err(CoreError::InsufficientData(_)) if target == 0.0 => DimEstimate {
            slope: 0.0,
            stderr: 0.0,
            window: (0, dim.horizon),
            counts: vec![],
        },
        Err(e) => return Err(e.into()),
    };
    let pass = (est.slope - target).abs() <= dim.tolerance;
    let mut buf = Vec::new();
    write_counts_csv(&est, target, pass, &mut buf)?;
    let path = out_dir.join("dim-estimate.csv");
    write_file(&path, &buf)?;
    Ok(vec![path])
}

fn nu_limit(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    use kraichnan_core::nu_limits::*;
    let kernel = config.kernel()?;
    let nl = config
        .nu_limit
        .as_ref()
        .ok_or_else(|| CliError::config("missing [nu-limit] section"))?;
    let mut buf = Vec::new();
    match nl.kind {
        NuLimitKind::Inviscid => {
            let grid = config.grid()?;
            let factor = SpatialFactor::new(&kernel, &grid)?;
            let profile = kraichnan_core::solver_wz::y_gaussian_profile(nl.sigma0.unwrap_or(1.0));
            let mut rows = Vec::new();
            for &nu in &nl.nus {
                let d = inviscid_distance(
                    &profile,
                    &kernel,
                    nu,
                    (nl.t, nl.x, nl.y),
                    &factor,
                    config.n_noise(100),
                    nl.n_paths.unwrap_or(300),
                    config.seed,
                )?;
                rows.push(GammaMeanRow {
                    nu,
                    analytic: 0.0, // the nu -> 0 limit of the distance
                    mc_estimate: d.mean,
                    stderr: d.stderr,
                });
            }
            write_nu_table_csv(&rows, &mut buf)?;
        }
        NuLimitKind::GammaMean => {
            let table = gamma_mean_limit(
                &kernel,
                nl.t,
                nl.x,
                nl.y,
                &nl.nus,
                config.n_samples(30_000),
                config.seed,
            )?;
            table.write_csv(&mut buf)?;
        }
        NuLimitKind::GammaDichotomy => {
            let x_off = if nl.x_prime != 0.0 { nl.x_prime } else { 1.0 };
            let report = gamma_mean_dichotomy(&kernel, nl.t, nl.y, x_off, &nl.nus)?;
            use std::io::Write;
            writeln!(buf, "nu,at_origin,at_offset")?;
            for (nu, a, b) in &report.rows {
                writeln!(buf, "{nu},{a},{b}")?;
            }
            writeln!(buf, "# exponent_at_zero,{}", report.exponent_at_zero)?;
        }
        NuLimitKind::GammaCov => {
            let nu = *nl
                .nus
                .first()
                .ok_or_else(|| CliError::config("gamma-cov needs one nu"))?;
            let est = gamma_cov_limit(
                &kernel,
                nl.t,
                nl.x,
                nl.x_prime,
                nl.y,
                nl.y_prime,
                2.0 * nu,
                config.n_samples(20_000),
                config.seed,
                true,
                128,
            )?;
            let product = heat_kernel_unchecked(0.5 * kernel.rho0(), nl.t, nl.y)
                * heat_kernel_unchecked(0.5 * kernel.rho0(), nl.t, nl.y_prime);
            let rows = [GammaMeanRow {
                nu,
                analytic: product,
                mc_estimate: est.value,
                stderr: est.stderr,
            }];
            write_nu_table_csv(&rows, &mut buf)?;
            use std::io::Write;
            writeln!(buf, "# rejected,{}", est.rejected)?;
        }
        NuLimitKind::NegativeMoment => {
            let nu = *nl
                .nus
                .first()
                .ok_or_else(|| CliError::config("negative-moment needs one nu"))?;
            let report = negative_moment_probe(
                &kernel,
                nl.t,
                nl.x,
                nl.x_prime,
                2.0 * nu,
                config.n_samples(10_000),
                config.seed,
                128,
            )?;
            use std::io::Write;
            writeln!(buf, "key,value")?;
            writeln!(buf, "e_inv2_half,{}", report.e_inv2_half)?;
            writeln!(buf, "e_inv2_full,{}", report.e_inv2_full)?;
            writeln!(buf, "relative_change,{}", report.relative_change)?;
            writeln!(buf, "stabilized,{}", report.stabilized)?;
            writeln!(buf, "tail_slope,{}", report.tail_slope)?;
            writeln!(buf, "min_gap,{}", report.min_gap)?;
        }
    }
    let path = out_dir.join("nu-limit.csv");
    write_file(&path, &buf)?;
    Ok(vec![path])
}

fn walsh_check(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let kernel = config.kernel()?;
    let grid = config.grid()?;
    let walsh = config
        .walsh
        .as_ref()
        .ok_or_else(|| CliError::config("missing [walsh] section"))?;
    let phi: Box<dyn Fn(f64, f64) -> f64 + Sync> = match walsh.phi {
        WalshPhi::Indicator => Box::new(|t: f64, x: f64| {
            if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&x) {
                1.0
            } else {
                0.0
            }
        }),
        WalshPhi::GaussianBump => Box::new(|t: f64, x: f64| (-(x * x) - t).exp()),
        WalshPhi::CosineBump => {
            Box::new(|t: f64, x: f64| (1.0 + t) * (0.8 * x).cos() * (-0.2 * x * x).exp())
        }
    };
    let check = walsh_variance_test(&kernel, &grid, phi.as_ref(), walsh.n_seeds, config.seed)?;
    let mut buf = Vec::new();
    use std::io::Write;
    writeln!(buf, "empirical,analytic,stderr,n_seeds")?;
    writeln!(
        buf,
        "{},{},{},{}",
        check.empirical,
        check.analytic,
        check.stderr(),
        check.n_seeds
    )?;
    let path = out_dir.join("walsh-check.csv");
    write_file(&path, &buf)?;
    Ok(vec![path])
}

/// Run the acceptance suite (all criteria, or one), print one line per
/// criterion, and persist the report.
pub fn self_test(out_dir: &Path, only: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let reports = match only {
        Some(id) => vec![kraichnan_core::acceptance::criterion(id)],
        None => kraichnan_core::acceptance::run_all(),
    };
    let mut buf = Vec::new();
    use std::io::Write;
    for r in &reports {
        println!("{}", r.line());
        writeln!(buf, "{}", r.line())?;
    }
    let path = out_dir.join("self-test.txt");
    write_file(&path, &buf)?;
    let failed: Vec<usize> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        Ok(vec![path])
    } else {
        Err(CliError::acceptance(format!(
            "acceptance criteria failed: {failed:?}"
        )))
    }
}
