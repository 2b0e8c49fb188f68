//! The curvilinear stochastic integral ∫₀ᵗ V(s, x + X_{t−s}) ds by two
//! independent routes, plus the bridge-correlation functional K̃.
//!
//! Given the paths, the integral vector over several anchors is centered
//! Gaussian with covariance ∫₀ᵗ ρ(x_i − x_j + X_i(t−s) − X_j(t−s)) ds and
//! diagonal exactly t·ρ(0). `sample_conditional` draws from that law;
//! `sample_grid` builds the same quantity as a Riemann sum against one
//! fixed noise realization, and the two laws agree as grids refine.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Error;
use crate::kernels::CorrelationKernel;
use crate::linalg::cholesky_with_jitter;
use crate::noise::NoiseRealization;
use crate::paths::{sample_bm, to_bridge, uniform_times, BridgePath, TimePath, WienerPath};
use crate::rng::{derive_seed, stream, tag};
use crate::Result;

/// A path anchored at spatial offset `x`.
pub struct Anchor {
    pub x: f64,
    pub path: AnchorPath,
}

pub enum AnchorPath {
    Wiener(WienerPath),
    Bridge(BridgePath),
    /// X ≡ 0 (the cylindrical-Brownian-motion case).
    Still,
}

impl AnchorPath {
    fn grid(&self) -> Option<(&[f64], &[f64])> {
        match self {
            AnchorPath::Wiener(p) => Some((p.times(), p.values())),
            AnchorPath::Bridge(p) => Some((p.times(), p.values())),
            AnchorPath::Still => None,
        }
    }
}

/// Evaluation request: anchors, horizon, kernel, and the quadrature grid.
pub struct CurvilinearRequest {
    pub anchors: Vec<Anchor>,
    pub t: f64,
    pub kernel: CorrelationKernel,
    pub quadrature_steps: usize,
}

impl CurvilinearRequest {
    /// Validates that all anchor paths share the time grid, that the grid
    /// ends at `t`, and that it has `quadrature_steps >= 16` steps.
    pub fn new(
        anchors: Vec<Anchor>,
        t: f64,
        kernel: CorrelationKernel,
        quadrature_steps: usize,
    ) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("horizon must be positive, got {t}")));
        }
        if quadrature_steps < 16 {
            return Err(Error::domain(format!(
                "quadrature_steps must be >= 16, got {quadrature_steps}"
            )));
        }
        if anchors.is_empty() {
            return Err(Error::domain(
                "request needs at least one anchor".to_string(),
            ));
        }
        let mut shared: Option<&[f64]> = None;
        for a in &anchors {
            if let Some((times, _)) = a.path.grid() {
                if times.len() != quadrature_steps + 1 {
                    return Err(Error::domain(format!(
                        "anchor path has {} steps, request says {quadrature_steps}",
                        times.len() - 1
                    )));
                }
                if (times[times.len() - 1] - t).abs() > 1e-12 * t.max(1.0) {
                    return Err(Error::domain(
                        "anchor path horizon differs from request horizon".to_string(),
                    ));
                }
                match shared {
                    None => shared = Some(times),
                    Some(prev) => {
                        if prev != times {
                            return Err(Error::domain(
                                "anchor paths must share the time grid".to_string(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(Self {
            anchors,
            t,
            kernel,
            quadrature_steps,
        })
    }

    /// X_i(t − s_k) where s_k is the k-th quadrature node. On the shared
    /// uniform grid this is an index flip, not an interpolation.
    fn reversed_value(&self, anchor: &Anchor, k: usize) -> f64 {
        match anchor.path.grid() {
            None => 0.0,
            Some((_, values)) => values[self.quadrature_steps - k],
        }
    }
}

/// Conditional covariance of the integral vector given the anchor paths:
/// trapezoid of s ↦ ρ(x_i − x_j + X_i(t−s) − X_j(t−s)) on the native grid.
/// Diagonal entries are t·ρ(0) exactly (the integrand is constant there).
pub fn conditional_cov(req: &CurvilinearRequest) -> Vec<f64> {
    let k = req.anchors.len();
    let m = req.quadrature_steps;
    let h = req.t / m as f64;
    let rho0 = req.kernel.rho0();
    let mut cov = vec![0.0; k * k];
    for i in 0..k {
        cov[i * k + i] = req.t * rho0;
        for j in 0..i {
            let ai = &req.anchors[i];
            let aj = &req.anchors[j];
            let base = ai.x - aj.x;
            let mut nodes = Vec::with_capacity(m + 1);
            for s in 0..=m {
                let d = base + req.reversed_value(ai, s) - req.reversed_value(aj, s);
                nodes.push(req.kernel.eval(d));
            }
            let v = crate::quad::trapezoid_uniform(&nodes, h);
            cov[i * k + j] = v;
            cov[j * k + i] = v;
        }
    }
    cov
}

/// Draw the integral vector from its conditional-Gaussian law. Constant
/// kernels collapse to a single normal replicated across anchors (the
/// integral is path-independent there), which keeps coordinates exactly
/// equal draw-by-draw.
pub fn sample_conditional(req: &CurvilinearRequest, seed: u64) -> Result<Vec<f64>> {
    let k = req.anchors.len();
    let mut rng = stream(seed, &[tag::CURVILINEAR]);
    if req.kernel.is_constant() {
        let xi: f64 = rng.sample(StandardNormal);
        let v = (req.t * req.kernel.rho0()).sqrt() * xi;
        return Ok(vec![v; k]);
    }
    let cov = conditional_cov(req);
    let factor = cholesky_with_jitter(&cov, k)?;
    let z: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
    Ok(factor.mul_vec(&z))
}

/// Riemann-sum realization against one fixed noise:
/// Σ_j ΔW_j(x + X_{t−t_j}) with linear spatial interpolation. The path must
/// live on the noise time grid and stay inside the spatial grid.
pub fn sample_grid(noise: &NoiseRealization, x: f64, path: &dyn TimePath, t: f64) -> Result<f64> {
    let grid = noise.grid();
    let jt = grid.time_index(t)?;
    let times = path.times();
    if times.len() < jt + 1 {
        return Err(Error::domain(
            "path does not cover the requested horizon".to_string(),
        ));
    }
    for (k, &tp) in times.iter().take(jt + 1).enumerate() {
        if (tp - grid.t_points()[k]).abs() > 1e-9 * grid.dt() {
            return Err(Error::domain(
                "path time grid differs from the noise grid".to_string(),
            ));
        }
    }
    let values = path.values();
    let mut acc = 0.0;
    for j in 0..jt {
        // position at the step start: X_{t - t_j} = values[jt - j]
        let pos = x + values[jt - j];
        acc += noise.increment_at(j, pos)?;
    }
    Ok(acc)
}

/// K̃(t; x, x′): bridge-averaged normalized correlation
/// (t·ρ(0))^{−1} ∫₀ᵗ ρ(x − x′ + B^{(t,−x)}_{t−s} − B̃^{(t,−x′)}_{t−s}) ds
/// over two independent bridges of the given speed. Always in [−1, 1].
pub fn ktilde(
    kernel: &CorrelationKernel,
    t: f64,
    x: f64,
    x_prime: f64,
    bridge_speed: f64,
    pair_seed: u64,
    quadrature_steps: usize,
) -> Result<f64> {
    let (b1, b2) = ktilde_bridges(t, x, x_prime, bridge_speed, pair_seed, quadrature_steps)?;
    Ok(ktilde_from_bridges(kernel, t, x, x_prime, &b1, &b2))
}

/// The two independent motions behind one K̃ draw (before pinning).
pub fn ktilde_motions(
    t: f64,
    bridge_speed: f64,
    pair_seed: u64,
    quadrature_steps: usize,
) -> Result<(WienerPath, WienerPath)> {
    if quadrature_steps < 16 {
        return Err(Error::domain(format!(
            "quadrature_steps must be >= 16, got {quadrature_steps}"
        )));
    }
    let times = uniform_times(t, quadrature_steps);
    let p1 = sample_bm(
        bridge_speed,
        &times,
        derive_seed(pair_seed, &[tag::CURVILINEAR, 0]),
    )?;
    let p2 = sample_bm(
        bridge_speed,
        &times,
        derive_seed(pair_seed, &[tag::CURVILINEAR, 1]),
    )?;
    Ok((p1, p2))
}

/// The two independent bridges behind one K̃ draw (endpoints −x and −x′).
pub fn ktilde_bridges(
    t: f64,
    x: f64,
    x_prime: f64,
    bridge_speed: f64,
    pair_seed: u64,
    quadrature_steps: usize,
) -> Result<(BridgePath, BridgePath)> {
    let (p1, p2) = ktilde_motions(t, bridge_speed, pair_seed, quadrature_steps)?;
    Ok((to_bridge(&p1, t, -x)?, to_bridge(&p2, t, -x_prime)?))
}

/// Evaluate K̃ for pre-built bridges (used by the antithetic pairing in the
/// ν → 0 module).
pub fn ktilde_from_bridges(
    kernel: &CorrelationKernel,
    t: f64,
    x: f64,
    x_prime: f64,
    b1: &BridgePath,
    b2: &BridgePath,
) -> f64 {
    let m = b1.times().len() - 1;
    let v1 = b1.values();
    let v2 = b2.values();
    let base = x - x_prime;
    let nodes: Vec<f64> = (0..=m)
        .map(|k| kernel.eval(base + v1[m - k] - v2[m - k]))
        .collect();
    let h = t / m as f64;
    crate::quad::trapezoid_uniform(&nodes, h) / (t * kernel.rho0())
}

/// Anchors for `k` bridges sharing one time grid, as used by Γ sampling.
pub fn still_anchor(x: f64) -> Anchor {
    Anchor {
        x,
        path: AnchorPath::Still,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec;
    use crate::noise::{sample_noise, NoiseRealization, SpaceTimeGrid};
    use crate::stats::{ks_critical, ks_two_sample, mean_stderr, sample_variance};
    use std::sync::Arc;

    fn constant_request(t: f64, rho0: f64, anchors: Vec<Anchor>) -> CurvilinearRequest {
        CurvilinearRequest::new(anchors, t, CorrelationKernel::constant(rho0).unwrap(), 64).unwrap()
    }

    #[test]
    fn single_anchor_cov_is_t_rho0() {
        let req = constant_request(2.0, 3.0, vec![still_anchor(0.0)]);
        let cov = conditional_cov(&req);
        assert_eq!(cov, vec![6.0]);
    }

    #[test]
    fn constant_kernel_cov_fully_correlated() {
        let times = uniform_times(2.0, 64);
        let p1 = sample_bm(1.0, &times, 1).unwrap();
        let p2 = sample_bm(1.0, &times, 2).unwrap();
        let req = constant_request(
            2.0,
            3.0,
            vec![
                Anchor {
                    x: -1.0,
                    path: AnchorPath::Wiener(p1),
                },
                Anchor {
                    x: 4.0,
                    path: AnchorPath::Wiener(p2),
                },
            ],
        );
        let cov = conditional_cov(&req);
        for v in cov {
            assert!((v - 6.0).abs() < 1e-12);
        }
    }

    /// Far-separated anchors decorrelate: off-diagonal < 1e-6 · t·ρ0.
    #[test]
    fn distant_anchors_decorrelate() {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let times = uniform_times(1.0, 64);
        let p1 = sample_bm(0.1, &times, 5).unwrap();
        let p2 = sample_bm(0.1, &times, 6).unwrap();
        let req = CurvilinearRequest::new(
            vec![
                Anchor {
                    x: 0.0,
                    path: AnchorPath::Wiener(p1),
                },
                Anchor {
                    x: 20.0,
                    path: AnchorPath::Wiener(p2),
                },
            ],
            1.0,
            kernel,
            64,
        )
        .unwrap();
        let cov = conditional_cov(&req);
        assert!(cov[1].abs() < 1e-6 * cov[0]);
    }

    #[test]
    fn conditional_sample_variance() {
        let req = constant_request(2.0, 3.0, vec![still_anchor(0.0)]);
        let n = 20_000;
        let draws = exec::map_indexed(n, |i| {
            sample_conditional(&req, derive_seed(21, &[i as u64])).unwrap()[0]
        });
        let var = sample_variance(&draws);
        let se = 6.0 * (2.0 / n as f64).sqrt();
        assert!((var - 6.0).abs() < 3.0 * se, "var = {var}");
        let m = mean_stderr(&draws);
        assert!(m.mean.abs() < 3.0 * m.stderr, "mean = {}", m.mean);
    }

    #[test]
    fn constant_kernel_draws_identical_across_anchors() {
        let times = uniform_times(2.0, 64);
        let p1 = sample_bm(1.0, &times, 31).unwrap();
        let p2 = sample_bm(1.0, &times, 32).unwrap();
        let req = constant_request(
            2.0,
            3.0,
            vec![
                Anchor {
                    x: 0.0,
                    path: AnchorPath::Wiener(p1),
                },
                Anchor {
                    x: 7.0,
                    path: AnchorPath::Wiener(p2),
                },
            ],
        );
        for i in 0..64 {
            let v = sample_conditional(&req, derive_seed(77, &[i])).unwrap();
            assert_eq!(v[0], v[1]);
        }
    }

    /// Constant ρ makes the draw invariant to the anchor paths: the same
    /// seed gives the same value regardless of the paths.
    #[test]
    fn constant_kernel_path_independence() {
        let times = uniform_times(2.0, 64);
        let a = constant_request(2.0, 3.0, vec![still_anchor(0.0)]);
        let p = sample_bm(5.0, &times, 900).unwrap();
        let b = constant_request(
            2.0,
            3.0,
            vec![Anchor {
                x: -3.0,
                path: AnchorPath::Wiener(p),
            }],
        );
        for s in 0..32 {
            assert_eq!(
                sample_conditional(&a, s).unwrap()[0],
                sample_conditional(&b, s).unwrap()[0]
            );
        }
    }

    #[test]
    fn grid_sum_constant_kernel_equals_scaled_w() {
        let rho0 = 2.0;
        let kernel = CorrelationKernel::constant(rho0).unwrap();
        let grid = Arc::new(SpaceTimeGrid::uniform(-6.0, 6.0, 41, 1.0, 50).unwrap());
        let noise = sample_noise(&kernel, &grid, 3030).unwrap();
        let times = Arc::new(grid.t_points().to_vec());
        let path = sample_bm(0.5, &times, 4).unwrap();
        let got = sample_grid(&noise, 0.0, &path, 1.0).unwrap();
        // constant kernel: every row is flat, so the sum is W(T, any x)
        let want = noise.w_at(grid.n_steps(), 0);
        assert_eq!(got, want);
    }

    #[test]
    fn grid_sum_zero_noise_is_zero() {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let grid = Arc::new(SpaceTimeGrid::uniform(-6.0, 6.0, 41, 1.0, 50).unwrap());
        let noise = NoiseRealization::zero(&kernel, &grid);
        let times = Arc::new(grid.t_points().to_vec());
        let path = sample_bm(0.5, &times, 4).unwrap();
        assert_eq!(sample_grid(&noise, 0.3, &path, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn grid_sum_out_of_domain_errors() {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let grid = Arc::new(SpaceTimeGrid::uniform(-1.0, 1.0, 21, 1.0, 50).unwrap());
        let noise = sample_noise(&kernel, &grid, 1).unwrap();
        let times = Arc::new(grid.t_points().to_vec());
        let path = sample_bm(8.0, &times, 12345).unwrap();
        // a speed-8 path over [0,1] almost surely exits [-1, 1]
        assert!(matches!(
            sample_grid(&noise, 0.0, &path, 1.0),
            Err(Error::OutOfDomain(_))
        ));
    }

    /// Two-sample KS between the grid Riemann sum (fresh noise per draw,
    /// fixed path) and the conditional-Gaussian sampler: not rejected at
    /// the 1% level with 10⁴ draws each.
    #[test]
    fn grid_vs_conditional_distribution() {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let t = 1.0;
        let n_draws = 10_000;
        let grid = Arc::new(SpaceTimeGrid::uniform(-16.0, 16.0, 513, t, 512).unwrap());
        let factor = crate::noise::SpatialFactor::new(&kernel, &grid).unwrap();
        let times = Arc::new(grid.t_points().to_vec());
        let path = sample_bm(1.0, &times, 2718).unwrap();

        let grid_draws = exec::map_indexed(n_draws, |i| {
            let noise = factor.sample(derive_seed(41, &[i as u64]));
            sample_grid(&noise, 0.0, &path, t).unwrap()
        });
        let req = CurvilinearRequest::new(vec![still_anchor(0.0)], t, kernel.clone(), 512).unwrap();
        let cond_draws = exec::map_indexed(n_draws, |i| {
            sample_conditional(&req, derive_seed(42, &[i as u64])).unwrap()[0]
        });

        // mean and variance agree within 4 standard errors
        let mg = mean_stderr(&grid_draws);
        let mc = mean_stderr(&cond_draws);
        assert!(
            (mg.mean - mc.mean).abs() < 4.0 * (mg.stderr.hypot(mc.stderr)),
            "means {} vs {}",
            mg.mean,
            mc.mean
        );
        let (vg, vc) = (sample_variance(&grid_draws), sample_variance(&cond_draws));
        let se_v = vc * (2.0 / n_draws as f64).sqrt() * std::f64::consts::SQRT_2;
        assert!((vg - vc).abs() < 4.0 * se_v, "variances {vg} vs {vc}");

        let d = ks_two_sample(&grid_draws, &cond_draws);
        let crit = ks_critical(0.01, n_draws, n_draws);
        assert!(d < crit, "KS statistic {d} above 1% critical value {crit}");
    }

    #[test]
    fn ktilde_constant_kernel_is_one() {
        let kernel = CorrelationKernel::constant(2.5).unwrap();
        let v = ktilde(&kernel, 1.5, 0.3, -0.8, 1.0, 9, 64).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    /// |K̃| ≤ 1 for every draw. Because the bridges are pinned to −x and
    /// −x′, their difference crosses 0 near s = 0 whatever the separation;
    /// at small speed K̃ concentrates on ∫₀^∞ρ(u)du/(ρ(0)·|x−x′|), so the
    /// decay in the separation is ~1/|x−x′|, not exponential.
    #[test]
    fn ktilde_bounds_and_separation() {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let n = 1000;
        let mut means = Vec::new();
        for (case, sep) in [10.0f64, 40.0].into_iter().enumerate() {
            let draws = exec::map_indexed(n, |i| {
                ktilde(
                    &kernel,
                    1.0,
                    sep / 2.0,
                    -sep / 2.0,
                    0.05,
                    derive_seed(50 + case as u64, &[i as u64]),
                    256,
                )
                .unwrap()
            });
            for &v in &draws {
                assert!((-1.0..=1.0).contains(&v));
            }
            let m = mean_stderr(&draws);
            // deterministic small-speed value: sqrt(pi/2)/sep
            let target = (std::f64::consts::PI / 2.0).sqrt() / sep;
            assert!(
                (m.mean - target).abs() < 3.0 * m.stderr + 0.1 * target,
                "sep {sep}: mean K~ = {} vs {target}",
                m.mean
            );
            means.push(m.mean);
        }
        assert!(means[1] < means[0], "K~ decays with separation: {means:?}");
    }

    #[test]
    fn request_validation() {
        let kernel = CorrelationKernel::constant(1.0).unwrap();
        assert!(CurvilinearRequest::new(vec![still_anchor(0.0)], 1.0, kernel.clone(), 8).is_err());
        let times = uniform_times(2.0, 32);
        let p = sample_bm(1.0, &times, 1).unwrap();
        // horizon mismatch
        assert!(CurvilinearRequest::new(
            vec![Anchor {
                x: 0.0,
                path: AnchorPath::Wiener(p),
            }],
            1.0,
            kernel,
            32
        )
        .is_err());
    }
}
