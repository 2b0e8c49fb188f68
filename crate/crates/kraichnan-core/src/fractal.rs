//! Macroscopic (Barlow–Taylor) Minkowski dimension machinery.
//!
//! A `TimeSet` marks which unit boxes [j, j+1] a set of times touches;
//! C_m counts the hit boxes among j = 0..m, and the dimension estimate is
//! the weighted log-log slope of m ↦ C_m. Hit detection for sampled paths
//! uses within-box bridge-midpoint refinement (finitely many samples
//! underestimate hitting; the refinement level is a reported parameter and
//! the residual detection bias shrinks with it).

use rand::Rng;
use rand_distr::StandardNormal;
use std::io::Write;

use crate::error::Error;
use crate::exec;
use crate::paths::bridge_midpoint;
use crate::rng::{derive_seed, stream, tag};
use crate::stats::weighted_line_fit;
use crate::Result;

/// Unit-box indicator representation of a subset of [0, horizon + 1].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeSet {
    /// hit[j] marks the box [j, j+1], j = 0..=horizon.
    hit: Vec<bool>,
}

impl TimeSet {
    /// All-empty set with boxes j = 0..=horizon.
    pub fn empty(horizon: usize) -> Self {
        Self {
            hit: vec![false; horizon + 1],
        }
    }

    /// Build from marked times (each time marks the box containing it).
    pub fn from_times(horizon: usize, times: &[f64]) -> Self {
        let mut set = Self::empty(horizon);
        for &t in times {
            if t >= 0.0 {
                let j = t.floor() as usize;
                if j <= horizon {
                    set.hit[j] = true;
                }
            }
        }
        set
    }

    pub fn from_hits(hit: Vec<bool>) -> Self {
        Self { hit }
    }

    pub fn horizon(&self) -> usize {
        self.hit.len() - 1
    }

    pub fn is_hit(&self, j: usize) -> bool {
        self.hit[j]
    }

    pub fn mark(&mut self, j: usize) {
        self.hit[j] = true;
    }

    pub fn total_hits(&self) -> usize {
        self.hit.iter().filter(|&&h| h).count()
    }

    /// Box-wise union; horizons must match.
    pub fn union(&self, other: &TimeSet) -> Result<TimeSet> {
        if self.hit.len() != other.hit.len() {
            return Err(Error::domain(
                "union of sets with different horizons".to_string(),
            ));
        }
        Ok(TimeSet {
            hit: self
                .hit
                .iter()
                .zip(&other.hit)
                .map(|(&a, &b)| a || b)
                .collect(),
        })
    }
}

/// C_m: number of hit boxes among j = 0..m.
pub fn count_boxes(set: &TimeSet, m: usize) -> Result<usize> {
    if m > set.horizon() {
        return Err(Error::domain(format!(
            "m = {m} beyond horizon {}",
            set.horizon()
        )));
    }
    Ok(set.hit[..=m].iter().filter(|&&h| h).count())
}

/// Dimension estimate: weighted least-squares slope of log C_m vs log m.
#[derive(Debug, Clone)]
pub struct DimEstimate {
    pub slope: f64,
    pub stderr: f64,
    /// (m_min, m_max) actually used in the fit.
    pub window: (usize, usize),
    /// The (m, C_m) pairs that entered the fit.
    pub counts: Vec<(usize, usize)>,
}

/// Smallest m admitted to the regression (transient cut).
pub const M_TRANSIENT_CUT: usize = 100;
/// Sanity band for slopes of macroscopic dimension fits.
pub const SLOPE_SANITY_BAND: (f64, f64) = (-0.2, 1.2);

/// Geometric m grid with ratio 2 from 128 up to the horizon.
pub fn default_m_grid(horizon: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    let mut m = 128usize;
    while m <= horizon {
        grid.push(m);
        m *= 2;
    }
    if let Some(&last) = grid.last() {
        if horizon > last + last / 4 {
            grid.push(horizon);
        }
    }
    grid
}

/// Fit the macroscopic dimension over a geometric m grid. Entries below
/// the transient cut or with zero counts are dropped; at least four usable
/// values spanning 1.5 decades are required. Counts weight the fit (larger
/// counts have smaller relative dispersion).
pub fn estimate_dim(set: &TimeSet, m_grid: &[usize]) -> Result<DimEstimate> {
    let mut counts = Vec::new();
    for &m in m_grid {
        if m < M_TRANSIENT_CUT || m > set.horizon() {
            continue;
        }
        let c = count_boxes(set, m)?;
        if c >= 1 {
            counts.push((m, c));
        }
    }
    if counts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "only {} usable (m, C_m) points",
            counts.len()
        )));
    }
    let m_min = counts.first().unwrap().0;
    let m_max = counts.last().unwrap().0;
    if (m_max as f64 / m_min as f64).log10() < 1.5 {
        return Err(Error::InsufficientData(format!(
            "window [{m_min}, {m_max}] spans < 1.5 decades"
        )));
    }
    let x: Vec<f64> = counts.iter().map(|&(m, _)| (m as f64).ln()).collect();
    let y: Vec<f64> = counts.iter().map(|&(_, c)| (c as f64).ln()).collect();
    let w: Vec<f64> = counts.iter().map(|&(_, c)| c as f64).collect();
    let fit = weighted_line_fit(&x, &y, &w)?;
    if fit.slope < SLOPE_SANITY_BAND.0 || fit.slope > SLOPE_SANITY_BAND.1 {
        return Err(Error::InsufficientData(format!(
            "slope {} outside the sanity band",
            fit.slope
        )));
    }
    Ok(DimEstimate {
        slope: fit.slope,
        stderr: fit.slope_stderr,
        window: (m_min, m_max),
        counts,
    })
}

/// CSV: (m, C_m) pairs followed by a summary row.
pub fn write_counts_csv(
    est: &DimEstimate,
    target: f64,
    pass: bool,
    out: &mut impl Write,
) -> Result<()> {
    writeln!(out, "m,count")?;
    for &(m, c) in &est.counts {
        writeln!(out, "{m},{c}")?;
    }
    writeln!(out, "# slope,stderr,target,pass")?;
    writeln!(
        out,
        "# {},{},{},{}",
        est.slope,
        est.stderr,
        target,
        if pass { "pass" } else { "fail" }
    )?;
    Ok(())
}

/// Bridge-midpoint refinement of one unit box of a speed-1 path into
/// 2^levels sub-values; draws come from (seed, level) streams.
fn refine_box(a: f64, b: f64, levels: u32, box_seed: u64) -> Vec<f64> {
    let mut vals = vec![a, b];
    for level in 0..levels {
        let mut rng = stream(box_seed, &[level as u64]);
        let span = 1.0 / (1u64 << level) as f64;
        let mut next = Vec::with_capacity(vals.len() * 2 - 1);
        for i in 0..vals.len() - 1 {
            let z: f64 = rng.sample(StandardNormal);
            next.push(vals[i]);
            next.push(bridge_midpoint(vals[i], vals[i + 1], span, 1.0, z));
        }
        next.push(*vals.last().unwrap());
        vals = next;
    }
    vals
}

/// Walk a standard Brownian motion over [0, horizon + 1] at unit spacing,
/// refine each box, and mark boxes according to `hit(j, refined values)`.
fn bm_boxes(
    horizon: usize,
    refinement_levels: u32,
    seed: u64,
    hit: impl Fn(usize, &[f64]) -> bool + Sync + Send,
) -> TimeSet {
    let n_boxes = horizon + 1;
    let mut rng = stream(seed, &[tag::FRACTAL]);
    let mut w = Vec::with_capacity(n_boxes + 1);
    w.push(0.0f64);
    let mut acc = 0.0;
    for _ in 0..n_boxes {
        let z: f64 = rng.sample(StandardNormal);
        acc += z;
        w.push(acc);
    }
    let hits = exec::map_indexed(n_boxes, |j| {
        let box_seed = derive_seed(seed, &[tag::PATH_REFINE, j as u64]);
        let vals = refine_box(w[j], w[j + 1], refinement_levels, box_seed);
        hit(j, &vals)
    });
    TimeSet::from_hits(hits)
}

/// Level set {t: W_t = z}: a box is hit when W − z changes sign on the
/// refined grid.
pub fn bm_level_set(z: f64, horizon: usize, refinement_levels: u32, seed: u64) -> TimeSet {
    bm_boxes(horizon, refinement_levels, seed, move |_, vals| {
        vals.windows(2).any(|p| (p[0] - z) * (p[1] - z) <= 0.0)
    })
}

/// Cone set {t: |W_t − z| < α√t}, membership checked at the sampled
/// integer times bounding each box.
pub fn bm_cone_set(z: f64, alpha: f64, horizon: usize, seed: u64) -> TimeSet {
    bm_boxes(horizon, 0, seed, move |j, vals| {
        let t0 = j as f64;
        let t1 = (j + 1) as f64;
        (vals[0] - z).abs() < alpha * t0.sqrt() || (vals[1] - z).abs() < alpha * t1.sqrt()
    })
}

/// Γ-level union set: {t: Γ_t(0,0) = e^{−x²/(4νt)}/(4πνt)} reduces to
/// W_t = ±x/√ρ(0) on one shared motion.
pub fn gamma_level_set(
    nu: f64,
    rho0: f64,
    x: f64,
    horizon: usize,
    refinement_levels: u32,
    seed: u64,
) -> Result<TimeSet> {
    if !(nu > 0.0) || !(rho0 > 0.0) {
        return Err(Error::domain("need nu > 0 and rho0 > 0".to_string()));
    }
    let level = x.abs() / rho0.sqrt();
    Ok(bm_boxes(
        horizon,
        refinement_levels,
        seed,
        move |_, vals| {
            vals.windows(2).any(|p| {
                (p[0] - level) * (p[1] - level) <= 0.0 || (p[0] + level) * (p[1] + level) <= 0.0
            })
        },
    ))
}

/// Exceedance set {t: Γ_t(0,0) > K/t} for the constant kernel. For
/// K < (4πν)^{−1} this is exactly {t: |W_t| < α√t} with
/// α = √((4ν/ρ0)·log(1/(4πνK))); for K ≥ (4πν)^{−1} the set is empty.
pub fn gamma_exceedance_set(
    nu: f64,
    rho0: f64,
    k_level: f64,
    horizon: usize,
    seed: u64,
) -> Result<TimeSet> {
    if !(nu > 0.0) || !(rho0 > 0.0) || !(k_level > 0.0) {
        return Err(Error::domain("need nu, rho0, K > 0".to_string()));
    }
    let cap = 1.0 / (4.0 * std::f64::consts::PI * nu);
    if k_level >= cap {
        return Ok(TimeSet::empty(horizon));
    }
    let alpha = (4.0 * nu / rho0 * (cap / k_level).ln()).sqrt();
    Ok(bm_cone_set(0.0, alpha, horizon, seed))
}

/// Midpoint of a stationary unit OU bridge over a span 2h between values
/// a and b: mean e^{−h}(a+b)/(1+e^{−2h}), variance (1−e^{−2h})/(1+e^{−2h}).
fn ou_midpoint(a: f64, b: f64, half_span: f64, z: f64) -> f64 {
    let e1 = (-half_span).exp();
    let e2 = e1 * e1;
    let mean = e1 * (a + b) / (1.0 + e2);
    let var = (1.0 - e2) / (1.0 + e2);
    mean + var.sqrt() * z
}

fn refine_ou_box(a: f64, b: f64, levels: u32, box_seed: u64) -> Vec<f64> {
    let mut vals = vec![a, b];
    for level in 0..levels {
        let mut rng = stream(box_seed, &[level as u64]);
        let half = 0.5 / (1u64 << level) as f64;
        let mut next = Vec::with_capacity(vals.len() * 2 - 1);
        for i in 0..vals.len() - 1 {
            let z: f64 = rng.sample(StandardNormal);
            next.push(vals[i]);
            next.push(ou_midpoint(vals[i], vals[i + 1], half, z));
        }
        next.push(*vals.last().unwrap());
        vals = next;
    }
    vals
}

/// Number of within-box refinement levels used by the OU scanners.
pub const OU_REFINEMENT_LEVELS: u32 = 4;

/// Exact stationary OU sampling (Cov[U_s, U_t] = e^{−|t−s|}) at unit
/// spacing via its AR(1) recursion, with within-box bridge refinement;
/// boxes are marked by `hit(j, sampled (s, u) pairs)`.
fn ou_boxes(
    horizon: usize,
    seed: u64,
    hit: impl Fn(usize, &[(f64, f64)]) -> bool + Sync + Send,
) -> TimeSet {
    let n_boxes = horizon + 1;
    let mut rng = stream(seed, &[tag::OU]);
    let phi = (-1.0f64).exp();
    let innovation = (1.0 - phi * phi).sqrt();
    let mut u = Vec::with_capacity(n_boxes + 1);
    let z0: f64 = rng.sample(StandardNormal);
    u.push(z0);
    for j in 0..n_boxes {
        let z: f64 = rng.sample(StandardNormal);
        u.push(phi * u[j] + innovation * z);
    }
    let step = 1.0 / (1u64 << OU_REFINEMENT_LEVELS) as f64;
    let hits = exec::map_indexed(n_boxes, |j| {
        let box_seed = derive_seed(seed, &[tag::OU, j as u64]);
        let vals = refine_ou_box(u[j], u[j + 1], OU_REFINEMENT_LEVELS, box_seed);
        let pairs: Vec<(f64, f64)> = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| (j as f64 + i as f64 * step, v))
            .collect();
        hit(j, &pairs)
    });
    TimeSet::from_hits(hits)
}

/// OU exceedance set {t > e: |U_t| > √(α·log t)}.
pub fn ou_exceedance(alpha: f64, horizon: usize, seed: u64) -> Result<TimeSet> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("need alpha > 0, got {alpha}")));
    }
    Ok(ou_boxes(horizon, seed, move |_, pairs| {
        pairs
            .iter()
            .any(|&(t, u)| t > std::f64::consts::E && u.abs() > (alpha * t.ln()).sqrt())
    }))
}

/// Γ-decay set on the log-time axis: with s = log t, membership at s > 1
/// means Γ_{e^s}(0,0) < e^{−s}·s^{−δ}, which on the exactly-sampled OU
/// process U_s = W_{e^s}/e^{s/2} is |U_s| > √((4ν/ρ0)·log(s^δ/(4πν)))
/// (automatic when s^δ ≤ 4πν). Target dimension (1 − 2δν/ρ(0))₊.
pub fn gamma_decay_logset(
    nu: f64,
    rho0: f64,
    delta: f64,
    log_horizon: usize,
    seed: u64,
) -> Result<TimeSet> {
    if !(nu > 0.0) || !(rho0 > 0.0) || !(delta > 0.0) {
        return Err(Error::domain("need nu, rho0, delta > 0".to_string()));
    }
    let four_pi_nu = 4.0 * std::f64::consts::PI * nu;
    Ok(ou_boxes(log_horizon, seed, move |_, pairs| {
        pairs.iter().any(|&(s, u)| {
            if s <= 1.0 {
                return false;
            }
            let arg = s.powf(delta) / four_pi_nu;
            if arg <= 1.0 {
                return true;
            }
            let threshold2 = 4.0 * nu / rho0 * arg.ln();
            u * u > threshold2
        })
    }))
}
