//! Brownian motions and bridges sampled on time grids at declared speeds.
//!
//! The speed is the variance at time 1: Var(B₁) = σ². Paths built with
//! speed c² from a seed are exactly c times the speed-1 path from the same
//! seed, which keeps common-random-number coupling across viscosities
//! trivial.

use rand::Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

use crate::error::Error;
use crate::rng::{stream, tag};
use crate::Result;

/// Common view over motions and bridges.
pub trait TimePath {
    fn times(&self) -> &[f64];
    fn values(&self) -> &[f64];

    /// Piecewise-linear evaluation on the native grid.
    fn value_at(&self, t: f64) -> f64 {
        let ts = self.times();
        let vs = self.values();
        let t0 = ts[0];
        let dt = ts[1] - ts[0];
        let u = ((t - t0) / dt).clamp(0.0, (ts.len() - 1) as f64);
        let i = (u.floor() as usize).min(ts.len() - 2);
        let frac = u - i as f64;
        vs[i] * (1.0 - frac) + vs[i + 1] * frac
    }
}

/// A Brownian motion sampled at `times` (values[0] = 0).
#[derive(Debug, Clone)]
pub struct WienerPath {
    times: Arc<Vec<f64>>,
    values: Vec<f64>,
    speed: f64,
    seed: u64,
}

impl TimePath for WienerPath {
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

impl WienerPath {
    pub fn speed(&self) -> f64 {
        self.speed
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }
    pub fn endpoint_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// The sign-flipped motion (the antithetic draw).
    pub fn negated(&self) -> WienerPath {
        WienerPath {
            times: Arc::clone(&self.times),
            values: self.values.iter().map(|v| -v).collect(),
            speed: self.speed,
            seed: self.seed,
        }
    }
}

/// Sample a Brownian motion with Var(B₁) = `speed` on the given grid.
/// Increments come from the stream named by (seed, PATH); the path scales
/// exactly as √speed times the unit-speed path of the same seed.
pub fn sample_bm(speed: f64, times: &Arc<Vec<f64>>, seed: u64) -> Result<WienerPath> {
    if !(speed > 0.0) {
        return Err(Error::domain(format!(
            "speed must be positive, got {speed}"
        )));
    }
    if times.len() < 2 || times[0] != 0.0 {
        return Err(Error::domain(
            "time grid must start at 0 with >= 2 points".to_string(),
        ));
    }
    let mut rng = stream(seed, &[tag::PATH]);
    let root_speed = speed.sqrt();
    let mut values = Vec::with_capacity(times.len());
    values.push(0.0);
    let mut acc = 0.0;
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        let z: f64 = rng.sample(StandardNormal);
        // standard increment scaled by sqrt(speed) afterwards, so the
        // same seed couples paths across speeds exactly
        acc += dt.sqrt() * z;
        values.push(acc);
    }
    for v in &mut values {
        *v *= root_speed;
    }
    Ok(WienerPath {
        times: Arc::clone(times),
        values,
        speed,
        seed,
    })
}

/// A Brownian bridge from (0,0) to (t, a).
#[derive(Debug, Clone)]
pub struct BridgePath {
    times: Arc<Vec<f64>>,
    values: Vec<f64>,
    horizon: f64,
    endpoint: f64,
    speed: f64,
}

impl TimePath for BridgePath {
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

impl BridgePath {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn endpoint(&self) -> f64 {
        self.endpoint
    }
    pub fn speed(&self) -> f64 {
        self.speed
    }
}

/// Pin a sampled motion into the bridge B_s − (s/t)(B_t − a). The horizon
/// must be the final grid time; the endpoint is set exactly.
pub fn to_bridge(path: &WienerPath, t: f64, a: f64) -> Result<BridgePath> {
    if t != path.horizon() {
        return Err(Error::domain(format!(
            "bridge horizon {t} must equal the final grid time {}",
            path.horizon()
        )));
    }
    let bt = path.endpoint_value();
    let mut values: Vec<f64> = path
        .times
        .iter()
        .zip(path.values.iter())
        .map(|(&s, &b)| b - (s / t) * (bt - a))
        .collect();
    values[0] = 0.0;
    let last = values.len() - 1;
    values[last] = a;
    Ok(BridgePath {
        times: Arc::clone(&path.times),
        values,
        horizon: t,
        endpoint: a,
        speed: path.speed,
    })
}

/// Midpoint of a Brownian bridge between values `a` and `b` over a span
/// `h` at the given speed, with `z` a standard normal.
#[inline]
pub fn bridge_midpoint(a: f64, b: f64, h: f64, speed: f64, z: f64) -> f64 {
    0.5 * (a + b) + 0.5 * (speed * h).sqrt() * z
}

/// Debug CSV dump of any path: rows (t, value).
pub fn write_path_csv(path: &dyn TimePath, out: &mut impl std::io::Write) -> Result<()> {
    writeln!(out, "t,value")?;
    for (t, v) in path.times().iter().zip(path.values()) {
        writeln!(out, "{t},{v}")?;
    }
    Ok(())
}

/// Uniform time grid 0..horizon with `steps` steps, shared between paths.
pub fn uniform_times(horizon: f64, steps: usize) -> Arc<Vec<f64>> {
    Arc::new(
        (0..=steps)
            .map(|i| horizon * i as f64 / steps as f64)
            .collect(),
    )
}
