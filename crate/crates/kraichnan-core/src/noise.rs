//! Grid realizations of the velocity field through its time integral
//! W(t,x) = ∫₀ᵗ V(s,x) ds, mollified fields V_{ε,δ}, and Walsh-type
//! integration against deterministic test functions.
//!
//! W is white in time and spatially correlated:
//! Cov[W(t,x), W(s,x′)] = min(s,t)·ρ(x−x′). A realization stores the
//! per-step increments ΔW(t_j, x_i); each row is an independent centered
//! Gaussian vector with covariance Δt·ρ(x_i − x_{i′}), drawn from a
//! per-row stream so rows can be generated in parallel deterministically.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::Error;
use crate::exec;
use crate::kernels::{heat_kernel_unchecked, CorrelationKernel, KernelShape};
use crate::linalg::{cholesky_with_jitter, CholeskyFactor};
use crate::rng::{stream, tag};
use crate::Result;

/// Uniform space-time grid: x_0 < … < x_{n−1}, 0 = t_0 < … < t_m = T.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    x: Vec<f64>,
    t: Vec<f64>,
    dx: f64,
    dt: f64,
}

impl SpaceTimeGrid {
    pub fn uniform(
        x_min: f64,
        x_max: f64,
        n_x: usize,
        horizon: f64,
        n_steps: usize,
    ) -> Result<Self> {
        if n_x < 2 || n_steps < 1 {
            return Err(Error::domain(format!(
                "grid needs n_x >= 2 and n_steps >= 1, got {n_x}, {n_steps}"
            )));
        }
        if !(x_max > x_min) || !(horizon > 0.0) {
            return Err(Error::domain("grid extents must be positive".to_string()));
        }
        let dx = (x_max - x_min) / (n_x - 1) as f64;
        let dt = horizon / n_steps as f64;
        let x = (0..n_x).map(|i| x_min + dx * i as f64).collect();
        let t = (0..=n_steps).map(|j| dt * j as f64).collect();
        Ok(Self { x, t, dx, dt })
    }

    pub fn from_points(x: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || t.len() < 2 {
            return Err(Error::domain("grid needs >= 2 points per axis".to_string()));
        }
        if t[0] != 0.0 {
            return Err(Error::domain("time grid must start at 0".to_string()));
        }
        let dx = x[1] - x[0];
        let dt = t[1] - t[0];
        let check = |pts: &[f64], d: f64, name: &str| -> Result<()> {
            if !(d > 0.0) {
                return Err(Error::domain(format!("{name} spacing must be positive")));
            }
            for w in pts.windows(2) {
                if ((w[1] - w[0]) - d).abs() > 1e-12 * d.abs().max(1.0) {
                    return Err(Error::domain(format!("{name} grid not uniform")));
                }
            }
            Ok(())
        };
        check(&x, dx, "x")?;
        check(&t, dt, "t")?;
        Ok(Self { x, t, dx, dt })
    }

    pub fn x_points(&self) -> &[f64] {
        &self.x
    }
    pub fn t_points(&self) -> &[f64] {
        &self.t
    }
    pub fn n_x(&self) -> usize {
        self.x.len()
    }
    /// Number of time steps m (one fewer than time points).
    pub fn n_steps(&self) -> usize {
        self.t.len() - 1
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn horizon(&self) -> f64 {
        *self.t.last().unwrap()
    }

    /// Index/fraction of `x` for linear interpolation, or None outside.
    pub fn locate_x(&self, x: f64) -> Option<(usize, f64)> {
        let x0 = self.x[0];
        let last = *self.x.last().unwrap();
        if x < x0 || x > last {
            return None;
        }
        if x == last {
            return Some((self.x.len() - 2, 1.0));
        }
        let u = (x - x0) / self.dx;
        let i = (u.floor() as usize).min(self.x.len() - 2);
        Some((i, u - i as f64))
    }

    /// Nearest time-grid index for a time on the grid (within rounding).
    pub fn time_index(&self, t: f64) -> Result<usize> {
        let j = (t / self.dt).round() as isize;
        if j < 0
            || j as usize >= self.t.len()
            || (t - self.t[j as usize]).abs() > 1e-9 * self.dt.max(1.0)
        {
            return Err(Error::domain(format!("t = {t} is not on the time grid")));
        }
        Ok(j as usize)
    }
}

/// One sampled realization of the noise on a grid. Immutable once built.
#[derive(Debug, Clone)]
pub struct NoiseRealization {
    /// Row-major (n_steps × n_x): entry (j,i) = W(t_{j+1}, x_i) − W(t_j, x_i).
    increments: Vec<f64>,
    kernel: CorrelationKernel,
    grid: Arc<SpaceTimeGrid>,
    seed: u64,
}

enum FactorBackend {
    /// Perfect correlation: a single normal per row, replicated.
    Constant,
    Dense(CholeskyFactor),
    /// Circulant embedding for stationary kernels on larger uniform grids.
    Circulant {
        /// √(λ_k / M) for the padded circulant eigenvalues.
        sqrt_eig: Vec<f64>,
        fft: Arc<dyn rustfft::Fft<f64>>,
    },
}

/// Spatial factor for a kernel on a grid, reusable across realizations.
pub struct SpatialFactor {
    backend: FactorBackend,
    kernel: CorrelationKernel,
    grid: Arc<SpaceTimeGrid>,
}

/// Grid size at which sampling switches from dense factorization to
/// circulant embedding.
const CIRCULANT_MIN_N: usize = 128;

impl SpatialFactor {
    pub fn kernel(&self) -> &CorrelationKernel {
        &self.kernel
    }

    pub fn grid(&self) -> &Arc<SpaceTimeGrid> {
        &self.grid
    }

    pub fn new(kernel: &CorrelationKernel, grid: &Arc<SpaceTimeGrid>) -> Result<Self> {
        let n = grid.n_x();
        let backend = match kernel.shape() {
            KernelShape::Constant => FactorBackend::Constant,
            _ if n >= CIRCULANT_MIN_N => match circulant_backend(kernel, grid) {
                Some(b) => b,
                None => FactorBackend::Dense(dense_factor(kernel, grid)?),
            },
            _ => FactorBackend::Dense(dense_factor(kernel, grid)?),
        };
        Ok(Self {
            backend,
            kernel: kernel.clone(),
            grid: Arc::clone(grid),
        })
    }

    fn sample_row(&self, seed: u64, row: usize) -> Vec<f64> {
        let mut rng = stream(seed, &[tag::NOISE_ROW, row as u64]);
        let n = self.grid.n_x();
        let sqrt_dt = self.grid.dt().sqrt();
        match &self.backend {
            FactorBackend::Constant => {
                let xi: f64 = rng.sample(StandardNormal);
                let v = (self.kernel.rho0()).sqrt() * sqrt_dt * xi;
                vec![v; n]
            }
            FactorBackend::Dense(l) => {
                let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let mut y = l.mul_vec(&z);
                for v in &mut y {
                    *v *= sqrt_dt;
                }
                y
            }
            FactorBackend::Circulant { sqrt_eig, fft } => {
                let m = sqrt_eig.len();
                let mut buf: Vec<Complex64> = (0..m)
                    .map(|k| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(re, im) * sqrt_eig[k]
                    })
                    .collect();
                fft.process(&mut buf);
                buf[..n].iter().map(|c| c.re * sqrt_dt).collect()
            }
        }
    }

    /// Sample a full realization; rows are generated in parallel from
    /// per-row streams, so the result is independent of thread count.
    pub fn sample(&self, seed: u64) -> NoiseRealization {
        let m = self.grid.n_steps();
        let rows = exec::map_indexed(m, |j| self.sample_row(seed, j));
        let mut increments = Vec::with_capacity(m * self.grid.n_x());
        for row in rows {
            increments.extend_from_slice(&row);
        }
        NoiseRealization {
            increments,
            kernel: self.kernel.clone(),
            grid: Arc::clone(&self.grid),
            seed,
        }
    }
}

fn dense_factor(kernel: &CorrelationKernel, grid: &SpaceTimeGrid) -> Result<CholeskyFactor> {
    let n = grid.n_x();
    let xs = grid.x_points();
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..=i {
            let v = kernel.eval(xs[i] - xs[k]);
            cov[i * n + k] = v;
            cov[k * n + i] = v;
        }
    }
    cholesky_with_jitter(&cov, n)
}

/// Circulant embedding of the stationary covariance, padded to a power of
/// two. Returns None when the embedding has a non-negligible negative
/// eigenvalue mass (the caller then falls back to the dense factorization).
fn circulant_backend(kernel: &CorrelationKernel, grid: &SpaceTimeGrid) -> Option<FactorBackend> {
    let n = grid.n_x();
    let dx = grid.dx();
    let m = (2 * (n - 1)).next_power_of_two();
    let mut c: Vec<Complex64> = (0..m)
        .map(|j| {
            let lag = j.min(m - j) as f64 * dx;
            Complex64::new(kernel.eval(lag), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut c);
    let max_eig = c.iter().map(|v| v.re).fold(0.0f64, f64::max);
    let neg_mass: f64 = c.iter().map(|v| v.re.min(0.0).abs()).sum();
    if max_eig <= 0.0 || neg_mass > 1e-6 * max_eig {
        return None;
    }
    let sqrt_eig: Vec<f64> = c
        .iter()
        .map(|v| (v.re.max(0.0) / m as f64).sqrt())
        .collect();
    Some(FactorBackend::Circulant {
        sqrt_eig,
        fft: planner.plan_fft_forward(m),
    })
}

/// Sample one realization of the noise on `grid` from `seed`.
pub fn sample_noise(
    kernel: &CorrelationKernel,
    grid: &Arc<SpaceTimeGrid>,
    seed: u64,
) -> Result<NoiseRealization> {
    Ok(SpatialFactor::new(kernel, grid)?.sample(seed))
}

impl NoiseRealization {
    /// The all-zeros realization (frozen-noise baselines in tests and the
    /// Wong–Zakai module).
    pub fn zero(kernel: &CorrelationKernel, grid: &Arc<SpaceTimeGrid>) -> Self {
        Self {
            increments: vec![0.0; grid.n_steps() * grid.n_x()],
            kernel: kernel.clone(),
            grid: Arc::clone(grid),
            seed: 0,
        }
    }

    pub fn grid(&self) -> &Arc<SpaceTimeGrid> {
        &self.grid
    }
    pub fn kernel(&self) -> &CorrelationKernel {
        &self.kernel
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Increment row j (time step [t_j, t_{j+1}]).
    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.grid.n_x();
        &self.increments[j * n..(j + 1) * n]
    }

    /// ΔW over step j at off-grid x by linear interpolation.
    pub fn increment_at(&self, j: usize, x: f64) -> Result<f64> {
        let (i, frac) = self.grid.locate_x(x).ok_or_else(|| {
            Error::OutOfDomain(format!(
                "x = {x} outside noise grid [{}, {}]",
                self.grid.x_points()[0],
                self.grid.x_points().last().unwrap()
            ))
        })?;
        let row = self.row(j);
        Ok(row[i] * (1.0 - frac) + row[i + 1] * frac)
    }

    /// W(t_j, x_i) by cumulative summation over rows; W(0, ·) = 0.
    pub fn w_at(&self, time_index: usize, x_index: usize) -> f64 {
        let n = self.grid.n_x();
        // fold from +0.0: an empty f64 Sum would give -0.0
        (0..time_index)
            .map(|j| self.increments[j * n + x_index])
            .fold(0.0, |acc, v| acc + v)
    }

    /// W(t, x) off the grid: linear interpolation in x, increments
    /// attributed piecewise-constant in t (the whole step's increment
    /// lands at the step's end), which preserves the white-in-time
    /// structure exactly per step.
    pub fn w_value(&self, t: f64, x: f64) -> Result<f64> {
        if t < 0.0 || t > self.grid.horizon() {
            return Err(Error::domain(format!("t = {t} outside [0, horizon]")));
        }
        let steps = (t / self.grid.dt()).floor() as usize;
        let mut acc = 0.0;
        for j in 0..steps.min(self.grid.n_steps()) {
            acc += self.increment_at(j, x)?;
        }
        Ok(acc)
    }

    /// Full W(·, x) series at off-grid x (length n_steps + 1, starts at 0).
    pub fn w_series_at(&self, x: f64) -> Result<Vec<f64>> {
        let m = self.grid.n_steps();
        let mut out = Vec::with_capacity(m + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for j in 0..m {
            acc += self.increment_at(j, x)?;
            out.push(acc);
        }
        Ok(out)
    }

    /// CSV export of W(t, x) snapshots at the given time indices.
    /// Columns: `t,x,w`.
    pub fn write_w_csv(&self, time_indices: &[usize], out: &mut impl Write) -> Result<()> {
        writeln!(out, "t,x,w")?;
        for &j in time_indices {
            if j >= self.grid.t_points().len() {
                return Err(Error::domain(format!("time index {j} out of range")));
            }
            for (i, &x) in self.grid.x_points().iter().enumerate() {
                writeln!(out, "{},{},{}", self.grid.t_points()[j], x, self.w_at(j, i))?;
            }
        }
        Ok(())
    }

    /// Binary cache: magic, version, dims, seed, kernel hash, grid header,
    /// then row-major little-endian f64 increments.
    pub fn save_cache(&self, out: &mut impl Write) -> Result<()> {
        out.write_all(CACHE_MAGIC)?;
        out.write_all(&CACHE_VERSION.to_le_bytes())?;
        out.write_all(&(self.grid.n_steps() as u64).to_le_bytes())?;
        out.write_all(&(self.grid.n_x() as u64).to_le_bytes())?;
        out.write_all(&self.seed.to_le_bytes())?;
        out.write_all(&self.kernel.content_hash().to_le_bytes())?;
        out.write_all(&self.grid.x_points()[0].to_le_bytes())?;
        out.write_all(&self.grid.dx().to_le_bytes())?;
        out.write_all(&self.grid.dt().to_le_bytes())?;
        for v in &self.increments {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Load a cached realization; the kernel must hash-match the header.
    pub fn load_cache(kernel: &CorrelationKernel, input: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Format("bad cache magic".to_string()));
        }
        let mut u32buf = [0u8; 4];
        input.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != CACHE_VERSION {
            return Err(Error::Format(format!(
                "unsupported cache version {version}"
            )));
        }
        let mut u64buf = [0u8; 8];
        let mut read_u64 = |input: &mut dyn Read| -> Result<u64> {
            input.read_exact(&mut u64buf)?;
            Ok(u64::from_le_bytes(u64buf))
        };
        let m = read_u64(input)? as usize;
        let n = read_u64(input)? as usize;
        let seed = read_u64(input)?;
        let hash = read_u64(input)?;
        if hash != kernel.content_hash() {
            return Err(Error::Format(
                "cache kernel hash does not match the supplied kernel".to_string(),
            ));
        }
        let mut f64buf = [0u8; 8];
        let mut read_f64 = |input: &mut dyn Read| -> Result<f64> {
            input.read_exact(&mut f64buf)?;
            Ok(f64::from_le_bytes(f64buf))
        };
        let x0 = read_f64(input)?;
        let dx = read_f64(input)?;
        let dt = read_f64(input)?;
        let grid = SpaceTimeGrid::uniform(x0, x0 + dx * (n - 1) as f64, n, dt * m as f64, m)?;
        let mut increments = Vec::with_capacity(m * n);
        for _ in 0..m * n {
            increments.push(read_f64(input)?);
        }
        Ok(Self {
            increments,
            kernel: kernel.clone(),
            grid: Arc::new(grid),
            seed,
        })
    }
}

const CACHE_MAGIC: &[u8; 4] = b"KNZC";
const CACHE_VERSION: u32 = 1;

/// Mollifier family for the smoothed field V_{ε,δ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MollifierShape {
    /// Heat kernels p_ε^{(ν)} ⊗ p_δ^{(ν)} (ν set at construction).
    HeatKernel { nu: f64 },
    /// The standard C^∞ bump c·exp(−1/(1−z²)) on (−1,1), scaled to widths
    /// ε and δ and normalized numerically to integrate to 1.
    CompactBump,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierSpec {
    pub shape: MollifierShape,
    /// Time width parameter ε (> 0).
    pub eps: f64,
    /// Space width parameter δ (> 0).
    pub delta: f64,
}

/// Normalization constant and standard deviation of the unit bump,
/// computed once by quadrature.
fn bump_constants() -> (f64, f64) {
    use std::sync::OnceLock;
    static CONSTS: OnceLock<(f64, f64)> = OnceLock::new();
    *CONSTS.get_or_init(|| {
        let raw = |z: f64| {
            if z.abs() < 1.0 {
                (-1.0 / (1.0 - z * z)).exp()
            } else {
                0.0
            }
        };
        let mass = crate::quad::adaptive_simpson(raw, -1.0, 1.0, 1e-13);
        let second = crate::quad::adaptive_simpson(|z| z * z * raw(z), -1.0, 1.0, 1e-13);
        (1.0 / mass, (second / mass).sqrt())
    })
}

impl MollifierSpec {
    pub fn heat_kernel(nu: f64, eps: f64, delta: f64) -> Result<Self> {
        if !(nu > 0.0) || !(eps > 0.0) || !(delta > 0.0) {
            return Err(Error::domain(
                "mollifier parameters must be positive".to_string(),
            ));
        }
        Ok(Self {
            shape: MollifierShape::HeatKernel { nu },
            eps,
            delta,
        })
    }

    pub fn compact_bump(eps: f64, delta: f64) -> Result<Self> {
        if !(eps > 0.0) || !(delta > 0.0) {
            return Err(Error::domain(
                "mollifier parameters must be positive".to_string(),
            ));
        }
        Ok(Self {
            shape: MollifierShape::CompactBump,
            eps,
            delta,
        })
    }

    /// Bump mollifier with the same effective (std-dev) widths as `self`.
    pub fn matching_bump(&self) -> Self {
        let (_, unit_std) = bump_constants();
        Self {
            shape: MollifierShape::CompactBump,
            eps: self.time_width() / unit_std,
            delta: self.space_width() / unit_std,
        }
    }

    /// Effective time width (standard deviation of the time kernel).
    pub fn time_width(&self) -> f64 {
        match self.shape {
            MollifierShape::HeatKernel { nu } => (2.0 * nu * self.eps).sqrt(),
            MollifierShape::CompactBump => bump_constants().1 * self.eps,
        }
    }

    /// Effective space width (standard deviation of the space kernel).
    pub fn space_width(&self) -> f64 {
        match self.shape {
            MollifierShape::HeatKernel { nu } => (2.0 * nu * self.delta).sqrt(),
            MollifierShape::CompactBump => bump_constants().1 * self.delta,
        }
    }

    /// Half-width outside which the kernels are treated as zero.
    fn time_cutoff(&self) -> f64 {
        match self.shape {
            MollifierShape::HeatKernel { .. } => 8.0 * self.time_width(),
            MollifierShape::CompactBump => self.eps,
        }
    }

    fn space_cutoff(&self) -> f64 {
        match self.shape {
            MollifierShape::HeatKernel { .. } => 8.0 * self.space_width(),
            MollifierShape::CompactBump => self.delta,
        }
    }

    fn time_kernel(&self, s: f64) -> f64 {
        match self.shape {
            MollifierShape::HeatKernel { nu } => heat_kernel_unchecked(nu, self.eps, s),
            MollifierShape::CompactBump => bump_scaled(s, self.eps),
        }
    }

    fn space_kernel(&self, z: f64) -> f64 {
        match self.shape {
            MollifierShape::HeatKernel { nu } => heat_kernel_unchecked(nu, self.delta, z),
            MollifierShape::CompactBump => bump_scaled(z, self.delta),
        }
    }

    fn check_resolution(&self, grid: &SpaceTimeGrid) -> Result<()> {
        if self.time_width() < 2.0 * grid.dt() || self.space_width() < 2.0 * grid.dx() {
            return Err(Error::Resolution(format!(
                "mollifier widths ({:.3e}, {:.3e}) below twice the grid spacings ({:.3e}, {:.3e})",
                self.time_width(),
                self.space_width(),
                grid.dt(),
                grid.dx()
            )));
        }
        Ok(())
    }
}

fn bump_scaled(z: f64, width: f64) -> f64 {
    let u = z / width;
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let (norm, _) = bump_constants();
    norm / width * (-1.0 / (1.0 - u * u)).exp()
}

/// V_{ε,δ}(t,x): quadrature of the space-time mollifier against the grid
/// increments. Increments are attributed at step midpoints in time and grid
/// nodes in space, with weight Δx for the spatial Riemann sum.
pub fn mollified_value(
    noise: &NoiseRealization,
    spec: &MollifierSpec,
    t: f64,
    x: f64,
) -> Result<f64> {
    let grid = noise.grid();
    if t < 0.0 || t > grid.horizon() {
        return Err(Error::domain(format!(
            "t = {t} outside [0, {}]",
            grid.horizon()
        )));
    }
    spec.check_resolution(grid)?;
    let dt = grid.dt();
    let dx = grid.dx();
    let m = grid.n_steps();
    let xs = grid.x_points();
    let n = grid.n_x();

    let t_cut = spec.time_cutoff();
    let j_lo = (((t - t_cut) / dt).floor().max(0.0)) as usize;
    let j_hi = std::cmp::min(m, ((t + t_cut) / dt).ceil() as usize);
    let x_cut = spec.space_cutoff();
    let i_lo = (((x - x_cut - xs[0]) / dx).floor().max(0.0)) as usize;
    let i_hi = std::cmp::min(n, ((x + x_cut - xs[0]) / dx).ceil() as usize + 1);

    let mut acc = 0.0;
    for j in j_lo..j_hi {
        let mid = (j as f64 + 0.5) * dt;
        let kt = spec.time_kernel(t - mid);
        if kt == 0.0 {
            continue;
        }
        let row = noise.row(j);
        let mut spatial = 0.0;
        for i in i_lo..i_hi {
            spatial += spec.space_kernel(x - xs[i]) * row[i];
        }
        acc += kt * spatial * dx;
    }
    Ok(acc)
}

/// Mollified field precomputed on the full grid (separable convolution),
/// with bilinear evaluation in between. Values agree with
/// [`mollified_value`] at the nodes up to summation order.
pub struct MollifiedField {
    /// (n_steps + 1) × n_x values at (t_j, x_i).
    values: Vec<f64>,
    grid: Arc<SpaceTimeGrid>,
}

pub fn mollified_field(noise: &NoiseRealization, spec: &MollifierSpec) -> Result<MollifiedField> {
    let grid = noise.grid();
    spec.check_resolution(grid)?;
    let dt = grid.dt();
    let dx = grid.dx();
    let m = grid.n_steps();
    let n = grid.n_x();
    let xs = grid.x_points();

    let t_cut = spec.time_cutoff();
    let j_window = (t_cut / dt).ceil() as usize + 1;
    let x_cut = spec.space_cutoff();
    let i_window = (x_cut / dx).ceil() as usize + 1;

    // Constant kernels have rows that are flat in x, so the separable
    // convolution factorizes: one temporal pass on a single column and one
    // spatial weight vector cover the whole field.
    if noise.kernel().is_constant() {
        let temporal: Vec<f64> = exec::map_indexed(m + 1, |j| {
            let t = grid.t_points()[j];
            let lo = j.saturating_sub(j_window);
            let hi = std::cmp::min(m, j + j_window);
            let mut acc = 0.0;
            for jp in lo..hi {
                let mid = (jp as f64 + 0.5) * dt;
                acc += spec.time_kernel(t - mid) * noise.row(jp)[0];
            }
            acc
        });
        let spatial: Vec<f64> = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(i_window);
                let hi = std::cmp::min(n, i + i_window + 1);
                let mut acc = 0.0;
                for ip in lo..hi {
                    acc += spec.space_kernel(xs[i] - xs[ip]);
                }
                acc * dx
            })
            .collect();
        let mut values = Vec::with_capacity((m + 1) * n);
        for &a in &temporal {
            for &s in &spatial {
                values.push(a * s);
            }
        }
        return Ok(MollifiedField {
            values,
            grid: Arc::clone(grid),
        });
    }

    // Temporal pass: A(t_j, x_i) = Σ_{j'} K_t(t_j − mid_{j'}) ΔW_{j',i}.
    let temporal: Vec<Vec<f64>> = exec::map_indexed(m + 1, |j| {
        let t = grid.t_points()[j];
        let lo = j.saturating_sub(j_window);
        let hi = std::cmp::min(m, j + j_window);
        let mut acc = vec![0.0; n];
        for jp in lo..hi {
            let mid = (jp as f64 + 0.5) * dt;
            let kt = spec.time_kernel(t - mid);
            if kt == 0.0 {
                continue;
            }
            let row = noise.row(jp);
            for i in 0..n {
                acc[i] += kt * row[i];
            }
        }
        acc
    });

    // Spatial pass: V(t_j, x_i) = Σ_{i'} K_x(x_i − x_{i'}) A(t_j, x_{i'}) Δx.
    let values_rows: Vec<Vec<f64>> = exec::map_indexed(m + 1, |j| {
        let a = &temporal[j];
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            let lo = i.saturating_sub(i_window);
            let hi = std::cmp::min(n, i + i_window + 1);
            let mut acc = 0.0;
            for ip in lo..hi {
                acc += spec.space_kernel(xs[i] - xs[ip]) * a[ip];
            }
            *o = acc * dx;
        }
        out
    });
    let mut values = Vec::with_capacity((m + 1) * n);
    for row in values_rows {
        values.extend_from_slice(&row);
    }
    Ok(MollifiedField {
        values,
        grid: Arc::clone(grid),
    })
}

impl MollifiedField {
    /// Bilinear evaluation; errors outside the grid.
    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        let grid = &self.grid;
        if t < 0.0 || t > grid.horizon() {
            return Err(Error::domain(format!("t = {t} outside grid horizon")));
        }
        let (i, fx) = grid
            .locate_x(x)
            .ok_or_else(|| Error::OutOfDomain(format!("x = {x} outside noise grid")))?;
        let dt = grid.dt();
        let m = grid.n_steps();
        let u = (t / dt).min(m as f64);
        let j = (u.floor() as usize).min(m - 1);
        let ft = u - j as f64;
        let n = grid.n_x();
        let v00 = self.values[j * n + i];
        let v01 = self.values[j * n + i + 1];
        let v10 = self.values[(j + 1) * n + i];
        let v11 = self.values[(j + 1) * n + i + 1];
        Ok(v00 * (1.0 - ft) * (1.0 - fx)
            + v01 * (1.0 - ft) * fx
            + v10 * ft * (1.0 - fx)
            + v11 * ft * fx)
    }
}

/// Result of the Walsh-isometry variance check.
#[derive(Debug, Clone, Copy)]
pub struct WalshCheck {
    pub empirical: f64,
    pub analytic: f64,
    pub n_seeds: usize,
}

impl WalshCheck {
    /// Standard error of the empirical variance (Gaussian fourth-moment rule).
    pub fn stderr(&self) -> f64 {
        self.analytic * (2.0 / self.n_seeds as f64).sqrt()
    }
}

/// Empirical vs analytic variance of the Walsh integral
/// ∫ φ dW ≈ Σ_{j,i} φ(t_j, x_i) ΔW_{j,i} Δx for a deterministic test
/// function φ.
///
/// The analytic value is the exact covariance triple sum
/// Σ_j Δt Σ_{i,i′} φ(t_j,x_i) φ(t_j,x_{i′}) ρ(x_i−x_{i′}) Δx².
pub fn walsh_variance_test(
    kernel: &CorrelationKernel,
    grid: &Arc<SpaceTimeGrid>,
    phi: &(dyn Fn(f64, f64) -> f64 + Sync),
    n_seeds: usize,
    seed: u64,
) -> Result<WalshCheck> {
    let m = grid.n_steps();
    let n = grid.n_x();
    let xs = grid.x_points();
    let ts = grid.t_points();
    let dx = grid.dx();
    let dt = grid.dt();

    // Tabulate φ at left time endpoints once.
    let mut phi_tab = vec![0.0; m * n];
    for j in 0..m {
        for i in 0..n {
            phi_tab[j * n + i] = phi(ts[j], xs[i]);
        }
    }

    let mut analytic = 0.0;
    for j in 0..m {
        let row = &phi_tab[j * n..(j + 1) * n];
        let mut acc = 0.0;
        for i in 0..n {
            if row[i] == 0.0 {
                continue;
            }
            for ip in 0..n {
                acc += row[i] * row[ip] * kernel.eval(xs[i] - xs[ip]);
            }
        }
        analytic += acc * dt * dx * dx;
    }

    let factor = SpatialFactor::new(kernel, grid)?;
    let samples = exec::map_indexed(n_seeds, |s| {
        let noise = factor.sample(crate::rng::derive_seed(seed, &[s as u64]));
        let mut acc = 0.0;
        for j in 0..m {
            let row = noise.row(j);
            let prow = &phi_tab[j * n..(j + 1) * n];
            for i in 0..n {
                acc += prow[i] * row[i];
            }
        }
        acc * dx
    });
    let empirical = crate::stats::sample_variance(&samples);
    Ok(WalshCheck {
        empirical,
        analytic,
        n_seeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::with_threads;
    use crate::stats::{correlation, mean_stderr, sample_variance};

    fn small_grid() -> Arc<SpaceTimeGrid> {
        Arc::new(SpaceTimeGrid::uniform(-4.0, 4.0, 33, 1.0, 20).unwrap())
    }

    #[test]
    fn grid_rejects_nonuniform() {
        assert!(SpaceTimeGrid::from_points(vec![0.0, 1.0, 2.5], vec![0.0, 0.5, 1.0]).is_err());
        assert!(SpaceTimeGrid::from_points(vec![0.0, 1.0], vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn constant_kernel_rows_are_replicated_normals() {
        let kernel = CorrelationKernel::constant(2.0).unwrap();
        let grid = small_grid();
        let noise = sample_noise(&kernel, &grid, 99).unwrap();
        let scale = (2.0 * grid.dt()).sqrt();
        for j in 0..grid.n_steps() {
            let row = noise.row(j);
            for &v in row {
                assert_eq!(v, row[0], "row constant across x");
            }
            // the replicated value is sqrt(rho0 dt) times a standard normal
            assert!((row[0] / scale).abs() < 6.0);
        }
    }

    #[test]
    fn sampling_is_deterministic_across_thread_counts() {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let grid = small_grid();
        let a = with_threads(1, || sample_noise(&kernel, &grid, 7).unwrap());
        let b = with_threads(4, || sample_noise(&kernel, &grid, 7).unwrap());
        assert_eq!(a.increments, b.increments);
        let c = sample_noise(&kernel, &grid, 8).unwrap();
        assert_ne!(a.increments, c.increments);
    }

    /// Var[W(T,x)] = T·ρ(0) within 3 standard errors over 10⁴ seeds.
    #[test]
    fn w_horizon_variance_matches_kernel() {
        let kernel = CorrelationKernel::gaussian_bell(1.5, 0.8).unwrap();
        let grid = Arc::new(SpaceTimeGrid::uniform(-2.0, 2.0, 17, 2.0, 8).unwrap());
        let factor = SpatialFactor::new(&kernel, &grid).unwrap();
        let n_seeds = 10_000;
        let samples = exec::map_indexed(n_seeds, |s| {
            let noise = factor.sample(crate::rng::derive_seed(4242, &[s as u64]));
            noise.w_at(grid.n_steps(), 8)
        });
        let target = 2.0 * 1.5;
        let var = sample_variance(&samples);
        let se = target * (2.0 / n_seeds as f64).sqrt();
        assert!(
            (var - target).abs() < 3.0 * se,
            "var = {var}, target = {target}, se = {se}"
        );
    }

    /// Corr[ΔW(x), ΔW(x′)] = ρ(x−x′)/ρ(0) within 3 standard errors.
    #[test]
    fn increment_correlation_matches_kernel() {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let grid = small_grid();
        let factor = SpatialFactor::new(&kernel, &grid).unwrap();
        let n_seeds = 10_000;
        let (i0, i1) = (16usize, 20usize); // x = 0 and x = 1
        let pairs = exec::map_indexed(n_seeds, |s| {
            let noise = factor.sample(crate::rng::derive_seed(5150, &[s as u64]));
            let row = noise.row(3);
            (row[i0], row[i1])
        });
        let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let r = correlation(&a, &b);
        let target = kernel.eval(1.0) / kernel.rho0();
        let se = (1.0 - target * target) / (n_seeds as f64).sqrt();
        assert!(
            (r - target).abs() < 3.0 * se,
            "corr = {r}, target = {target}"
        );
    }

    /// Distinct rows are uncorrelated: |corr| < 4/√n_seeds.
    #[test]
    fn white_in_time() {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let grid = small_grid();
        let factor = SpatialFactor::new(&kernel, &grid).unwrap();
        let n_seeds = 10_000;
        let pairs = exec::map_indexed(n_seeds, |s| {
            let noise = factor.sample(crate::rng::derive_seed(31337, &[s as u64]));
            (noise.row(2)[16], noise.row(9)[16])
        });
        let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        assert!(correlation(&a, &b).abs() < 4.0 / (n_seeds as f64).sqrt());
    }

    /// The circulant fast path (n >= 128) reproduces the kernel's variance
    /// and spatial correlation.
    #[test]
    fn circulant_backend_statistics() {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let grid = Arc::new(SpaceTimeGrid::uniform(-8.0, 8.0, 161, 0.5, 2).unwrap());
        let factor = SpatialFactor::new(&kernel, &grid).unwrap();
        assert!(matches!(factor.backend, FactorBackend::Circulant { .. }));
        let n_seeds = 10_000;
        let (i0, i1) = (80usize, 90usize); // x = 0 and x = 1
        let triples = exec::map_indexed(n_seeds, |s| {
            let noise = factor.sample(crate::rng::derive_seed(808, &[s as u64]));
            let row = noise.row(0);
            (row[i0], row[i1])
        });
        let a: Vec<f64> = triples.iter().map(|p| p.0).collect();
        let b: Vec<f64> = triples.iter().map(|p| p.1).collect();
        let var = sample_variance(&a);
        let target_var = kernel.rho0() * grid.dt();
        let se_var = target_var * (2.0 / n_seeds as f64).sqrt();
        assert!(
            (var - target_var).abs() < 3.0 * se_var,
            "var = {var}, target = {target_var}"
        );
        let r = correlation(&a, &b);
        let target_r = kernel.eval(1.0);
        let se_r = (1.0 - target_r * target_r) / (n_seeds as f64).sqrt();
        assert!(
            (r - target_r).abs() < 3.0 * se_r,
            "corr = {r}, target = {target_r}"
        );
    }

    #[test]
    fn zero_realization_is_zero() {
        let kernel = CorrelationKernel::constant(1.0).unwrap();
        let grid = small_grid();
        let z = NoiseRealization::zero(&kernel, &grid);
        assert!(z.increments.iter().all(|&v| v == 0.0));
        assert_eq!(z.w_at(grid.n_steps(), 0), 0.0);
    }

    #[test]
    fn cache_round_trip() {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let grid = small_grid();
        let noise = sample_noise(&kernel, &grid, 123).unwrap();
        let mut buf = Vec::new();
        noise.save_cache(&mut buf).unwrap();
        let loaded = NoiseRealization::load_cache(&kernel, &mut buf.as_slice()).unwrap();
        assert_eq!(loaded.increments, noise.increments);
        assert_eq!(loaded.seed(), 123);
        let mut csv = Vec::new();
        noise.write_w_csv(&[0, grid.n_steps()], &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("t,x,w\n0,-4,0\n"));
        assert_eq!(text.lines().count(), 1 + 2 * grid.n_x());
        // wrong kernel is rejected by the content hash
        let other = CorrelationKernel::constant(1.0).unwrap();
        assert!(NoiseRealization::load_cache(&other, &mut buf.as_slice()).is_err());
    }

    #[test]
    fn mollifier_resolution_guard() {
        let kernel = CorrelationKernel::constant(1.0).unwrap();
        let grid = small_grid();
        let noise = sample_noise(&kernel, &grid, 1).unwrap();
        let spec = MollifierSpec::heat_kernel(0.5, 1e-6, 1e-6).unwrap();
        assert!(matches!(
            mollified_value(&noise, &spec, 0.5, 0.0),
            Err(Error::Resolution(_))
        ));
    }

    /// Var[V_{ε,δ}] ≈ p_{2ε}^{(ν)}(0)·(p_{2δ}^{(ν)}*ρ)(0) within 3 se.
    #[test]
    fn mollified_point_variance() {
        let nu = 0.5;
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let grid = Arc::new(SpaceTimeGrid::uniform(-4.0, 4.0, 81, 1.0, 100).unwrap());
        let spec = MollifierSpec::heat_kernel(nu, 0.01, 0.09).unwrap();
        let factor = SpatialFactor::new(&kernel, &grid).unwrap();
        let n_seeds = 10_000;
        let samples = exec::map_indexed(n_seeds, |s| {
            let noise = factor.sample(crate::rng::derive_seed(777, &[s as u64]));
            mollified_value(&noise, &spec, 0.5, 0.0).unwrap()
        });
        let var = sample_variance(&samples);
        // analytic: p_{2eps}(0) * (p_{2delta} * rho)(0) by quadrature
        let p2e0 = heat_kernel_unchecked(nu, 2.0 * spec.eps, 0.0);
        let sd = (2.0 * nu * 2.0 * spec.delta).sqrt();
        let conv = crate::quad::adaptive_simpson(
            |z| heat_kernel_unchecked(nu, 2.0 * spec.delta, z) * kernel.eval(z),
            -10.0 * sd,
            10.0 * sd,
            1e-10,
        );
        let target = p2e0 * conv;
        let se = target * (2.0 / n_seeds as f64).sqrt();
        assert!(
            (var - target).abs() < 3.0 * se + 0.02 * target,
            "var = {var}, target = {target}, se = {se}"
        );
    }

    /// Constant kernel: (p_{2δ}*ρ)(0) = ρ(0), so the variance collapses to
    /// p_{2ε}(0)·ρ(0).
    #[test]
    fn mollified_variance_constant_kernel() {
        let nu = 0.5;
        let kernel = CorrelationKernel::constant(1.3).unwrap();
        let grid = Arc::new(SpaceTimeGrid::uniform(-6.0, 6.0, 121, 1.0, 100).unwrap());
        let spec = MollifierSpec::heat_kernel(nu, 0.01, 0.09).unwrap();
        let factor = SpatialFactor::new(&kernel, &grid).unwrap();
        let n_seeds = 8_000;
        let samples = exec::map_indexed(n_seeds, |s| {
            let noise = factor.sample(crate::rng::derive_seed(778, &[s as u64]));
            mollified_value(&noise, &spec, 0.5, 0.0).unwrap()
        });
        let var = sample_variance(&samples);
        let target = heat_kernel_unchecked(nu, 2.0 * spec.eps, 0.0) * 1.3;
        let se = target * (2.0 / n_seeds as f64).sqrt();
        assert!(
            (var - target).abs() < 3.0 * se + 0.02 * target,
            "var = {var}, target = {target}"
        );
    }

    #[test]
    fn mollified_field_constant_kernel_fast_path() {
        let kernel = CorrelationKernel::constant(1.3).unwrap();
        let grid = Arc::new(SpaceTimeGrid::uniform(-4.0, 4.0, 81, 1.0, 100).unwrap());
        let noise = sample_noise(&kernel, &grid, 31).unwrap();
        let spec = MollifierSpec::heat_kernel(0.5, 0.01, 0.09).unwrap();
        let field = mollified_field(&noise, &spec).unwrap();
        for &(tj, xi) in &[(25usize, 15usize), (60, 40), (90, 66)] {
            let t = grid.t_points()[tj];
            let x = grid.x_points()[xi];
            let direct = mollified_value(&noise, &spec, t, x).unwrap();
            let fast = field.eval(t, x).unwrap();
            assert!(
                (direct - fast).abs() < 1e-10 * (1.0 + direct.abs()),
                "fast path mismatch {direct} vs {fast}"
            );
        }
    }

    #[test]
    fn mollified_field_matches_pointwise_values() {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let grid = Arc::new(SpaceTimeGrid::uniform(-4.0, 4.0, 81, 1.0, 100).unwrap());
        let noise = sample_noise(&kernel, &grid, 2024).unwrap();
        let spec = MollifierSpec::heat_kernel(0.5, 0.01, 0.09).unwrap();
        let field = mollified_field(&noise, &spec).unwrap();
        for &(tj, xi) in &[(30usize, 20usize), (50, 40), (77, 60)] {
            let t = grid.t_points()[tj];
            let x = grid.x_points()[xi];
            let direct = mollified_value(&noise, &spec, t, x).unwrap();
            let interp = field.eval(t, x).unwrap();
            assert!(
                (direct - interp).abs() < 1e-10 * (1.0 + direct.abs()),
                "node mismatch {direct} vs {interp}"
            );
        }
    }

    /// With small widths, the time integral of the mollified field along a
    /// fixed curve reproduces the curvilinear law N(0, t·ρ(0)): two-sample
    /// KS against the conditional-Gaussian sampler, not rejected at 1%.
    #[test]
    fn mollified_integral_matches_conditional_law() {
        use crate::curvilinear::{sample_conditional, CurvilinearRequest};
        use crate::stats::{ks_critical, ks_two_sample};
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let grid = Arc::new(SpaceTimeGrid::uniform(-4.0, 4.0, 81, 1.0, 128).unwrap());
        let factor = SpatialFactor::new(&kernel, &grid).unwrap();
        // narrow widths: std_t = 0.02, std_x = 0.2 (both >= 2 spacings)
        let spec = MollifierSpec::heat_kernel(0.5, 4e-4, 0.04).unwrap();
        let curve = |s: f64| 0.4 * (2.0 * s).sin();
        let n_mollified = 800;
        let mollified = exec::map_indexed(n_mollified, |r| {
            let noise = factor.sample(crate::rng::derive_seed(2222, &[r as u64]));
            let field = mollified_field(&noise, &spec).unwrap();
            let nodes: Vec<f64> = grid
                .t_points()
                .iter()
                .map(|&s| field.eval(s, curve(s)).unwrap())
                .collect();
            crate::quad::trapezoid_uniform(&nodes, grid.dt())
        });
        let req = CurvilinearRequest::new(
            vec![crate::curvilinear::still_anchor(0.0)],
            1.0,
            kernel,
            128,
        )
        .unwrap();
        let n_cond = 10_000;
        let conditional = exec::map_indexed(n_cond, |i| {
            sample_conditional(&req, crate::rng::derive_seed(2223, &[i as u64])).unwrap()[0]
        });
        let d = ks_two_sample(&mollified, &conditional);
        let crit = ks_critical(0.01, n_mollified, n_cond);
        assert!(d < crit, "KS {d} above 1% critical value {crit}");
    }

    /// Curvilinear integrals of the two mollifier families along a fixed
    /// curve agree better as the widths shrink.
    #[test]
    fn mollifier_families_converge_together() {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 1.0).unwrap();
        let grid = Arc::new(SpaceTimeGrid::uniform(-4.0, 4.0, 161, 1.0, 200).unwrap());
        let factor = SpatialFactor::new(&kernel, &grid).unwrap();
        let curve = |s: f64| 0.5 * (3.0 * s).sin();
        let n_seeds = 64;
        let mut gaps = Vec::new();
        for &(eps, delta) in &[(0.04, 0.36), (0.0025, 0.0225)] {
            let heat = MollifierSpec::heat_kernel(0.5, eps, delta).unwrap();
            let bump = heat.matching_bump();
            let sq = exec::map_indexed(n_seeds, |s| {
                let noise = factor.sample(crate::rng::derive_seed(91, &[s as u64]));
                let fh = mollified_field(&noise, &heat).unwrap();
                let fb = mollified_field(&noise, &bump).unwrap();
                let ts = grid.t_points();
                let vh: Vec<f64> = ts.iter().map(|&t| fh.eval(t, curve(t)).unwrap()).collect();
                let vb: Vec<f64> = ts.iter().map(|&t| fb.eval(t, curve(t)).unwrap()).collect();
                let ih = crate::quad::trapezoid_uniform(&vh, grid.dt());
                let ib = crate::quad::trapezoid_uniform(&vb, grid.dt());
                (ih - ib) * (ih - ib)
            });
            gaps.push(mean_stderr(&sq).mean.sqrt());
        }
        assert!(
            gaps[1] < gaps[0],
            "families should converge together: {gaps:?}"
        );
    }

    #[test]
    fn walsh_zero_function() {
        let kernel = CorrelationKernel::constant(1.0).unwrap();
        let grid = small_grid();
        let check = walsh_variance_test(&kernel, &grid, &|_, _| 0.0, 10, 1).unwrap();
        assert_eq!(check.analytic, 0.0);
        assert_eq!(check.empirical, 0.0);
    }

    /// Constant kernel, φ = indicator of [0,1]×[0,1]: analytic variance ρ0.
    #[test]
    fn walsh_indicator_analytic_value() {
        let rho0 = 1.7;
        let kernel = CorrelationKernel::constant(rho0).unwrap();
        // grid covering [0,1]x[0,1] exactly: x in [0,1] with 11 points
        // includes both endpoints; indicator on half-open cells.
        let grid = Arc::new(SpaceTimeGrid::uniform(0.0, 1.25, 51, 1.0, 25).unwrap());
        let phi = |t: f64, x: f64| {
            if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&x) {
                1.0
            } else {
                0.0
            }
        };
        let check = walsh_variance_test(&kernel, &grid, &phi, 4_000, 5).unwrap();
        // discrete indicator mass: 40 x-cells of 0.025 = 1.0 exactly
        assert!(
            (check.analytic - rho0).abs() < 1e-9,
            "analytic = {}",
            check.analytic
        );
        assert!(
            (check.empirical - check.analytic).abs() < 3.0 * check.stderr(),
            "empirical = {}, analytic = {}",
            check.empirical,
            check.analytic
        );
    }

    /// GaussianBell kernel with a Gaussian bump test function.
    #[test]
    fn walsh_gaussian_bump() {
        let kernel = CorrelationKernel::gaussian_bell(1.0, 0.7).unwrap();
        let grid = small_grid();
        let phi = |t: f64, x: f64| (-(x * x) - t).exp();
        let check = walsh_variance_test(&kernel, &grid, &phi, 10_000, 6).unwrap();
        assert!(
            (check.empirical - check.analytic).abs() < 3.0 * check.stderr(),
            "empirical = {}, analytic = {}, se = {}",
            check.empirical,
            check.analytic,
            check.stderr()
        );
    }
}
