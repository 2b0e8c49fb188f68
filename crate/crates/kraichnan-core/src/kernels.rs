//! Correlation kernels ρ, the heat kernel p, and the derived constants the
//! solvers consume.
//!
//! ρ is the spatial covariance of the white-in-time velocity field:
//! Cov[V(t,a), V(s,b)] = δ₀(t−s) ρ(a−b). Admissible kernels are continuous,
//! even, nonnegative, and maximized at 0 with ρ(0) > 0. Two analytic
//! families ship with the toolkit (constant and Gaussian bell) plus linearly
//! interpolated user tables.

use crate::error::Error;
use crate::Result;

/// Shape of the correlation kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelShape {
    /// ρ(z) = ρ0 for all z (perfect spatial correlation).
    Constant,
    /// ρ(z) = ρ0 · exp(−z²/(2ℓ²)).
    GaussianBell { length_scale: f64 },
    /// Linear interpolation between samples given on z ≥ 0 (extended
    /// evenly), clamped to the last sample beyond the table.
    UserTabulated {
        abscissa: Vec<f64>,
        values: Vec<f64>,
    },
}

/// Hölder pair (C*, ϖ) with ρ(0) − ρ(z) ≤ C*·|z|^ϖ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderPair {
    pub c_star: f64,
    pub exponent: f64,
}

/// A spatial correlation kernel with its derived constants.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationKernel {
    shape: KernelShape,
    rho0: f64,
    holder: Option<HolderPair>,
    monotone_on_halfline: bool,
    strictly_peaked: bool,
}

impl CorrelationKernel {
    /// Constant kernel ρ ≡ ρ0.
    pub fn constant(rho0: f64) -> Result<Self> {
        if rho0 <= 0.0 || !rho0.is_finite() {
            return Err(Error::domain(format!("rho0 must be positive, got {rho0}")));
        }
        Ok(Self {
            shape: KernelShape::Constant,
            rho0,
            holder: Some(HolderPair {
                c_star: 0.0,
                exponent: 2.0,
            }),
            monotone_on_halfline: true,
            strictly_peaked: false,
        })
    }

    /// Gaussian bell ρ(z) = ρ0·exp(−z²/(2ℓ²)), with the tight Hölder pair
    /// C* = ρ0/(2ℓ²), ϖ = 2.
    pub fn gaussian_bell(rho0: f64, length_scale: f64) -> Result<Self> {
        if rho0 <= 0.0 || !rho0.is_finite() {
            return Err(Error::domain(format!("rho0 must be positive, got {rho0}")));
        }
        if length_scale <= 0.0 || !length_scale.is_finite() {
            return Err(Error::domain(format!(
                "length_scale must be positive, got {length_scale}"
            )));
        }
        Ok(Self {
            shape: KernelShape::GaussianBell { length_scale },
            rho0,
            holder: Some(HolderPair {
                c_star: rho0 / (2.0 * length_scale * length_scale),
                exponent: 2.0,
            }),
            monotone_on_halfline: true,
            strictly_peaked: true,
        })
    }

    /// Tabulated kernel on z ≥ 0. The table must start at z = 0 with a
    /// positive value, be strictly increasing in z, and stay within
    /// [0, ρ(0)]. Positive definiteness of the table is not certified here;
    /// it is enforced operationally by the jittered factorization in the
    /// noise module.
    pub fn tabulated(abscissa: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if abscissa.len() != values.len() || abscissa.len() < 2 {
            return Err(Error::domain(
                "tabulated kernel needs >= 2 matching samples".to_string(),
            ));
        }
        if abscissa[0] != 0.0 {
            return Err(Error::domain("table must start at z = 0".to_string()));
        }
        if abscissa.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(
                "table abscissa must be increasing".to_string(),
            ));
        }
        let rho0 = values[0];
        if rho0 <= 0.0 {
            return Err(Error::domain(
                "table value at 0 must be positive".to_string(),
            ));
        }
        if values
            .iter()
            .any(|&v| v < 0.0 || v > rho0 || !v.is_finite())
        {
            return Err(Error::domain(
                "table values must lie in [0, rho(0)]".to_string(),
            ));
        }
        let monotone = values.windows(2).all(|w| w[1] <= w[0]);
        let strictly_peaked = values[1..].iter().all(|&v| v < rho0);
        Ok(Self {
            shape: KernelShape::UserTabulated { abscissa, values },
            rho0,
            holder: None,
            monotone_on_halfline: monotone,
            strictly_peaked,
        })
    }

    pub fn shape(&self) -> &KernelShape {
        &self.shape
    }

    /// ρ(0), the variance rate of the velocity field.
    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn holder(&self) -> Option<HolderPair> {
        self.holder
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.shape, KernelShape::Constant)
    }

    /// ρ non-increasing on [0, ∞).
    pub fn monotone_on_halfline(&self) -> bool {
        self.monotone_on_halfline
    }

    /// ρ(w) = ρ(0) only at w = 0.
    pub fn strictly_peaked(&self) -> bool {
        self.strictly_peaked
    }

    /// Characteristic decay length used to size test lattices; 1.0 for
    /// shapes without one.
    pub fn length_scale(&self) -> f64 {
        match &self.shape {
            KernelShape::GaussianBell { length_scale } => *length_scale,
            KernelShape::UserTabulated { abscissa, .. } => abscissa
                .last()
                .copied()
                .unwrap_or(1.0)
                .max(f64::MIN_POSITIVE),
            KernelShape::Constant => 1.0,
        }
    }

    /// Evaluate ρ(z). Total on all finite inputs.
    pub fn eval(&self, z: f64) -> f64 {
        match &self.shape {
            KernelShape::Constant => self.rho0,
            KernelShape::GaussianBell { length_scale } => {
                let u = z / length_scale;
                self.rho0 * (-0.5 * u * u).exp()
            }
            KernelShape::UserTabulated { abscissa, values } => {
                let z = z.abs();
                let last = *abscissa.last().unwrap();
                if z >= last {
                    return *values.last().unwrap();
                }
                // binary search for the bracketing segment
                let idx = match abscissa.binary_search_by(|a| a.total_cmp(&z)) {
                    Ok(i) => return values[i],
                    Err(i) => i,
                };
                let (z0, z1) = (abscissa[idx - 1], abscissa[idx]);
                let (v0, v1) = (values[idx - 1], values[idx]);
                v0 + (v1 - v0) * (z - z0) / (z1 - z0)
            }
        }
    }

    /// Stable content hash (for the noise cache header).
    pub fn content_hash(&self) -> u64 {
        let mut h = Fnv::new();
        h.write_u64(self.rho0.to_bits());
        match &self.shape {
            KernelShape::Constant => h.write_u64(1),
            KernelShape::GaussianBell { length_scale } => {
                h.write_u64(2);
                h.write_u64(length_scale.to_bits());
            }
            KernelShape::UserTabulated { abscissa, values } => {
                h.write_u64(3);
                for (a, v) in abscissa.iter().zip(values) {
                    h.write_u64(a.to_bits());
                    h.write_u64(v.to_bits());
                }
            }
        }
        h.finish()
    }
}

/// Evaluate ρ(z) for a kernel. Free-function form of
/// [`CorrelationKernel::eval`].
pub fn eval_rho(kernel: &CorrelationKernel, z: f64) -> f64 {
    kernel.eval(z)
}

/// The heat kernel p_t^{(ν)}(x) = (4πνt)^{−1/2}·exp(−x²/(4νt)).
pub fn heat_kernel(nu: f64, t: f64, x: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::domain(format!("heat kernel needs nu > 0, got {nu}")));
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("heat kernel needs t > 0, got {t}")));
    }
    Ok(heat_kernel_unchecked(nu, t, x))
}

/// Heat kernel without domain checks, for hot loops that validated inputs.
#[inline]
pub fn heat_kernel_unchecked(nu: f64, t: f64, x: f64) -> f64 {
    let four_nu_t = 4.0 * nu * t;
    (std::f64::consts::PI * four_nu_t).sqrt().recip() * (-x * x / four_nu_t).exp()
}

/// κ = ν₂ − ½ρ(0). The caller decides whether κ ≤ 0 is fatal (Itô mode)
/// or irrelevant (Stratonovich mode).
pub fn kappa_of(nu2: f64, rho0: f64) -> f64 {
    nu2 - 0.5 * rho0
}

/// Burkholder–Davis–Gundy style constant used in the moment-bound tests:
/// 1 at k = 2, otherwise 8k.
pub fn bdg_constant(k: f64) -> Result<f64> {
    if !(k >= 2.0) {
        return Err(Error::domain(format!("bdg constant needs k >= 2, got {k}")));
    }
    Ok(if k == 2.0 { 1.0 } else { 8.0 * k })
}

/// Diffusivity parameters of the generalized equation
/// ∂ₜθ = ν₁∂²ₓθ + ν₂∂²_yθ + ∂_yθ·V, plus the mean drift μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub nu1: f64,
    pub nu2: f64,
    /// Mean velocity of the Reynolds decomposition; shifts the transverse
    /// motion by μt. Defaults to 0.
    pub mu: f64,
}

impl ModelParams {
    pub fn new(nu1: f64, nu2: f64) -> Result<Self> {
        if !(nu1 > 0.0) || !(nu2 > 0.0) {
            return Err(Error::domain(format!(
                "diffusivities must be positive, got nu1 = {nu1}, nu2 = {nu2}"
            )));
        }
        Ok(Self { nu1, nu2, mu: 0.0 })
    }

    /// Isotropic case ν₁ = ν₂ = ν.
    pub fn isotropic(nu: f64) -> Result<Self> {
        Self::new(nu, nu)
    }

    pub fn with_drift(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    /// Itô parameters whose solution is the Stratonovich solution at
    /// viscosity ν: ν₁ = ν, ν₂ = ν + ½ρ(0), hence κ = ν.
    pub fn stratonovich(nu: f64, rho0: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::domain(format!("nu must be positive, got {nu}")));
        }
        Self::new(nu, nu + 0.5 * rho0)
    }

    /// κ = ν₂ − ½ρ(0).
    pub fn kappa(&self, kernel: &CorrelationKernel) -> f64 {
        kappa_of(self.nu2, kernel.rho0())
    }

    /// Fail unless the low-turbulence condition κ > 0 holds.
    pub fn require_low_turbulence(&self, kernel: &CorrelationKernel) -> Result<f64> {
        let kappa = self.kappa(kernel);
        if kappa > 0.0 {
            Ok(kappa)
        } else {
            Err(Error::LowTurbulence { kappa })
        }
    }
}

/// FNV-1a, enough for content hashes in file headers.
struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
    fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x1000_0000_01b3);
        }
    }
    fn finish(&self) -> u64 {
        self.0
    }
}
