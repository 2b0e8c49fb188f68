//! Stochastic-simulation toolkit for the passive-scalar Kraichnan model
//!
//! The scalar θ(t, x, y) is transported by a shear velocity field that is
//! white in time and correlated in space with correlation kernel ρ. The
//! toolkit evaluates the Itô/Walsh and Stratonovich solutions through their
//! Feynman–Kac path representations, cross-checks them against a Fourier-mode
//! (parabolic Anderson) solver, runs the Wong–Zakai mollified approximation
//! to exhibit the ν₂ → ν₂ + ½ρ(0) drift, and measures macroscopic
//! (Barlow–Taylor) fractal dimensions of dissipation-time sets.
//!
//! Modules mirror the pipeline:
//!
//! * [`kernels`] — correlation kernels ρ, the heat kernel, derived constants.
//! * [`noise`] — grid realizations of the cylindrical Brownian motion
//!   W(t,x) = ∫₀ᵗ V(s,x) ds, mollified fields, Walsh-isometry checks.
//! * [`paths`] — Brownian motions and bridges at declared speeds.
//! * [`curvilinear`] — the integral ∫₀ᵗ V(s, x+X_{t−s}) ds by exact
//!   conditional-Gaussian sampling and by grid Riemann sums.
//! * [`solver_fk`] — Feynman–Kac Monte Carlo for θ and the fundamental
//!   field Γ^{(ν)}.
//! * [`solver_spectral`] — per-frequency parabolic Anderson evolution and
//!   Fourier inversion.
//! * [`solver_wz`] — Wong–Zakai mollified solves and convergence studies.
//! * [`fractal`] — unit-box counting and dimension estimation of time sets.
//! * [`nu_limits`] — the ν → 0 programme for function and point-mass data.
//! * [`acceptance`] — the end-to-end verification suite used by `self-test`.
//!
//! All Monte Carlo loops draw per-sample seeds from a named derivation path
//! (see [`rng`]) and aggregate with pairwise tree reductions, so results are
//! bit-identical across thread counts. The `parallel` feature (default)
//! distributes sample loops over rayon; without it everything runs
//! sequentially with the same output.

// `!(x > 0.0)` guards reject NaN as well as nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod curvilinear;
pub mod error;
pub mod exec;
pub mod fractal;
pub mod kernels;
pub mod linalg;
pub mod noise;
pub mod nu_limits;
pub mod paths;
pub mod quad;
pub mod rng;
pub mod solver_fk;
pub mod solver_spectral;
pub mod solver_wz;
pub mod stats;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
