//! Numerics core for studying how a sampled, aperture-averaged Radon transform
//! resolves a jump across a rough boundary.
//!
//! The library builds the full pipeline in one place:
//!
//! * convex boundary arcs in normal parametrization ([`geometry`]),
//! * rough edge perturbations driven by a profile `H0` and the two-sided
//!   indicator `chi` ([`profile`]),
//! * the filter/aperture kernel stack: centered cardinal B-splines, their
//!   closed-form Hilbert transforms, the lattice kernel `psi`, its Fourier
//!   coefficients, and the radial convolution kernel `K` ([`spline`],
//!   [`hilbert`], [`kernels`]),
//! * aperture-smoothed sinogram synthesis on the detector lattice
//!   `p_j = p_bar + j*eps`, `alpha_k = alpha_bar + k*kappa*eps` ([`sinogram`]),
//! * filtered backprojection from those samples and the convolution model
//!   it converges to ([`reconstruct`]),
//! * the number-theoretic and exponential-sum diagnostics that decide whether
//!   an evaluation point is generic enough for the error bound to hold
//!   ([`numtheory`], [`expsum`]),
//! * convergence-rate fitting for dyadic refinement sweeps ([`rate`]).
//!
//! Everything here is deterministic: identical inputs produce bit-identical
//! outputs regardless of thread count, because all parallelism lives in the
//! companion crate and only ever maps this crate's pure functions over
//! disjoint output slots.
//!
//! The crate is `no_std`-compatible (with `alloc`): disable the default `std`
//! feature to use it without the standard library; float math then comes from
//! `libm`.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
// Parameter guards are written as `!(x > 0.0)` on purpose: the negation also
// rejects NaN, which the suggested positive comparison would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod expsum;
pub mod geometry;
pub mod hilbert;
pub mod kernels;
pub mod ksum;
pub mod math;
pub mod numtheory;
pub mod profile;
pub mod quad;
pub mod rate;
pub mod reconstruct;
pub mod rng;
pub mod sinogram;
pub mod spline;

pub use expsum::{ExpSumError, ExpSumProbe, PhaseSumCheck};
pub use geometry::{BoundaryCurve, NormalCoords, PointClass};
pub use numtheory::{GenericityReport, NumTheoryError};
pub use rate::{RateError, RateFit};
pub use kernels::{
    ApertureFunction, InterpKernel, KernelConfig, KernelError, KernelTables, RawKernelTables,
};
pub use profile::{JumpField, PerturbationProfile};
pub use reconstruct::{LocalPatch, PatchSpec, ReconstructError};
pub use sinogram::{Phantom, Sinogram, SinogramError, SinogramGrid};

// Re-exports above are filled in module by module; keep `cargo build`
// honest while scaffolding.
