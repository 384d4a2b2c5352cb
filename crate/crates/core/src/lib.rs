//! Quantum mechanics of a spin-zero particle pinned to a curved surface.
//!
//! The crate builds, at desk scale, everything needed to study a particle
//! confined to a thin layer around a parametrized surface embedded in 3D:
//!
//! - [`dsl`] — a small expression language for surface parametrizations
//!   x(u1,u2), y(u1,u2), z(u1,u2), evaluated together with all partial
//!   derivatives through third order using truncated-Taylor (jet) arithmetic.
//! - [`geometry`] — fundamental forms, mean/Gaussian curvature, the geometric
//!   potential −ħ²/2m (M²−K), the layer metric G_ab(u3), the volume ratio
//!   γ = √G/√g and the Hermitizing counterterm F(G) = −(1/2√G)∂₃√G.
//! - [`operators`] — weighted-Hermitian finite-difference discretizations:
//!   surface Laplace–Beltrami, surface Hamiltonian, electromagnetic surface
//!   Hamiltonian via Peierls link phases, symmetrized geometric momenta, and
//!   the full layer Hamiltonian with hard walls at u3 = ±d/2.
//! - [`spectra`] — dense eigensolves in the correct weighted inner product,
//!   degeneracy clustering, closed-form reference spectra, and Richardson
//!   extrapolation.
//! - [`experiments`] — end-to-end verifications: the surface/normal momentum
//!   cross-term identity, the symmetrized-momentum-squared expansion, the
//!   γ^{-1/2} wavefunction transformation that renders the surface and normal
//!   kinetic blocks separately Hermitian, and the d→0 thin-layer convergence
//!   of layer spectra to the surface Hamiltonian with geometric potential.
//!
//! All quantities use natural units by default (ħ = m = q = 1); every public
//! entry point takes ħ and m explicitly so SI values can be threaded through.

pub mod dsl;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod operators;
pub mod spectra;

pub use error::{Error, Result};
