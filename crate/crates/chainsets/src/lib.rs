//! Numerical computation of chain control sets and strong chain control sets
//! of control-affine systems.
//!
//! The pipeline: an affine system on ℝⁿ is lifted to a bilinear system on
//! ℝⁿ⁺¹, projected to the Poincaré sphere 𝕊ⁿ, and analyzed with a
//! set-oriented symbolic image — a box covering of the domain, a
//! sampled-control transition graph over the boxes, and strongly connected
//! components as approximations of chain control sets. Strong chain control
//! sets are approximated by shrinking state-dependent jump radii along a
//! ladder and intersecting the surviving components.

pub mod compactification;
pub mod engine;
pub mod scenarios;
pub mod systems;
