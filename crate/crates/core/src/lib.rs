//! Brox's diffusion in a Brownian potential.
//!
//! The diffusion is built from a sampled potential `W` and a driving Brownian
//! path `B` as `X = S⁻¹ ∘ B ∘ T⁻¹`, where `S(x) = ∫_0^x e^{αW}` is the scale
//! function and `T` the clock `∫ e^{-2αW(X)} ds`. On top of that the crate
//! provides valley decompositions of the potential, local-time estimators,
//! samplers for the Bessel-process limit laws and the distributional tests
//! used to compare the two.

// `!(x > 0.0)` rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod diffusion;
pub mod environment;
pub mod experiments;
pub mod numeric;
pub mod stats;
