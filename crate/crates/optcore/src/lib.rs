//! Architectural simulator and functional model of a near-sensor photonic
//! neuro-symbolic accelerator.
//!
//! The device under study pairs an optical core (microring-resonator weight
//! banks doing wavelength-multiplexed dot products) with a hyperdimensional
//! encoder, so a camera-side chip can run a quantized CNN backbone and ship
//! a compact hypervector to the cloud instead of a raw image. This crate
//! models that machine at two levels:
//!
//! - functional: integer-exact MAC arithmetic through the flash-quantizer /
//!   laser / microring / photodetector path ([`photonics`]), and the random
//!   projection encoder built on it ([`hdc`]);
//! - architectural: layer placement on the 96-bank array ([`mapper`]), event
//!   tallies under the two weight-tuning disciplines ([`scheduler`]), and a
//!   linear energy/latency model with a fitted default calibration
//!   ([`cost`]), plus the uplink cost model ([`link`]).
//!
//! Start with [`model::resnet18_preset`] for the reference workload, or the
//! `optcore` binary (`simulate`, `map`, `sweep`, `verify`, `transfer`,
//! `calibrate`) for file-in/file-out use. Each major capability also has a
//! runnable example under `examples/`.

pub mod cli;
pub mod cost;
pub mod error;
pub mod hdc;
pub mod link;
pub mod mapper;
pub mod model;
pub mod photonics;
pub mod scheduler;

pub use error::{Error, Result};
