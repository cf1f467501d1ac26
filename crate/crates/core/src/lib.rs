//! Exact density-operator simulation of quantum teleportation through two
//! competing channel models: the entangled singlet pair and a disentangled
//! product mixture along a shared quantization axis, with ensemble averaging
//! over the axis azimuth.
//!
//! Angle convention: the polar parameter θ enters the single-photon blocks
//! directly as cos²θ / sin²θ, so it is half the usual Bloch polar angle
//! (θ = π/4 is the equator).

pub mod bell;
pub mod channel;
pub mod ensemble;
pub mod opalg;
pub mod states;
pub mod teleport;

pub use opalg::{Operator, C64};
