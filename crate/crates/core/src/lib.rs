//! Deterministic models for swarm-UAV flight and communication.
//!
//! The crate is split by subsystem:
//!
//! - [`dynamics`]: quadrotor rigid-body model, rotor thrust and PID control.
//! - [`wind`]: Dryden / Von Kármán turbulence spectra, synthesis, shear and drag.
//! - [`swarm_opt`]: particle swarm, wolf pack and grey wolf optimizers.
//! - [`formation`]: leader-follower target rules and the movement controller.
//! - [`channel`]: Friis / two-ray path loss, QPSK and fading channels, BER.
//! - [`linkbudget`]: link-budget ledger with a printed-value mode and an
//!   honest-sum mode, plus BER against distance.
//! - [`network`]: swarm topologies, routing vs flooding, Dijkstra, A* and
//!   artificial potential fields.
//!
//! Every stochastic routine takes an explicit seed; identical inputs give
//! bit-identical outputs. The guide under `book/` walks through each model,
//! and its code listings are compiled as doc-tests of this crate.

// `!(x > 0.0)` is used on purpose: unlike `x <= 0.0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod dynamics;
mod error;
pub mod formation;
pub mod linkbudget;
pub mod network;
pub mod rng;
pub mod swarm_opt;
pub mod wind;

pub use error::{Error, Result};

/// Three-component vector used for positions, velocities and angles.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Wraps an angle to `(-π, π]`.
pub fn normalize_angle(angle: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

// Book chapters are checked as doc-tests so the guide never drifts from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/wind.md")]
    mod wind {}
    #[doc = include_str!("../../../book/src/optimizers.md")]
    mod optimizers {}
    #[doc = include_str!("../../../book/src/formation.md")]
    mod formation {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/link_budget.md")]
    mod link_budget {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
}
