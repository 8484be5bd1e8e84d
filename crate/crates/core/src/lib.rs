//! Simulation core for hybrid Gold/Walsh spreading in multi-cell downlink NOMA
//! with a deep Q-learning controller.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs and an explicit, seeded random generator; file IO,
//! configuration parsing and the command line live in the companion `seqnoma`
//! crate.
//!
//! Module map:
//!
//! * [`seqlib`]: m-sequence, Gold, Walsh-Hadamard, small Kasami and hybrid
//!   codes, periodic correlation (direct and FFT) and PAPR.
//! * [`phy`]: path loss plus Rayleigh channel, SIC rates, interference and RSRP.
//! * [`netsim`]: hexagonal grid, random-waypoint mobility, A3 handover state
//!   machine and the network-level tick.
//! * [`rlenv`]: the episodic environment wrapped around the network.
//! * [`dqn`]: value network, prioritized replay, training loop, convergence
//!   phase detection and checkpoints.
//! * [`experiments`]: policies, baselines, ablations and velocity sweeps.
//! * [`stats`]: ANOVA, effect sizes and confidence intervals.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod config;
pub mod dqn;
pub mod experiments;
mod fft;
pub mod math;
pub mod netsim;
pub mod phy;
pub mod rlenv;
pub mod rng;
pub mod seqlib;
pub mod stats;

pub use config::ScenarioConfig;
