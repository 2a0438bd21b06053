//! Simulator and compiler toolkit for the parametric XY entangling-gate
//! family on flux-tunable transmons.
//!
//! The crate is organized around the workflow of bringing up and using an
//! XY(β, θ) gate set:
//!
//! - [`qcore`] — dense gate algebra over small qudit spaces;
//! - [`frames`] — abstract rotating-frame bookkeeping and the frame-tracking
//!   Ramsey experiment;
//! - [`pulsesim`] — time-domain simulation of the flux-modulated two-transmon
//!   system (sidebands, dynamical phase, chevrons, realized gate angles);
//! - [`decomp`] — the composite-pulse compiler: any XY(β, θ) from two
//!   calibrated half-pulses plus frame updates, and the qutrit CPHASE /
//!   CCPHASE constructions;
//! - [`calib`] — simulated phase-calibration procedures;
//! - [`bench`] — noise channels, two-qubit Cliffords, interleaved randomized
//!   benchmarking and coherence-limited fidelities;
//! - [`qaoa`] — MaxCut QAOA construction, routing to a line with CZ-only or
//!   CZ+XY gate sets, and landscape evaluation.

pub mod error;
pub mod linalg;
pub mod rng;
pub mod special;

pub mod fit;
pub mod qcore;

pub mod frames;
pub mod pulsesim;

pub mod bench;
pub mod calib;
pub mod decomp;
pub mod qaoa;

pub use error::XyError;
