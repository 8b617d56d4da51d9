//! Counter-adversarial inference against a cognitive radar.
//!
//! The crate models a two-sided engagement: an adversary radar tracks "our"
//! kinematic state with a Kalman filter and acts on its estimate, while we
//! observe those actions and run the estimation stack in reverse. Three layers
//! are provided:
//!
//! - **Inverse tracking** ([`tracker`], [`inverse_tracker`]): the adversary's
//!   forward Kalman filter, our inverse Kalman filter over its estimate, and a
//!   particle approximation of the general inverse Bayesian filter.
//! - **Identification** ([`identification`]): innovations log-likelihoods of
//!   the adversary's sensor gain (classic and inverse), MLE, sensitivity of
//!   the likelihood curvature to the noise covariances, and Monte Carlo
//!   Cramér–Rao bounds.
//! - **Cognition tests and interference** ([`revealed`], [`interference`]):
//!   revealed-preference tests for constrained utility maximization (linear
//!   and SINR budgets, Afriat feasibility, GARP), and chance-constrained
//!   design of clutter-channel interference against an SCNR-maximizing
//!   waveform optimizer.
//!
//! All stochastic operations are keyed by `(seed, domain, id, step)` RNG
//! substreams ([`rng`]), so results are reproducible bit-for-bit regardless of
//! how work is scheduled across threads. The `parallel` feature (default)
//! enables rayon data-parallel inner loops; disabling it selects a sequential
//! fallback with identical outputs.

pub mod error;
pub mod identification;
pub mod interference;
pub mod inverse_tracker;
pub mod linalg;
pub mod parallel;
pub mod revealed;
pub mod rng;
pub mod statespace;
pub mod tracker;

pub use error::{Error, Result};
