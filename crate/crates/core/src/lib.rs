//! Secrecy-rate maximization for RIS-aided integrated sensing and
//! communication (ISAC) systems under colluding active and passive
//! eavesdroppers.
//!
//! The crate is organized bottom-up:
//!
//! - [`channel`]: scenario geometry, steering vectors, path loss and the
//!   Rician/Rayleigh channel realizations.
//! - [`metrics`]: user/eavesdropper SINRs and rates, echo SCNR and the
//!   system secrecy rate.
//! - [`surrogate`]: the log-ratio variational transform with its closed-form
//!   auxiliary variables, and the first-order minorizers used by the
//!   successive convex approximation steps.
//! - [`solvers`]: the receive beamformer (generalized Rayleigh quotient),
//!   the transmit-beamformer and reflection subproblems, and their
//!   projections.
//! - [`jbrd`]: the alternating joint beamforming and reflection design loop
//!   plus the benchmark schemes.
//! - [`harness`]: experiment configuration, Monte-Carlo sweeps and CSV output.

pub mod channel;
pub mod error;
pub mod harness;
pub mod jbrd;
pub mod linalg;
pub mod metrics;
pub mod solvers;
pub mod surrogate;

pub use error::{Error, Result};
pub use num_complex::Complex64;
