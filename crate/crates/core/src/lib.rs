//! Exact simulation and weak-convergence diagnostics for Kac-Stroock
//! processes driven by renewal processes.
//!
//! Layout follows the pipeline: [`distributions`] supplies inter-arrival
//! laws, [`renewal`] materializes paths, [`kac_stroock`] evaluates `X_n` and
//! its decomposition exactly, [`donsker`] exposes the random-walk
//! reduction, [`stats`] turns replicates into diagnostics, and [`harness`]
//! drives seeded experiments and the CLI.

pub mod distributions;
pub mod donsker;
pub mod error;
pub mod harness;
pub mod kac_stroock;
pub mod renewal;
pub mod rng;
pub mod stats;

pub use distributions::{InterArrivalLaw, LawKind, MomentCertificate, PthMoment};
pub use error::{Error, Result};
pub use kac_stroock::{KacProcessParams, PathEvaluation};
pub use renewal::RenewalPath;
pub use rng::RngStream;
