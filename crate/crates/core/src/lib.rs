//! Classical simulation of bipartite quantum measurement scenarios using
//! shared randomness and counted classical communication.
//!
//! The pipeline: decompose the measurement operator into products
//! ([`bipartite`]), bound its diamond norm ([`norms`]), reduce the
//! acceptance probability to an inner product of locally computable vectors
//! ([`reduction`]), estimate that inner product with shared random
//! hyperplanes ([`estimator`]), and run the whole thing as a
//! simultaneous-message protocol with exact bit accounting ([`harness`]).
//! Measurement games with many outcomes build on the same machinery
//! ([`games`]), and everything is validated against direct quantum
//! evaluation ([`oracle`]).

pub mod bipartite;
pub mod error;
pub mod estimator;
pub mod games;
pub mod harness;
pub mod jsonio;
pub mod matcore;
pub mod norms;
pub mod oracle;
pub mod reduction;
pub mod sampling;

pub use error::{Error, Result};
pub use matcore::{c64, ComplexMatrix, SchmidtState, C64};
