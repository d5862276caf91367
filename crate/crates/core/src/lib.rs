//! Numerics for the entanglement of formation and its convex dual.
//!
//! * [`spectra`]: Hermitian linear algebra, states, sampling, JSON I/O.
//! * [`roof`]: pure-state entanglement, the convex-roof search and the
//!   closed-form two-qubit value.
//! * [`duality`]: the conjugate functional `E*`, the function
//!   `g = E* ∘ log` in direct and max-eigenvalue form, duality checks and
//!   additivity gaps.
//! * [`purity`]: `h_p`, maximal output purity `ν_q`, filter channels and
//!   multiplicativity gaps.
//! * [`lab`]: run configuration, campaigns and the CLI.

// `!(x > 0.0)` also rejects NaN; that is intended wherever it appears.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod duality;
pub mod error;
pub mod lab;
pub mod optim;
pub mod purity;
pub mod roof;
pub mod spectra;

pub use error::{Error, Result};
