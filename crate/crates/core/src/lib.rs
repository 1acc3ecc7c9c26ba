//! Shearing-map approximation of area-preserving torus isotopies, SU(2)
//! representation varieties of knot groups and their pillowcase images,
//! and SL(2, Z/p) representation certificates.
//!
//! The crate is organised in four computational modules plus the batch
//! front end:
//!
//! * [`torus_dynamics`]: shearing maps, Fourier decomposition of
//!   divergence-free fields, certified approximation of isotopies by
//!   shearing programs, and the Moser correction.
//! * [`pillowcase`]: the quotient of the torus by the hyperelliptic
//!   involution, winding numbers, separation tests and rendering.
//! * [`knot_reps`]: knot group presentations, numeric SU(2)
//!   representations, image curves and splice representations.
//! * [`cert`]: exact word evaluation in SL(2, Z/p), certificate
//!   verification and search.
//! * [`cli`]: the `torusrep` command line driver.

pub mod cert;
pub mod cli;
pub mod io;
pub mod knot_reps;
pub mod pillowcase;
pub mod torus_dynamics;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
