//! Convex elements in twisted Weyl groups and their finite-field verification.
//!
//! The crate is organized bottom-up:
//!
//! - [`root`]: exact integer root systems (construction, root arithmetic,
//!   Cartan pairing);
//! - [`twisted`]: twisted Weyl group elements `x = wσ`, ellipticity, and
//!   conjugacy classes of the coset `Wσ`;
//! - [`convexity`]: inversion sets `Δ_x`, the sign-change counts `n_x`,
//!   quasi-convexity/convexity certificates, and standard-convex search;
//! - [`gf`]: exact finite fields `𝔽_{q^m}` with `q^m ≤ 64`;
//! - [`ha`]: the spaces `H_A` over a finite field, unipotent operators
//!   `Ad_β(c)`, the twisted Frobenius, the triangular solver for `V(φ,x,z)`,
//!   the Steinberg linear map and its inverse, and Lang-orbit identities;
//! - [`group`]: truncated matrix models of `SL_n` with a twisted Frobenius,
//!   Lang maps, and exhaustive point-set enumeration;
//! - [`affine`]: affine roots, jumps, Frobenius orbits, sign-change
//!   sequences, and Howe-datum bookkeeping;
//! - [`report`]: the batch scan/verify front end behind the CLI.

pub mod affine;
pub mod convexity;
pub mod error;
pub mod gf;
pub mod group;
pub mod ha;
pub mod report;
pub mod root;
pub mod twisted;

pub use error::{Error, Result};
