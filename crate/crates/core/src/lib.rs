//! Exact-arithmetic engine for lambda-bracket calculus on differential
//! polynomial superalgebras and the homological machinery built on top of it:
//! Lie conformal algebras, Poisson vertex algebras, universal enveloping
//! vertex algebras on PBW bases, conformal cochain complexes and their
//! cohomology, spectral sequences of filtered complexes, and the
//! Lenard-Magri integrability scheme.
//!
//! All coefficients are arbitrary-precision rationals, optionally extended by
//! central polynomial symbols (such as a symbolic central charge), so every
//! result is exact. There is no floating point anywhere in the engine.

pub mod error;
pub mod scalar;
pub mod table;
pub mod diffpoly;
pub mod lambda;
pub mod parse;
pub mod diffalg;
pub mod lca;
pub mod algfile;
pub mod pva;
pub mod linalg;
pub mod specseq;
pub mod graphs;
pub mod va;
pub mod cohomology;
pub mod wick;
pub mod lenard;
pub mod jobs;

pub use error::{Error, Result};
pub use scalar::Q;
pub use table::{GenTable, Parity};
pub use diffpoly::{DiffMonomial, DiffPoly, DiffVar};
pub use lambda::LambdaPoly;

/// Engine version embedded in machine-readable reports.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
