//! Integral operators on normalized analytic functions of the unit disk.
//!
//! The crate implements the Bernardi–Libera–Livingston operator `L_c` and the
//! Jung–Kim–Srivastava operator `I^σ` (both as exact coefficient multipliers
//! and as quadratures of their defining integrals), certifies membership in
//! the starlike, convex, close-to-convex, quasi-convex, strongly starlike and
//! strongly convex classes and their operator-lifted variants on sampled disk
//! grids, and runs seeded experiments that check the inclusion relations
//! between those classes.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`series`] | truncated complex power series |
//! | [`functions`] | evaluation of `f`, `f'`, `f''` and builtin extremal functions |
//! | [`operators`] | `L_c`, `I^σ`, quadrature cross-check, identity suite |
//! | [`classifiers`] | grid certification with margins and witnesses |
//! | [`harness`] | theorem catalog and generate–check–refine runs |
//! | [`cli`] | command-line front end |

pub mod classifiers;
pub mod cli;
pub mod error;
pub mod functions;
pub mod harness;
pub mod operators;
pub mod params;
pub mod series;

pub use error::{Error, Result};

/// Double-precision complex number used throughout.
pub type Complex = num_complex::Complex64;
