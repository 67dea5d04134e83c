//! Hankel determinants of the singularly perturbed Laguerre weight
//! `x^alpha exp(-x - t/x)`, the Painleve III system governing their double
//! scaling limit, series expansions of the limiting potential, the
//! Coulomb-fluid approximation and the large-n behaviour of the orthogonal
//! polynomials at the origin.
//!
//! Every quantity is computed in extended precision through [`Real`] and a
//! [`PrecisionCtx`] passed explicitly to each operation.

pub mod asymptotics;
pub mod cli;
pub mod coulomb_fluid;
pub mod error;
pub mod hankel;
pub mod painleve;
pub mod precision;
pub mod quadrature;
pub mod reference;
pub mod series;
pub mod special_functions;
pub mod verify;

pub use error::{Error, Result};
pub use precision::{PrecisionCtx, Real};
