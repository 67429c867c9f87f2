//! Decorated-trace semantics of conditional transition systems, computed both by
//! direct reachability and by least-fixpoint iteration in a Kleisli category,
//! together with executable checks of the underlying categorical constructions.

pub mod bits;
pub mod cli;
pub mod cts;
pub mod dlaw;
pub mod kleisli;
pub mod error;
pub mod monad;
pub mod order;
pub mod report;
pub mod suites;
pub mod transport;

pub use error::{Error, Result};
