//! Two-weight norm inequalities `L^p(σ) → L^q(ω)`, `0 < q < 1 ≤ p`, for
//! positive dyadic operators on finite trees.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod characterize;
pub mod counterexamples;
pub mod error;
pub mod io;
pub mod lp;
pub mod operator;
pub mod optim;
pub mod random;
pub mod suite;
pub mod tree;
pub mod wolff;

pub use error::{Error, Result};
pub use tree::{DyadicTree, Exponents, Instance, Side};
