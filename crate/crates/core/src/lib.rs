//! Computational workbench for the space of marked finitely generated groups.
//!
//! A marked group `(G, X)` of rank `n` is represented by a word-problem oracle for the
//! kernel of `F_n -> G`. On top of that the crate computes rooted labeled Cayley balls,
//! the `r`-local isomorphism relation, small-cancellation word problems, explicit
//! Cantor families of marked groups, and finite-scale certificates for and against
//! `C`-quasi-isometry.

pub mod cayley;
pub mod cli;
pub mod families;
pub mod golden;
pub mod oracles;
pub mod qiwitness;
pub mod words;

pub use oracles::{Decision, GroupOracle};
pub use words::{Letter, Word};
