//! Exact combinatorial Hopf algebras built from collapsing finite sets.
//!
//! The crate provides
//!
//! * [`nested`] — hereditary finite sets, partitions, quotients (collapsing),
//!   reversion maps and induced quotients;
//! * [`hopf`] — exact linear combinations, the coalgebra/bialgebra traits,
//!   iterated reduced coproducts, antipodes and law verifiers;
//! * [`set_coalgebra`] — the coproduct on families of collapsed states;
//! * [`forest`] — forests, factorisations, the join semilattice and the
//!   incidence Hopf algebra of quotient pairs;
//! * [`matrix`] — zero-diagonal matrices, collapsing, the matrix coproduct,
//!   permutation classes and the block-diagonal product;
//! * [`star`] — symbolic star products of monomials, Wick expansion,
//!   admissible degree sequences, expectations and star-product quotients.
//!
//! All arithmetic is exact (arbitrary-precision rationals).

pub mod error;
pub mod forest;
pub mod hopf;
pub mod matrix;
pub mod nested;
pub mod set_coalgebra;
pub mod star;
pub mod verify;

pub use error::{HopfError, Result};
