//! Quotients of quadratic duals of preprojective algebras of trees.
//!
//! For a tree `T` on `1..=n` and a set `S` of its leaves, [`algebra::Algebra`]
//! builds the algebra `A = A_{T,S}` from the doubled quiver of `T`. On top of
//! it the crate computes:
//!
//! * projective and injective modules with their radical layers and socles
//!   ([`module`]),
//! * the split Grothendieck data of the 2-category of projective functors on
//!   `A`-mod: composition multiplicities, cells, and the matrices of the cell
//!   2-representations ([`twocat`]),
//! * the normal form of nonnegative idempotent matrices ([`flor`]),
//! * an exhaustive bounded search for matrix-level solutions of the axioms of
//!   a transitive 2-representation, with checkers for the structural facts
//!   that single out the cell 2-representations ([`search`]).
//!
//! ```
//! use qdpa::{algebra::Algebra, tree};
//!
//! let inst = tree::parse_tree_spec("vertices 2\nedge 1 2\nspecial 2\n").unwrap();
//! let alg = Algebra::build(&tree::validate(inst).unwrap());
//! assert_eq!(alg.dim(), 5);
//! assert_eq!(alg.cartan_matrix().to_rows(), vec![vec![2, 1], vec![1, 1]]);
//! ```

pub mod algebra;
pub mod fixtures;
pub mod flor;
pub mod linalg;
pub mod module;
pub mod search;
pub mod selftest;
pub mod tree;
pub mod twocat;

/// The guide in `book/src`, compiled here so that its snippets run as doctests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/trees.md")]
    pub mod trees {}
    #[doc = include_str!("../../../book/src/algebra.md")]
    pub mod algebra {}
    #[doc = include_str!("../../../book/src/modules.md")]
    pub mod modules {}
    #[doc = include_str!("../../../book/src/two_category.md")]
    pub mod two_category {}
    #[doc = include_str!("../../../book/src/flor.md")]
    pub mod flor {}
    #[doc = include_str!("../../../book/src/search.md")]
    pub mod search {}
}
