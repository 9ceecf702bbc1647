//! Balancing and depth reduction for arithmetic circuits over a prime field.
//!
//! Circuits are built with [`circuit::Builder`] or read with [`text::parse`].
//! [`balance::balance_pipeline`] rebuilds one with small, halving products;
//! [`depth::reduce_depth_delta`] turns it into a layered circuit of a given
//! product-depth. [`verify`] has exact and randomized equivalence checks.
//!
//! ```
//! use mlcirc::depth::{reduce_depth_delta, DEFAULT_BUDGET};
//! use mlcirc::field::Field;
//! use mlcirc::generate::{generate, GeneratorSpec};
//! use mlcirc::verify::{random_equiv, EquivVerdict};
//!
//! let c = generate(&GeneratorSpec::random_multilinear(50, 8, 2), Field::default()).unwrap();
//! let (layered, _) = reduce_depth_delta(&c, 2, None, DEFAULT_BUDGET).unwrap();
//! assert_eq!(random_equiv(&c, &layered, 10, 0), EquivVerdict::Equivalent);
//! ```

pub mod circuit;
pub mod error;
pub mod field;
pub mod normalize;
pub mod poly;
pub mod quotient;
pub mod text;
pub mod var;
pub mod balance;
pub mod depth;
pub mod verify;
pub mod generate;
pub mod bench;

// The guide's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/var-and-quotients.md")]
    mod var_and_quotients {}
    #[doc = include_str!("../../../book/src/balancing.md")]
    mod balancing {}
    #[doc = include_str!("../../../book/src/depth-reduction.md")]
    mod depth_reduction {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
