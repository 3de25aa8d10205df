//! Desk-scale machinery for hidden variables via genericity: finite partial
//! orders and their regular algebras, boolean expressions and boolean-valued
//! evaluation, generic-filter construction, semifilter logic on systems of
//! (possibly noncommuting) projections, Born-statistics simulation, and a
//! forcing-names engine with an exhaustively verified truth lemma.
//!
//! ```
//! use genlab::boolalg::regular_algebra;
//! use genlab::order::FinitePoset;
//!
//! // two incompatible conditions under a top
//! let poset = FinitePoset::from_named_pairs(
//!     vec!["a", "b", "1"],
//!     &[("a", "1"), ("b", "1")],
//! )?;
//! assert!(poset.is_separative());
//!
//! // its regular algebra has one atom per minimal element
//! let reg = regular_algebra(&poset);
//! assert_eq!(reg.atoms(), 2);
//! let a = poset.element("a")?;
//! assert_eq!(reg.embed(a).count(), 1);
//! # Ok::<(), genlab::order::OrderError>(())
//! ```

pub mod bitset;
pub mod boolalg;
pub mod expr;
pub mod fixtures;
pub mod forcing;
pub mod generic;
pub mod order;
pub mod psys;
pub mod quantum;

pub use bitset::BitSet;
