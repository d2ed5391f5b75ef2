//! Exact-arithmetic engine for chain-level free-loop-space models.
//!
//! The crate is organized around a degree-truncated minimal multiplicative
//! resolution of a graded-commutative algebra: words in bigraded generators,
//! Koszul-signed derivations, a cup-one table with the Hirsch expansion
//! formulas, the reduced bar construction, the Hochschild complex and its
//! small model, and a growth driver that certifies unbounded generalized
//! Betti numbers by exhibiting grids of independent product classes.
//!
//! All arithmetic is exact: arbitrary-precision integers, Smith normal form
//! over Z, and modular or rational reductions derived from the integral data.

pub mod linalg;
pub mod algebra;
pub mod presentation;
pub mod resolution;
pub mod complexes;
pub mod bar;
pub mod hochschild;
pub mod growth;

pub use linalg::{CoefficientRing, HomologyGroup, IntMatrix, PoincareSeries};
pub use algebra::{Element, Monomial, GeneratorDecl, Derivation, Cup1Table, ModuleTag};
pub use presentation::AlgebraPresentation;
pub use resolution::HirschResolution;
