//! Weighted pushdown automata over semirings.
//!
//! Machines are built with [`WpdaBuilder`] or loaded from JSON, converted to
//! bottom-up or top-down normal form with [`transform::normal_form`], and
//! evaluated with the chart algorithms in [`stringsum`] or the fixed-point
//! solver in [`runsum`]. The [`oracle`] module checks all of them by brute
//! force.
//!
//! ```
//! use wpda::{oracle, stringsum, Semiring, SemiringKind};
//!
//! let p = oracle::p1(Semiring::new(SemiringKind::Real));
//! let y = p.encode("aabb").unwrap();
//! let w = stringsum::stringsum(&p, &y, stringsum::Algorithm::BuFast).unwrap();
//! assert_eq!(w, 0.0625);
//! ```

pub mod automaton;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod runsum;
pub mod semiring;
pub mod stringsum;
pub mod transform;

pub use automaton::{Configuration, InputId, Run, StateId, SubclassReport, SymbolId, Transition, Wpda, WpdaBuilder};
pub use error::{Error, Result};
pub use semiring::{Semiring, SemiringKind};
