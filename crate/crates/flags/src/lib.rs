//! Derived flags, Cauchy characteristic bundles, the refined derived type
//! and the velocity / acceleration / deceleration invariants.
//!
//! ```
//! use flags::{analyze, RefinedDerivedType};
//! use geomcore::{ControlSystem, Ctx};
//!
//! // x1' = x2, x2' = u: a single chain, flag ranks 2, 3, 4.
//! let s = ControlSystem::parse(&[("x1", "x2"), ("x2", "u")], &["u"]).unwrap();
//! let a = analyze(&s.distribution(&Ctx::default())).unwrap();
//! assert_eq!(a.rdt, "[[2,0],[3,1,1],[4,4]]".parse::<RefinedDerivedType>().unwrap());
//! ```

mod flag;
mod invariants;
mod pfaff;
mod rdt;

pub use flag::{analyze, cauchy_characteristics, derived_flag, DerivedFlag, FlagAnalysis};
pub use invariants::{acceleration, deceleration, velocity};
pub use pfaff::pfaffian_derived_flag;
pub use rdt::RefinedDerivedType;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlagError {
    #[error(transparent)]
    Geom(#[from] geomcore::GeomError),
    #[error("the distribution is empty")]
    Empty,
    #[error("undecided: {0}")]
    Undecided(String),
    #[error("derived flag did not stabilize within {0} steps")]
    Truncated(usize),
}
