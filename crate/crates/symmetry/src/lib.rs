//! Infinitesimal symmetries of Pfaffian control systems: symmetry and
//! strong-transversality tests, control admissibility, quotient systems
//! built from user-supplied invariants and cross-sections, and the
//! relative Goursat decision for ESFL quotients.
//!
//! ```
//! use geomcore::{ControlSystem, Ctx};
//! use symmetry::{is_strongly_transverse, quotient_construct, QuotientData, SymmetryAlgebra};
//!
//! // x1' = x2, x2' = u, x3' = u: the shift D_x1 is a symmetry.
//! let s = ControlSystem::parse(&[("x1", "x2"), ("x2", "u"), ("x3", "u")], &["u"]).unwrap();
//! let p = s.pfaffian(&Ctx::default());
//! let gamma = SymmetryAlgebra::parse(s.chart(), &["D_x1"]).unwrap();
//! assert!(is_strongly_transverse(&gamma, &p).unwrap());
//! let data = QuotientData::parse(
//!     s.chart(),
//!     &[("t", "t"), ("y1", "x2"), ("y2", "x3"), ("v", "u")],
//!     &[("x1", "0"), ("x2", "y1"), ("x3", "y2"), ("u", "v")],
//! )
//! .unwrap();
//! let q = quotient_construct(&p, &gamma, &data).unwrap();
//! assert_eq!(q.system.rank(), 2);
//! assert_eq!(q.control_system().unwrap().rhs()[1].to_string(), "v");
//! ```

mod algebra;
mod quotient;
mod relative;

pub use algebra::{
    is_control_admissible, is_infinitesimal_symmetry, is_strongly_transverse, Admissibility, StructureConstants,
    SymmetryAlgebra,
};
pub use quotient::{control_system_of, quotient_construct, quotient_verify, Quotient, QuotientCheck, QuotientData};
pub use relative::{relative_goursat_check, QuotientOutcome, RelativeVerdict};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymmetryError {
    #[error(transparent)]
    Geom(#[from] geomcore::GeomError),
    #[error(transparent)]
    Goursat(#[from] goursat::GoursatError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("undecided: {0}")]
    Undecided(String),
    #[error("not closed under brackets: {0}")]
    NotClosed(String),
    #[error("invalid invariants: {0}")]
    Invariant(String),
    #[error("invalid cross-section: {0}")]
    CrossSection(String),
    #[error("quotient rejected: {0}")]
    Verification(String),
}

impl From<symexpr::SymError> for SymmetryError {
    fn from(e: symexpr::SymError) -> Self {
        SymmetryError::Geom(e.into())
    }
}

impl From<flags::FlagError> for SymmetryError {
    fn from(e: flags::FlagError) -> Self {
        SymmetryError::Goursat(e.into())
    }
}
