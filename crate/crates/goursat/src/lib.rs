//! Goursat bundle recognition, Weber structures and resolvent bundles,
//! fundamental bundles, contact coordinates and the extended static
//! feedback linearizability (ESFL) decision.
//!
//! ```
//! use geomcore::{ControlSystem, Ctx};
//! use goursat::{esfl_conditions, procedure_contact, FirstIntegralOracle};
//!
//! // x1' = x2, x2' = u is already a Brunovsky chain of order 2.
//! let s = ControlSystem::parse(&[("x1", "x2"), ("x2", "u")], &["u"]).unwrap();
//! let v = s.distribution(&Ctx::default());
//! let (verdict, esfl) = esfl_conditions(&v).unwrap();
//! assert_eq!(verdict.signature().unwrap().to_string(), "<0,1>");
//! assert!(esfl.esfl);
//! let c = procedure_contact(&v, &FirstIntegralOracle::new()).unwrap();
//! assert_eq!(c.x.to_string(), "t");
//! assert_eq!(c.coord(1, 0).to_string(), "x1");
//! ```

mod bundle;
mod contact;
mod signature;
mod weber;

pub use bundle::{
    esfl_conditions, esfl_conditions_for, is_goursat_bundle, is_relative_goursat_bundle, Condition, EsflVerdict,
    GoursatVerdict, Status,
};
pub use contact::{
    fundamental_bundle, fundamental_bundle_from, normalized_section, order_tag, procedure_contact,
    verify_contact_coordinates, Chain, ContactCheck, ContactCoordinates, FirstIntegralOracle, FundamentalBundle,
    Procedure,
};
pub use signature::{signature_from_rdt, GoursatSignature, ParseSignatureError, SignatureMismatch};
pub use weber::{
    polar_matrix, polar_matrix_in_frame, quotient_representatives, resolvent_bundle, weber_structure, WeberError,
    WeberStructure,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GoursatError {
    #[error(transparent)]
    Flag(#[from] flags::FlagError),
    #[error(transparent)]
    Geom(#[from] geomcore::GeomError),
    #[error(transparent)]
    Weber(#[from] WeberError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("not a Goursat bundle: {0}")]
    NotGoursat(String),
    #[error(
        "need {needed} first integral(s) for `{tag}`, found {found}; supply `integrals {tag} = ...` annihilated by {generators:?}"
    )]
    MissingIntegrals {
        tag: String,
        needed: usize,
        found: usize,
        generators: Vec<String>,
    },
    #[error("candidate `{candidate}` for `{tag}` rejected: {reason}")]
    RejectedCandidate {
        tag: String,
        candidate: String,
        reason: String,
    },
    #[error("no normalized section: {0}")]
    NoSection(String),
    #[error("structural failure: {0}")]
    Structure(String),
    #[error("contact coordinates failed verification: {0}")]
    Verification(String),
}

impl From<symexpr::SymError> for GoursatError {
    fn from(e: symexpr::SymError) -> Self {
        GoursatError::Geom(e.into())
    }
}
