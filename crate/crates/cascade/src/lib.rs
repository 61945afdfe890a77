//! Contact sub-connections and their partial contact curve reductions,
//! truncated total-derivative and Euler operators with their invariant
//! families, the `Q_k` recursion, the necessary and sufficient conditions
//! for cascade feedback linearization, and numeric reconstruction of
//! trajectories by quadrature.
//!
//! ```
//! use cascade::{build_subconnection, necessity_check, ContactCurveSpec, JetChains};
//! use geomcore::Ctx;
//! use symexpr::nf;
//!
//! // Two chains of order 2 and dε = exp(z1_1 z2_0) dt.
//! let chains = JetChains::from_orders(&[2, 2]).unwrap();
//! let c = build_subconnection(&chains, vec![nf("exp(z1_1*z2_0)").unwrap()], vec![vec![nf("1").unwrap()]], &Ctx::default())
//!     .unwrap();
//! // Freezing chain 1 to the jet of g(t) leaves E_2 = g' exp(g' z2_0).
//! let v = necessity_check(&c, &ContactCurveSpec::new().drop_chain(1, "g"), &Ctx::default()).unwrap();
//! assert!(v.passed());
//! // Freezing chain 2 instead makes E_2 depend on z1_2.
//! let v = necessity_check(&c, &ContactCurveSpec::new().drop_chain(2, "f"), &Ctx::default()).unwrap();
//! assert!(v.to_string().starts_with("FAIL on z1_2"));
//! ```

mod jets;
mod q;
mod reconstruct;
mod subconnection;
mod theorems;

pub use jets::{
    dt_first_integrals, euler_kernel_image, jet_name, sub_fiber_total_derivative, t_independent_invariants,
    truncated_euler, truncated_total_derivative, JetChains, KernelImage,
};
pub use q::{cc_pde_check, eoq_identity_check, eoq_sides, q_sequence, CcPdeReport, EoqSides, QSequence};
pub use reconstruct::{reconstruct_trajectory, FlatCurves, TimeGrid, Trajectory, RICHARDSON_TOL};
pub use subconnection::{
    build_subconnection, group_name, reduce_along_curves, reduced_total_derivative_pushdown, ContactCurveSpec,
    ContactSubConnection, Pushdown,
};
pub use theorems::{
    decomposition_sum, necessity_check, sufficiency_search, sufficiency_verify, NecessityStatus, NecessityVerdict,
    SearchOutcome, SufficiencyVerdict,
};

use symexpr::NormalForm;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CascadeError {
    #[error(transparent)]
    Geom(#[from] geomcore::GeomError),
    #[error(transparent)]
    Goursat(#[from] goursat::GoursatError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("undecided: {0}")]
    Undecided(String),
    #[error("decomposition rejected: {reason}; counterexample {counterexample}")]
    Decomposition { counterexample: NormalForm, reason: String },
    #[error("pole on the trajectory at t = {t}: {detail}")]
    Pole { t: f64, detail: String },
}

impl From<symexpr::SymError> for CascadeError {
    fn from(e: symexpr::SymError) -> Self {
        CascadeError::Geom(e.into())
    }
}
