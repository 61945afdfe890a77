//! Charts, vector fields, differential forms, brackets, annihilators and
//! exact linear algebra over the field of symbolic expressions.
//!
//! ```
//! use geomcore::{Chart, Ctx, OneForm, PfaffianSystem, VectorField};
//!
//! let chart = Chart::control("t", &["x"], &["u"]).unwrap();
//! let ctx = Ctx::default();
//! let omega = PfaffianSystem::new(&chart, &[OneForm::parse(&chart, "dx - u*dt").unwrap()], &ctx).unwrap();
//! let v = omega.annihilator();
//! assert_eq!(v.rank(), 2);
//! assert!(v.contains(&VectorField::parse(&chart, "D_t + u*D_x").unwrap()));
//! ```

mod chart;
mod control;
mod distribution;
mod error;
mod field;
pub mod linalg;

pub use chart::{Chart, Coord, Role};
pub use control::{
    brunovsky_matrices, kalman_controllable, kalman_matrix, kalman_rank, rat_matrix, ControlSystem, RatMatrix,
};
pub use distribution::{Distribution, PfaffianSystem};
pub use error::GeomError;
pub use field::{OneForm, TwoForm, VectorField};
pub use linalg::{generic_rank, Ctx, Matrix, RankReport, Rref};
