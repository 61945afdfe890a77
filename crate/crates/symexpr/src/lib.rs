//! Exact symbolic expressions for differential-geometric computations.
//!
//! Expressions are parsed into an [`Expr`] tree and normalized into a
//! [`NormalForm`]: a reduced rational function whose indeterminates are
//! kernels (variables, opaque functions of `t`, and elementary functions of
//! normalized arguments). Rational identities are decided exactly;
//! identities between transcendental kernels are decided by seeded numeric
//! probes and reported as [`Equality::ProbablyEqual`].
//!
//! ```
//! use symexpr::{Expr, Equality, ProbeConfig};
//!
//! let e = Expr::parse("(x^2 - 1)/(x - 1)").unwrap();
//! assert_eq!(e.normalize().unwrap().to_string(), "x + 1");
//! let d = Expr::parse("sin(x)*x").unwrap().diff("x").unwrap();
//! assert_eq!(d.to_string(), "x*cos(x) + sin(x)");
//! let v = symexpr::equals(
//!     &Expr::parse("sin(x)^2 + cos(x)^2").unwrap(),
//!     &Expr::parse("1").unwrap(),
//!     &ProbeConfig::default(),
//! ).unwrap();
//! assert_eq!(v, Equality::ProbablyEqual);
//! ```

mod error;
mod expr;
mod kernel;
mod parse;
mod poly;
pub mod probe;
mod rf;

pub use error::{EvalError, SymError};
pub use expr::{nf, Expr, Node};
pub use kernel::{natural_cmp, Func, Kernel, KernelData};
pub use poly::{Monomial, Poly};
pub use probe::{Equality, ProbeConfig};
pub use rf::{NormalForm, Point};

/// Parse an expression.
pub fn parse(src: &str) -> Result<Expr, SymError> {
    Expr::parse(src)
}

/// Normalize an expression tree.
pub fn normalize(e: &Expr) -> Result<Expr, SymError> {
    e.normalize()
}

/// Partial derivative, returned normalized.
pub fn diff(e: &Expr, var: &str) -> Result<Expr, SymError> {
    e.diff(var)
}

/// Three-valued equality: exact first, then seeded probes when
/// transcendental kernels are involved.
pub fn equals(a: &Expr, b: &Expr, cfg: &ProbeConfig) -> Result<Equality, SymError> {
    Ok(probe::equals(&a.to_nf()?, &b.to_nf()?, cfg))
}

/// Floating-point evaluation.
pub fn eval(e: &Expr, pt: &Point) -> Result<f64, EvalError> {
    e.eval(pt)
}

/// Structural dependence after normalization.
pub fn depends_on(e: &Expr, var: &str) -> Result<bool, SymError> {
    e.depends_on(var)
}
