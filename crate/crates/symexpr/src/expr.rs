//! The user-facing expression tree.
//!
//! Trees are immutable and cheap to clone. Arithmetic happens in
//! [`NormalForm`]; an [`Expr`] is what gets parsed, printed and handed
//! around at API boundaries.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{EvalError, SymError};
use crate::kernel::{Func, Kernel, KernelData};
use crate::poly::{Monomial, Poly};
use crate::rf::{NormalForm, Point};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Num(BigRational),
    Var(String),
    Opaque { name: String, order: u32 },
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Expr),
    Div(Expr, Expr),
    Pow(Expr, i64),
    Func(Func, Expr),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn new(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn int(n: i64) -> Expr {
        Expr::new(Node::Num(BigRational::from_integer(BigInt::from(n))))
    }

    pub fn rational(c: BigRational) -> Expr {
        Expr::new(Node::Num(c))
    }

    pub fn var(name: &str) -> Expr {
        Expr::new(Node::Var(name.to_string()))
    }

    pub fn opaque(name: &str, order: u32) -> Expr {
        Expr::new(Node::Opaque {
            name: name.to_string(),
            order,
        })
    }

    pub fn func(f: Func, a: Expr) -> Expr {
        Expr::new(Node::Func(f, a))
    }

    pub fn parse(src: &str) -> Result<Expr, SymError> {
        crate::parse::parse(src)
    }

    /// Convert to the canonical rational-function representation.
    pub fn to_nf(&self) -> Result<NormalForm, SymError> {
        Ok(match self.node() {
            Node::Num(c) => NormalForm::rational(c.clone()),
            Node::Var(v) => NormalForm::var(v),
            Node::Opaque { name, order } => NormalForm::opaque(name, *order),
            Node::Add(xs) => {
                let mut acc = NormalForm::zero();
                for x in xs {
                    acc = acc.add(&x.to_nf()?);
                }
                acc
            }
            Node::Mul(xs) => {
                let mut acc = NormalForm::one();
                for x in xs {
                    acc = acc.mul(&x.to_nf()?);
                }
                acc
            }
            Node::Neg(x) => x.to_nf()?.neg(),
            Node::Div(a, b) => a.to_nf()?.checked_div(&b.to_nf()?)?,
            Node::Pow(b, e) => b.to_nf()?.pow(*e)?,
            Node::Func(f, a) => NormalForm::apply(*f, &a.to_nf()?)?,
        })
    }

    /// The unique normalized tree of this expression.
    pub fn normalize(&self) -> Result<Expr, SymError> {
        Ok(self.to_nf()?.to_expr())
    }

    pub fn diff(&self, var: &str) -> Result<Expr, SymError> {
        Ok(self.to_nf()?.diff(var).to_expr())
    }

    pub fn depends_on(&self, var: &str) -> Result<bool, SymError> {
        Ok(self.to_nf()?.depends_on(var))
    }

    /// Direct floating-point evaluation of the tree.
    pub fn eval(&self, pt: &Point) -> Result<f64, EvalError> {
        let v = match self.node() {
            Node::Num(c) => c.to_f64().unwrap_or(f64::NAN),
            Node::Var(v) => *pt.vars.get(v).ok_or_else(|| EvalError::Unassigned {
                subterm: v.clone(),
            })?,
            Node::Opaque { name, order } => *pt
                .opaque
                .get(&(name.clone(), *order))
                .ok_or_else(|| EvalError::Unassigned {
                    subterm: self.to_string(),
                })?,
            Node::Add(xs) => {
                let mut s = 0.0;
                for x in xs {
                    s += x.eval(pt)?;
                }
                s
            }
            Node::Mul(xs) => {
                let mut s = 1.0;
                for x in xs {
                    s *= x.eval(pt)?;
                }
                s
            }
            Node::Neg(x) => -x.eval(pt)?,
            Node::Div(a, b) => {
                let d = b.eval(pt)?;
                if d == 0.0 {
                    return Err(EvalError::Pole {
                        subterm: b.to_string(),
                    });
                }
                a.eval(pt)? / d
            }
            Node::Pow(b, e) => {
                let x = b.eval(pt)?;
                if x == 0.0 && *e < 0 {
                    return Err(EvalError::Pole {
                        subterm: b.to_string(),
                    });
                }
                x.powi(*e as i32)
            }
            Node::Func(f, a) => f.apply_f64(a.eval(pt)?).ok_or_else(|| EvalError::Domain {
                subterm: self.to_string(),
            })?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Pole {
                subterm: self.to_string(),
            })
        }
    }

    pub fn from_kernel(k: &Kernel) -> Expr {
        match k.data() {
            KernelData::Var(v) => Expr::var(v),
            KernelData::Opaque { name, order } => Expr::opaque(name, *order),
            KernelData::Func(f, a) => Expr::func(*f, Expr::from_nf(a)),
        }
    }

    fn from_monomial(m: &Monomial, c: &BigRational) -> Expr {
        let mut parts = Vec::new();
        if !c.is_one() || m.is_one() {
            parts.push(Expr::rational(c.clone()));
        }
        for (k, e) in m.factors() {
            let b = Expr::from_kernel(k);
            parts.push(if *e == 1 { b } else { Expr::new(Node::Pow(b, *e as i64)) });
        }
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::new(Node::Mul(parts))
        }
    }

    fn from_poly(p: &Poly) -> Expr {
        if p.is_zero() {
            return Expr::int(0);
        }
        let mut terms = Vec::new();
        for (m, c) in p.terms() {
            if c.is_negative() {
                terms.push(Expr::new(Node::Neg(Expr::from_monomial(m, &-c))));
            } else {
                terms.push(Expr::from_monomial(m, c));
            }
        }
        if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::new(Node::Add(terms))
        }
    }

    /// The canonical tree for a normal form.
    pub fn from_nf(nf: &NormalForm) -> Expr {
        let num = Expr::from_poly(nf.numerator());
        let den = nf.denominator_factors();
        if den.is_empty() {
            return num;
        }
        let mut parts: Vec<Expr> = den
            .iter()
            .map(|(f, e)| {
                let b = Expr::from_poly(f);
                if *e == 1 {
                    b
                } else {
                    Expr::new(Node::Pow(b, *e as i64))
                }
            })
            .collect();
        let d = if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::new(Node::Mul(parts))
        };
        // Keep a leading minus outside the fraction for readability.
        if let Node::Neg(inner) = num.node() {
            return Expr::new(Node::Neg(Expr::new(Node::Div(inner.clone(), d))));
        }
        Expr::new(Node::Div(num, d))
    }

    fn prec(&self) -> u8 {
        match self.node() {
            Node::Add(_) => 1,
            Node::Mul(_) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Num(c) if c.is_negative() => 3,
            Node::Num(c) if !c.is_integer() => 2,
            Node::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.prec() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(c) => {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                let a = c.abs();
                if a.is_integer() {
                    write!(f, "{}", a.numer())
                } else {
                    write!(f, "{}/{}", a.numer(), a.denom())
                }
            }
            Node::Var(v) => write!(f, "{v}"),
            Node::Opaque { name, order } => match order {
                0..=3 => write!(f, "{name}{}(t)", "'".repeat(*order as usize)),
                _ => write!(f, "{name}^({order})(t)"),
            },
            Node::Add(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    match (i, x.node()) {
                        (0, _) => write!(f, "{x}")?,
                        (_, Node::Neg(inner)) => {
                            write!(f, " - ")?;
                            write_wrapped(f, inner, 2)?;
                        }
                        (_, Node::Num(c)) if c.is_negative() => {
                            write!(f, " - ")?;
                            write!(f, "{}", Expr::rational(-c.clone()))?;
                        }
                        _ => write!(f, " + {x}")?,
                    }
                }
                Ok(())
            }
            Node::Mul(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    // Right operands of `*` must bind tighter than `/`.
                    let need = if i == 0 { 2 } else { 3 };
                    let need = if i > 0 && matches!(x.node(), Node::Div(..)) { 5 } else { need };
                    let need = if i > 0 && x.prec() == 2 { 5 } else { need };
                    write_wrapped(f, x, need)?;
                }
                Ok(())
            }
            Node::Neg(x) => {
                // A leading sign applies to the whole product: `-2*x` is `-(2*x)`.
                write!(f, "-")?;
                match x.node() {
                    Node::Neg(_) => write!(f, "({x})"),
                    _ => write_wrapped(f, x, 2),
                }
            }
            Node::Div(a, b) => {
                write_wrapped(f, a, 2)?;
                write!(f, "/")?;
                write_wrapped(f, b, 4)
            }
            Node::Pow(b, e) => {
                write_wrapped(f, b, 5)?;
                if *e < 0 {
                    write!(f, "^({e})")
                } else {
                    write!(f, "^{e}")
                }
            }
            Node::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl From<&NormalForm> for Expr {
    fn from(nf: &NormalForm) -> Expr {
        Expr::from_nf(nf)
    }
}

impl std::str::FromStr for Expr {
    type Err = SymError;
    fn from_str(s: &str) -> Result<Expr, SymError> {
        Expr::parse(s)
    }
}

/// Convenience: parse and normalize in one step.
pub fn nf(src: &str) -> Result<NormalForm, SymError> {
    Expr::parse(src)?.to_nf()
}

impl Expr {
    pub fn is_zero_literal(&self) -> bool {
        matches!(self.node(), Node::Num(c) if c.is_zero())
    }
}
