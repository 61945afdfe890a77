//! Kernels: the indeterminates over which normal-form polynomials are built.
//!
//! A kernel is a plain variable, an opaque function of time (`f(t)`, `f'(t)`,
//! ...), or an elementary function applied to a normalized argument. Kernels
//! are reference counted and carry a cached hash so that monomial arithmetic
//! stays cheap even when arguments are large.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::rf::NormalForm;

/// Elementary functions understood by the normalizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Arctan,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Arctan,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Arctan => "arctan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == s)
    }

    pub fn apply_f64(self, x: f64) -> Option<f64> {
        let v = match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => {
                if x.cos().abs() < 1e-12 {
                    return None;
                }
                x.tan()
            }
            Func::Arctan => x.atan(),
            Func::Exp => x.exp(),
            Func::Ln => {
                if x <= 0.0 {
                    return None;
                }
                x.ln()
            }
            Func::Sqrt => {
                if x < 0.0 {
                    return None;
                }
                x.sqrt()
            }
        };
        v.is_finite().then_some(v)
    }
}

/// The payload of a kernel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum KernelData {
    Var(String),
    /// `name^(order)(t)`: an unspecified function of the time variable.
    Opaque { name: String, order: u32 },
    Func(Func, NormalForm),
}

struct Inner {
    data: KernelData,
    hash: u64,
}

/// Shared, hashed kernel handle.
#[derive(Clone)]
pub struct Kernel(Arc<Inner>);

impl Kernel {
    fn from_data(data: KernelData) -> Kernel {
        let mut h = DefaultHasher::new();
        data.hash(&mut h);
        Kernel(Arc::new(Inner {
            hash: h.finish(),
            data,
        }))
    }

    pub fn var(name: impl Into<String>) -> Kernel {
        Kernel::from_data(KernelData::Var(name.into()))
    }

    pub fn opaque(name: impl Into<String>, order: u32) -> Kernel {
        Kernel::from_data(KernelData::Opaque {
            name: name.into(),
            order,
        })
    }

    /// Raw function kernel; callers normally go through
    /// [`NormalForm::apply`], which performs the light simplifications.
    pub(crate) fn func(f: Func, arg: NormalForm) -> Kernel {
        Kernel::from_data(KernelData::Func(f, arg))
    }

    pub fn data(&self) -> &KernelData {
        &self.0.data
    }

    pub fn is_transcendental(&self) -> bool {
        matches!(self.0.data, KernelData::Func(..))
    }

    pub fn var_name(&self) -> Option<&str> {
        match &self.0.data {
            KernelData::Var(n) => Some(n),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self.0.data {
            KernelData::Var(_) => 0,
            KernelData::Opaque { .. } => 1,
            KernelData::Func(..) => 2,
        }
    }
}

impl PartialEq for Kernel {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.0.data == other.0.data)
    }
}

impl Eq for Kernel {}

impl Hash for Kernel {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl Ord for Kernel {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.rank().cmp(&other.rank()).then_with(|| {
            match (&self.0.data, &other.0.data) {
                (KernelData::Var(a), KernelData::Var(b)) => natural_cmp(a, b),
                (
                    KernelData::Opaque { name: a, order: i },
                    KernelData::Opaque { name: b, order: j },
                ) => natural_cmp(a, b).then(i.cmp(j)),
                (KernelData::Func(f, a), KernelData::Func(g, b)) => f.cmp(g).then_with(|| a.cmp(b)),
                _ => Ordering::Equal,
            }
        })
    }
}

impl PartialOrd for Kernel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::expr::Expr::from_kernel(self))
    }
}

/// Compare identifiers so that embedded numbers sort numerically
/// (`x2 < x10`, `z1_2 < z1_10`).
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut ai, mut bi) = (a.char_indices().peekable(), b.char_indices().peekable());
    loop {
        match (ai.peek().copied(), bi.peek().copied()) {
            (None, None) => return a.len().cmp(&b.len()).then(a.cmp(b)),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some((_, ca)), Some((_, cb))) => {
                if ca.is_ascii_digit() && cb.is_ascii_digit() {
                    let mut na = String::new();
                    while let Some(&(_, c)) = ai.peek() {
                        if !c.is_ascii_digit() {
                            break;
                        }
                        na.push(c);
                        ai.next();
                    }
                    let mut nb = String::new();
                    while let Some(&(_, c)) = bi.peek() {
                        if !c.is_ascii_digit() {
                            break;
                        }
                        nb.push(c);
                        bi.next();
                    }
                    let ta = na.trim_start_matches('0');
                    let tb = nb.trim_start_matches('0');
                    let ord = ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                } else {
                    if ca != cb {
                        return ca.cmp(&cb);
                    }
                    ai.next();
                    bi.next();
                }
            }
        }
    }
}
