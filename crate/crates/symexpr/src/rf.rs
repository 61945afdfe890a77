//! Rational-function normal forms.
//!
//! A [`NormalForm`] is `num / (f_1^e_1 ... f_n^e_n)` where `num` is a
//! polynomial over kernels and every `f_i` is a non-constant primitive
//! polynomial with integer coefficients and positive leading coefficient.
//! Common factors are removed by exact trial division after every operation,
//! so a normal form that is mathematically zero built from rational data is
//! structurally zero. Identities that only hold between transcendental
//! kernels (`sin^2 + cos^2 = 1`) are left alone; [`crate::probe`] decides
//! those numerically.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{EvalError, SymError};
use crate::kernel::{Func, Kernel, KernelData};
use crate::poly::{Monomial, Poly};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NormalForm {
    pub(crate) num: Poly,
    pub(crate) den: Vec<(Poly, u32)>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Split a nonzero polynomial into `c * prod f^e` with normalized factors.
fn split_factor(p: &Poly) -> (BigRational, Vec<(Poly, u32)>) {
    let mono = p.monomial_content();
    let q = if mono.is_one() { p.clone() } else { p.div_monomial(&mono) };
    let c = q.content();
    let prim = q.scale(&c.recip());
    let mut fs: Vec<(Poly, u32)> = mono
        .factors()
        .iter()
        .map(|(k, e)| (Poly::kernel(k.clone()), *e))
        .collect();
    if !prim.is_constant() {
        fs.push((prim, 1));
    }
    (c, fs)
}

/// Multiply the factor list by `f^e`, keeping factors pairwise distinct and
/// splitting along exact divisibility. Constants produced by the splitting
/// are multiplied into `k` (the true denominator is `k * prod`).
fn insert_factor(den: &mut Vec<(Poly, u32)>, f: Poly, e: u32, k: &mut BigRational) {
    if e == 0 {
        return;
    }
    if let Some(c) = f.as_constant() {
        *k *= num_traits::pow(c, e as usize);
        return;
    }
    if let Some(slot) = den.iter_mut().find(|(g, _)| *g == f) {
        slot.1 += e;
        return;
    }
    for i in 0..den.len() {
        let g = den[i].0.clone();
        if f.total_degree() > g.total_degree() {
            if let Some(h) = f.div_exact(&g) {
                den[i].1 += e;
                let (c, hs) = split_factor(&h);
                *k *= num_traits::pow(c, e as usize);
                for (hf, he) in hs {
                    insert_factor(den, hf, he * e, k);
                }
                return;
            }
        } else if g.total_degree() > f.total_degree() {
            if let Some(h) = g.div_exact(&f) {
                let eg = den[i].1;
                den.remove(i);
                let (c, hs) = split_factor(&h);
                *k *= num_traits::pow(c, eg as usize);
                insert_factor(den, f, e + eg, k);
                for (hf, he) in hs {
                    insert_factor(den, hf, he * eg, k);
                }
                return;
            }
        }
    }
    den.push((f, e));
    den.sort();
}

impl NormalForm {
    pub fn zero() -> NormalForm {
        NormalForm::default()
    }

    pub fn one() -> NormalForm {
        NormalForm::from_poly(Poly::one())
    }

    pub fn int(n: i64) -> NormalForm {
        NormalForm::rational(rat(n))
    }

    pub fn frac(n: i64, d: i64) -> NormalForm {
        NormalForm::rational(BigRational::new(n.into(), d.into()))
    }

    pub fn rational(c: BigRational) -> NormalForm {
        NormalForm::from_poly(Poly::constant(c))
    }

    pub fn var(name: &str) -> NormalForm {
        NormalForm::from_kernel(Kernel::var(name))
    }

    pub fn opaque(name: &str, order: u32) -> NormalForm {
        NormalForm::from_kernel(Kernel::opaque(name, order))
    }

    pub fn from_kernel(k: Kernel) -> NormalForm {
        NormalForm::from_poly(Poly::kernel(k))
    }

    pub fn from_poly(p: Poly) -> NormalForm {
        NormalForm { num: p, den: Vec::new() }
    }

    /// Build `num / (k * prod den)` and cancel common factors.
    fn assemble(num: Poly, den: Vec<(Poly, u32)>, k: BigRational) -> NormalForm {
        let mut num = if k.is_one() { num } else { num.scale(&k.recip()) };
        if num.is_zero() {
            return NormalForm::zero();
        }
        let mut out = Vec::with_capacity(den.len());
        for (f, mut e) in den {
            while e > 0 {
                match num.div_exact(&f) {
                    Some(q) => {
                        num = q;
                        e -= 1;
                    }
                    None => break,
                }
            }
            if e > 0 {
                out.push((f, e));
            }
        }
        NormalForm { num, den: out }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator_factors(&self) -> &[(Poly, u32)] {
        &self.den
    }

    pub fn denominator(&self) -> Poly {
        self.den
            .iter()
            .fold(Poly::one(), |acc, (f, e)| acc.mul(&f.pow(*e)))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    /// Total degree of numerator plus denominator; a size heuristic.
    pub fn total_degree(&self) -> u32 {
        self.num.total_degree()
            + self
                .den
                .iter()
                .map(|(f, e)| f.total_degree() * e)
                .sum::<u32>()
    }

    /// Number of terms in numerator and denominator factors.
    pub fn size(&self) -> usize {
        self.num.terms().len() + self.den.iter().map(|(f, _)| f.terms().len()).sum::<usize>()
    }

    /// Sign of the leading numerator coefficient (denominators are positive).
    pub fn leading_sign_negative(&self) -> bool {
        self.num
            .leading()
            .map(|(_, c)| c.is_negative())
            .unwrap_or(false)
    }

    pub fn neg(&self) -> NormalForm {
        NormalForm {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> NormalForm {
        if c.is_zero() {
            return NormalForm::zero();
        }
        NormalForm {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &NormalForm) -> NormalForm {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den.is_empty() && other.den.is_empty() {
            return NormalForm::from_poly(self.num.add(&other.num));
        }
        if self.den == other.den {
            return NormalForm::assemble(self.num.add(&other.num), self.den.clone(), BigRational::one());
        }
        // Common multiple: maximal exponent per distinct factor.
        let mut lcm: Vec<(Poly, u32)> = self.den.clone();
        for (f, e) in &other.den {
            match lcm.iter_mut().find(|(g, _)| g == f) {
                Some(slot) => slot.1 = slot.1.max(*e),
                None => lcm.push((f.clone(), *e)),
            }
        }
        let cofactor = |den: &[(Poly, u32)]| {
            lcm.iter().fold(Poly::one(), |acc, (f, e)| {
                let have = den.iter().find(|(g, _)| g == f).map(|(_, d)| *d).unwrap_or(0);
                acc.mul(&f.pow(e - have))
            })
        };
        let num = self
            .num
            .mul(&cofactor(&self.den))
            .add(&other.num.mul(&cofactor(&other.den)));
        let mut den = Vec::new();
        let mut k = BigRational::one();
        for (f, e) in lcm {
            insert_factor(&mut den, f, e, &mut k);
        }
        NormalForm::assemble(num, den, k)
    }

    pub fn sub(&self, other: &NormalForm) -> NormalForm {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &NormalForm) -> NormalForm {
        if self.is_zero() || other.is_zero() {
            return NormalForm::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let num = self.num.mul(&other.num);
        if self.den.is_empty() && other.den.is_empty() {
            return NormalForm::from_poly(num);
        }
        let mut den = self.den.clone();
        let mut k = BigRational::one();
        for (f, e) in &other.den {
            insert_factor(&mut den, f.clone(), *e, &mut k);
        }
        NormalForm::assemble(num, den, k)
    }

    pub fn recip(&self) -> Result<NormalForm, SymError> {
        if self.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        let num = self.denominator();
        let (c, fs) = split_factor(&self.num);
        let mut den = Vec::new();
        let mut k = c;
        for (f, e) in fs {
            insert_factor(&mut den, f, e, &mut k);
        }
        Ok(NormalForm::assemble(num, den, k))
    }

    pub fn checked_div(&self, other: &NormalForm) -> Result<NormalForm, SymError> {
        if other.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        if let Some(c) = other.as_constant() {
            return Ok(self.scale(&c.recip()));
        }
        Ok(self.mul(&other.recip()?))
    }

    /// Division by a value known to be nonzero.
    ///
    /// # Panics
    /// If `other` is structurally zero.
    pub fn div(&self, other: &NormalForm) -> NormalForm {
        self.checked_div(other).expect("division by a zero normal form")
    }

    pub fn pow(&self, n: i64) -> Result<NormalForm, SymError> {
        if n == 0 {
            return Ok(NormalForm::one());
        }
        if n < 0 {
            return self.recip()?.pow(-n);
        }
        let n = n as u32;
        Ok(NormalForm {
            num: self.num.pow(n),
            den: self.den.iter().map(|(f, e)| (f.clone(), e * n)).collect(),
        })
    }

    /// Apply an elementary function with light simplification.
    pub fn apply(func: Func, arg: &NormalForm) -> Result<NormalForm, SymError> {
        if let Some(c) = arg.as_constant() {
            if let Some(v) = constant_value(func, &c)? {
                return Ok(v);
            }
        }
        match func {
            Func::Sin | Func::Tan | Func::Arctan if arg.leading_sign_negative() => {
                Ok(NormalForm::apply(func, &arg.neg())?.neg())
            }
            Func::Cos if arg.leading_sign_negative() => NormalForm::apply(func, &arg.neg()),
            Func::Exp => exp_normalized(arg),
            Func::Ln => {
                if let Some(inner) = ln_of_exp(arg) {
                    return Ok(inner);
                }
                Ok(NormalForm::from_kernel(Kernel::func(func, arg.clone())))
            }
            _ => Ok(NormalForm::from_kernel(Kernel::func(func, arg.clone()))),
        }
    }

    /// Partial derivative with respect to the variable `var`. Opaque symbols
    /// are functions of the variable `t`.
    pub fn diff(&self, var: &str) -> NormalForm {
        self.diff_by(&|k| kernel_diff(k, var))
    }

    fn diff_by(&self, kd: &dyn Fn(&Kernel) -> NormalForm) -> NormalForm {
        let dnum = poly_diff(&self.num, kd);
        if self.den.is_empty() {
            return dnum;
        }
        let mut acc = NormalForm::zero();
        for (f, e) in &self.den {
            let df = poly_diff(f, kd);
            if df.is_zero() {
                continue;
            }
            let term = df.mul(&NormalForm::from_poly(Poly::constant(rat(*e as i64))));
            acc = acc.add(&term.div(&NormalForm::from_poly(f.clone())));
        }
        let top = dnum.sub(&NormalForm::from_poly(self.num.clone()).mul(&acc));
        let den = NormalForm {
            num: Poly::one(),
            den: self.den.clone(),
        };
        top.mul(&den)
    }

    /// All top-level kernels (numerator and denominator).
    pub fn kernels(&self) -> Vec<Kernel> {
        let mut v = self.num.kernels();
        for (f, _) in &self.den {
            for k in f.kernels() {
                if !v.contains(&k) {
                    v.push(k);
                }
            }
        }
        v.sort();
        v
    }

    pub fn has_transcendental(&self) -> bool {
        self.kernels().iter().any(Kernel::is_transcendental)
    }

    /// Names of all variables, including those inside function arguments.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out, &mut BTreeSet::new());
        out
    }

    /// Opaque symbols `(name, order)` occurring anywhere.
    pub fn opaque_symbols(&self) -> BTreeSet<(String, u32)> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_symbols(&self, vars: &mut BTreeSet<String>, opq: &mut BTreeSet<(String, u32)>) {
        for k in self.kernels() {
            match k.data() {
                KernelData::Var(n) => {
                    vars.insert(n.clone());
                }
                KernelData::Opaque { name, order } => {
                    opq.insert((name.clone(), *order));
                }
                KernelData::Func(_, a) => a.collect_symbols(vars, opq),
            }
        }
    }

    /// Structural dependence on a variable; opaque symbols depend on `t`.
    pub fn depends_on(&self, var: &str) -> bool {
        let mut vars = BTreeSet::new();
        let mut opq = BTreeSet::new();
        self.collect_symbols(&mut vars, &mut opq);
        vars.contains(var) || (var == "t" && !opq.is_empty())
    }

    /// Substitute variables by normal forms, re-simplifying function
    /// kernels whose arguments change.
    pub fn subst(&self, map: &HashMap<String, NormalForm>) -> Result<NormalForm, SymError> {
        let mut cache: HashMap<Kernel, NormalForm> = HashMap::new();
        let num = subst_poly(&self.num, map, &mut cache)?;
        if self.den.is_empty() {
            return Ok(num);
        }
        let mut den = NormalForm::one();
        for (f, e) in &self.den {
            den = den.mul(&subst_poly(f, map, &mut cache)?.pow(*e as i64)?);
        }
        num.checked_div(&den)
    }

    /// Floating-point evaluation.
    pub fn eval(&self, pt: &Point) -> Result<f64, EvalError> {
        let n = eval_poly(&self.num, pt)?;
        let mut d = 1.0;
        for (f, e) in &self.den {
            d *= eval_poly(f, pt)?.powi(*e as i32);
        }
        if d.abs() < 1e-300 || !d.is_finite() {
            return Err(EvalError::Pole {
                subterm: crate::expr::Expr::from_nf(&NormalForm::from_poly(self.denominator())).to_string(),
            });
        }
        let v = n / d;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Pole {
                subterm: crate::expr::Expr::from_nf(self).to_string(),
            })
        }
    }

    /// Evaluation together with a magnitude scale (sum of absolute values of
    /// numerator terms divided by the denominator), used for relative zero
    /// tests.
    pub fn eval_scaled(&self, pt: &Point) -> Result<(f64, f64), EvalError> {
        let v = self.eval(pt)?;
        let mut s = 0.0;
        for (m, c) in self.num.terms() {
            s += (c.to_f64().unwrap_or(f64::INFINITY) * eval_monomial(m, pt)?).abs();
        }
        let mut d = 1.0;
        for (f, e) in &self.den {
            d *= eval_poly(f, pt)?.powi(*e as i32);
        }
        Ok((v, (s / d).abs()))
    }

    /// Exact evaluation at a rational point; `None` for transcendental or
    /// opaque kernels, unassigned variables or poles.
    pub fn eval_exact(&self, pt: &HashMap<String, BigRational>) -> Option<BigRational> {
        let n = eval_poly_exact(&self.num, pt)?;
        let mut d = BigRational::one();
        for (f, e) in &self.den {
            d *= num_traits::pow(eval_poly_exact(f, pt)?, *e as usize);
        }
        if d.is_zero() {
            None
        } else {
            Some(n / d)
        }
    }

    pub fn to_expr(&self) -> crate::expr::Expr {
        crate::expr::Expr::from_nf(self)
    }
}

fn constant_value(func: Func, c: &BigRational) -> Result<Option<NormalForm>, SymError> {
    let z = c.is_zero();
    let domain = |c: &BigRational| SymError::Domain {
        func: func.name().to_string(),
        arg: c.to_string(),
    };
    Ok(match func {
        Func::Sin | Func::Tan | Func::Arctan if z => Some(NormalForm::zero()),
        Func::Cos | Func::Exp if z => Some(NormalForm::one()),
        Func::Ln => {
            if !c.is_positive() {
                return Err(domain(c));
            }
            c.is_one().then(NormalForm::zero)
        }
        Func::Sqrt => {
            if c.is_negative() {
                return Err(domain(c));
            }
            let (n, d) = (c.numer().clone(), c.denom().clone());
            let (rn, rd) = (num_integer::Roots::sqrt(&n), num_integer::Roots::sqrt(&d));
            (&rn * &rn == n && &rd * &rd == d).then(|| NormalForm::rational(BigRational::new(rn, rd)))
        }
        _ => None,
    })
}

/// `exp(arg)`: integer multiples of logarithms become powers, and the
/// rational content of what remains becomes an integer power of a kernel
/// (`exp(-5u) = exp(u)^-5`).
fn exp_normalized(arg: &NormalForm) -> Result<NormalForm, SymError> {
    let mut factor = NormalForm::one();
    let mut rest = arg.clone();
    if arg.den.is_empty() {
        let mut kept = Poly::zero();
        for (m, c) in arg.num.terms() {
            let log_arg = match m.factors() {
                [(k, 1)] if c.is_integer() => match k.data() {
                    KernelData::Func(Func::Ln, a) => Some(a.clone()),
                    _ => None,
                },
                _ => None,
            };
            match log_arg {
                Some(a) => {
                    let n = c.to_integer().to_i64().unwrap_or(0);
                    factor = factor.mul(&a.pow(n)?);
                }
                None => kept = kept.add(&Poly::monomial(m.clone(), c.clone())),
            }
        }
        rest = NormalForm::from_poly(kept);
    }
    if rest.is_zero() {
        return Ok(factor);
    }
    let c = rest.num.content();
    let p = c.numer().to_i64();
    let q = c.denom().clone();
    let prim = rest.scale(&c.recip()).scale(&BigRational::new(BigInt::one(), q));
    let k = NormalForm::from_kernel(Kernel::func(Func::Exp, prim));
    match p {
        Some(p) if p.abs() <= 64 => Ok(factor.mul(&k.pow(p)?)),
        _ => Ok(factor.mul(&NormalForm::from_kernel(Kernel::func(Func::Exp, rest)))),
    }
}

/// `ln(exp(a)^p) = p a` for a pure power of a single exp kernel.
fn ln_of_exp(arg: &NormalForm) -> Option<NormalForm> {
    let single = |p: &Poly| -> Option<(NormalForm, u32)> {
        match p.terms() {
            [(m, c)] if c.is_one() => match m.factors() {
                [(k, e)] => match k.data() {
                    KernelData::Func(Func::Exp, a) => Some((a.clone(), *e)),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    };
    if arg.den.is_empty() {
        let (a, e) = single(&arg.num)?;
        return Some(a.scale(&rat(e as i64)));
    }
    if arg.num.as_constant().is_some_and(|c| c.is_one()) && arg.den.len() == 1 {
        let (f, de) = &arg.den[0];
        let (a, e) = single(f)?;
        return Some(a.scale(&rat(-((e * de) as i64))));
    }
    None
}

pub(crate) fn kernel_diff(k: &Kernel, var: &str) -> NormalForm {
    match k.data() {
        KernelData::Var(n) => {
            if n == var {
                NormalForm::one()
            } else {
                NormalForm::zero()
            }
        }
        KernelData::Opaque { name, order } => {
            if var == "t" {
                NormalForm::opaque(name, order + 1)
            } else {
                NormalForm::zero()
            }
        }
        KernelData::Func(f, a) => {
            let da = a.diff(var);
            if da.is_zero() {
                return NormalForm::zero();
            }
            let me = NormalForm::from_kernel(k.clone());
            let outer = match f {
                Func::Sin => NormalForm::apply(Func::Cos, a).expect("cos is total"),
                Func::Cos => NormalForm::apply(Func::Sin, a).expect("sin is total").neg(),
                Func::Tan => NormalForm::one().add(&me.mul(&me)),
                Func::Arctan => NormalForm::one()
                    .add(&a.mul(a))
                    .recip()
                    .expect("1 + a^2 is nonzero"),
                Func::Exp => me,
                Func::Ln => match a.recip() {
                    Ok(r) => r,
                    Err(_) => return NormalForm::zero(),
                },
                Func::Sqrt => me.scale(&rat(2)).recip().expect("sqrt kernel is nonzero"),
            };
            outer.mul(&da)
        }
    }
}

fn poly_diff(p: &Poly, kd: &dyn Fn(&Kernel) -> NormalForm) -> NormalForm {
    let mut poly_part = Poly::zero();
    let mut rest = NormalForm::zero();
    let mut dcache: HashMap<Kernel, NormalForm> = HashMap::new();
    for (m, c) in p.terms() {
        for (k, e) in m.factors() {
            let dk = dcache.entry(k.clone()).or_insert_with(|| kd(k)).clone();
            if dk.is_zero() {
                continue;
            }
            let (others, _) = m.without(k);
            let reduced = others.mul(&Monomial::kernel(k.clone(), e - 1));
            let coef = c * rat(*e as i64);
            if dk.is_polynomial() {
                poly_part = poly_part.add(&dk.num.mul_term(&reduced, &coef));
            } else {
                let t = NormalForm::from_poly(Poly::monomial(reduced, coef));
                rest = rest.add(&t.mul(&dk));
            }
        }
    }
    NormalForm::from_poly(poly_part).add(&rest)
}

fn subst_kernel(
    k: &Kernel,
    map: &HashMap<String, NormalForm>,
    cache: &mut HashMap<Kernel, NormalForm>,
) -> Result<NormalForm, SymError> {
    if let Some(v) = cache.get(k) {
        return Ok(v.clone());
    }
    let v = match k.data() {
        KernelData::Var(n) => map.get(n).cloned().unwrap_or_else(|| NormalForm::from_kernel(k.clone())),
        KernelData::Opaque { .. } => NormalForm::from_kernel(k.clone()),
        KernelData::Func(f, a) => {
            let na = a.subst(map)?;
            if na == *a {
                NormalForm::from_kernel(k.clone())
            } else {
                NormalForm::apply(*f, &na)?
            }
        }
    };
    cache.insert(k.clone(), v.clone());
    Ok(v)
}

fn subst_poly(
    p: &Poly,
    map: &HashMap<String, NormalForm>,
    cache: &mut HashMap<Kernel, NormalForm>,
) -> Result<NormalForm, SymError> {
    let mut unchanged = Poly::zero();
    let mut out = NormalForm::zero();
    for (m, c) in p.terms() {
        let mut fixed = Monomial::one();
        let mut moved = NormalForm::one();
        for (k, e) in m.factors() {
            let v = subst_kernel(k, map, cache)?;
            if v.den.is_empty() && v.num.terms().len() == 1 && v.num.terms()[0].0.factors() == [(k.clone(), 1)] && v.num.terms()[0].1.is_one() {
                fixed = fixed.mul(&Monomial::kernel(k.clone(), *e));
            } else {
                moved = moved.mul(&v.pow(*e as i64)?);
            }
        }
        if moved.is_one() {
            unchanged = unchanged.add(&Poly::monomial(fixed, c.clone()));
        } else {
            out = out.add(&moved.mul(&NormalForm::from_poly(Poly::monomial(fixed, c.clone()))));
        }
    }
    Ok(out.add(&NormalForm::from_poly(unchanged)))
}

/// Numeric values for variables and opaque symbols.
#[derive(Clone, Debug, Default)]
pub struct Point {
    pub vars: HashMap<String, f64>,
    pub opaque: HashMap<(String, u32), f64>,
}

impl Point {
    pub fn new() -> Point {
        Point::default()
    }

    pub fn with(mut self, name: &str, v: f64) -> Point {
        self.vars.insert(name.to_string(), v);
        self
    }

    pub fn set(&mut self, name: &str, v: f64) {
        self.vars.insert(name.to_string(), v);
    }

    pub fn set_opaque(&mut self, name: &str, order: u32, v: f64) {
        self.opaque.insert((name.to_string(), order), v);
    }
}

fn eval_kernel(k: &Kernel, pt: &Point) -> Result<f64, EvalError> {
    match k.data() {
        KernelData::Var(n) => pt.vars.get(n).copied().ok_or_else(|| EvalError::Unassigned {
            subterm: n.clone(),
        }),
        KernelData::Opaque { name, order } => pt
            .opaque
            .get(&(name.clone(), *order))
            .copied()
            .ok_or_else(|| EvalError::Unassigned {
                subterm: format!("{k:?}"),
            }),
        KernelData::Func(f, a) => {
            let x = a.eval(pt)?;
            f.apply_f64(x).ok_or_else(|| EvalError::Domain {
                subterm: format!("{k:?}"),
            })
        }
    }
}

fn eval_monomial(m: &Monomial, pt: &Point) -> Result<f64, EvalError> {
    let mut v = 1.0;
    for (k, e) in m.factors() {
        v *= eval_kernel(k, pt)?.powi(*e as i32);
    }
    Ok(v)
}

fn eval_poly(p: &Poly, pt: &Point) -> Result<f64, EvalError> {
    let mut s = 0.0;
    for (m, c) in p.terms() {
        s += c.to_f64().unwrap_or(f64::NAN) * eval_monomial(m, pt)?;
    }
    Ok(s)
}

fn eval_poly_exact(p: &Poly, pt: &HashMap<String, BigRational>) -> Option<BigRational> {
    let mut s = BigRational::zero();
    for (m, c) in p.terms() {
        let mut v = c.clone();
        for (k, e) in m.factors() {
            let x = match k.data() {
                KernelData::Var(n) => pt.get(n)?.clone(),
                _ => return None,
            };
            v *= num_traits::pow(x, *e as usize);
        }
        s += v;
    }
    Some(s)
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl fmt::Debug for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&NormalForm> for &NormalForm {
            type Output = NormalForm;
            fn $m(self, rhs: &NormalForm) -> NormalForm {
                NormalForm::$m(self, rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Neg for &NormalForm {
    type Output = NormalForm;
    fn neg(self) -> NormalForm {
        NormalForm::neg(self)
    }
}
