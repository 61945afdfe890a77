//! Sparse multivariate polynomials with rational coefficients over kernels.
//!
//! Terms are kept sorted by a graded-lexicographic order (descending), with
//! the kernel order of [`Kernel`] as variable priority. That order is a
//! monomial order, so the leading-term test in [`Poly::div_exact`] is sound.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::kernel::Kernel;

/// Power product of kernels; exponents are strictly positive and kernels
/// sorted ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(pub(crate) Vec<(Kernel, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn kernel(k: Kernel, e: u32) -> Monomial {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(k, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn factors(&self) -> &[(Kernel, u32)] {
        &self.0
    }

    pub fn exponent(&self, k: &Kernel) -> u32 {
        self.0
            .iter()
            .find(|(q, _)| q == k)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (k, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 == *k {
                let f = other.0[j].1;
                if f > *e {
                    return None;
                }
                if f < *e {
                    out.push((k.clone(), e - f));
                }
                j += 1;
            } else if j < other.0.len() && other.0[j].0 < *k {
                return None;
            } else {
                out.push((k.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Componentwise minimum (monomial gcd).
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (k, e) in &self.0 {
            let f = other.exponent(k);
            if f > 0 {
                out.push((k.clone(), (*e).min(f)));
            }
        }
        Monomial(out)
    }

    /// Remove kernel `k` entirely, returning its exponent.
    pub fn without(&self, k: &Kernel) -> (Monomial, u32) {
        let mut e0 = 0;
        let v = self
            .0
            .iter()
            .filter(|(q, e)| {
                if q == k {
                    e0 = *e;
                    false
                } else {
                    true
                }
            })
            .cloned()
            .collect();
        (Monomial(v), e0)
    }

    /// Graded lexicographic comparison.
    pub fn grlex(&self, other: &Monomial) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.lex(other))
    }

    fn lex(&self, other: &Monomial) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((a, e)), Some((b, f))) => match a.cmp(b) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if e != f {
                            return e.cmp(f);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.grlex(other)
    }
}

/// Polynomial: terms sorted by descending monomial, nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    pub(crate) terms: Vec<(Monomial, BigRational)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(Monomial::one(), c)],
            }
        }
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    pub fn kernel(k: Kernel) -> Poly {
        Poly::monomial(Monomial::kernel(k, 1), BigRational::one())
    }

    pub fn terms(&self) -> &[(Monomial, BigRational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.as_slice() {
            [] => Some(BigRational::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map(|(m, _)| m.degree()).unwrap_or(0)
    }

    pub fn leading(&self) -> Option<&(Monomial, BigRational)> {
        self.terms.first()
    }

    fn from_unsorted(mut terms: Vec<(Monomial, BigRational)>) -> Poly {
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Monomial, BigRational)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            if let Some(last) = out.last_mut() {
                if last.0 == m {
                    last.1 += c;
                    continue;
                }
            }
            out.push((m, c));
        }
        out.retain(|(_, c)| !c.is_zero());
        Poly { terms: out }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match self.terms[i].0.cmp(&other.terms[j].0) {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(other.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &self.terms[i].1 + &other.terms[j].1;
                    if !c.is_zero() {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Poly { terms: out }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        // Multiplying by a monomial preserves the order of terms.
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, d)| (n.mul(m), d * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut acc: HashMap<Monomial, BigRational> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (m, c) in &self.terms {
            for (n, d) in &other.terms {
                let e = acc.entry(m.mul(n)).or_insert_with(BigRational::zero);
                *e += c * d;
            }
        }
        Poly::from_unsorted(acc.into_iter().collect())
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (lm_d, lc_d) = d.leading()?;
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        if d.total_degree() > self.total_degree() {
            return None;
        }
        let mut r = self.clone();
        let mut q = Vec::new();
        while let Some((lm_r, lc_r)) = r.terms.first() {
            let m = lm_r.div(lm_d)?;
            let c = lc_r / lc_d;
            r = r.sub(&d.mul_term(&m, &c));
            q.push((m, c));
        }
        Some(Poly { terms: q })
    }

    /// All kernels occurring in the polynomial.
    pub fn kernels(&self) -> Vec<Kernel> {
        let mut v: Vec<Kernel> = Vec::new();
        for (m, _) in &self.terms {
            for (k, _) in &m.0 {
                if !v.contains(k) {
                    v.push(k.clone());
                }
            }
        }
        v.sort();
        v
    }

    /// Monomial content: gcd of all monomials.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.clone();
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    /// Divide every term by a monomial that divides all of them.
    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (n.div(m).expect("monomial content divides"), c.clone()))
                .collect(),
        }
    }

    /// Rational content `c` with `self = c * primitive`, where the primitive
    /// part has coprime integer coefficients and positive leading coefficient.
    pub fn content(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::one();
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for (_, c) in &self.terms {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut c = BigRational::new(num_gcd, den_lcm);
        if self.terms[0].1.is_negative() {
            c = -c;
        }
        c
    }

    /// Replace a kernel by a polynomial.
    pub fn substitute_kernel(&self, k: &Kernel, p: &Poly) -> Poly {
        let mut out = Poly::zero();
        let mut cache: Vec<Poly> = vec![Poly::one()];
        for (m, c) in &self.terms {
            let (rest, e) = m.without(k);
            while cache.len() <= e as usize {
                let next = cache.last().unwrap().mul(p);
                cache.push(next);
            }
            out = out.add(&cache[e as usize].mul_term(&rest, c));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::kernel(Kernel::var("x"))
    }
    fn y() -> Poly {
        Poly::kernel(Kernel::var("y"))
    }

    #[test]
    fn exact_division_recovers_factor() {
        let a = x().add(&Poly::one());
        let b = y().sub(&x());
        let p = a.mul(&b);
        assert_eq!(p.div_exact(&a), Some(b.clone()));
        assert_eq!(p.div_exact(&b), Some(a));
        assert_eq!(p.div_exact(&y().add(&Poly::one())), None);
    }

    #[test]
    fn content_is_positive_and_primitive() {
        let half = BigRational::new(1.into(), 2.into());
        let p = x().scale(&(-half.clone())).add(&Poly::constant(BigRational::one()));
        let c = p.content();
        assert_eq!(c, -half);
    }
}
