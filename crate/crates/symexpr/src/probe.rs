//! Seeded numeric probing for identities the normal form cannot see.
//!
//! Sample points are drawn from `k/q` with `k` in `-10..=10 \ {0}` and `q`
//! in `{1, 2, 3}` using ChaCha8 seeded with the session seed. Every call
//! starts a fresh stream from the seed, so a verdict depends only on the
//! seed and the expression, never on call order.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rf::{NormalForm, Point};

/// Outcome of an equality test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Equality {
    /// The normal forms coincide exactly.
    True,
    /// Exact difference is nonzero only through transcendental kernels and
    /// vanishes at every probe point.
    ProbablyEqual,
    False,
    /// Every probe point hit a pole or left a function's domain.
    Undecided,
}

impl Equality {
    /// `True` or `ProbablyEqual`.
    pub fn holds(self) -> bool {
        matches!(self, Equality::True | Equality::ProbablyEqual)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeConfig {
    pub seed: u64,
    pub probes: usize,
    pub retries: usize,
    /// Relative tolerance: `|v| <= tol * (1 + scale)`.
    pub tol: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            seed: 0,
            probes: 5,
            retries: 20,
            tol: 1e-9,
        }
    }
}

impl ProbeConfig {
    pub fn with_seed(seed: u64) -> ProbeConfig {
        ProbeConfig {
            seed,
            ..ProbeConfig::default()
        }
    }
}

/// Stream of random sample points for a fixed symbol set.
pub struct Sampler {
    rng: ChaCha8Rng,
    vars: Vec<String>,
    opaque: Vec<(String, u32)>,
}

impl Sampler {
    pub fn new(seed: u64, vars: &BTreeSet<String>, opaque: &BTreeSet<(String, u32)>) -> Sampler {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            vars: vars.iter().cloned().collect(),
            opaque: opaque.iter().cloned().collect(),
        }
    }

    /// A sample value `k/q`, also returned as an exact pair.
    pub fn value(&mut self) -> (i64, i64) {
        let mut k = 0;
        while k == 0 {
            k = self.rng.gen_range(-10..=10);
        }
        let q = self.rng.gen_range(1..=3);
        (k, q)
    }

    pub fn next_point(&mut self) -> Point {
        let mut p = Point::new();
        for i in 0..self.vars.len() {
            let (k, q) = self.value();
            let name = self.vars[i].clone();
            p.set(&name, k as f64 / q as f64);
        }
        for i in 0..self.opaque.len() {
            let (k, q) = self.value();
            let (n, o) = self.opaque[i].clone();
            p.set_opaque(&n, o, k as f64 / q as f64);
        }
        p
    }

    /// Exact rational point for the variables (opaque symbols ignored).
    pub fn next_exact(&mut self) -> std::collections::HashMap<String, num_rational::BigRational> {
        let mut m = std::collections::HashMap::new();
        for i in 0..self.vars.len() {
            let (k, q) = self.value();
            m.insert(
                self.vars[i].clone(),
                num_rational::BigRational::new(k.into(), q.into()),
            );
        }
        m
    }
}

/// Numeric verdict on whether `e` vanishes identically (exact zero is
/// checked first).
pub fn is_zero(e: &NormalForm, cfg: &ProbeConfig) -> Equality {
    if e.is_zero() {
        return Equality::True;
    }
    if !e.has_transcendental() {
        return Equality::False;
    }
    probe_zero(e, cfg)
}

/// Probe `e` numerically without the exact shortcut.
pub fn probe_zero(e: &NormalForm, cfg: &ProbeConfig) -> Equality {
    let mut sampler = Sampler::new(cfg.seed, &e.free_vars(), &e.opaque_symbols());
    let mut ok = 0;
    let mut failures = 0;
    while ok < cfg.probes {
        let pt = sampler.next_point();
        match e.eval_scaled(&pt) {
            Ok((v, scale)) => {
                if v.abs() > cfg.tol * (1.0 + scale) {
                    return Equality::False;
                }
                ok += 1;
            }
            Err(_) => {
                failures += 1;
                if failures > cfg.retries {
                    return Equality::Undecided;
                }
            }
        }
    }
    Equality::ProbablyEqual
}

/// Equality of two normal forms.
pub fn equals(a: &NormalForm, b: &NormalForm, cfg: &ProbeConfig) -> Equality {
    is_zero(&a.sub(b), cfg)
}
