//! The necessary and the sufficient conditions for a codimension-one partial
//! contact curve reduction of a one-dimensional sub-connection to be ESFL,
//! and a best-effort search for sufficiency decompositions.

use std::fmt;

use geomcore::Ctx;
use symexpr::{Equality, Func, NormalForm};

use crate::jets::{iterate, jet_name, sub_fiber_total_derivative, truncated_euler, JetChains};
use crate::q::{q_sequence, single_chain, QSequence};
use crate::subconnection::{reduce_along_curves, ContactCurveSpec, ContactSubConnection};
use crate::CascadeError;

/// Reduce along `spec`, which must retain exactly one chain of a
/// one-dimensional sub-connection; returns the reduction and the chain.
fn codim_one(c: &ContactSubConnection, spec: &ContactCurveSpec) -> Result<(ContactSubConnection, usize, usize), CascadeError> {
    if c.is_reduced() {
        return Err(CascadeError::Precondition("expected an unreduced sub-connection".into()));
    }
    if c.group_dim() != 1 {
        return Err(CascadeError::Precondition(format!(
            "the group must be one-dimensional, found r = {}",
            c.group_dim()
        )));
    }
    let reduced = reduce_along_curves(c, spec)?;
    let (chain, sigma) = single_chain(&reduced)?;
    Ok((reduced, chain, sigma))
}

/// Generic dependence of `f` on `var`: `df/dvar` is not generically zero.
fn depends(f: &NormalForm, var: &str, ctx: &Ctx) -> Result<bool, CascadeError> {
    let d = f.diff(var);
    match ctx.zero_test(&d) {
        Equality::True | Equality::ProbablyEqual => Ok(false),
        Equality::False => Ok(true),
        Equality::Undecided => Err(CascadeError::Undecided(format!("whether {f} depends on {var}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NecessityStatus {
    /// The necessary condition holds; this does not imply ESFL.
    Pass,
    /// `E-bar` depends on the named jet coordinate of the retained chain.
    FailDepends(String),
    /// `E-bar` vanishes identically.
    FailZero,
}

/// Outcome of the necessary condition on `E_sigma(p-bar)`.
#[derive(Clone, Debug)]
pub struct NecessityVerdict {
    pub chain: usize,
    pub sigma: usize,
    /// The reduced drift `p-bar`.
    pub reduced_p: NormalForm,
    /// `E_sigma(p-bar)` along the retained chain.
    pub euler: NormalForm,
    pub status: NecessityStatus,
}

impl NecessityVerdict {
    pub fn passed(&self) -> bool {
        self.status == NecessityStatus::Pass
    }
}

impl fmt::Display for NecessityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.status {
            NecessityStatus::Pass => write!(
                f,
                "PASS (necessary condition only): E_{}(p) = {} depends on no z{}_k with k >= 1",
                self.sigma, self.euler, self.chain
            ),
            NecessityStatus::FailDepends(v) => write!(
                f,
                "FAIL on {v}: E_{}(p) = {} depends on {v}; the reduction is not ESFL",
                self.sigma, self.euler
            ),
            NecessityStatus::FailZero => write!(
                f,
                "FAIL: E_{}(p) vanishes identically; the reduction is not bracket generating",
                self.sigma
            ),
        }
    }
}

/// Necessary condition for the codimension-one reduction retaining chain
/// `i` to be ESFL: `E_sigma_i(p-bar)` is nonzero and independent of
/// `z^i_k` for `k >= 1`.
pub fn necessity_check(c: &ContactSubConnection, spec: &ContactCurveSpec, ctx: &Ctx) -> Result<NecessityVerdict, CascadeError> {
    let (reduced, chain, sigma) = codim_one(c, spec)?;
    let reduced_p = reduced.p()[0].clone();
    let euler = truncated_euler(&reduced_p, sigma, chain, reduced.chains())?;
    let status = match ctx.zero_test(&euler) {
        Equality::True | Equality::ProbablyEqual => NecessityStatus::FailZero,
        Equality::Undecided => return Err(CascadeError::Undecided(format!("whether {euler} vanishes"))),
        Equality::False => {
            let mut status = NecessityStatus::Pass;
            for k in (1..=sigma).rev() {
                let v = jet_name(chain, k);
                if depends(&euler, &v, ctx)? {
                    status = NecessityStatus::FailDepends(v);
                    break;
                }
            }
            status
        }
    };
    Ok(NecessityVerdict {
        chain,
        sigma,
        reduced_p,
        euler,
        status,
    })
}

/// Outcome of a verified sufficiency decomposition.
#[derive(Clone, Debug)]
pub struct SufficiencyVerdict {
    pub chain: usize,
    /// `A_0 ... A_N`.
    pub decomposition: Vec<NormalForm>,
    pub reduced: ContactSubConnection,
    pub q: QSequence,
    /// Genericity condition `side_condition != 0`: the primitive numerator
    /// of `Q_{sigma+1}` along the frozen functions.
    pub side_condition: NormalForm,
    /// Result of the independent Goursat and ESFL decision on the reduced
    /// system, when requested.
    pub pipeline_esfl: Option<bool>,
}

impl fmt::Display for SufficiencyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "PASS: CFL-sufficient: the reduction dropping all chains except {} is ESFL",
            self.chain
        )?;
        for (l, a) in self.decomposition.iter().enumerate() {
            writeln!(f, "  A{l} = {a}")?;
        }
        writeln!(f, "  Q{} = {}", self.q.sigma + 1, self.q.last())?;
        write!(f, "  side condition: {} != 0", self.side_condition)?;
        if let Some(e) = self.pipeline_esfl {
            write!(f, "\n  pipeline: {}", if e { "ESFL confirmed" } else { "ESFL NOT confirmed" })?;
        }
        Ok(())
    }
}

/// `sum_l D_{t,i}^l A_l`.
pub fn decomposition_sum(a: &[NormalForm], chain: usize, chains: &JetChains) -> Result<NormalForm, CascadeError> {
    chains.require(chain)?;
    let mut acc = NormalForm::zero();
    for (l, al) in a.iter().enumerate() {
        let term = iterate(al, l, |g| sub_fiber_total_derivative(g, chains, chain).expect("chain exists"));
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Primitive numerator with positive leading coefficient.
fn primitive_numerator(f: &NormalForm) -> NormalForm {
    let num = f.numerator();
    if num.is_zero() {
        return NormalForm::zero();
    }
    let c = num.content();
    let mut p = NormalForm::from_poly(num.scale(&(num_rational::BigRational::from_integer(1.into()) / c)));
    if p.leading_sign_negative() {
        p = p.neg();
    }
    p
}

/// Verify `p = sum_{l <= N} D_{t,i}^l A_l` with every `A_l` independent of
/// `t` and of `z^i_k` for `k >= 1`, `N <= sigma_i`; on success the
/// codimension-one reduction along `spec` (retaining chain `i`) is ESFL.
/// `cross_validate` additionally runs the Goursat and ESFL decision on the
/// reduced system.
pub fn sufficiency_verify(
    c: &ContactSubConnection,
    spec: &ContactCurveSpec,
    decomposition: &[NormalForm],
    cross_validate: bool,
    ctx: &Ctx,
) -> Result<SufficiencyVerdict, CascadeError> {
    let (reduced, chain, sigma) = codim_one(c, spec)?;
    if decomposition.is_empty() {
        return Err(CascadeError::Input("empty decomposition".into()));
    }
    if decomposition.len() > sigma + 1 {
        return Err(CascadeError::Precondition(format!(
            "the decomposition uses D_t,{chain}^{} but chain {chain} has order {sigma}",
            decomposition.len() - 1
        )));
    }
    for (l, a) in decomposition.iter().enumerate() {
        if !a.opaque_symbols().is_empty() || depends(a, "t", ctx)? {
            return Err(CascadeError::Decomposition {
                counterexample: a.clone(),
                reason: format!("A{l} depends on t"),
            });
        }
        for k in 1..=sigma {
            let v = jet_name(chain, k);
            if depends(a, &v, ctx)? {
                return Err(CascadeError::Decomposition {
                    counterexample: a.clone(),
                    reason: format!("A{l} depends on {v}"),
                });
            }
        }
    }
    let sum = decomposition_sum(decomposition, chain, c.chains())?;
    let diff = c.p()[0].sub(&sum);
    if !ctx.is_zero(&diff) {
        return Err(CascadeError::Decomposition {
            counterexample: diff,
            reason: "p - sum D^l A_l does not vanish".into(),
        });
    }
    let q = q_sequence(&reduced)?;
    let side_condition = primitive_numerator(q.last());
    let pipeline_esfl = if cross_validate {
        let v = reduced.control_distribution()?;
        let (_, esfl) = goursat::esfl_conditions(&v)?;
        Some(esfl.esfl)
    } else {
        None
    };
    Ok(SufficiencyVerdict {
        chain,
        decomposition: decomposition.to_vec(),
        reduced,
        q,
        side_condition,
        pipeline_esfl,
    })
}

/// Result of [`sufficiency_search`].
#[derive(Clone, Debug)]
pub enum SearchOutcome {
    /// A verified decomposition.
    Found(Box<SufficiencyVerdict>),
    /// The necessary condition fails, so no decomposition exists.
    Impossible(NecessityVerdict),
    /// The heuristic found nothing; this is not a refutation.
    Inconclusive(String),
}

/// Antiderivative in `var` within a small ansatz class: polynomials in
/// `var` of degree at most 4 with `var`-free coefficients, or
/// `c ln(F)` for a denominator factor `F` with `var`-free `c`.
fn antiderivative(h: &NormalForm, var: &str, ctx: &Ctx) -> Option<NormalForm> {
    let check = |a: NormalForm| if ctx.equal(&a.diff(var), h) { Some(a) } else { None };
    // Polynomial ansatz through Taylor coefficients at var = 0.
    let mut ders = vec![h.clone()];
    for _ in 0..5 {
        let next = ders.last().unwrap().diff(var);
        ders.push(next);
    }
    if ctx.is_zero(&ders[5]) {
        let at0 = std::collections::HashMap::from([(var.to_string(), NormalForm::zero())]);
        let mut acc = NormalForm::zero();
        let mut fact = 1i64;
        let mut ok = true;
        for (k, d) in ders.iter().take(5).enumerate() {
            if k > 0 {
                fact *= k as i64;
            }
            match d.subst(&at0) {
                Ok(c) => {
                    let term = c
                        .mul(&NormalForm::var(var).pow(k as i64 + 1).expect("power"))
                        .mul(&NormalForm::frac(1, fact * (k as i64 + 1)));
                    acc = acc.add(&term);
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            if let Some(a) = check(acc) {
                return Some(a);
            }
        }
    }
    for (f, _) in h.denominator_factors() {
        let f = NormalForm::from_poly(f.clone());
        let fp = f.diff(var);
        if ctx.is_zero(&fp) {
            continue;
        }
        let c = h.mul(&f).div(&fp);
        if !ctx.is_zero(&c.diff(var)) {
            continue;
        }
        if let Ok(ln) = NormalForm::apply(Func::Ln, &f) {
            if let Some(a) = check(c.mul(&ln)) {
                return Some(a);
            }
        }
    }
    None
}

/// Greedy top-order stripping: for `l = N, ..., 1` the coefficient of
/// `z^i_l` in the remainder is `dA_l/dz^i_0`, integrated within a small
/// ansatz class; the final remainder is `A_0`. A decomposition is returned
/// only when [`sufficiency_verify`] accepts it. `depth` defaults to
/// `sigma_i`.
pub fn sufficiency_search(
    c: &ContactSubConnection,
    spec: &ContactCurveSpec,
    depth: Option<usize>,
    ctx: &Ctx,
) -> Result<SearchOutcome, CascadeError> {
    let necessity = necessity_check(c, spec, ctx)?;
    if !necessity.passed() {
        return Ok(SearchOutcome::Impossible(necessity));
    }
    let (_, chain, sigma) = codim_one(c, spec)?;
    let n = depth.unwrap_or(sigma).min(sigma);
    let chains = c.chains();
    let z0 = jet_name(chain, 0);
    let mut rest = c.p()[0].clone();
    let mut parts = vec![NormalForm::zero(); n + 1];
    for l in (1..=n).rev() {
        let h = rest.diff(&jet_name(chain, l));
        if ctx.is_zero(&h) {
            continue;
        }
        let Some(a) = antiderivative(&h, &z0, ctx) else {
            return Ok(SearchOutcome::Inconclusive(format!(
                "no antiderivative of {h} in {z0} within the ansatz class"
            )));
        };
        let term = iterate(&a, l, |g| sub_fiber_total_derivative(g, chains, chain).expect("chain exists"));
        rest = rest.sub(&term);
        parts[l] = a;
    }
    parts[0] = rest;
    while parts.len() > 1 && parts.last().is_some_and(NormalForm::is_zero) {
        parts.pop();
    }
    match sufficiency_verify(c, spec, &parts, false, ctx) {
        Ok(v) => Ok(SearchOutcome::Found(Box::new(v))),
        Err(CascadeError::Decomposition { reason, .. }) => {
            Ok(SearchOutcome::Inconclusive(format!("candidate rejected: {reason}")))
        }
        Err(e) => Err(e),
    }
}
