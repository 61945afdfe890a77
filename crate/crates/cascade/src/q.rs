//! The coefficients `Q_k` of the characteristic vector fields of a reduced
//! sub-connection with one group dimension and one retained chain, the
//! integrability equations they satisfy, and their relation to the truncated
//! Euler operators.

use geomcore::{Ctx, VectorField};
use symexpr::NormalForm;

use crate::jets::{iterate, jet_name, truncated_euler, truncated_total_derivative, JetChains};
use crate::subconnection::{group_name, ContactSubConnection};
use crate::CascadeError;

/// `Q_0 ... Q_{sigma+1}` together with `Y_k = Q_k d/d eps + (-1)^k d/dz_{sigma-k}`.
#[derive(Clone, Debug)]
pub struct QSequence {
    /// Retained chain index.
    pub chain: usize,
    /// Its order `sigma_1`.
    pub sigma: usize,
    /// The reduced drift `p-bar`.
    pub p: NormalForm,
    /// `q[k] = Q_k` for `0 <= k <= sigma + 1`.
    pub q: Vec<NormalForm>,
    /// `y[k] = Y_k` for `0 <= k <= sigma`.
    pub y: Vec<VectorField>,
    pub(crate) chains: JetChains,
}

impl QSequence {
    /// `Q_k`.
    pub fn get(&self, k: usize) -> &NormalForm {
        &self.q[k]
    }

    /// `Q_{sigma+1}`, nonzero for a bracket-generating reduction.
    pub fn last(&self) -> &NormalForm {
        &self.q[self.sigma + 1]
    }

    /// Reduced chains the sequence was computed on.
    pub fn chains(&self) -> &JetChains {
        &self.chains
    }
}

/// Check the hypothesis of the `Q_k` construction: `r = 1` and a single
/// retained chain; returns `(chain, sigma)`.
pub(crate) fn single_chain(c: &ContactSubConnection) -> Result<(usize, usize), CascadeError> {
    if c.group_dim() != 1 {
        return Err(CascadeError::Precondition(format!(
            "the group must be one-dimensional, found r = {}",
            c.group_dim()
        )));
    }
    match c.chains().chains() {
        [(i, s)] => Ok((*i, *s)),
        other => Err(CascadeError::Precondition(format!(
            "exactly one retained chain is required, found {}",
            other.len()
        ))),
    }
}

/// `Q_k` from `p-bar` on one chain of order `sigma`.
pub(crate) fn q_values(p: &NormalForm, chain: usize, sigma: usize, chains: &JetChains) -> Vec<NormalForm> {
    let mut q = vec![NormalForm::zero()];
    for k in 1..=sigma + 1 {
        let d = p.diff(&jet_name(chain, sigma + 1 - k));
        let prev = truncated_total_derivative(&q[k - 1], chains);
        q.push(if k % 2 == 0 { prev.add(&d) } else { prev.sub(&d) });
    }
    q
}

/// `Q_0 = 0`, `Q_k = D_t Q_{k-1} + (-1)^k dp/dz_{sigma-k+1}` for
/// `1 <= k <= sigma + 1` on a reduced sub-connection with `r = 1` and one
/// retained chain, normalized so that `rho = 1` (`d eps - p-bar dt`).
pub fn q_sequence(c: &ContactSubConnection) -> Result<QSequence, CascadeError> {
    let (chain, sigma) = single_chain(c)?;
    if !c.rho()[0][0].is_one() {
        return Err(CascadeError::Precondition(format!(
            "the one-dimensional group must be normalized to rho = 1, found {}",
            c.rho()[0][0]
        )));
    }
    let chains = c.chains().clone();
    let p = c.p()[0].clone();
    let q = q_values(&p, chain, sigma, &chains);
    let chart = c.chart();
    let eps = VectorField::coordinate_named(chart, &group_name(1))?;
    let mut y = Vec::new();
    for (k, qk) in q.iter().enumerate().take(sigma + 1) {
        let dz = VectorField::coordinate_named(chart, &jet_name(chain, sigma - k))?;
        let dz = if k % 2 == 0 { dz } else { dz.scale(&NormalForm::int(-1)) };
        y.push(eps.scale(qk).add(&dz));
    }
    Ok(QSequence {
        chain,
        sigma,
        p,
        q,
        y,
        chains,
    })
}

/// Result of the integrability equations
/// `(-1)^i dQ_k/dz_{sigma-i} + (-1)^(k+1) dQ_i/dz_{sigma-k} = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CcPdeReport {
    /// Pairs `(i, k)` with a nonvanishing left side.
    pub failures: Vec<(usize, usize)>,
}

impl CcPdeReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Evaluate all pairs `0 <= i <= k <= sigma`.
pub fn cc_pde_check(q: &QSequence, ctx: &Ctx) -> CcPdeReport {
    let s = q.sigma;
    let mut failures = Vec::new();
    for k in 0..=s {
        for i in 0..=k {
            let a = q.q[k].diff(&jet_name(q.chain, s - i));
            let b = q.q[i].diff(&jet_name(q.chain, s - k));
            let a = if i % 2 == 0 { a } else { a.neg() };
            let b = if (k + 1) % 2 == 0 { b } else { b.neg() };
            if !ctx.is_zero(&a.add(&b)) {
                failures.push((i, k));
            }
        }
    }
    CcPdeReport { failures }
}

/// Both sides of
/// `(-1)^(sigma-1) D_t^(sigma-k) Q_{k+1} = E_sigma(p) - E_{sigma-k-1}(p)`
/// with `E_{-1} := 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct EoqSides {
    pub lhs: NormalForm,
    pub rhs: NormalForm,
}

/// Compute both sides of the Euler-operator identity for `Q_{k+1}`; `Q` is
/// computed from the recursion and the Euler operators independently.
pub fn eoq_sides(p: &NormalForm, chain: usize, chains: &JetChains, k: usize) -> Result<EoqSides, CascadeError> {
    let sigma = chains.require(chain)?;
    if k > sigma {
        return Err(CascadeError::Precondition(format!("k = {k} exceeds sigma = {sigma}")));
    }
    let q = q_values(p, chain, sigma, chains);
    let mut lhs = iterate(&q[k + 1], sigma - k, |g| truncated_total_derivative(g, chains));
    if sigma % 2 == 0 {
        lhs = lhs.neg();
    }
    let top = truncated_euler(p, sigma, chain, chains)?;
    let rhs = if k == sigma {
        top
    } else {
        top.sub(&truncated_euler(p, sigma - k - 1, chain, chains)?)
    };
    Ok(EoqSides { lhs, rhs })
}

/// `true` iff both sides of the Euler-operator identity agree.
pub fn eoq_identity_check(p: &NormalForm, chain: usize, chains: &JetChains, k: usize, ctx: &Ctx) -> Result<bool, CascadeError> {
    let s = eoq_sides(p, chain, chains, k)?;
    Ok(ctx.equal(&s.lhs, &s.rhs))
}
