//! Jet chains, the truncated total derivative and truncated Euler operators,
//! and the closed-form invariant families of the truncated total derivative.

use std::fmt;

use goursat::GoursatSignature;
use num_rational::BigRational;
use num_traits::One;
use symexpr::NormalForm;

use crate::CascadeError;

/// Name of the jet coordinate `z<chain>_<order>`.
pub fn jet_name(chain: usize, order: usize) -> String {
    format!("z{chain}_{order}")
}

/// A list of jet chains `(index, sigma)`: chain `index` carries the
/// coordinates `z<index>_0 ... z<index>_<sigma>`. Chain indices need not be
/// contiguous (chains frozen by a reduction keep their numbering).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JetChains {
    chains: Vec<(usize, usize)>,
}

impl JetChains {
    /// Chains numbered `1..=m` with the given orders.
    pub fn from_orders(orders: &[usize]) -> Result<JetChains, CascadeError> {
        JetChains::from_indexed(orders.iter().enumerate().map(|(c, &s)| (c + 1, s)).collect())
    }

    /// Chains with explicit indices.
    pub fn from_indexed(chains: Vec<(usize, usize)>) -> Result<JetChains, CascadeError> {
        for (k, &(c, s)) in chains.iter().enumerate() {
            if c == 0 {
                return Err(CascadeError::Input("chain indices start at 1".into()));
            }
            if s == 0 {
                return Err(CascadeError::Input(format!("chain {c} has order 0")));
            }
            if chains[..k].iter().any(|&(d, _)| d == c) {
                return Err(CascadeError::Input(format!("chain {c} listed twice")));
            }
        }
        Ok(JetChains { chains })
    }

    /// The chains of the Brunovsky form of type `kappa`, numbered by
    /// ascending order.
    pub fn from_signature(kappa: &GoursatSignature) -> JetChains {
        JetChains::from_orders(&kappa.chain_orders()).expect("signature chain orders are positive")
    }

    pub fn chains(&self) -> &[(usize, usize)] {
        &self.chains
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    /// Order `sigma_i` of chain `i`.
    pub fn order(&self, chain: usize) -> Option<usize> {
        self.chains.iter().find(|&&(c, _)| c == chain).map(|&(_, s)| s)
    }

    pub fn require(&self, chain: usize) -> Result<usize, CascadeError> {
        self.order(chain)
            .ok_or_else(|| CascadeError::Input(format!("no chain {chain} (chains: {self})")))
    }

    /// The chains without `chain`s in `drop`.
    pub fn without(&self, drop: &[usize]) -> JetChains {
        JetChains {
            chains: self.chains.iter().copied().filter(|(c, _)| !drop.contains(c)).collect(),
        }
    }

    /// Jet coordinate names in chart order.
    pub fn names(&self) -> Vec<String> {
        self.chains
            .iter()
            .flat_map(|&(c, s)| (0..=s).map(move |l| jet_name(c, l)))
            .collect()
    }

    /// Names of the top-order coordinates `z<i>_<sigma_i>`.
    pub fn top_names(&self) -> Vec<String> {
        self.chains.iter().map(|&(c, s)| jet_name(c, s)).collect()
    }

    /// Goursat signature of these chains.
    pub fn signature(&self) -> Option<GoursatSignature> {
        let orders: Vec<usize> = self.chains.iter().map(|&(_, s)| s).collect();
        GoursatSignature::from_chain_orders(&orders).ok()
    }
}

impl fmt::Display for JetChains {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.chains.iter().map(|(c, s)| format!("{c}:{s}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// `sum_{l < sigma_i} z^i_{l+1} df/dz^i_l` for one chain.
fn chain_part(f: &NormalForm, chain: usize, sigma: usize) -> NormalForm {
    let mut acc = NormalForm::zero();
    for l in 0..sigma {
        let d = f.diff(&jet_name(chain, l));
        if !d.is_zero() {
            acc = acc.add(&d.mul(&NormalForm::var(&jet_name(chain, l + 1))));
        }
    }
    acc
}

/// Truncated total derivative
/// `D_t f = df/dt + sum_i sum_{l < sigma_i} z^i_{l+1} df/dz^i_l`.
/// Opaque symbols `f(t)` are differentiated through `d/dt`.
pub fn truncated_total_derivative(f: &NormalForm, chains: &JetChains) -> NormalForm {
    let mut acc = f.diff("t");
    for &(c, s) in chains.chains() {
        acc = acc.add(&chain_part(f, c, s));
    }
    acc
}

/// Sub-fiber total derivative `D_{t,i} = sum_{l < sigma_i} z^i_{l+1} d/dz^i_l`
/// along chain `i` only, without a `d/dt` term.
pub fn sub_fiber_total_derivative(f: &NormalForm, chains: &JetChains, chain: usize) -> Result<NormalForm, CascadeError> {
    let s = chains.require(chain)?;
    Ok(chain_part(f, chain, s))
}

/// `n`-fold application of an operator.
pub(crate) fn iterate(f: &NormalForm, n: usize, op: impl Fn(&NormalForm) -> NormalForm) -> NormalForm {
    let mut g = f.clone();
    for _ in 0..n {
        if g.is_zero() {
            break;
        }
        g = op(&g);
    }
    g
}

fn factorial(n: usize) -> BigRational {
    let mut r = BigRational::one();
    for k in 2..=n {
        r *= BigRational::from_integer(k.into());
    }
    r
}

fn sign(n: usize) -> BigRational {
    if n.is_multiple_of(2) {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

/// First integrals of `D_t` along chain `i`:
/// `I^i_k = sum_{a=0}^k ((-1)^(k-a)/(k-a)!) t^(k-a) z^i_(sigma-a)`,
/// `k = 0..=sigma_i`.
pub fn dt_first_integrals(chains: &JetChains, chain: usize) -> Result<Vec<NormalForm>, CascadeError> {
    let s = chains.require(chain)?;
    let t = NormalForm::var("t");
    Ok((0..=s)
        .map(|k| {
            let mut acc = NormalForm::zero();
            for a in 0..=k {
                let c = sign(k - a) / factorial(k - a);
                let term = t
                    .pow((k - a) as i64)
                    .expect("nonnegative power")
                    .mul(&NormalForm::var(&jet_name(chain, s - a)))
                    .scale(&c);
                acc = acc.add(&term);
            }
            acc
        })
        .collect())
}

/// Time-independent invariants of `D_t` along chain `i`: `J_1 = z_sigma` and
/// for `2 <= k <= sigma`
/// `J_k = (-1)^(k-1) (k-1)/k! z_(sigma-1)^k
///      + sum_{a=2}^k ((-1)^(k-a)/(k-a)!) z_(sigma-a) z_sigma^(a-1) z_(sigma-1)^(k-a)`.
pub fn t_independent_invariants(chains: &JetChains, chain: usize) -> Result<Vec<NormalForm>, CascadeError> {
    let s = chains.require(chain)?;
    let z = |l: usize| NormalForm::var(&jet_name(chain, l));
    let pw = |f: NormalForm, e: usize| f.pow(e as i64).expect("nonnegative power");
    let mut out = vec![z(s)];
    for k in 2..=s {
        let lead = sign(k - 1) * BigRational::from_integer((k - 1).into()) / factorial(k);
        let mut acc = pw(z(s - 1), k).scale(&lead);
        for a in 2..=k {
            let c = sign(k - a) / factorial(k - a);
            let term = z(s - a).mul(&pw(z(s), a - 1)).mul(&pw(z(s - 1), k - a)).scale(&c);
            acc = acc.add(&term);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Truncated Euler operator
/// `E_tau(f) = sum_{j=0}^tau (-1)^j D_t^j (df/dz^i_j)` along chain `i`.
pub fn truncated_euler(f: &NormalForm, tau: usize, chain: usize, chains: &JetChains) -> Result<NormalForm, CascadeError> {
    let s = chains.require(chain)?;
    if tau > s {
        return Err(CascadeError::Precondition(format!(
            "Euler order {tau} exceeds the order {s} of chain {chain}"
        )));
    }
    let mut acc = NormalForm::zero();
    for j in 0..=tau {
        let d = f.diff(&jet_name(chain, j));
        let term = iterate(&d, j, |g| truncated_total_derivative(g, chains));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    Ok(acc)
}

/// Both sides of `E_tau(D_t g) = (-1)^tau D_t^(tau+1)(dg/dz^i_tau)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelImage {
    /// `E_tau(D_t g)`.
    pub euler: NormalForm,
    /// `(-1)^tau D_t^(tau+1)(dg/dz^i_tau)`.
    pub image: NormalForm,
    /// `euler - image`; zero when the identity holds.
    pub difference: NormalForm,
}

/// Evaluate both sides of the kernel identity for the truncated Euler
/// operator applied to a total derivative.
pub fn euler_kernel_image(g: &NormalForm, tau: usize, chain: usize, chains: &JetChains) -> Result<KernelImage, CascadeError> {
    let f = truncated_total_derivative(g, chains);
    let euler = truncated_euler(&f, tau, chain, chains)?;
    let d = g.diff(&jet_name(chain, tau));
    let mut image = iterate(&d, tau + 1, |h| truncated_total_derivative(h, chains));
    if tau % 2 == 1 {
        image = image.neg();
    }
    let difference = euler.sub(&image);
    Ok(KernelImage {
        euler,
        image,
        difference,
    })
}
