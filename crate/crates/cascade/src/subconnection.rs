//! Contact sub-connections `gamma^G = beta^kappa (+) <d eps_a - p^b rho_b^a dt>`
//! and their partial contact curve reductions.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use geomcore::{Chart, Coord, Ctx, Distribution, OneForm, PfaffianSystem, Role, VectorField};
use symexpr::NormalForm;

use crate::jets::{iterate, jet_name, sub_fiber_total_derivative, JetChains};
use crate::CascadeError;

/// Name of the group coordinate `eps<a>`.
pub fn group_name(a: usize) -> String {
    format!("eps{a}")
}

/// A contact sub-connection on `J^kappa x G`, possibly reduced along
/// partial contact curves (then `frozen` records the dropped chains).
#[derive(Clone, Debug)]
pub struct ContactSubConnection {
    chains: JetChains,
    frozen: BTreeMap<usize, (usize, String)>,
    p: Vec<NormalForm>,
    rho: Vec<Vec<NormalForm>>,
    chart: Chart,
    system: PfaffianSystem,
    distribution: Distribution,
}

/// Chart `(t, jets, eps1..eps_r)`.
fn realize_chart(chains: &JetChains, r: usize) -> Result<Chart, CascadeError> {
    let mut coords = vec![Coord {
        name: "t".into(),
        role: Role::Time,
    }];
    for &(c, s) in chains.chains() {
        for l in 0..=s {
            coords.push(Coord {
                name: jet_name(c, l),
                role: Role::Jet { chain: c, order: l },
            });
        }
    }
    for a in 1..=r {
        coords.push(Coord {
            name: group_name(a),
            role: Role::Group(a),
        });
    }
    Ok(Chart::new(coords)?)
}

/// Assemble `gamma^G` from `kappa`, the functions `p^b(t, z)` and the
/// structure functions `rho[b][a] = rho_b^a(eps)`.
pub fn build_subconnection(
    chains: &JetChains,
    p: Vec<NormalForm>,
    rho: Vec<Vec<NormalForm>>,
    ctx: &Ctx,
) -> Result<ContactSubConnection, CascadeError> {
    assemble(chains.clone(), BTreeMap::new(), p, rho, ctx)
}

fn assemble(
    chains: JetChains,
    frozen: BTreeMap<usize, (usize, String)>,
    p: Vec<NormalForm>,
    rho: Vec<Vec<NormalForm>>,
    ctx: &Ctx,
) -> Result<ContactSubConnection, CascadeError> {
    let r = p.len();
    if r == 0 {
        return Err(CascadeError::Input("a sub-connection needs at least one function p".into()));
    }
    if rho.len() != r || rho.iter().any(|row| row.len() != r) {
        return Err(CascadeError::Input(format!("rho must be a {r} x {r} table")));
    }
    let chart = realize_chart(&chains, r)?;
    let eps: Vec<String> = (1..=r).map(group_name).collect();
    let jets = chains.names();
    for (b, pb) in p.iter().enumerate() {
        for v in pb.free_vars() {
            if eps.contains(&v) {
                return Err(CascadeError::Input(format!("p{} depends on the group coordinate {v}", b + 1)));
            }
            if v != "t" && !jets.contains(&v) {
                return Err(CascadeError::Input(format!("p{} uses undeclared variable {v}", b + 1)));
            }
        }
    }
    for (b, row) in rho.iter().enumerate() {
        for (a, e) in row.iter().enumerate() {
            if let Some(v) = e.free_vars().into_iter().find(|v| !eps.contains(v)) {
                return Err(CascadeError::Input(format!(
                    "rho[{}][{}] must depend on the group coordinates only, found {v}",
                    b + 1,
                    a + 1
                )));
            }
            if !e.opaque_symbols().is_empty() {
                return Err(CascadeError::Input(format!("rho[{}][{}] depends on t", b + 1, a + 1)));
            }
        }
    }

    let t = chart.require("t")?;
    let dt = OneForm::coordinate(&chart, t);
    let mut forms = Vec::new();
    for &(c, s) in chains.chains() {
        for l in 0..s {
            let dz = OneForm::coordinate(&chart, chart.require(&jet_name(c, l))?);
            forms.push(dz.sub(&dt.scale(&NormalForm::var(&jet_name(c, l + 1)))));
        }
    }
    let mut drift = VectorField::coordinate(&chart, t);
    for &(c, s) in chains.chains() {
        for l in 0..s {
            let d = VectorField::coordinate(&chart, chart.require(&jet_name(c, l))?);
            drift = drift.add(&d.scale(&NormalForm::var(&jet_name(c, l + 1))));
        }
    }
    for a in 0..r {
        let mut rate = NormalForm::zero();
        for b in 0..r {
            rate = rate.add(&p[b].mul(&rho[b][a]));
        }
        let i = chart.require(&eps[a])?;
        forms.push(OneForm::coordinate(&chart, i).sub(&dt.scale(&rate)));
        drift = drift.add(&VectorField::coordinate(&chart, i).scale(&rate));
    }
    let system = PfaffianSystem::new(&chart, &forms, ctx)?.with_independence(dt)?;
    let mut fields = vec![drift];
    for name in chains.top_names() {
        fields.push(VectorField::coordinate_named(&chart, &name)?);
    }
    let distribution = Distribution::new(&chart, &fields, ctx)?;
    Ok(ContactSubConnection {
        chains,
        frozen,
        p,
        rho,
        chart,
        system,
        distribution,
    })
}

impl ContactSubConnection {
    /// The (retained) jet chains.
    pub fn chains(&self) -> &JetChains {
        &self.chains
    }

    /// Group dimension `r`.
    pub fn group_dim(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[NormalForm] {
        &self.p
    }

    /// `rho[b][a] = rho_b^a`.
    pub fn rho(&self) -> &[Vec<NormalForm>] {
        &self.rho
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// `gamma^G` with independence condition `dt`.
    pub fn system(&self) -> &PfaffianSystem {
        &self.system
    }

    /// The annihilating distribution `H_G`.
    pub fn distribution(&self) -> &Distribution {
        &self.distribution
    }

    /// Chains frozen by a reduction: chain index to (order, function name).
    pub fn frozen(&self) -> &BTreeMap<usize, (usize, String)> {
        &self.frozen
    }

    pub fn is_reduced(&self) -> bool {
        !self.frozen.is_empty()
    }

    /// `sum_b p^b rho_b^a`, the rate of `eps_a`.
    pub fn rate(&self, a: usize) -> NormalForm {
        let mut acc = NormalForm::zero();
        for b in 0..self.p.len() {
            acc = acc.add(&self.p[b].mul(&self.rho[b][a]));
        }
        acc
    }

    /// `H_G` read on a copy of the chart whose top-order jets are controls,
    /// as expected by the ESFL decision.
    pub fn control_distribution(&self) -> Result<Distribution, CascadeError> {
        let tops = self.chains.top_names();
        let coords: Vec<Coord> = self
            .chart
            .coords()
            .iter()
            .map(|c| Coord {
                name: c.name.clone(),
                role: match c.role {
                    Role::Jet { .. } if tops.contains(&c.name) => Role::Control,
                    Role::Jet { .. } => Role::State,
                    Role::Group(_) => Role::State,
                    r => r,
                },
            })
            .collect();
        let chart = Chart::new(coords)?;
        let fields: Vec<VectorField> = self.distribution.basis().iter().map(|x| x.on_chart(&chart)).collect();
        Ok(Distribution::new(&chart, &fields, self.distribution.ctx())?)
    }
}

impl fmt::Display for ContactSubConnection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gamma = beta{}", self.chains)?;
        for a in 0..self.p.len() {
            write!(f, " + <d{} - ({}) dt>", group_name(a + 1), self.rate(a))?;
        }
        for (c, (s, name)) in &self.frozen {
            write!(f, "; z{c}_0..z{c}_{s} = jet of {name}(t)")?;
        }
        Ok(())
    }
}

/// A partial contact curve: dropped chains are frozen to the jets of opaque
/// functions of `t`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContactCurveSpec {
    drop: BTreeMap<usize, String>,
}

impl ContactCurveSpec {
    pub fn new() -> ContactCurveSpec {
        ContactCurveSpec::default()
    }

    /// Freeze chain `chain` to the jet of `name(t)`.
    pub fn drop_chain(mut self, chain: usize, name: &str) -> ContactCurveSpec {
        self.drop.insert(chain, name.to_string());
        self
    }

    pub fn dropped(&self) -> &BTreeMap<usize, String> {
        &self.drop
    }

    /// Retained chains.
    pub fn retained(&self, chains: &JetChains) -> JetChains {
        chains.without(&self.drop.keys().copied().collect::<Vec<_>>())
    }

    /// `s = sum over dropped chains of (sigma_l + 1)`.
    pub fn codimension(&self, chains: &JetChains) -> Result<usize, CascadeError> {
        self.validate(chains)?;
        Ok(self.drop.keys().map(|&c| chains.order(c).unwrap_or(0) + 1).sum())
    }

    /// Every dropped chain must exist and the function names must be
    /// distinct identifiers.
    pub fn validate(&self, chains: &JetChains) -> Result<(), CascadeError> {
        let mut names: Vec<&String> = Vec::new();
        for (&c, name) in &self.drop {
            chains.require(c)?;
            if name.is_empty() || !name.chars().all(|ch| ch.is_alphanumeric() || ch == '_') {
                return Err(CascadeError::Input(format!("invalid function name `{name}`")));
            }
            if names.contains(&name) {
                return Err(CascadeError::Input(format!("function `{name}` used for two chains")));
            }
            names.push(name);
        }
        Ok(())
    }

    /// Substitution `z^l_j -> f_l^(j)(t)` for the dropped chains.
    pub fn substitution(&self, chains: &JetChains) -> Result<HashMap<String, NormalForm>, CascadeError> {
        self.validate(chains)?;
        let mut map = HashMap::new();
        for (&c, name) in &self.drop {
            for j in 0..=chains.require(c)? {
                map.insert(jet_name(c, j), NormalForm::opaque(name, j as u32));
            }
        }
        Ok(map)
    }

    /// Apply the substitution to one function.
    pub fn reduce(&self, f: &NormalForm, chains: &JetChains) -> Result<NormalForm, CascadeError> {
        Ok(f.subst(&self.substitution(chains)?)?)
    }
}

/// Restrict `gamma^G` to the partial contact curve: the contact forms of the
/// dropped chains vanish identically and every `p^b` is evaluated along the
/// frozen jets. A spec that drops nothing returns the system unchanged.
pub fn reduce_along_curves(
    c: &ContactSubConnection,
    spec: &ContactCurveSpec,
) -> Result<ContactSubConnection, CascadeError> {
    let map = spec.substitution(&c.chains)?;
    let p = c.p.iter().map(|f| f.subst(&map)).collect::<Result<Vec<_>, _>>()?;
    let mut frozen = c.frozen.clone();
    for (&chain, name) in spec.dropped() {
        frozen.insert(chain, (c.chains.require(chain)?, name.clone()));
    }
    assemble(spec.retained(&c.chains), frozen, p, c.rho.clone(), c.distribution.ctx())
}

/// Both sides of the reduction lemma for `p = D_{t,i}^r A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pushdown {
    /// The reduction of `D_{t,i}^r A`.
    pub direct: NormalForm,
    /// `(D_t - d/dt)^r` applied to the reduction of `A`, on the reduced chart.
    pub formula: NormalForm,
    pub difference: NormalForm,
}

/// Reduce `D_{t,i}^r A` directly and through `(D_t - d/dt)^r A-bar` on the
/// retained chains, where chain `i` must be retained.
pub fn reduced_total_derivative_pushdown(
    a: &NormalForm,
    r: usize,
    chain: usize,
    chains: &JetChains,
    spec: &ContactCurveSpec,
) -> Result<Pushdown, CascadeError> {
    chains.require(chain)?;
    if spec.dropped().contains_key(&chain) {
        return Err(CascadeError::Precondition(format!("chain {chain} is dropped by the reduction")));
    }
    let mut raw = a.clone();
    for _ in 0..r {
        raw = sub_fiber_total_derivative(&raw, chains, chain)?;
    }
    let direct = spec.reduce(&raw, chains)?;
    let kept = spec.retained(chains);
    let abar = spec.reduce(a, chains)?;
    let formula = iterate(&abar, r, |g| {
        let mut acc = NormalForm::zero();
        for &(c, _) in kept.chains() {
            acc = acc.add(&sub_fiber_total_derivative(g, &kept, c).expect("retained chain"));
        }
        acc
    });
    let difference = direct.sub(&formula);
    Ok(Pushdown {
        direct,
        formula,
        difference,
    })
}
