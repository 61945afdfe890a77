//! Quotient maps given by invariants, cross-sections, and the quotient
//! system `I/G = {theta : pi^* theta in I}`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use geomcore::linalg::generic_rank;
use geomcore::{Chart, ControlSystem, Coord, Ctx, Distribution, Matrix, OneForm, PfaffianSystem, Role, VectorField};
use symexpr::NormalForm;

use crate::algebra::{in_span, SymmetryAlgebra};
use crate::SymmetryError;

/// The projection `pi: M -> M/G` given by invariant functions, together
/// with a cross-section `sigma: M/G -> M`.
#[derive(Clone, Debug)]
pub struct QuotientData {
    source: Chart,
    chart: Chart,
    invariants: Vec<NormalForm>,
    /// Every coordinate of `M` as a function of the quotient coordinates.
    section: HashMap<String, NormalForm>,
    /// Optional user-supplied generators of the quotient system.
    pub candidates: Vec<OneForm>,
}

impl QuotientData {
    /// `invariants` name the quotient coordinates and give them as functions
    /// on `source`; `section` gives coordinates of `source` as functions of
    /// the quotient coordinates. A coordinate of `source` missing from the
    /// section is taken to be the identically named quotient coordinate.
    ///
    /// Quotient roles: the invariant equal to the time coordinate is time,
    /// those depending on a control are controls, all others are states.
    pub fn new(
        source: &Chart,
        invariants: &[(&str, NormalForm)],
        section: &[(&str, NormalForm)],
    ) -> Result<QuotientData, SymmetryError> {
        let time = source.time_name().map(NormalForm::var);
        let controls: Vec<String> = source.controls().iter().map(|&i| source.name(i).to_string()).collect();
        let mut coords = Vec::new();
        for (name, f) in invariants {
            for v in f.free_vars() {
                source.require(&v)?;
            }
            let role = if time.as_ref().is_some_and(|t| t == f) {
                Role::Time
            } else if controls.iter().any(|u| f.depends_on(u)) {
                Role::Control
            } else {
                Role::State
            };
            coords.push(Coord {
                name: name.to_string(),
                role,
            });
        }
        let chart = Chart::new(coords)?;
        let mut map = HashMap::new();
        for (name, f) in section {
            source.require(name)?;
            for v in f.free_vars() {
                if chart.index_of(&v).is_none() {
                    return Err(SymmetryError::CrossSection(format!(
                        "{name} = {} uses `{v}`, which is not a quotient coordinate",
                        f.to_expr()
                    )));
                }
            }
            if map.insert(name.to_string(), f.clone()).is_some() {
                return Err(SymmetryError::CrossSection(format!("{name} is given twice")));
            }
        }
        for name in source.names() {
            if !map.contains_key(&name) {
                if chart.index_of(&name).is_none() {
                    return Err(SymmetryError::CrossSection(format!("no value for coordinate {name}")));
                }
                map.insert(name.clone(), NormalForm::var(&name));
            }
        }
        Ok(QuotientData {
            source: source.clone(),
            chart,
            invariants: invariants.iter().map(|(_, f)| f.clone()).collect(),
            section: map,
            candidates: Vec::new(),
        })
    }

    /// Parse invariants and section from `(name, expression)` pairs.
    pub fn parse(
        source: &Chart,
        invariants: &[(&str, &str)],
        section: &[(&str, &str)],
    ) -> Result<QuotientData, SymmetryError> {
        let p = |pairs: &[(&str, &str)]| -> Result<Vec<(String, NormalForm)>, SymmetryError> {
            pairs
                .iter()
                .map(|(n, s)| Ok((n.to_string(), symexpr::nf(s)?)))
                .collect()
        };
        let inv = p(invariants)?;
        let sec = p(section)?;
        let inv: Vec<(&str, NormalForm)> = inv.iter().map(|(n, f)| (n.as_str(), f.clone())).collect();
        let sec: Vec<(&str, NormalForm)> = sec.iter().map(|(n, f)| (n.as_str(), f.clone())).collect();
        QuotientData::new(source, &inv, &sec)
    }

    pub fn with_candidates(mut self, forms: Vec<OneForm>) -> Result<QuotientData, SymmetryError> {
        if forms.iter().any(|f| !f.chart().same(&self.chart)) {
            return Err(SymmetryError::Geom(geomcore::GeomError::ChartMismatch));
        }
        self.candidates = forms;
        Ok(self)
    }

    /// The chart of `M`.
    pub fn source(&self) -> &Chart {
        &self.source
    }

    /// The chart of `M/G`.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn invariants(&self) -> &[NormalForm] {
        &self.invariants
    }

    pub fn section(&self, name: &str) -> Option<&NormalForm> {
        self.section.get(name)
    }

    /// `dim M - dim M/G`.
    pub fn orbit_dim(&self) -> usize {
        self.source.dim().saturating_sub(self.chart.dim())
    }

    fn pullback_map(&self) -> HashMap<String, NormalForm> {
        self.chart.names().into_iter().zip(self.invariants.iter().cloned()).collect()
    }

    /// `f o sigma` for a function `f` on `M`.
    pub fn along_section(&self, f: &NormalForm) -> Result<NormalForm, SymmetryError> {
        Ok(f.subst(&self.section)?)
    }

    /// `h o pi` for a function `h` on `M/G`.
    pub fn pull_function(&self, h: &NormalForm) -> Result<NormalForm, SymmetryError> {
        Ok(h.subst(&self.pullback_map())?)
    }

    /// `pi^* theta = sum_a theta_a(pi) d(pi^a)`.
    pub fn pullback(&self, theta: &OneForm) -> Result<OneForm, SymmetryError> {
        if !theta.chart().same(&self.chart) {
            return Err(SymmetryError::Geom(geomcore::GeomError::ChartMismatch));
        }
        let map = self.pullback_map();
        let mut out = OneForm::zero(&self.source);
        for (c, inv) in theta.coeffs().iter().zip(&self.invariants) {
            if c.is_zero() {
                continue;
            }
            let pulled = c.subst(&map)?;
            out = out.add(&OneForm::differential(&self.source, inv).scale(&pulled));
        }
        Ok(out)
    }

    /// `d pi (Y)` along the cross-section, in quotient coordinates.
    pub fn pushforward(&self, y: &VectorField) -> Result<VectorField, SymmetryError> {
        let coeffs = self
            .invariants
            .iter()
            .map(|inv| self.along_section(&y.apply(inv)))
            .collect::<Result<Vec<_>, _>>()?;
        self.check_on_quotient(&coeffs, &format!("dπ({y})"))?;
        Ok(VectorField::new(&self.chart, coeffs)?)
    }

    fn check_on_quotient(&self, fs: &[NormalForm], what: &str) -> Result<(), SymmetryError> {
        let names: BTreeSet<String> = self.chart.names().into_iter().collect();
        for f in fs {
            if let Some(v) = f.free_vars().into_iter().find(|v| !names.contains(v)) {
                return Err(SymmetryError::CrossSection(format!(
                    "{what} still depends on `{v}` after substituting the cross-section"
                )));
            }
        }
        Ok(())
    }

    /// The invariants are annihilated by `Γ`, independent of rank
    /// `dim M - dim Γ`, and `pi o sigma = id`.
    pub fn verify(&self, gamma: &SymmetryAlgebra, ctx: &Ctx) -> Result<(), SymmetryError> {
        for (a, inv) in self.invariants.iter().enumerate() {
            for (i, x) in gamma.generators().iter().enumerate() {
                if !x.chart().same(&self.source) {
                    return Err(SymmetryError::Geom(geomcore::GeomError::ChartMismatch));
                }
                let xi = x.apply(inv);
                if !ctx.is_zero(&xi) {
                    return Err(SymmetryError::Invariant(format!(
                        "X{}({}) = {} ≠ 0 for {}",
                        i + 1,
                        inv.to_expr(),
                        xi.to_expr(),
                        self.chart.name(a)
                    )));
                }
            }
        }
        let expected = self.source.dim().checked_sub(gamma.dim()).ok_or_else(|| {
            SymmetryError::Invariant(format!("dim Γ = {} exceeds dim M = {}", gamma.dim(), self.source.dim()))
        })?;
        if self.invariants.len() != expected {
            return Err(SymmetryError::Invariant(format!(
                "{} invariants given, dim M - dim Γ = {expected}",
                self.invariants.len()
            )));
        }
        let jac: Matrix = self
            .invariants
            .iter()
            .map(|f| OneForm::differential(&self.source, f).coeffs().to_vec())
            .collect();
        let rank = generic_rank(&jac, ctx);
        if rank.undecided {
            return Err(SymmetryError::Undecided("rank of the invariant differentials".into()));
        }
        if rank.rank != expected {
            return Err(SymmetryError::Invariant(format!(
                "the invariant differentials have rank {}, expected {expected}",
                rank.rank
            )));
        }
        for (a, inv) in self.invariants.iter().enumerate() {
            let back = self.along_section(inv)?;
            let w = NormalForm::var(self.chart.name(a));
            if !ctx.equal(&back, &w) {
                return Err(SymmetryError::CrossSection(format!(
                    "π∘σ is not the identity: {} ∘ σ = {}",
                    self.chart.name(a),
                    back.to_expr()
                )));
            }
        }
        Ok(())
    }
}

/// A constructed and verified quotient system.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub data: QuotientData,
    /// `omega / G` on the quotient chart.
    pub system: PfaffianSystem,
    /// `V / G = d pi (V)`.
    pub distribution: Distribution,
}

impl Quotient {
    /// Read the quotient as a control system `y' = h(t, y, v)`. Requires the
    /// reduced generators to have the shape `dy^i - h^i dt`.
    pub fn control_system(&self) -> Result<ControlSystem, SymmetryError> {
        control_system_of(&self.system)
    }
}

/// Read a Pfaffian system `dy^i - h^i dt` on a control chart as `y' = h`.
pub fn control_system_of(p: &PfaffianSystem) -> Result<ControlSystem, SymmetryError> {
    let chart = p.chart();
    let t = chart
        .time_index()
        .ok_or_else(|| SymmetryError::Input("the quotient has no time coordinate".into()))?;
    let states = chart.states();
    let rref = p.rref();
    if rref.rank() != states.len() {
        return Err(SymmetryError::Input(format!(
            "{} forms for {} states",
            rref.rank(),
            states.len()
        )));
    }
    let mut rhs = vec![NormalForm::zero(); states.len()];
    for (row, &pivot) in rref.rows.iter().zip(&rref.pivots) {
        let slot = states
            .iter()
            .position(|&s| s == pivot)
            .ok_or_else(|| SymmetryError::Input(format!("a form is solved for {}", chart.name(pivot))))?;
        for (j, c) in row.iter().enumerate() {
            if j != pivot && j != t && !p.ctx().is_zero(c) {
                return Err(SymmetryError::Input(format!(
                    "the form for {} involves d{}",
                    chart.name(pivot),
                    chart.name(j)
                )));
            }
        }
        rhs[slot] = row[t].neg();
    }
    Ok(ControlSystem::new(chart, rhs)?)
}

/// Outcome of [`quotient_verify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientCheck {
    /// Generators of `Q` whose pullback leaves the span of `P`.
    pub failures: Vec<String>,
    pub rank: usize,
    pub expected_rank: usize,
}

impl QuotientCheck {
    pub fn holds(&self) -> bool {
        self.failures.is_empty() && self.rank == self.expected_rank
    }
}

impl fmt::Display for QuotientCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds() {
            return write!(f, "π^*Q ⊂ P, rank {}", self.rank);
        }
        let mut parts = self.failures.clone();
        if self.rank != self.expected_rank {
            parts.push(format!("rank {} (expected {})", self.rank, self.expected_rank));
        }
        write!(f, "{}", parts.join("; "))
    }
}

/// Every generator of `Q` pulls back into the span of `P`, and
/// `rank Q = rank P - dim Γ`.
pub fn quotient_verify(
    p: &PfaffianSystem,
    pi: &QuotientData,
    q: &PfaffianSystem,
) -> Result<QuotientCheck, SymmetryError> {
    if !p.chart().same(pi.source()) || !q.chart().same(pi.chart()) {
        return Err(SymmetryError::Geom(geomcore::GeomError::ChartMismatch));
    }
    let mut failures = Vec::new();
    for theta in q.forms() {
        let pulled = pi.pullback(&theta)?;
        if !in_span(p.rref(), pulled.coeffs(), p.ctx(), &format!("π^*({theta})"))? {
            failures.push(format!("π^*({theta}) ∉ P"));
        }
    }
    Ok(QuotientCheck {
        failures,
        rank: q.rank(),
        expected_rank: p.rank().saturating_sub(pi.orbit_dim()),
    })
}

/// Build `P / G`: push `ann P` forward along the cross-section, take the
/// annihilator on the quotient chart, and verify the result.
pub fn quotient_construct(
    p: &PfaffianSystem,
    gamma: &SymmetryAlgebra,
    data: &QuotientData,
) -> Result<Quotient, SymmetryError> {
    if !p.chart().same(data.source()) {
        return Err(SymmetryError::Geom(geomcore::GeomError::ChartMismatch));
    }
    let ctx = p.ctx();
    data.verify(gamma, ctx)?;
    let pushed = p
        .annihilator()
        .basis()
        .iter()
        .map(|y| data.pushforward(y))
        .collect::<Result<Vec<_>, _>>()?;
    let distribution = Distribution::new(data.chart(), &pushed, ctx)?;
    let mut system = distribution.annihilator();
    if let Some(t) = data.chart().time_index() {
        let dt = OneForm::coordinate(data.chart(), t);
        system = system.clone().with_independence(dt).unwrap_or(system);
    }
    let check = quotient_verify(p, data, &system)?;
    if !check.holds() {
        return Err(SymmetryError::Verification(check.to_string()));
    }
    if !data.candidates.is_empty() {
        let cand = PfaffianSystem::new(data.chart(), &data.candidates, ctx)?;
        let check = quotient_verify(p, data, &cand)?;
        if !check.holds() {
            return Err(SymmetryError::Verification(format!("supplied quotient generators: {check}")));
        }
        if !cand.span_eq(&system) {
            return Err(SymmetryError::Verification(
                "supplied quotient generators span a different system".into(),
            ));
        }
    }
    Ok(Quotient {
        data: data.clone(),
        system,
        distribution,
    })
}
