//! Fundamental bundles, first-integral oracles and the construction of
//! contact coordinates for Goursat bundles.

use std::collections::BTreeMap;
use std::fmt;

use flags::FlagAnalysis;
use geomcore::linalg::generic_rank;
use geomcore::{Chart, Distribution, OneForm, PfaffianSystem, VectorField};
use symexpr::NormalForm;

use crate::bundle::is_goursat_bundle;
use crate::signature::GoursatSignature;
use crate::GoursatError;

/// `Pi^0 = Char(V^(1))_0 ⊂ Pi^1 ⊂ ... ⊂ Pi^(k-1)`.
#[derive(Clone, Debug)]
pub struct FundamentalBundle {
    pub steps: Vec<Distribution>,
    pub integrable: bool,
    /// `dim M - rank Pi^(k-1)`; equals 2 for a Goursat bundle.
    pub corank: usize,
}

impl FundamentalBundle {
    pub fn last(&self) -> &Distribution {
        self.steps.last().expect("at least Pi^0")
    }
}

/// Fundamental bundle from a flag analysis, a first integral `x` of
/// `Char V^(k-1)` and a section `Z` of `V` with `Z(x) = 1`.
pub fn fundamental_bundle_from(
    analysis: &FlagAnalysis,
    x: &NormalForm,
    z: &VectorField,
) -> Result<FundamentalBundle, GoursatError> {
    let v = analysis.flag.step(0);
    let ctx = v.ctx();
    let k = analysis.derived_length();
    if k == 0 {
        return Err(GoursatError::Structure("derived length 0".into()));
    }
    if !v.contains(z) {
        return Err(GoursatError::Input(format!("Z = {z} is not a section of V")));
    }
    if !ctx.equal(&z.apply(x), &NormalForm::one()) {
        return Err(GoursatError::Input(format!("Z(x) = {} is not 1", z.apply(x).to_expr())));
    }
    let n = v.chart().dim();
    let mut steps = vec![analysis.inchar(1).clone()];
    for _ in 0..k - 1 {
        let cur = steps.last().unwrap();
        let brackets = cur.basis().iter().map(|p| p.bracket(z)).collect::<Result<Vec<_>, _>>()?;
        let next = cur.extended(&brackets)?;
        if next.rank() + 2 > n {
            return Err(GoursatError::Structure(format!(
                "Pi^{} has rank {} > dim M - 2 = {}",
                steps.len(),
                next.rank(),
                n.saturating_sub(2)
            )));
        }
        steps.push(next);
    }
    let last = steps.last().unwrap();
    Ok(FundamentalBundle {
        integrable: last.is_frobenius(),
        corank: n - last.rank(),
        steps,
    })
}

/// Fundamental bundle of `V` for the given `x` and `Z`.
pub fn fundamental_bundle(v: &Distribution, x: &NormalForm, z: &VectorField) -> Result<FundamentalBundle, GoursatError> {
    let a = flags::analyze(v)?;
    fundamental_bundle_from(&a, x, z)
}

/// User-supplied candidate first integrals, keyed by bundle tag:
/// `order<j>` for `Char(V^(j))_{j-1}` modulo `Xi^(j)`, `resolvent`,
/// `source` (the function `x` of the fundamental-bundle branch) and
/// `fundamental`. Candidates are always verified before use.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FirstIntegralOracle {
    entries: BTreeMap<String, Vec<NormalForm>>,
}

impl FirstIntegralOracle {
    pub fn new() -> FirstIntegralOracle {
        FirstIntegralOracle::default()
    }

    pub fn with(mut self, tag: &str, candidates: Vec<NormalForm>) -> FirstIntegralOracle {
        self.insert(tag, candidates);
        self
    }

    /// Candidates given as expression sources.
    pub fn with_sources(self, tag: &str, sources: &[&str]) -> Result<FirstIntegralOracle, GoursatError> {
        let c = sources
            .iter()
            .map(|s| symexpr::nf(s).map_err(geomcore::GeomError::from))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.with(tag, c))
    }

    pub fn insert(&mut self, tag: &str, candidates: Vec<NormalForm>) {
        self.entries.entry(tag.to_string()).or_default().extend(candidates);
    }

    pub fn get(&self, tag: &str) -> Option<&[NormalForm]> {
        self.entries.get(tag).map(Vec::as_slice)
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Oracle tag for fundamental functions of order `j`.
pub fn order_tag(j: usize) -> String {
    format!("order{j}")
}

/// One chain `z_0, ..., z_j` of contact coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub order: usize,
    pub coords: Vec<NormalForm>,
}

/// Which variant of the construction produced the coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Procedure {
    /// Resolvent bundle (`Delta_k > 1`).
    A,
    /// Fundamental bundle (`Delta_k = 1`).
    B,
}

/// Contact coordinates `x, z^c_s` with the section `Z` used to build them.
#[derive(Clone, Debug)]
pub struct ContactCoordinates {
    pub signature: GoursatSignature,
    pub x: NormalForm,
    pub z: VectorField,
    /// Chains in ascending order.
    pub chains: Vec<Chain>,
    pub procedure: Procedure,
}

impl ContactCoordinates {
    /// `x` followed by every chain coordinate.
    pub fn functions(&self) -> Vec<NormalForm> {
        let mut out = vec![self.x.clone()];
        for c in &self.chains {
            out.extend(c.coords.iter().cloned());
        }
        out
    }

    /// `z^c_s` with 1-based chain index.
    pub fn coord(&self, chain: usize, s: usize) -> &NormalForm {
        &self.chains[chain - 1].coords[s]
    }
}

impl fmt::Display for ContactCoordinates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "x = {}", self.x.to_expr())?;
        writeln!(f, "Z = {}", self.z)?;
        for (c, chain) in self.chains.iter().enumerate() {
            for (s, z) in chain.coords.iter().enumerate() {
                writeln!(f, "z{}_{} = {}", c + 1, s, z.to_expr())?;
            }
        }
        Ok(())
    }
}

fn is_first_integral(bundle: &Distribution, h: &NormalForm) -> bool {
    bundle.basis().iter().all(|x| bundle.ctx().is_zero(&x.apply(h)))
}

fn form_rank(chart: &Chart, forms: &[OneForm], v: &Distribution) -> usize {
    if forms.is_empty() {
        return 0;
    }
    PfaffianSystem::new(chart, forms, v.ctx()).expect("same chart").rank()
}

fn generators(bundle: &Distribution) -> Vec<String> {
    bundle.basis().iter().map(|x| x.to_string()).collect()
}

/// Candidates for a bundle: the oracle entry, or the complementary
/// coordinates when the bundle is spanned by coordinate fields.
fn candidates(tag: &str, bundle: &Distribution, oracle: &FirstIntegralOracle, needed: usize) -> Result<Vec<NormalForm>, GoursatError> {
    if let Some(c) = oracle.get(tag) {
        return Ok(c.to_vec());
    }
    match bundle.annihilator().coordinate_integrals() {
        Some(names) => Ok(names.iter().map(|n| NormalForm::var(n)).collect()),
        None => Err(GoursatError::MissingIntegrals {
            tag: tag.to_string(),
            needed,
            found: 0,
            generators: generators(bundle),
        }),
    }
}

/// Accept `needed` first integrals of `bundle` whose differentials are
/// independent modulo `modulo`.
fn select_integrals(
    tag: &str,
    bundle: &Distribution,
    modulo: &[OneForm],
    needed: usize,
    oracle: &FirstIntegralOracle,
) -> Result<Vec<NormalForm>, GoursatError> {
    let chart = bundle.chart();
    let from_oracle = oracle.get(tag).is_some();
    let mut forms = modulo.to_vec();
    let mut rank = form_rank(chart, &forms, bundle);
    let mut out = Vec::new();
    for h in candidates(tag, bundle, oracle, needed)? {
        if out.len() == needed {
            break;
        }
        if !is_first_integral(bundle, &h) {
            if from_oracle {
                return Err(GoursatError::RejectedCandidate {
                    tag: tag.to_string(),
                    candidate: h.to_expr().to_string(),
                    reason: "not annihilated by the bundle".into(),
                });
            }
            continue;
        }
        forms.push(OneForm::differential(chart, &h));
        let r = form_rank(chart, &forms, bundle);
        if r > rank {
            rank = r;
            out.push(h);
        } else {
            forms.pop();
        }
    }
    if out.len() < needed {
        return Err(GoursatError::MissingIntegrals {
            tag: tag.to_string(),
            needed,
            found: out.len(),
            generators: generators(bundle),
        });
    }
    Ok(out)
}

/// Preference order for the source function: time, then bare chart
/// coordinates, then the printed form.
fn source_key(chart: &Chart, h: &NormalForm) -> (usize, String) {
    let printed = h.to_expr().to_string();
    match chart.index_of(&printed) {
        Some(i) if chart.time_index() == Some(i) => (0, String::new()),
        Some(i) => (1 + i, String::new()),
        None => (usize::MAX, printed),
    }
}

/// `Z = Y / Y(x)` for the first basis field `Y` of `V` with `Y(x) != 0`.
pub fn normalized_section(v: &Distribution, x: &NormalForm) -> Option<VectorField> {
    v.basis().into_iter().find_map(|y| {
        let yx = y.apply(x);
        if v.ctx().is_zero(&yx) {
            None
        } else {
            Some(y.scale(&yx.recip().ok()?))
        }
    })
}

/// Pick the preferred candidate admitting a normalized section.
fn choose_source(v: &Distribution, cands: &[NormalForm]) -> Option<(usize, VectorField)> {
    let chart = v.chart();
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by_key(|&i| source_key(chart, &cands[i]));
    order
        .into_iter()
        .find_map(|i| normalized_section(v, &cands[i]).map(|z| (i, z)))
}

/// Contact coordinates for a Goursat bundle: fundamental functions from the
/// oracle (or from coordinate-spanned bundles), the source `x`, a section
/// `Z` with `Z(x) = 1`, and `z_s = Z^s z_0`. The result is verified.
pub fn procedure_contact(v: &Distribution, oracle: &FirstIntegralOracle) -> Result<ContactCoordinates, GoursatError> {
    let verdict = is_goursat_bundle(v)?;
    if !verdict.is_goursat() {
        return Err(GoursatError::NotGoursat(verdict.to_string().trim_end().to_string()));
    }
    let sig = verdict.signature().expect("Goursat verdict carries a signature").clone();
    let a = &verdict.analysis;
    let k = sig.derived_length();
    let chart = v.chart();
    let mut chains: Vec<Chain> = Vec::new();
    for j in 1..k {
        if sig.rho[j - 1] == 0 {
            continue;
        }
        let xi = a.chars[j].annihilator().forms();
        for h in select_integrals(&order_tag(j), a.inchar(j), &xi, sig.rho[j - 1], oracle)? {
            chains.push(Chain { order: j, coords: vec![h] });
        }
    }
    let (x, z, top, procedure) = if verdict.delta_k() == 1 {
        if k < 2 {
            return Err(GoursatError::Structure(
                "a single chain of order 1 has derived length 1; the fundamental bundle needs k > 1".into(),
            ));
        }
        let char_k1 = &a.chars[k - 1];
        let cands: Vec<NormalForm> = candidates("source", char_k1, oracle, 1)?
            .into_iter()
            .filter(|h| is_first_integral(char_k1, h))
            .collect();
        let (i, z) = choose_source(v, &cands).ok_or_else(|| {
            GoursatError::NoSection(format!(
                "no first integral of Char V^({}) admits a section Z of V with Z(x) = 1; generators {:?}",
                k - 1,
                generators(char_k1)
            ))
        })?;
        let x = cands[i].clone();
        let pi = fundamental_bundle_from(a, &x, &z)?;
        if !pi.integrable || pi.corank != 2 {
            return Err(GoursatError::Structure(format!(
                "fundamental bundle of corank {} is {}",
                pi.corank,
                if pi.integrable { "integrable" } else { "not integrable" }
            )));
        }
        let phi = select_integrals("fundamental", pi.last(), &[OneForm::differential(chart, &x)], 1, oracle)?;
        (x, z, phi, Procedure::B)
    } else {
        let w = verdict.weber.as_ref().expect("Goursat verdict with Delta_k > 1 carries a Weber structure");
        let all = select_integrals("resolvent", &w.resolvent, &[], sig.rho[k - 1] + 1, oracle)?;
        let (i, z) = choose_source(v, &all).ok_or_else(|| {
            GoursatError::NoSection("no resolvent integral admits a section Z of V with Z(x) = 1".into())
        })?;
        let x = all[i].clone();
        let rest = all.into_iter().enumerate().filter(|(j, _)| *j != i).map(|(_, h)| h).collect();
        (x, z, rest, Procedure::A)
    };
    chains.extend(top.into_iter().map(|h| Chain { order: k, coords: vec![h] }));
    for chain in &mut chains {
        for _ in 0..chain.order {
            let next = z.apply(chain.coords.last().unwrap());
            chain.coords.push(next);
        }
    }
    let c = ContactCoordinates {
        signature: sig,
        x,
        z,
        chains,
        procedure,
    };
    let check = verify_contact_coordinates(v, &c);
    if !check.holds() {
        return Err(GoursatError::Verification(check.failures.join("; ")));
    }
    Ok(c)
}

/// Outcome of [`verify_contact_coordinates`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContactCheck {
    /// `Z` is a section of `V`, `Z(x) = 1` and `Z(z_s) = z_{s+1}`.
    pub recursion: bool,
    /// `dx` and every `dz` are generically independent.
    pub independence: bool,
    /// `dz_s - z_{s+1} dx` annihilates `V`.
    pub annihilation: bool,
    pub failures: Vec<String>,
}

impl ContactCheck {
    pub fn holds(&self) -> bool {
        self.recursion && self.independence && self.annihilation
    }
}

/// Check the defining properties of contact coordinates for `V`.
pub fn verify_contact_coordinates(v: &Distribution, c: &ContactCoordinates) -> ContactCheck {
    let ctx = v.ctx();
    let chart = v.chart();
    let mut failures = Vec::new();
    let mut recursion = true;
    if !v.contains(&c.z) {
        recursion = false;
        failures.push("Z is not a section of V".to_string());
    }
    if !ctx.equal(&c.z.apply(&c.x), &NormalForm::one()) {
        recursion = false;
        failures.push("Z(x) != 1".to_string());
    }
    let basis = v.basis();
    let mut annihilation = true;
    let xs: Vec<NormalForm> = basis.iter().map(|y| y.apply(&c.x)).collect();
    for (n, chain) in c.chains.iter().enumerate() {
        for s in 0..chain.coords.len().saturating_sub(1) {
            let (zs, next) = (&chain.coords[s], &chain.coords[s + 1]);
            if !ctx.equal(&c.z.apply(zs), next) {
                recursion = false;
                failures.push(format!("Z(z{}_{s}) != z{}_{}", n + 1, n + 1, s + 1));
            }
            for (y, yx) in basis.iter().zip(&xs) {
                if !ctx.is_zero(&y.apply(zs).sub(&next.mul(yx))) {
                    annihilation = false;
                    failures.push(format!("dz{}_{s} - z{}_{} dx does not annihilate {y}", n + 1, n + 1, s + 1));
                    break;
                }
            }
        }
    }
    let functions = c.functions();
    let jac: Vec<Vec<NormalForm>> = functions
        .iter()
        .map(|f| (0..chart.dim()).map(|i| f.diff(chart.name(i))).collect())
        .collect();
    let report = generic_rank(&jac, ctx);
    let independence = report.rank == functions.len();
    if !independence {
        failures.push(format!(
            "the {} coordinate differentials have generic rank {}",
            functions.len(),
            report.rank
        ));
    }
    ContactCheck {
        recursion,
        independence,
        annihilation,
        failures,
    }
}
