//! Derived flags and Cauchy characteristic bundles.

use geomcore::{Ctx, Distribution, OneForm, VectorField};
use symexpr::NormalForm;

use crate::rdt::RefinedDerivedType;
use crate::FlagError;

/// `V = V^(0) ⊂ V^(1) ⊂ ... ⊂ V^(k)`.
#[derive(Clone, Debug)]
pub struct DerivedFlag {
    pub steps: Vec<Distribution>,
    /// The flag was still growing when the step budget ran out.
    pub truncated: bool,
}

impl DerivedFlag {
    /// Derived length `k`.
    pub fn derived_length(&self) -> usize {
        self.steps.len() - 1
    }

    /// `m_i = rank V^(i)`.
    pub fn ranks(&self) -> Vec<usize> {
        self.steps.iter().map(Distribution::rank).collect()
    }

    pub fn step(&self, i: usize) -> &Distribution {
        &self.steps[i]
    }

    pub fn last(&self) -> &Distribution {
        self.steps.last().expect("a flag has at least one step")
    }
}

/// Pairwise brackets `[X_l, X_j]` of a basis, stored as a full antisymmetric
/// table so they can serve both the Cauchy system and the next derived step.
struct BracketTable {
    basis: Vec<VectorField>,
    table: Vec<Vec<VectorField>>,
}

impl BracketTable {
    fn new(d: &Distribution) -> BracketTable {
        let basis = d.basis();
        let r = basis.len();
        let zero = VectorField::zero(d.chart());
        let mut table = vec![vec![zero; r]; r];
        for l in 0..r {
            for j in l + 1..r {
                let b = basis[l].bracket(&basis[j]).expect("same chart");
                table[j][l] = b.scale(&NormalForm::int(-1));
                table[l][j] = b;
            }
        }
        BracketTable { basis, table }
    }

    fn all(&self) -> Vec<VectorField> {
        let r = self.basis.len();
        let mut out = Vec::new();
        for l in 0..r {
            for j in l + 1..r {
                out.push(self.table[l][j].clone());
            }
        }
        out
    }
}

/// Cauchy bundle from a precomputed bracket table: sections
/// `C = sum c^l X_l` with `theta_a([C, X_j]) = 0` for all `a, j`.
fn char_from_table(d: &Distribution, bt: &BracketTable) -> Distribution {
    let ann: Vec<OneForm> = d.annihilator().forms();
    let r = bt.basis.len();
    if ann.is_empty() {
        return d.clone();
    }
    let mut rows: Vec<Vec<NormalForm>> = Vec::new();
    for j in 0..r {
        for theta in &ann {
            rows.push((0..r).map(|l| theta.eval(&bt.table[l][j])).collect());
        }
    }
    let null = geomcore::linalg::nullspace(&rows, r, d.ctx());
    let fields: Vec<VectorField> = null
        .iter()
        .map(|c| {
            c.iter()
                .zip(&bt.basis)
                .filter(|(ci, _)| !ci.is_zero())
                .fold(VectorField::zero(d.chart()), |acc, (ci, x)| acc.add(&x.scale(ci)))
        })
        .collect();
    Distribution::new(d.chart(), &fields, d.ctx()).expect("same chart")
}

/// `Char V = {X ∈ V : [X, V] ⊆ V}`.
pub fn cauchy_characteristics(d: &Distribution) -> Distribution {
    char_from_table(d, &BracketTable::new(d))
}

/// Derived flag, stopping at stabilization or after `max_steps` steps
/// (default: the chart dimension).
pub fn derived_flag(d: &Distribution, max_steps: Option<usize>) -> Result<DerivedFlag, FlagError> {
    Ok(build(d, max_steps, false)?.0)
}

fn build(
    d: &Distribution,
    max_steps: Option<usize>,
    with_chars: bool,
) -> Result<(DerivedFlag, Vec<Distribution>), FlagError> {
    if d.rank() == 0 {
        return Err(FlagError::Empty);
    }
    let max = max_steps.unwrap_or(d.chart().dim());
    let mut steps = vec![d.clone()];
    let mut chars = Vec::new();
    let mut truncated = false;
    loop {
        let cur = steps.last().unwrap().clone();
        let bt = BracketTable::new(&cur);
        if with_chars {
            chars.push(char_from_table(&cur, &bt));
        }
        let next = cur.extended(&bt.all())?;
        if next.rank() == cur.rank() {
            break;
        }
        if steps.len() > max {
            truncated = true;
            break;
        }
        steps.push(next);
    }
    Ok((DerivedFlag { steps, truncated }, chars))
}

/// Everything the refined derived type is made of.
#[derive(Clone, Debug)]
pub struct FlagAnalysis {
    pub flag: DerivedFlag,
    /// `Char V^(i)` for `0 <= i <= k`.
    pub chars: Vec<Distribution>,
    /// `V^(i-1) ∩ Char V^(i)` for `1 <= i <= k`, stored at index `i - 1`.
    pub intersections: Vec<Distribution>,
    pub rdt: RefinedDerivedType,
    /// The result was confirmed with a second probe seed.
    pub reseeded: bool,
    /// Some zero test was undecided.
    pub undecided: bool,
}

impl FlagAnalysis {
    pub fn ranks(&self) -> Vec<usize> {
        self.flag.ranks()
    }

    pub fn derived_length(&self) -> usize {
        self.flag.derived_length()
    }

    /// `Char(V^(i))_{i-1}` for `1 <= i <= k`.
    pub fn inchar(&self, i: usize) -> &Distribution {
        &self.intersections[i - 1]
    }
}

fn analyze_once(d: &Distribution) -> Result<FlagAnalysis, FlagError> {
    let (flag, chars) = build(d, None, true)?;
    if flag.truncated {
        return Err(FlagError::Truncated(d.chart().dim()));
    }
    let intersections = (1..flag.steps.len())
        .map(|i| flag.steps[i - 1].intersect(&chars[i]))
        .collect::<Result<Vec<_>, _>>()?;
    let m = flag.ranks();
    let chi: Vec<usize> = chars.iter().map(Distribution::rank).collect();
    let inter: Vec<usize> = intersections.iter().map(Distribution::rank).collect();
    let undecided = flag.steps.iter().chain(&chars).chain(&intersections).any(Distribution::undecided);
    Ok(FlagAnalysis {
        rdt: RefinedDerivedType::from_parts(&m, &chi, &inter),
        flag,
        chars,
        intersections,
        reseeded: false,
        undecided,
    })
}

/// Derived flag, Cauchy bundles and refined derived type. When any
/// transcendental coefficient appears the computation is repeated with the
/// next probe seed and the two integer results must agree.
pub fn analyze(d: &Distribution) -> Result<FlagAnalysis, FlagError> {
    let mut a = analyze_once(d)?;
    let transcendental = a.flag.steps.iter().chain(&a.chars).any(Distribution::has_transcendental);
    if transcendental {
        let ctx: Ctx = d.ctx().reseeded(d.ctx().probe.seed.wrapping_add(1));
        let b = analyze_once(&d.with_ctx(&ctx))?;
        if b.rdt != a.rdt {
            return Err(FlagError::Undecided(format!(
                "refined derived type differs between probe seeds: {} vs {}",
                a.rdt, b.rdt
            )));
        }
        a.reseeded = true;
        a.undecided |= b.undecided;
    }
    Ok(a)
}
