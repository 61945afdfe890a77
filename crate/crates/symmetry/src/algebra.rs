//! Symmetry algebras, the infinitesimal symmetry test, strong
//! transversality and control admissibility.

use std::fmt;

use geomcore::linalg::{generic_rank, nullspace, reduce};
use geomcore::{Ctx, Distribution, Matrix, PfaffianSystem, Role, Rref, VectorField};
use num_rational::BigRational;
use symexpr::{Equality, NormalForm};

use crate::SymmetryError;

/// `table[i][j][k] = c^k_ij` with `[X_i, X_j] = sum_k c^k_ij X_k`.
pub type StructureConstants = Vec<Vec<Vec<BigRational>>>;

/// A finite-dimensional algebra of vector fields on one chart.
#[derive(Clone, Debug)]
pub struct SymmetryAlgebra {
    generators: Vec<VectorField>,
    table: Option<StructureConstants>,
}

impl SymmetryAlgebra {
    pub fn new(generators: Vec<VectorField>) -> Result<SymmetryAlgebra, SymmetryError> {
        if let Some(first) = generators.first() {
            if generators.iter().any(|x| !x.chart().same(first.chart())) {
                return Err(SymmetryError::Input("generators live on different charts".into()));
            }
        }
        Ok(SymmetryAlgebra {
            generators,
            table: None,
        })
    }

    /// Attach a structure-constant table; checked by [`SymmetryAlgebra::verify_closure`].
    pub fn with_table(mut self, table: StructureConstants) -> Result<SymmetryAlgebra, SymmetryError> {
        let r = self.generators.len();
        let well_formed = table.len() == r && table.iter().all(|row| row.len() == r && row.iter().all(|c| c.len() == r));
        if !well_formed {
            return Err(SymmetryError::Input(format!("structure table must be {r} x {r} x {r}")));
        }
        self.table = Some(table);
        Ok(self)
    }

    /// Parse generators on `chart`.
    pub fn parse(chart: &geomcore::Chart, sources: &[&str]) -> Result<SymmetryAlgebra, SymmetryError> {
        let gens = sources
            .iter()
            .map(|s| VectorField::parse(chart, s))
            .collect::<Result<Vec<_>, _>>()?;
        SymmetryAlgebra::new(gens)
    }

    pub fn generators(&self) -> &[VectorField] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn table(&self) -> Option<&StructureConstants> {
        self.table.as_ref()
    }

    /// Compute the structure constants, failing when some bracket leaves
    /// the constant-coefficient span. When a table is attached it must
    /// agree with the computed one.
    pub fn verify_closure(&self, ctx: &Ctx) -> Result<StructureConstants, SymmetryError> {
        let r = self.dim();
        let mut out = vec![vec![vec![BigRational::from_integer(0.into()); r]; r]; r];
        for i in 0..r {
            for j in i + 1..r {
                let b = self.generators[i].bracket(&self.generators[j])?;
                let c = self.constant_coordinates(&b, ctx).ok_or_else(|| {
                    SymmetryError::NotClosed(format!("[X{}, X{}] = {b} is not a constant combination", i + 1, j + 1))
                })?;
                for (k, ck) in c.into_iter().enumerate() {
                    out[j][i][k] = -ck.clone();
                    out[i][j][k] = ck;
                }
            }
        }
        if let Some(t) = &self.table {
            if *t != out {
                return Err(SymmetryError::NotClosed(
                    "the supplied structure constants disagree with the brackets".into(),
                ));
            }
        }
        Ok(out)
    }

    /// Constant coefficients `c` with `x = sum c_k X_k`, if they exist.
    fn constant_coordinates(&self, x: &VectorField, ctx: &Ctx) -> Option<Vec<BigRational>> {
        let r = self.dim();
        let n = x.chart().dim();
        let m: Matrix = (0..n)
            .map(|row| {
                let mut line: Vec<NormalForm> = self.generators.iter().map(|g| g.coeff(row).clone()).collect();
                line.push(x.coeff(row).neg());
                line
            })
            .collect();
        if x.is_generically_zero(ctx) {
            return Some(vec![BigRational::from_integer(0.into()); r]);
        }
        let null = nullspace(&m, r + 1, ctx);
        let v = null.into_iter().find(|v| !ctx.is_zero(&v[r]))?;
        let scale = v[r].clone();
        let coeffs: Vec<NormalForm> = v[..r].iter().map(|c| c.div(&scale)).collect();
        coeffs.iter().map(NormalForm::as_constant).collect()
    }
}

impl fmt::Display for SymmetryAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.generators.iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

/// Row-span membership that distinguishes an undecided zero test from a
/// genuine failure.
pub(crate) fn in_span(rref: &Rref, coeffs: &[NormalForm], ctx: &Ctx, what: &str) -> Result<bool, SymmetryError> {
    let mut undecided = false;
    for e in reduce(rref, coeffs) {
        match ctx.zero_test(&e) {
            Equality::True | Equality::ProbablyEqual => {}
            Equality::False => return Ok(false),
            Equality::Undecided => undecided = true,
        }
    }
    if undecided {
        Err(SymmetryError::Undecided(what.to_string()))
    } else {
        Ok(true)
    }
}

/// `X` is an infinitesimal symmetry of `P`: every `L_X theta` lies in the
/// span of the generators.
pub fn is_infinitesimal_symmetry(x: &VectorField, p: &PfaffianSystem) -> Result<bool, SymmetryError> {
    if !x.chart().same(p.chart()) {
        return Err(SymmetryError::Geom(geomcore::GeomError::ChartMismatch));
    }
    for theta in p.forms() {
        let l = theta.lie_derivative(x)?;
        if !in_span(p.rref(), l.coeffs(), p.ctx(), &format!("L_X ({theta})"))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First derived bundle `ann I^(1) = V^(1)` of `V = ann P`.
pub(crate) fn first_derived(p: &PfaffianSystem) -> Result<Distribution, SymmetryError> {
    let v = p.annihilator();
    Ok(v.extended(&v.pairwise_brackets())?)
}

/// `span Γ ∩ ann I^(1) = 0`: stacking `Γ` with `V^(1)` adds exactly
/// `dim Γ` to the rank.
pub fn is_strongly_transverse(gamma: &SymmetryAlgebra, p: &PfaffianSystem) -> Result<bool, SymmetryError> {
    if gamma.is_empty() {
        return Ok(true);
    }
    let v1 = first_derived(p)?;
    let stacked = v1.extended(gamma.generators())?;
    if stacked.undecided() {
        return Err(SymmetryError::Undecided("rank of V^(1) + Γ".into()));
    }
    Ok(stacked.rank() == v1.rank() + gamma.dim())
}

/// Itemized control-admissibility verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Admissibility {
    /// Every generator is an infinitesimal symmetry.
    pub symmetry: bool,
    /// No generator has a `D_t` component.
    pub preserves_time: bool,
    /// Generic rank of the projection of `Γ` to the `(t, x)` coordinates.
    pub projection_rank: usize,
    pub dim: usize,
    /// Generic pointwise independence of `Γ`, the checkable part of
    /// freeness and regularity.
    pub independent: bool,
}

impl Admissibility {
    pub fn projection_ok(&self) -> bool {
        self.projection_rank == self.dim
    }

    pub fn admissible(&self) -> bool {
        self.symmetry && self.preserves_time && self.projection_ok() && self.independent
    }

    /// One line per item, in the order of the definition.
    pub fn items(&self) -> Vec<(String, bool)> {
        vec![
            ("infinitesimal symmetries".into(), self.symmetry),
            (
                "free and regular (partially verified: generic pointwise independence)".into(),
                self.independent,
            ),
            ("preserves t (no D_t components)".into(), self.preserves_time),
            (
                format!("rank dπ(Γ) = {} (dim Γ = {})", self.projection_rank, self.dim),
                self.projection_ok(),
            ),
        ]
    }
}

impl fmt::Display for Admissibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}",
            if self.admissible() {
                "control admissible (partially verified)"
            } else {
                "not control admissible"
            }
        )?;
        for (name, ok) in self.items() {
            writeln!(f, "  {name}: {}", if ok { "pass" } else { "fail" })?;
        }
        Ok(())
    }
}

/// Check the control-admissibility items that are decidable here.
pub fn is_control_admissible(gamma: &SymmetryAlgebra, p: &PfaffianSystem) -> Result<Admissibility, SymmetryError> {
    let chart = p.chart();
    let t = chart
        .time_index()
        .ok_or_else(|| SymmetryError::Input("control admissibility needs a time coordinate".into()))?;
    let ctx = p.ctx();
    let mut symmetry = true;
    for x in gamma.generators() {
        if !x.chart().same(chart) {
            return Err(SymmetryError::Geom(geomcore::GeomError::ChartMismatch));
        }
        symmetry &= is_infinitesimal_symmetry(x, p)?;
    }
    let preserves_time = gamma.generators().iter().all(|x| ctx.is_zero(x.coeff(t)));
    let base = chart.indices_with(|r| matches!(r, Role::Time | Role::State));
    let full: Matrix = gamma.generators().iter().map(|x| x.coeffs().to_vec()).collect();
    let projected: Matrix = gamma
        .generators()
        .iter()
        .map(|x| base.iter().map(|&i| x.coeff(i).clone()).collect())
        .collect();
    let rank_of = |m: &Matrix, what: &str| -> Result<usize, SymmetryError> {
        if m.is_empty() {
            return Ok(0);
        }
        let r = generic_rank(m, ctx);
        if r.undecided {
            return Err(SymmetryError::Undecided(what.into()));
        }
        Ok(r.rank)
    };
    let projection_rank = rank_of(&projected, "rank of dπ(Γ)")?;
    let independent = rank_of(&full, "rank of Γ")? == gamma.dim();
    Ok(Admissibility {
        symmetry,
        preserves_time,
        projection_rank,
        dim: gamma.dim(),
        independent,
    })
}
