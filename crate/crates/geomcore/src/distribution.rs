//! Distributions and Pfaffian systems with canonical reduced bases.
//!
//! Both store their generators in reduced row echelon form: distributions
//! with columns visited in chart order, Pfaffian systems with the one-form
//! column priority of [`Chart::form_column_order`]. Equal spans therefore
//! have equal bases, which keeps printed output stable.

use std::fmt;

use symexpr::NormalForm;

use crate::chart::Chart;
use crate::error::GeomError;
use crate::field::{OneForm, VectorField};
use crate::linalg::{in_row_span, nullspace_of_rref, reduce, rref, Ctx, Rref};

/// A distribution given by a reduced basis of vector fields.
#[derive(Clone)]
pub struct Distribution {
    chart: Chart,
    rref: Rref,
    ctx: Ctx,
}

impl Distribution {
    /// Span of `fields`, rebased.
    pub fn new(chart: &Chart, fields: &[VectorField], ctx: &Ctx) -> Result<Distribution, GeomError> {
        for f in fields {
            if !f.chart().same(chart) {
                return Err(GeomError::ChartMismatch);
            }
        }
        let rows = fields.iter().map(|f| f.coeffs().to_vec()).collect();
        Ok(Distribution::from_rows(chart, rows, ctx))
    }

    pub fn from_rows(chart: &Chart, rows: Vec<Vec<NormalForm>>, ctx: &Ctx) -> Distribution {
        let order: Vec<usize> = (0..chart.dim()).collect();
        Distribution {
            chart: chart.clone(),
            rref: rref(rows, &order, ctx),
            ctx: *ctx,
        }
    }

    /// The zero distribution.
    pub fn zero(chart: &Chart, ctx: &Ctx) -> Distribution {
        Distribution::from_rows(chart, Vec::new(), ctx)
    }

    /// The whole tangent bundle.
    pub fn full(chart: &Chart, ctx: &Ctx) -> Distribution {
        let rows = (0..chart.dim()).map(|i| VectorField::coordinate(chart, i).coeffs().to_vec()).collect();
        Distribution::from_rows(chart, rows, ctx)
    }

    /// Span of coordinate fields.
    pub fn coordinate(chart: &Chart, names: &[&str], ctx: &Ctx) -> Result<Distribution, GeomError> {
        let fields = names
            .iter()
            .map(|n| VectorField::coordinate_named(chart, n))
            .collect::<Result<Vec<_>, _>>()?;
        Distribution::new(chart, &fields, ctx)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn rank(&self) -> usize {
        self.rref.rank()
    }

    pub fn rref(&self) -> &Rref {
        &self.rref
    }

    /// Some zero test during reduction was undecided.
    pub fn undecided(&self) -> bool {
        self.rref.undecided
    }

    pub fn basis(&self) -> Vec<VectorField> {
        self.rref
            .rows
            .iter()
            .map(|r| VectorField::new(&self.chart, r.clone()).expect("row length matches chart"))
            .collect()
    }

    pub fn has_transcendental(&self) -> bool {
        self.rref.rows.iter().flatten().any(NormalForm::has_transcendental)
    }

    pub fn contains(&self, x: &VectorField) -> bool {
        in_row_span(&self.rref, x.coeffs(), &self.ctx)
    }

    /// Remainder of `x` after reduction by the basis.
    pub fn reduce(&self, x: &VectorField) -> VectorField {
        VectorField::new(&self.chart, reduce(&self.rref, x.coeffs())).expect("length matches")
    }

    pub fn contains_all(&self, other: &Distribution) -> bool {
        other.basis().iter().all(|x| self.contains(x))
    }

    pub fn span_eq(&self, other: &Distribution) -> bool {
        self.rank() == other.rank() && self.contains_all(other)
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.chart.dim()
    }

    pub fn sum(&self, other: &Distribution) -> Result<Distribution, GeomError> {
        if !self.chart.same(&other.chart) {
            return Err(GeomError::ChartMismatch);
        }
        let mut rows = self.rref.rows.clone();
        rows.extend(other.rref.rows.iter().cloned());
        Ok(Distribution::from_rows(&self.chart, rows, &self.ctx))
    }

    /// Add generators.
    pub fn extended(&self, fields: &[VectorField]) -> Result<Distribution, GeomError> {
        let extra = Distribution::new(&self.chart, fields, &self.ctx)?;
        self.sum(&extra)
    }

    /// `A ∩ B = ann(ann A + ann B)`.
    pub fn intersect(&self, other: &Distribution) -> Result<Distribution, GeomError> {
        let a = self.annihilator();
        let b = other.annihilator();
        Ok(a.sum(&b)?.annihilator())
    }

    /// One-forms vanishing on the distribution.
    pub fn annihilator(&self) -> PfaffianSystem {
        let null = nullspace_of_rref(&self.rref, self.chart.dim());
        PfaffianSystem::from_rows(&self.chart, null, &self.ctx)
    }

    /// All brackets `[X_i, X_j]`, `i < j`, of the basis.
    pub fn pairwise_brackets(&self) -> Vec<VectorField> {
        let b = self.basis();
        let mut out = Vec::new();
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                out.push(b[i].bracket(&b[j]).expect("same chart"));
            }
        }
        out
    }

    /// Involutive: every bracket of basis fields stays in the span.
    pub fn is_frobenius(&self) -> bool {
        self.pairwise_brackets().iter().all(|x| self.contains(x))
    }

    /// Same distribution with another probe context.
    pub fn with_ctx(&self, ctx: &Ctx) -> Distribution {
        Distribution::from_rows(&self.chart, self.rref.rows.clone(), ctx)
    }
}

impl PartialEq for Distribution {
    fn eq(&self, other: &Self) -> bool {
        self.chart.same(&other.chart) && self.span_eq(other)
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.basis().iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A Pfaffian system given by a reduced basis of one-forms, with an
/// optional independence condition.
#[derive(Clone)]
pub struct PfaffianSystem {
    chart: Chart,
    rref: Rref,
    ctx: Ctx,
    independence: Option<OneForm>,
}

impl PfaffianSystem {
    pub fn new(chart: &Chart, forms: &[OneForm], ctx: &Ctx) -> Result<PfaffianSystem, GeomError> {
        for f in forms {
            if !f.chart().same(chart) {
                return Err(GeomError::ChartMismatch);
            }
        }
        let rows = forms.iter().map(|f| f.coeffs().to_vec()).collect();
        Ok(PfaffianSystem::from_rows(chart, rows, ctx))
    }

    pub fn from_rows(chart: &Chart, rows: Vec<Vec<NormalForm>>, ctx: &Ctx) -> PfaffianSystem {
        PfaffianSystem {
            chart: chart.clone(),
            rref: rref(rows, &chart.form_column_order(), ctx),
            ctx: *ctx,
            independence: None,
        }
    }

    /// Declare an independence condition; it must not vanish on the
    /// annihilator.
    pub fn with_independence(mut self, form: OneForm) -> Result<PfaffianSystem, GeomError> {
        let ann = self.annihilator();
        if ann.basis().iter().all(|x| self.ctx.is_zero(&form.eval(x))) {
            return Err(GeomError::Dimension(
                "independence form vanishes on the annihilator".into(),
            ));
        }
        self.independence = Some(form);
        Ok(self)
    }

    pub fn independence(&self) -> Option<&OneForm> {
        self.independence.as_ref()
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn rank(&self) -> usize {
        self.rref.rank()
    }

    pub fn rref(&self) -> &Rref {
        &self.rref
    }

    pub fn undecided(&self) -> bool {
        self.rref.undecided
    }

    pub fn forms(&self) -> Vec<OneForm> {
        self.rref
            .rows
            .iter()
            .map(|r| OneForm::new(&self.chart, r.clone()).expect("row length matches chart"))
            .collect()
    }

    pub fn contains(&self, theta: &OneForm) -> bool {
        in_row_span(&self.rref, theta.coeffs(), &self.ctx)
    }

    pub fn span_eq(&self, other: &PfaffianSystem) -> bool {
        self.rank() == other.rank() && other.forms().iter().all(|f| self.contains(f))
    }

    pub fn sum(&self, other: &PfaffianSystem) -> Result<PfaffianSystem, GeomError> {
        if !self.chart.same(&other.chart) {
            return Err(GeomError::ChartMismatch);
        }
        let mut rows = self.rref.rows.clone();
        rows.extend(other.rref.rows.iter().cloned());
        Ok(PfaffianSystem::from_rows(&self.chart, rows, &self.ctx))
    }

    pub fn intersect(&self, other: &PfaffianSystem) -> Result<PfaffianSystem, GeomError> {
        Ok(self.annihilator().sum(&other.annihilator())?.annihilator())
    }

    /// Vector fields annihilated by every form.
    pub fn annihilator(&self) -> Distribution {
        let null = nullspace_of_rref(&self.rref, self.chart.dim());
        Distribution::from_rows(&self.chart, null, &self.ctx)
    }

    /// `dI ⊂ I`, tested through involutivity of the annihilator.
    pub fn is_frobenius(&self) -> bool {
        self.annihilator().is_frobenius()
    }

    /// Coordinates `x` such that `dx` is a basis form, when the whole system
    /// is spanned by coordinate differentials.
    pub fn coordinate_integrals(&self) -> Option<Vec<String>> {
        let mut out = Vec::new();
        for (row, &p) in self.rref.rows.iter().zip(&self.rref.pivots) {
            if row.iter().enumerate().any(|(j, e)| j != p && !e.is_zero()) {
                return None;
            }
            out.push(self.chart.name(p).to_string());
        }
        Some(out)
    }
}

impl PartialEq for PfaffianSystem {
    fn eq(&self, other: &Self) -> bool {
        self.chart.same(&other.chart) && self.span_eq(other)
    }
}

impl fmt::Display for PfaffianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.forms().iter().map(|x| x.to_string()).collect();
        write!(f, "<{}>", items.join(", "))
    }
}

impl fmt::Debug for PfaffianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
