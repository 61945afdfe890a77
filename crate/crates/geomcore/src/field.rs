//! Vector fields, one-forms and two-forms in coordinates.

use std::collections::HashMap;
use std::fmt;

use symexpr::{Expr, NormalForm};

use crate::chart::Chart;
use crate::error::GeomError;
use crate::linalg::Ctx;

/// `sum_i X^i d/dx^i`.
#[derive(Clone, PartialEq)]
pub struct VectorField {
    chart: Chart,
    coeffs: Vec<NormalForm>,
}

impl VectorField {
    pub fn new(chart: &Chart, coeffs: Vec<NormalForm>) -> Result<VectorField, GeomError> {
        if coeffs.len() != chart.dim() {
            return Err(GeomError::Length {
                expected: chart.dim(),
                got: coeffs.len(),
            });
        }
        Ok(VectorField {
            chart: chart.clone(),
            coeffs,
        })
    }

    pub fn zero(chart: &Chart) -> VectorField {
        VectorField {
            chart: chart.clone(),
            coeffs: vec![NormalForm::zero(); chart.dim()],
        }
    }

    /// The coordinate field `d/dx^i`.
    pub fn coordinate(chart: &Chart, i: usize) -> VectorField {
        let mut v = VectorField::zero(chart);
        v.coeffs[i] = NormalForm::one();
        v
    }

    pub fn coordinate_named(chart: &Chart, name: &str) -> Result<VectorField, GeomError> {
        Ok(VectorField::coordinate(chart, chart.require(name)?))
    }

    /// From `(coordinate, coefficient source)` pairs.
    pub fn from_pairs(chart: &Chart, pairs: &[(&str, &str)]) -> Result<VectorField, GeomError> {
        let mut v = VectorField::zero(chart);
        for (n, src) in pairs {
            let i = chart.require(n)?;
            v.coeffs[i] = v.coeffs[i].add(&symexpr::nf(src)?);
        }
        Ok(v)
    }

    /// Parse a vector field written with symbols `D_<coord>`, e.g.
    /// `D_t + x2*D_x1`.
    pub fn parse(chart: &Chart, src: &str) -> Result<VectorField, GeomError> {
        let coeffs = linear_in_symbols(chart, &symexpr::nf(src)?, "D_", src, "D_<coord>")?;
        VectorField::new(chart, coeffs)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn coeffs(&self) -> &[NormalForm] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &NormalForm {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(NormalForm::is_zero)
    }

    pub fn is_generically_zero(&self, ctx: &Ctx) -> bool {
        self.coeffs.iter().all(|c| ctx.is_zero(c))
    }

    /// `X(h) = sum_i X^i dh/dx^i`.
    pub fn apply(&self, h: &NormalForm) -> NormalForm {
        let mut acc = NormalForm::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = h.diff(self.chart.name(i));
            if !d.is_zero() {
                acc = acc.add(&c.mul(&d));
            }
        }
        acc
    }

    /// `[X, Y]^i = X(Y^i) - Y(X^i)`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField, GeomError> {
        if !self.chart.same(&other.chart) {
            return Err(GeomError::ChartMismatch);
        }
        let coeffs = (0..self.chart.dim())
            .map(|i| self.apply(&other.coeffs[i]).sub(&other.apply(&self.coeffs[i])))
            .collect();
        Ok(VectorField {
            chart: self.chart.clone(),
            coeffs,
        })
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.add(&other.scale(&NormalForm::int(-1)))
    }

    pub fn scale(&self, f: &NormalForm) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul(f)).collect(),
        }
    }

    /// Substitute variables in every coefficient.
    pub fn subst(&self, map: &HashMap<String, NormalForm>) -> Result<VectorField, GeomError> {
        Ok(VectorField {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().map(|c| c.subst(map)).collect::<Result<_, _>>()?,
        })
    }

    pub fn has_transcendental(&self) -> bool {
        self.coeffs.iter().any(NormalForm::has_transcendental)
    }

    /// Same coefficients read on another chart of the same dimension.
    pub fn on_chart(&self, chart: &Chart) -> VectorField {
        VectorField {
            chart: chart.clone(),
            coeffs: self.coeffs.clone(),
        }
    }
}

/// `sum_i theta_i dx^i`.
#[derive(Clone, PartialEq)]
pub struct OneForm {
    chart: Chart,
    coeffs: Vec<NormalForm>,
}

impl OneForm {
    pub fn new(chart: &Chart, coeffs: Vec<NormalForm>) -> Result<OneForm, GeomError> {
        if coeffs.len() != chart.dim() {
            return Err(GeomError::Length {
                expected: chart.dim(),
                got: coeffs.len(),
            });
        }
        Ok(OneForm {
            chart: chart.clone(),
            coeffs,
        })
    }

    pub fn zero(chart: &Chart) -> OneForm {
        OneForm {
            chart: chart.clone(),
            coeffs: vec![NormalForm::zero(); chart.dim()],
        }
    }

    /// `dh`.
    pub fn differential(chart: &Chart, h: &NormalForm) -> OneForm {
        OneForm {
            chart: chart.clone(),
            coeffs: (0..chart.dim()).map(|i| h.diff(chart.name(i))).collect(),
        }
    }

    pub fn coordinate(chart: &Chart, i: usize) -> OneForm {
        let mut f = OneForm::zero(chart);
        f.coeffs[i] = NormalForm::one();
        f
    }

    /// Parse a one-form written with symbols `d<coord>`, e.g. `dx1 - x2*dt`.
    pub fn parse(chart: &Chart, src: &str) -> Result<OneForm, GeomError> {
        let coeffs = linear_in_symbols(chart, &symexpr::nf(src)?, "d", src, "d<coord>")?;
        OneForm::new(chart, coeffs)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn coeffs(&self) -> &[NormalForm] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &NormalForm {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(NormalForm::is_zero)
    }

    /// `theta(X)`.
    pub fn eval(&self, x: &VectorField) -> NormalForm {
        let mut acc = NormalForm::zero();
        for (a, b) in self.coeffs.iter().zip(x.coeffs()) {
            if !a.is_zero() && !b.is_zero() {
                acc = acc.add(&a.mul(b));
            }
        }
        acc
    }

    /// `(d theta)_{ij} = d_i theta_j - d_j theta_i`.
    pub fn exterior_derivative(&self) -> TwoForm {
        let n = self.chart.dim();
        let mut m = vec![vec![NormalForm::zero(); n]; n];
        let partial: Vec<Vec<NormalForm>> = (0..n)
            .map(|i| self.coeffs.iter().map(|c| c.diff(self.chart.name(i))).collect())
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                let v = partial[i][j].sub(&partial[j][i]);
                m[j][i] = v.neg();
                m[i][j] = v;
            }
        }
        TwoForm {
            chart: self.chart.clone(),
            m,
        }
    }

    /// `L_X theta = i_X d theta + d(theta(X))`.
    pub fn lie_derivative(&self, x: &VectorField) -> Result<OneForm, GeomError> {
        if !self.chart.same(x.chart()) {
            return Err(GeomError::ChartMismatch);
        }
        let a = self.exterior_derivative().interior(x);
        let b = OneForm::differential(&self.chart, &self.eval(x));
        Ok(a.add(&b))
    }

    pub fn add(&self, other: &OneForm) -> OneForm {
        OneForm {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &OneForm) -> OneForm {
        self.add(&other.scale(&NormalForm::int(-1)))
    }

    pub fn scale(&self, f: &NormalForm) -> OneForm {
        OneForm {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul(f)).collect(),
        }
    }

    pub fn has_transcendental(&self) -> bool {
        self.coeffs.iter().any(NormalForm::has_transcendental)
    }
}

/// Antisymmetric coefficient matrix: `omega = sum_{i<j} m_ij dx^i ^ dx^j`.
#[derive(Clone, PartialEq)]
pub struct TwoForm {
    chart: Chart,
    m: Vec<Vec<NormalForm>>,
}

impl TwoForm {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn coeff(&self, i: usize, j: usize) -> &NormalForm {
        &self.m[i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().flatten().all(NormalForm::is_zero)
    }

    pub fn is_generically_zero(&self, ctx: &Ctx) -> bool {
        self.m.iter().flatten().all(|c| ctx.is_zero(c))
    }

    /// `omega(X, Y) = sum_ij m_ij X^i Y^j`.
    pub fn eval(&self, x: &VectorField, y: &VectorField) -> NormalForm {
        let mut acc = NormalForm::zero();
        for (i, row) in self.m.iter().enumerate() {
            if x.coeff(i).is_zero() {
                continue;
            }
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() && !y.coeff(j).is_zero() {
                    acc = acc.add(&c.mul(x.coeff(i)).mul(y.coeff(j)));
                }
            }
        }
        acc
    }

    /// Component `(d omega)_{ijk} = d_i m_jk + d_j m_ki + d_k m_ij` of the
    /// three-form `d omega`.
    pub fn d_component(&self, i: usize, j: usize, k: usize) -> NormalForm {
        let n = |a: usize| self.chart.name(a);
        self.m[j][k]
            .diff(n(i))
            .add(&self.m[k][i].diff(n(j)))
            .add(&self.m[i][j].diff(n(k)))
    }

    /// `d omega = 0`.
    pub fn is_closed(&self) -> bool {
        let n = self.chart.dim();
        (0..n).all(|i| (i + 1..n).all(|j| (j + 1..n).all(|k| self.d_component(i, j, k).is_zero())))
    }

    /// `(i_X omega)_j = omega(X, d/dx^j)`.
    pub fn interior(&self, x: &VectorField) -> OneForm {
        let n = self.chart.dim();
        let coeffs = (0..n)
            .map(|j| {
                let mut acc = NormalForm::zero();
                for i in 0..n {
                    if !x.coeff(i).is_zero() && !self.m[i][j].is_zero() {
                        acc = acc.add(&x.coeff(i).mul(&self.m[i][j]));
                    }
                }
                acc
            })
            .collect();
        OneForm {
            chart: self.chart.clone(),
            coeffs,
        }
    }
}

/// Read coefficients of the symbols `<prefix><coord>` from a normal form
/// that must be linear in them.
fn linear_in_symbols(
    chart: &Chart,
    e: &NormalForm,
    prefix: &str,
    src: &str,
    what: &'static str,
) -> Result<Vec<NormalForm>, GeomError> {
    let mut coeffs = Vec::with_capacity(chart.dim());
    let syms: Vec<String> = chart.names().iter().map(|n| format!("{prefix}{n}")).collect();
    for s in &syms {
        if chart.index_of(s).is_some() {
            return Err(GeomError::Dimension(format!(
                "coordinate name `{s}` clashes with the symbol for a basis element"
            )));
        }
    }
    let mut rest = e.clone();
    for s in &syms {
        let c = e.diff(s);
        if syms.iter().any(|q| c.depends_on(q)) {
            return Err(GeomError::NotLinear(src.to_string(), what));
        }
        rest = rest.sub(&c.mul(&NormalForm::var(s)));
        coeffs.push(c);
    }
    if !rest.is_zero() {
        return Err(GeomError::NotLinear(src.to_string(), what));
    }
    Ok(coeffs)
}

fn write_combination(
    f: &mut fmt::Formatter<'_>,
    chart: &Chart,
    coeffs: &[NormalForm],
    sym: impl Fn(&str) -> String,
) -> fmt::Result {
    let mut first = true;
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let s = sym(chart.name(i));
        let e = c.to_expr();
        let (neg, body) = match e.node() {
            symexpr::Node::Neg(inner) => (true, inner.clone()),
            _ => (false, e.clone()),
        };
        let term = if c.is_one() || (neg && body.to_string() == "1") {
            s
        } else {
            match body.node() {
                symexpr::Node::Add(_) => format!("({body})*{s}"),
                _ => format!("{body}*{s}"),
            }
        };
        match (first, neg) {
            (true, false) => write!(f, "{term}")?,
            (true, true) => write!(f, "-{term}")?,
            (false, false) => write!(f, " + {term}")?,
            (false, true) => write!(f, " - {term}")?,
        }
        first = false;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_combination(f, &self.chart, &self.coeffs, |n| format!("D_{n}"))
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_combination(f, &self.chart, &self.coeffs, |n| format!("d{n}"))
    }
}

impl fmt::Debug for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let n = self.chart.dim();
        for i in 0..n {
            for j in i + 1..n {
                let c = &self.m[i][j];
                if c.is_zero() {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "({})*d{}^d{}", Expr::from_nf(c), self.chart.name(i), self.chart.name(j))?;
                first = false;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
