//! Polar matrices, singular varieties, Weber structures and resolvent
//! bundles.
//!
//! For `E = sum a_i E_i` over representatives `E_0..E_q` of
//! `V / Char V`, the polar matrix is `M(a)[alpha][j] = theta_alpha([E, E_j])`
//! with `theta_alpha` a basis of `ann V`. Since `M(a) a = 0`, the signed
//! `q x q` minors satisfy `(-1)^j D_j = g(a) a_j` for a polynomial `g` of
//! degree `q - 1`, and `M(a)` drops rank exactly on `{g = 0}`. The singular
//! variety is a projectivized rank-`q` subbundle precisely when
//! `g = c l^(q-1)` for a linear form `l`; then `B = ker l`.

use flags::cauchy_characteristics;
use geomcore::linalg::{nullspace, solve};
use geomcore::{Ctx, Distribution, Matrix, VectorField};
use symexpr::NormalForm;

use crate::GoursatError;

/// Why a distribution fails to determine a Weber structure.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum WeberError {
    #[error("not a Weber structure: {0}")]
    Conditions(String),
    #[error("the polar matrix has generic rank below q = {0}")]
    Degenerate(usize),
    #[error("singular variety is not a projectivized subbundle: {0}")]
    NotLinear(String),
}

/// A Weber structure together with its resolvent bundle.
#[derive(Clone, Debug)]
pub struct WeberStructure {
    pub char: Distribution,
    /// `c = dim Char V`.
    pub c: usize,
    /// `q = rank V - c - 1`.
    pub q: usize,
    /// Representatives `E_0..E_q` of `V / Char V`.
    pub representatives: Vec<VectorField>,
    /// Coefficients of the linear form `l(a)` cutting out the singular
    /// variety.
    pub linear_form: Vec<NormalForm>,
    /// Lift of `B`, the kernel of `l`, spanned by combinations of the
    /// representatives.
    pub singular: Vec<VectorField>,
    /// `R = Char V + B`.
    pub resolvent: Distribution,
    pub integrable: bool,
}

/// Representatives of `V / Char V`: basis fields of `V` that extend a basis
/// of `Char V`.
pub fn quotient_representatives(v: &Distribution, char: &Distribution) -> Vec<VectorField> {
    let mut cur = char.clone();
    let mut reps = Vec::new();
    for b in v.basis() {
        if !cur.contains(&b) {
            cur = cur.extended(std::slice::from_ref(&b)).expect("same chart");
            reps.push(b);
        }
    }
    reps
}

/// Fresh symbol names `<stem>0, <stem>1, ...` that do not clash with the
/// chart or with anything occurring in `v`.
fn fresh_symbols(v: &Distribution, n: usize) -> Vec<String> {
    let mut taken: std::collections::BTreeSet<String> = v.chart().names().into_iter().collect();
    for b in v.basis() {
        for c in b.coeffs() {
            taken.extend(c.free_vars());
        }
    }
    let mut stem = String::from("a");
    while (0..n).any(|i| taken.contains(&format!("{stem}{i}"))) {
        stem.push('_');
    }
    (0..n).map(|i| format!("{stem}{i}")).collect()
}

fn combination(fields: &[VectorField], coeffs: &[NormalForm]) -> VectorField {
    fields
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| !c.is_zero())
        .fold(VectorField::zero(fields[0].chart()), |acc, (f, c)| acc.add(&f.scale(c)))
}

/// Polar matrix of `E = sum coeffs_i vbar_i` in the quotient frame:
/// column `j` holds the components of `[E, vbar_j]` along `frame`, modulo
/// `V`. The frame together with a basis of `V` must span `TM`.
pub fn polar_matrix_in_frame(
    v: &Distribution,
    vbar: &[VectorField],
    frame: &[VectorField],
    coeffs: &[NormalForm],
) -> Result<Matrix, GoursatError> {
    if vbar.len() != coeffs.len() || vbar.is_empty() {
        return Err(GoursatError::Input(format!(
            "{} coefficients for {} representatives",
            coeffs.len(),
            vbar.len()
        )));
    }
    let chart = v.chart();
    let n = chart.dim();
    let mut columns: Vec<VectorField> = frame.to_vec();
    columns.extend(v.basis());
    if columns.len() != n {
        return Err(GoursatError::Input(format!(
            "frame of size {} does not complement a rank {} distribution in dimension {}",
            frame.len(),
            v.rank(),
            n
        )));
    }
    let a: Matrix = (0..n).map(|row| columns.iter().map(|c| c.coeff(row).clone()).collect()).collect();
    let e = combination(vbar, coeffs);
    let mut out = vec![Vec::with_capacity(vbar.len()); frame.len()];
    for y in vbar {
        let b = e.bracket(y)?;
        let x = solve(&a, b.coeffs(), v.ctx())
            .ok_or_else(|| GoursatError::Input("frame and distribution are dependent".into()))?;
        for (k, row) in out.iter_mut().enumerate() {
            row.push(x[k].clone());
        }
    }
    Ok(out)
}

/// Polar matrix of `E = sum coeffs_i E_i` with the representatives of
/// [`quotient_representatives`] and the annihilator basis of `V` as the
/// frame of `TM / V`.
pub fn polar_matrix(v: &Distribution, coeffs: &[NormalForm]) -> Result<Matrix, GoursatError> {
    let char = cauchy_characteristics(v);
    let reps = quotient_representatives(v, &char);
    if reps.len() != coeffs.len() {
        return Err(GoursatError::Input(format!(
            "{} coefficients for {} representatives of V / Char V",
            coeffs.len(),
            reps.len()
        )));
    }
    Ok(polar_from_brackets(v, &reps, coeffs))
}

fn polar_from_brackets(v: &Distribution, reps: &[VectorField], coeffs: &[NormalForm]) -> Matrix {
    let ann = v.annihilator().forms();
    let r = reps.len();
    let mut brackets = vec![vec![VectorField::zero(v.chart()); r]; r];
    for i in 0..r {
        for j in i + 1..r {
            let b = reps[i].bracket(&reps[j]).expect("same chart");
            brackets[j][i] = b.scale(&NormalForm::int(-1));
            brackets[i][j] = b;
        }
    }
    ann.iter()
        .map(|theta| {
            (0..r)
                .map(|j| {
                    (0..r)
                        .filter(|&i| i != j && !coeffs[i].is_zero())
                        .fold(NormalForm::zero(), |acc, i| acc.add(&coeffs[i].mul(&theta.eval(&brackets[i][j]))))
                })
                .collect()
        })
        .collect()
}

/// Determinant by Gaussian elimination over the expression field.
pub(crate) fn determinant(mut m: Matrix, ctx: &Ctx) -> NormalForm {
    let n = m.len();
    let mut det = NormalForm::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !ctx.is_zero(&m[r][col])) else {
            return NormalForm::zero();
        };
        if p != col {
            m.swap(p, col);
            det = det.neg();
        }
        let pivot = m[col][col].clone();
        det = det.mul(&pivot);
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].div(&pivot);
            for c in col..n {
                let t = m[col][c].mul(&f);
                m[r][c] = m[r][c].sub(&t);
            }
        }
    }
    det
}

/// The Weber structure determined by `V`, when it exists.
pub fn weber_structure(v: &Distribution) -> Result<WeberStructure, GoursatError> {
    let ctx = v.ctx();
    let n = v.chart().dim();
    let char = cauchy_characteristics(v);
    let c = char.rank();
    let r = v.rank();
    if r < c + 3 {
        return Err(WeberError::Conditions(format!("rank V = {r} with dim Char V = {c} leaves q < 2")).into());
    }
    let q = r - c - 1;
    if n != c + 2 * q + 1 {
        return Err(WeberError::Conditions(format!("dim M = {n} but c + 2q + 1 = {}", c + 2 * q + 1)).into());
    }
    if !v.extended(&v.pairwise_brackets())?.is_full() {
        return Err(WeberError::Conditions("the first derived bundle is not TM".into()).into());
    }
    let reps = quotient_representatives(v, &char);
    debug_assert_eq!(reps.len(), q + 1);
    let names = fresh_symbols(v, q + 1);
    let a: Vec<NormalForm> = names.iter().map(|s| NormalForm::var(s)).collect();
    let m = polar_from_brackets(v, &reps, &a);
    let minor0: Matrix = m.iter().map(|row| row[1..].to_vec()).collect();
    let d0 = determinant(minor0, ctx);
    let g = d0.div(&a[0]);
    if ctx.is_zero(&g) {
        return Err(WeberError::Degenerate(q).into());
    }
    let at_basis = |e: &NormalForm, b: usize| -> NormalForm {
        let map = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), NormalForm::int(i64::from(i == b))))
            .collect();
        e.subst(&map).expect("polynomial substitution")
    };
    let (b, l) = (0..=q)
        .find_map(|b| {
            let grad: Vec<NormalForm> = names.iter().map(|s| at_basis(&g.diff(s), b)).collect();
            (!grad.iter().all(|x| ctx.is_zero(x))).then_some((b, grad))
        })
        .ok_or_else(|| WeberError::NotLinear("g has a vanishing gradient at every basis point".into()))?;
    let l_form = l.iter().zip(&a).fold(NormalForm::zero(), |acc, (li, ai)| acc.add(&li.mul(ai)));
    let lb = l[b].clone();
    let lhs = g.mul(&lb.pow(q as i64 - 1)?);
    let rhs = at_basis(&g, b).mul(&l_form.pow(q as i64 - 1)?);
    if !ctx.equal(&lhs, &rhs) {
        return Err(WeberError::NotLinear(format!("g = {} is not a power of a linear form", g.to_expr())).into());
    }
    let kernel = nullspace(&vec![l.clone()], q + 1, ctx);
    let singular: Vec<VectorField> = kernel.iter().map(|k| combination(&reps, k)).collect();
    let resolvent = char.extended(&singular)?;
    let integrable = resolvent.is_frobenius();
    Ok(WeberStructure {
        char,
        c,
        q,
        representatives: reps,
        linear_form: l,
        singular,
        resolvent,
        integrable,
    })
}

/// Resolvent bundle `R = Char V + B` of the Weber structure on `V`.
pub fn resolvent_bundle(v: &Distribution) -> Result<Distribution, GoursatError> {
    Ok(weber_structure(v)?.resolvent)
}
