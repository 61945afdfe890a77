//! Exact linear algebra over the field of normal forms.
//!
//! Row reduction works directly in the function field; the normal form's
//! factor-aware cancellation keeps entries reduced. Zero tests are exact
//! for rational data and fall back to seeded probes when transcendental
//! kernels are present. Numeric confirmation of ranks uses fraction-free
//! Bareiss elimination over the integers at rational probe points, or
//! partial-pivoting floating-point elimination when the entries are
//! transcendental.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use symexpr::probe::Sampler;
use symexpr::{Equality, NormalForm, ProbeConfig};

pub type Matrix = Vec<Vec<NormalForm>>;

/// Analysis context: probe configuration for zero tests.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Ctx {
    pub probe: ProbeConfig,
}

impl Ctx {
    pub fn new(probe: ProbeConfig) -> Ctx {
        Ctx { probe }
    }

    pub fn with_seed(seed: u64) -> Ctx {
        Ctx {
            probe: ProbeConfig::with_seed(seed),
        }
    }

    /// Same configuration, different seed.
    pub fn reseeded(&self, seed: u64) -> Ctx {
        let mut c = *self;
        c.probe.seed = seed;
        c
    }

    pub fn zero_test(&self, e: &NormalForm) -> Equality {
        symexpr::probe::is_zero(e, &self.probe)
    }

    /// Generic vanishing; undecided counts as nonzero.
    pub fn is_zero(&self, e: &NormalForm) -> bool {
        self.zero_test(e).holds()
    }

    pub fn equal(&self, a: &NormalForm, b: &NormalForm) -> bool {
        self.is_zero(&a.sub(b))
    }
}

/// Reduced row echelon form.
#[derive(Clone, Debug)]
pub struct Rref {
    /// Nonzero rows, each with a unit entry at its pivot column.
    pub rows: Vec<Vec<NormalForm>>,
    pub pivots: Vec<usize>,
    /// Some zero test could not be decided.
    pub undecided: bool,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Row-reduce, visiting columns in `col_order`. Among candidate rows the
/// pivot is the entry of lowest total degree, then lowest row index.
pub fn rref(mut rows: Matrix, col_order: &[usize], ctx: &Ctx) -> Rref {
    let mut pivots = Vec::new();
    let mut undecided = false;
    let mut r = 0;
    for &c in col_order {
        if r >= rows.len() {
            break;
        }
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in rows.iter_mut().enumerate().skip(r) {
            let e = &row[c];
            if e.is_zero() {
                continue;
            }
            match ctx.zero_test(e) {
                Equality::True | Equality::ProbablyEqual => {
                    row[c] = NormalForm::zero();
                    continue;
                }
                Equality::Undecided => undecided = true,
                Equality::False => {}
            }
            let key = (e.total_degree(), e.size(), i);
            if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                best = Some(key);
            }
        }
        let Some((_, _, p)) = best else { continue };
        rows.swap(r, p);
        let piv = rows[r][c].clone();
        if !piv.is_one() {
            let inv = piv.recip().expect("pivot is nonzero");
            for e in rows[r].iter_mut() {
                if !e.is_zero() {
                    *e = e.mul(&inv);
                }
            }
        }
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (j, e) in row.iter_mut().enumerate() {
                if !prow[j].is_zero() {
                    *e = e.sub(&f.mul(&prow[j]));
                }
            }
            row[c] = NormalForm::zero();
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    // Clean entries that vanish only up to transcendental identities.
    for row in rows.iter_mut() {
        for e in row.iter_mut() {
            if !e.is_zero() && e.has_transcendental() && ctx.is_zero(e) {
                *e = NormalForm::zero();
            }
        }
    }
    Rref {
        rows,
        pivots,
        undecided,
    }
}

/// Row reduction in natural column order.
pub fn rref_natural(rows: Matrix, ctx: &Ctx) -> Rref {
    let n = rows.first().map(|r| r.len()).unwrap_or(0);
    rref(rows, &(0..n).collect::<Vec<_>>(), ctx)
}

/// Basis of `{v : M v = 0}` read off the reduced form.
pub fn nullspace_of_rref(r: &Rref, ncols: usize) -> Vec<Vec<NormalForm>> {
    let mut out = Vec::new();
    for f in 0..ncols {
        if r.pivots.contains(&f) {
            continue;
        }
        let mut v = vec![NormalForm::zero(); ncols];
        v[f] = NormalForm::one();
        for (i, &p) in r.pivots.iter().enumerate() {
            v[p] = r.rows[i][f].neg();
        }
        out.push(v);
    }
    out
}

pub fn nullspace(m: &Matrix, ncols: usize, ctx: &Ctx) -> Vec<Vec<NormalForm>> {
    if m.is_empty() {
        return (0..ncols)
            .map(|i| {
                let mut v = vec![NormalForm::zero(); ncols];
                v[i] = NormalForm::one();
                v
            })
            .collect();
    }
    nullspace_of_rref(&rref_natural(m.clone(), ctx), ncols)
}

/// Reduce `v` by the rows of an RREF; the remainder is zero iff `v` lies
/// in the row span.
pub fn reduce(r: &Rref, v: &[NormalForm]) -> Vec<NormalForm> {
    let mut v = v.to_vec();
    for (i, &p) in r.pivots.iter().enumerate() {
        if v[p].is_zero() {
            continue;
        }
        let f = v[p].clone();
        for (j, e) in v.iter_mut().enumerate() {
            if !r.rows[i][j].is_zero() {
                *e = e.sub(&f.mul(&r.rows[i][j]));
            }
        }
        v[p] = NormalForm::zero();
    }
    v
}

pub fn in_row_span(r: &Rref, v: &[NormalForm], ctx: &Ctx) -> bool {
    reduce(r, v).iter().all(|e| ctx.is_zero(e))
}

/// Solve `a * x = b` for square invertible `a`.
pub fn solve(a: &Matrix, b: &[NormalForm], ctx: &Ctx) -> Option<Vec<NormalForm>> {
    let n = a.len();
    let aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let r = rref(aug, &(0..n).collect::<Vec<_>>(), ctx);
    if r.rank() < n || r.pivots.iter().any(|&p| p >= n) {
        return None;
    }
    let mut x = vec![NormalForm::zero(); n];
    for (i, &p) in r.pivots.iter().enumerate() {
        x[p] = r.rows[i][n].clone();
    }
    Some(x)
}

/// Symbolic rank together with its numeric confirmation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankReport {
    pub symbolic: usize,
    /// Numeric rank at each successful probe point.
    pub numeric: Vec<usize>,
    /// Maximum of the symbolic rank and all numeric ranks.
    pub rank: usize,
    /// Some numeric rank differed from the symbolic one (a singular point or
    /// an aliasing problem).
    pub disagreement: bool,
    /// Every probe point failed to evaluate.
    pub undecided: bool,
}

/// Generic rank: symbolic elimination cross-checked at probe points.
pub fn generic_rank(m: &Matrix, ctx: &Ctx) -> RankReport {
    let symbolic = if m.is_empty() { 0 } else { rref_natural(m.clone(), ctx).rank() };
    let numeric = numeric_ranks(m, ctx);
    let rank = numeric.iter().copied().chain([symbolic]).max().unwrap_or(0);
    RankReport {
        symbolic,
        disagreement: numeric.iter().any(|&r| r != symbolic),
        undecided: numeric.is_empty() && !m.is_empty(),
        numeric,
        rank,
    }
}

/// Ranks at the configured number of probe points (exact when possible).
pub fn numeric_ranks(m: &Matrix, ctx: &Ctx) -> Vec<usize> {
    if m.is_empty() || m[0].is_empty() {
        return vec![0; ctx.probe.probes];
    }
    let mut vars = std::collections::BTreeSet::new();
    let mut opq = std::collections::BTreeSet::new();
    let mut exact = true;
    for row in m {
        for e in row {
            vars.extend(e.free_vars());
            let o = e.opaque_symbols();
            if !o.is_empty() || e.has_transcendental() {
                exact = false;
            }
            opq.extend(o);
        }
    }
    let mut s = Sampler::new(ctx.probe.seed, &vars, &opq);
    let mut out = Vec::new();
    let mut failures = 0;
    while out.len() < ctx.probe.probes && failures <= ctx.probe.retries {
        if exact {
            let pt = s.next_exact();
            let vals: Option<Vec<Vec<BigRational>>> = m
                .iter()
                .map(|row| row.iter().map(|e| e.eval_exact(&pt)).collect())
                .collect();
            match vals {
                Some(v) => out.push(bareiss_rank(&v)),
                None => failures += 1,
            }
        } else {
            let pt = s.next_point();
            let vals: Result<Vec<Vec<f64>>, _> = m
                .iter()
                .map(|row| row.iter().map(|e| e.eval(&pt)).collect())
                .collect();
            match vals {
                Ok(v) => out.push(float_rank(&v, 1e-9)),
                Err(_) => failures += 1,
            }
        }
    }
    out
}

/// Exact rank of a rational matrix by fraction-free Bareiss elimination.
pub fn bareiss_rank(m: &[Vec<BigRational>]) -> usize {
    if m.is_empty() {
        return 0;
    }
    // Clear denominators row by row.
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            row.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    let (rows, cols) = (a.len(), a[0].len());
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Floating-point rank with partial pivoting and relative tolerance.
pub fn float_rank(m: &[Vec<f64>], tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let mut a = m.to_vec();
    let (rows, cols) = (a.len(), a[0].len());
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |s, v| s.max(v.abs()))
        .max(1.0);
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let (p, best) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol * scale {
            continue;
        }
        a.swap(r, p);
        for i in r + 1..rows {
            let f = a[i][c] / a[r][c];
            for j in c..cols {
                a[i][j] -= f * a[r][j];
            }
        }
        r += 1;
    }
    r
}

/// Exact rank of a rational matrix.
pub fn rational_rank(m: &[Vec<BigRational>]) -> usize {
    bareiss_rank(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn bareiss_matches_known_ranks() {
        assert_eq!(bareiss_rank(&[vec![r(1), r(2)], vec![r(2), r(4)]]), 1);
        assert_eq!(bareiss_rank(&[vec![r(0), r(1)], vec![r(1), r(0)]]), 2);
        assert_eq!(bareiss_rank(&[vec![r(1), r(2), r(3)], vec![r(4), r(5), r(6)], vec![r(7), r(8), r(9)]]), 2);
    }

    #[test]
    fn float_rank_of_identity() {
        assert_eq!(float_rank(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1e-9), 2);
        assert_eq!(float_rank(&[vec![1.0, 2.0], vec![2.0, 4.0]], 1e-9), 1);
    }
}
