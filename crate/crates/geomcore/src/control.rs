//! Control systems `x' = f(t, x, u)`, their distributions, and linear
//! controllability.

use num_rational::BigRational;
use num_traits::{One, Zero};
use symexpr::NormalForm;

use crate::chart::{Chart, Role};
use crate::distribution::{Distribution, PfaffianSystem};
use crate::error::GeomError;
use crate::field::{OneForm, VectorField};
use crate::linalg::{rational_rank, Ctx};

pub type RatMatrix = Vec<Vec<BigRational>>;

/// A control system on a control chart: one right-hand side per state.
#[derive(Clone, Debug)]
pub struct ControlSystem {
    chart: Chart,
    rhs: Vec<NormalForm>,
}

impl ControlSystem {
    /// `rhs[i]` is the derivative of the `i`-th state of `chart`.
    pub fn new(chart: &Chart, rhs: Vec<NormalForm>) -> Result<ControlSystem, GeomError> {
        if chart.time_index().is_none() {
            return Err(GeomError::Dimension("a control system needs a time coordinate".into()));
        }
        let n = chart.states().len();
        if rhs.len() != n {
            return Err(GeomError::Length {
                expected: n,
                got: rhs.len(),
            });
        }
        for f in &rhs {
            for v in f.free_vars() {
                chart.require(&v)?;
            }
        }
        Ok(ControlSystem {
            chart: chart.clone(),
            rhs,
        })
    }

    /// Build from `(state, rhs source)` pairs and control names, with time `t`.
    pub fn parse(odes: &[(&str, &str)], controls: &[&str]) -> Result<ControlSystem, GeomError> {
        let states: Vec<&str> = odes.iter().map(|(s, _)| *s).collect();
        let chart = Chart::control("t", &states, controls)?;
        let rhs = odes
            .iter()
            .map(|(_, src)| symexpr::nf(src).map_err(GeomError::from))
            .collect::<Result<Vec<_>, _>>()?;
        ControlSystem::new(&chart, rhs)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rhs(&self) -> &[NormalForm] {
        &self.rhs
    }

    pub fn num_states(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_controls(&self) -> usize {
        self.chart.controls().len()
    }

    /// `X = d/dt + sum f^i d/dx^i`.
    pub fn drift(&self) -> VectorField {
        let t = self.chart.time_index().expect("checked at construction");
        let mut coeffs = vec![NormalForm::zero(); self.chart.dim()];
        coeffs[t] = NormalForm::one();
        for (f, i) in self.rhs.iter().zip(self.chart.states()) {
            coeffs[i] = f.clone();
        }
        VectorField::new(&self.chart, coeffs).expect("length matches")
    }

    /// `V = {X, d/du^1, ..., d/du^m}`.
    pub fn distribution(&self, ctx: &Ctx) -> Distribution {
        let mut fields = vec![self.drift()];
        fields.extend(self.chart.controls().into_iter().map(|i| VectorField::coordinate(&self.chart, i)));
        Distribution::new(&self.chart, &fields, ctx).expect("same chart")
    }

    /// `<dx^i - f^i dt>` with independence condition `dt`.
    pub fn pfaffian(&self, ctx: &Ctx) -> PfaffianSystem {
        let t = self.chart.time_index().expect("checked at construction");
        let forms: Vec<OneForm> = self
            .rhs
            .iter()
            .zip(self.chart.states())
            .map(|(f, i)| {
                let mut c = vec![NormalForm::zero(); self.chart.dim()];
                c[i] = NormalForm::one();
                c[t] = f.neg();
                OneForm::new(&self.chart, c).expect("length matches")
            })
            .collect();
        PfaffianSystem::new(&self.chart, &forms, ctx)
            .expect("same chart")
            .with_independence(OneForm::coordinate(&self.chart, t))
            .expect("dt is nonzero on the drift")
    }

    /// `(A, B)` when the system is `x' = A x + B u` with constant matrices.
    pub fn linear_matrices(&self) -> Option<(RatMatrix, RatMatrix)> {
        let states = self.chart.states();
        let controls = self.chart.controls();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for f in &self.rhs {
            let mut rest = f.clone();
            let mut row_a = Vec::new();
            for &j in &states {
                let c = f.diff(self.chart.name(j)).as_constant()?;
                rest = rest.sub(&NormalForm::var(self.chart.name(j)).scale(&c));
                row_a.push(c);
            }
            let mut row_b = Vec::new();
            for &j in &controls {
                let c = f.diff(self.chart.name(j)).as_constant()?;
                rest = rest.sub(&NormalForm::var(self.chart.name(j)).scale(&c));
                row_b.push(c);
            }
            if !rest.is_zero() {
                return None;
            }
            a.push(row_a);
            b.push(row_b);
        }
        Some((a, b))
    }

    /// Names of the coordinates with the given role.
    pub fn names_with(&self, role: Role) -> Vec<String> {
        self.chart
            .indices_with(|r| r == role)
            .into_iter()
            .map(|i| self.chart.name(i).to_string())
            .collect()
    }
}

fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let m = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(BigRational::zero(), |acc, (x, brow)| acc + x * &brow[j])
                })
                .collect()
        })
        .collect()
}

/// The Kalman matrix `[B AB ... A^{n-1}B]`.
pub fn kalman_matrix(a: &RatMatrix, b: &RatMatrix) -> Result<RatMatrix, GeomError> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) || b.len() != n {
        return Err(GeomError::Dimension("A must be n×n and B must have n rows".into()));
    }
    let m = b.first().map_or(0, |r| r.len());
    if b.iter().any(|r| r.len() != m) {
        return Err(GeomError::Dimension("B rows have unequal lengths".into()));
    }
    let mut out: RatMatrix = vec![Vec::with_capacity(n * m); n];
    let mut block = b.clone();
    for _ in 0..n {
        for (o, r) in out.iter_mut().zip(&block) {
            o.extend(r.iter().cloned());
        }
        block = mat_mul(a, &block);
    }
    Ok(out)
}

/// Rank of the Kalman matrix and whether it equals `n`.
pub fn kalman_rank(a: &RatMatrix, b: &RatMatrix) -> Result<usize, GeomError> {
    Ok(rational_rank(&kalman_matrix(a, b)?))
}

/// `rank [B AB ... A^{n-1}B] = n`, in exact arithmetic.
pub fn kalman_controllable(a: &RatMatrix, b: &RatMatrix) -> Result<bool, GeomError> {
    Ok(kalman_rank(a, b)? == a.len())
}

/// Brunovsky normal form for the signature `kappa`, where `kappa[j-1]` is
/// the number of chains of length `j`. Blocks are laid out by increasing
/// chain length; `B` has a one in column `s` on the last row of block `s`.
pub fn brunovsky_matrices(kappa: &[usize]) -> (RatMatrix, RatMatrix) {
    let lengths: Vec<usize> = kappa
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| std::iter::repeat_n(j + 1, c))
        .collect();
    let n: usize = lengths.iter().sum();
    let m = lengths.len();
    let mut a = vec![vec![BigRational::zero(); n]; n];
    let mut b = vec![vec![BigRational::zero(); m]; n];
    let mut start = 0;
    for (s, &len) in lengths.iter().enumerate() {
        for r in start..start + len - 1 {
            a[r][r + 1] = BigRational::one();
        }
        b[start + len - 1][s] = BigRational::one();
        start += len;
    }
    (a, b)
}

/// Convert an integer matrix.
pub fn rat_matrix(rows: &[&[i64]]) -> RatMatrix {
    rows.iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brunovsky_small_cases() {
        let (a, b) = brunovsky_matrices(&[1]);
        assert_eq!(a, rat_matrix(&[&[0]]));
        assert_eq!(b, rat_matrix(&[&[1]]));
        let (a, b) = brunovsky_matrices(&[0, 1]);
        assert_eq!(a, rat_matrix(&[&[0, 1], &[0, 0]]));
        assert_eq!(b, rat_matrix(&[&[0], &[1]]));
    }

    #[test]
    fn trivial_kalman() {
        let a = rat_matrix(&[&[0, 0], &[0, 0]]);
        let b = rat_matrix(&[&[1, 0], &[0, 1]]);
        assert!(kalman_controllable(&a, &b).unwrap());
        assert!(kalman_controllable(&a, &rat_matrix(&[&[1, 0]])).is_err());
    }
}
