//! Numeric reconstruction of integral curves of a contact sub-connection
//! along prescribed flat functions: the jets are differentiated exactly and
//! the Lie-type equation `eps_a' = sum_b p^b rho_b^a(eps)` is integrated
//! with the classical fourth-order Runge-Kutta scheme.

use std::collections::BTreeMap;

use symexpr::{NormalForm, Point};

use crate::jets::{iterate, jet_name};
use crate::subconnection::{group_name, ContactSubConnection};
use crate::CascadeError;

/// Relative tolerance of the Richardson confirmation.
pub const RICHARDSON_TOL: f64 = 1e-6;

/// Flat functions of `t`: one per retained chain (`z^i_0(t)`) and one per
/// frozen function name of a reduced sub-connection.
#[derive(Clone, Debug, Default)]
pub struct FlatCurves {
    pub chains: BTreeMap<usize, NormalForm>,
    pub functions: BTreeMap<String, NormalForm>,
}

impl FlatCurves {
    pub fn new() -> FlatCurves {
        FlatCurves::default()
    }

    pub fn chain(mut self, i: usize, f: NormalForm) -> FlatCurves {
        self.chains.insert(i, f);
        self
    }

    pub fn function(mut self, name: &str, f: NormalForm) -> FlatCurves {
        self.functions.insert(name.to_string(), f);
        self
    }
}

/// Uniform grid of `steps` intervals on `[t0, t1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> TimeGrid {
        TimeGrid { t0, t1, steps }
    }

    /// Grid on `[t0, t1]` with step close to `h`.
    pub fn with_step(t0: f64, t1: f64, h: f64) -> TimeGrid {
        TimeGrid::new(t0, t1, ((t1 - t0) / h).round().max(1.0) as usize)
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn node(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.step()
    }
}

/// A reconstructed discrete curve.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t: Vec<f64>,
    /// Jet coordinate names, in the order of the rows of `z`.
    pub jet_names: Vec<String>,
    /// `z[n]` holds the jet coordinates at `t[n]`.
    pub z: Vec<Vec<f64>>,
    /// `eps[n]` holds the group coordinates at `t[n]`.
    pub eps: Vec<Vec<f64>>,
    /// Error estimate `max_n |eps_h(t_n) - eps_{h/2}(t_n)| * 16/15`: the
    /// distance of the discrete curve from the integral curve of `gamma^G`
    /// through the same initial point (the contact forms vanish exactly
    /// because the jets are exact derivatives).
    pub residual: f64,
    /// `residual <= RICHARDSON_TOL * max(1, max |eps|)`.
    pub confirmed: bool,
}

struct Evaluator {
    rates: Vec<NormalForm>,
    /// `(coordinate name, derivative)` for each jet.
    jets: Vec<(String, NormalForm)>,
    /// `(function name, order, derivative)` for opaque symbols.
    opaque: Vec<(String, u32, NormalForm)>,
}

impl Evaluator {
    fn new(c: &ContactSubConnection, curves: &FlatCurves) -> Result<Evaluator, CascadeError> {
        let check_t = |what: &str, f: &NormalForm| -> Result<(), CascadeError> {
            match f.free_vars().into_iter().find(|v| v != "t") {
                Some(v) => Err(CascadeError::Input(format!("flat function {what} depends on {v}"))),
                None if !f.opaque_symbols().is_empty() => {
                    Err(CascadeError::Input(format!("flat function {what} must be explicit in t")))
                }
                None => Ok(()),
            }
        };
        let mut jets = Vec::new();
        for &(i, s) in c.chains().chains() {
            let f = curves
                .chains
                .get(&i)
                .ok_or_else(|| CascadeError::Input(format!("missing flat function for chain {i}")))?;
            check_t(&format!("of chain {i}"), f)?;
            for l in 0..=s {
                jets.push((jet_name(i, l), iterate(f, l, |g| g.diff("t"))));
            }
        }
        let rates: Vec<NormalForm> = (0..c.group_dim()).map(|a| c.rate(a)).collect();
        let mut opaque = Vec::new();
        let mut needed = std::collections::BTreeSet::new();
        for r in &rates {
            needed.extend(r.opaque_symbols());
        }
        for (name, order) in needed {
            let f = curves
                .functions
                .get(&name)
                .ok_or_else(|| CascadeError::Input(format!("missing flat function {name}(t)")))?;
            check_t(&name, f)?;
            opaque.push((name, order, iterate(f, order as usize, |g| g.diff("t"))));
        }
        Ok(Evaluator { rates, jets, opaque })
    }

    fn point(&self, t: f64) -> Result<(Point, Vec<f64>), CascadeError> {
        let tp = Point::new().with("t", t);
        let mut pt = tp.clone();
        let mut z = Vec::with_capacity(self.jets.len());
        for (name, f) in &self.jets {
            let v = f.eval(&tp).map_err(|e| CascadeError::Pole { t, detail: e.to_string() })?;
            pt.set(name, v);
            z.push(v);
        }
        for (name, order, f) in &self.opaque {
            let v = f.eval(&tp).map_err(|e| CascadeError::Pole { t, detail: e.to_string() })?;
            pt.set_opaque(name, *order, v);
        }
        Ok((pt, z))
    }

    fn rhs(&self, t: f64, eps: &[f64]) -> Result<Vec<f64>, CascadeError> {
        let (mut pt, _) = self.point(t)?;
        for (a, v) in eps.iter().enumerate() {
            pt.set(&group_name(a + 1), *v);
        }
        self.rates
            .iter()
            .map(|r| match r.eval(&pt) {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(v) => Err(CascadeError::Pole {
                    t,
                    detail: format!("rate evaluates to {v}"),
                }),
                Err(e) => Err(CascadeError::Pole { t, detail: e.to_string() }),
            })
            .collect()
    }

    fn integrate(&self, grid: &TimeGrid, eps0: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>), CascadeError> {
        let h = grid.step();
        let mut ts = vec![grid.t0];
        let mut zs = vec![self.point(grid.t0)?.1];
        let mut es = vec![eps0.to_vec()];
        let axpy = |e: &[f64], k: &[f64], s: f64| -> Vec<f64> { e.iter().zip(k).map(|(a, b)| a + s * b).collect() };
        for n in 0..grid.steps {
            let t = grid.node(n);
            let e = es.last().unwrap();
            let k1 = self.rhs(t, e)?;
            let k2 = self.rhs(t + h / 2.0, &axpy(e, &k1, h / 2.0))?;
            let k3 = self.rhs(t + h / 2.0, &axpy(e, &k2, h / 2.0))?;
            let k4 = self.rhs(t + h, &axpy(e, &k3, h))?;
            let next: Vec<f64> = (0..e.len())
                .map(|a| e[a] + h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]))
                .collect();
            let tn = grid.node(n + 1);
            ts.push(tn);
            zs.push(self.point(tn)?.1);
            es.push(next);
        }
        Ok((ts, zs, es))
    }
}

/// Integrate `gamma^G` along the flat functions from `eps0` on the grid,
/// with a Richardson check against the half-step solution.
pub fn reconstruct_trajectory(
    c: &ContactSubConnection,
    curves: &FlatCurves,
    grid: &TimeGrid,
    eps0: &[f64],
) -> Result<Trajectory, CascadeError> {
    if eps0.len() != c.group_dim() {
        return Err(CascadeError::Input(format!(
            "expected {} initial group values, got {}",
            c.group_dim(),
            eps0.len()
        )));
    }
    if grid.steps == 0 || !(grid.t1 > grid.t0) {
        return Err(CascadeError::Input("the grid needs t1 > t0 and at least one step".into()));
    }
    let ev = Evaluator::new(c, curves)?;
    let (t, z, eps) = ev.integrate(grid, eps0)?;
    let fine = TimeGrid::new(grid.t0, grid.t1, grid.steps * 2);
    let (_, _, eps2) = ev.integrate(&fine, eps0)?;
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for (n, e) in eps.iter().enumerate() {
        for (a, v) in e.iter().enumerate() {
            diff = diff.max((v - eps2[2 * n][a]).abs());
            scale = scale.max(v.abs());
        }
    }
    let residual = diff * 16.0 / 15.0;
    Ok(Trajectory {
        t,
        jet_names: ev.jets.iter().map(|(n, _)| n.clone()).collect(),
        z,
        eps,
        residual,
        confirmed: residual <= RICHARDSON_TOL * scale,
    })
}
