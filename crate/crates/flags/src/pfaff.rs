//! Derived flag of a Pfaffian system, computed from exterior derivatives.
//!
//! `I^(1) = {theta ∈ I : d theta ≡ 0 mod I}`. For `theta = sum c^a theta_a`
//! the condition is `sum c^a d theta_a(X_i, X_j) = 0` on a basis of
//! `ann I`, because the `dc^a ∧ theta_a` terms vanish there. This route is
//! independent of brackets and serves as a cross-check of duality.

use geomcore::{PfaffianSystem, TwoForm};
use symexpr::NormalForm;

pub fn pfaffian_derived_flag(p: &PfaffianSystem) -> Vec<PfaffianSystem> {
    let mut out = vec![p.clone()];
    loop {
        let cur = out.last().unwrap();
        if cur.rank() == 0 {
            break;
        }
        let next = derived_system(cur);
        if next.rank() == cur.rank() {
            break;
        }
        out.push(next);
    }
    out
}

fn derived_system(p: &PfaffianSystem) -> PfaffianSystem {
    let forms = p.forms();
    let ds: Vec<TwoForm> = forms.iter().map(|f| f.exterior_derivative()).collect();
    let v = p.annihilator().basis();
    let mut rows: Vec<Vec<NormalForm>> = Vec::new();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            rows.push(ds.iter().map(|d| d.eval(&v[i], &v[j])).collect());
        }
    }
    let coeffs = geomcore::linalg::nullspace(&rows, forms.len(), p.ctx());
    let chart = p.chart();
    let combos: Vec<Vec<NormalForm>> = coeffs
        .iter()
        .map(|c| {
            (0..chart.dim())
                .map(|col| {
                    c.iter()
                        .zip(&forms)
                        .filter(|(ca, _)| !ca.is_zero())
                        .fold(NormalForm::zero(), |acc, (ca, f)| acc.add(&ca.mul(f.coeff(col))))
                })
                .collect()
        })
        .collect();
    PfaffianSystem::from_rows(chart, combos, p.ctx())
}
