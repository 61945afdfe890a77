use std::collections::HashMap;

use cascade::*;
use flags::analyze;
use geomcore::{generic_rank, Ctx, OneForm};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symexpr::{nf, NormalForm};

fn ctx() -> Ctx {
    Ctx::default()
}

fn e(s: &str) -> NormalForm {
    nf(s).unwrap()
}

fn assert_eq_nf(a: &NormalForm, b: &NormalForm) {
    assert!(ctx().equal(a, b), "{a}  !=  {b}");
}

fn one() -> Vec<Vec<NormalForm>> {
    vec![vec![e("1")]]
}

// ---------------------------------------------------------------- operators

#[test]
fn total_derivative_examples() {
    let ch = JetChains::from_orders(&[2]).unwrap();
    assert!(truncated_total_derivative(&e("7/3"), &ch).is_zero());
    assert!(truncated_total_derivative(&e("z1_1 - t*z1_2"), &ch).is_zero());
    // Hand expansion: d/dz0 (z0 z1) z1 + d/dz1 (z0 z1) z2.
    assert_eq_nf(&truncated_total_derivative(&e("z1_0*z1_1"), &ch), &e("z1_1^2 + z1_0*z1_2"));
    // The top coordinate has zero derivative.
    assert!(truncated_total_derivative(&e("z1_2^3"), &ch).is_zero());
    // Opaque symbols are differentiated through d/dt.
    assert_eq_nf(&truncated_total_derivative(&e("f(t)*z1_0"), &ch), &e("f'(t)*z1_0 + f(t)*z1_1"));
}

#[test]
fn sub_fiber_derivative_has_no_time_term() {
    let ch = JetChains::from_orders(&[2, 1]).unwrap();
    let d = sub_fiber_total_derivative(&e("t*z1_0*z2_0"), &ch, 1).unwrap();
    assert_eq_nf(&d, &e("t*z1_1*z2_0"));
    assert!(sub_fiber_total_derivative(&e("z1_0"), &ch, 3).is_err());
}

#[test]
fn first_integral_closed_forms() {
    let ch = JetChains::from_orders(&[3]).unwrap();
    let i = dt_first_integrals(&ch, 1).unwrap();
    assert_eq!(i.len(), 4);
    assert_eq_nf(&i[0], &e("z1_3"));
    assert_eq_nf(&i[1], &e("z1_2 - t*z1_3"));
    assert_eq_nf(&i[2], &e("z1_1 - t*z1_2 + t^2/2*z1_3"));
}

#[test]
fn first_integrals_have_independent_differentials() {
    for s in 1..=5 {
        let ch = JetChains::from_orders(&[s]).unwrap();
        let names = ch.names();
        let rows: Vec<Vec<NormalForm>> = dt_first_integrals(&ch, 1)
            .unwrap()
            .iter()
            .map(|f| names.iter().map(|n| f.diff(n)).collect())
            .collect();
        assert_eq!(generic_rank(&rows, &ctx()).rank, s + 1);
    }
}

#[test]
fn t_independent_invariant_closed_forms() {
    let ch = JetChains::from_orders(&[4]).unwrap();
    let j = t_independent_invariants(&ch, 1).unwrap();
    assert_eq!(j.len(), 4);
    assert_eq_nf(&j[0], &e("z1_4"));
    assert_eq_nf(&j[1], &e("-(1/2)*z1_3^2 + z1_2*z1_4"));
    assert_eq_nf(&j[2], &e("(1/3)*z1_3^3 - z1_2*z1_3*z1_4 + z1_1*z1_4^2"));
}

#[test]
fn invariant_families_are_killed_for_all_orders_up_to_six() {
    // Every chain order 1..=6 in one chart, plus a mixed signature.
    for orders in [vec![1, 2, 3, 4, 5, 6], vec![2, 2, 1], vec![6]] {
        let ch = JetChains::from_orders(&orders).unwrap();
        for &(i, s) in ch.chains() {
            let is = dt_first_integrals(&ch, i).unwrap();
            assert_eq!(is.len(), s + 1);
            for f in &is {
                assert!(truncated_total_derivative(f, &ch).is_zero(), "D_t {f} != 0");
            }
            let js = t_independent_invariants(&ch, i).unwrap();
            assert_eq!(js.len(), s);
            for f in &js {
                assert!(truncated_total_derivative(f, &ch).is_zero(), "D_t {f} != 0");
                assert!(!f.depends_on("t"));
            }
        }
    }
}

#[test]
fn euler_operator_examples() {
    let ch = JetChains::from_orders(&[2]).unwrap();
    assert!(truncated_euler(&e("5"), 2, 1, &ch).unwrap().is_zero());
    let dg = truncated_total_derivative(&e("z1_0*z1_1"), &ch);
    assert!(truncated_euler(&dg, 2, 1, &ch).unwrap().is_zero());
    assert!(matches!(truncated_euler(&e("z1_0"), 3, 1, &ch), Err(CascadeError::Precondition(_))));
    // Hand expansion for f = z1_1^2 z1_0: E_1 = z1_1^2 - D_t(2 z1_0 z1_1).
    let f = e("z1_1^2*z1_0");
    assert_eq_nf(&truncated_euler(&f, 1, 1, &ch).unwrap(), &e("-z1_1^2 - 2*z1_0*z1_2"));
}

#[test]
fn euler_of_exponential_drift_on_reduced_chart() {
    let ch = JetChains::from_indexed(vec![(1, 2)]).unwrap();
    let got = truncated_euler(&e("exp(z1_1*f(t))"), 2, 1, &ch).unwrap();
    let want = e("-exp(z1_1*f(t))*(z1_1*f(t)*f'(t) + z1_2*f(t)^2 + f'(t))");
    assert_eq_nf(&got, &want);
}

#[test]
fn kernel_image_examples() {
    let ch = JetChains::from_orders(&[5]).unwrap();
    let k = euler_kernel_image(&e("z1_2^2"), 2, 1, &ch).unwrap();
    assert!(!k.euler.is_zero() && !k.image.is_zero());
    assert!(k.difference.is_zero());
    let k = euler_kernel_image(&e("z1_0*z1_1 + t"), 2, 1, &ch).unwrap();
    assert!(k.euler.is_zero() && k.difference.is_zero());
    for tau in 0..=5 {
        let k = euler_kernel_image(&e("z1_0"), tau, 1, &ch).unwrap();
        if tau > 0 {
            assert!(k.euler.is_zero() && k.image.is_zero());
        }
        assert!(k.difference.is_zero());
    }
}

/// A random expression in `t` and the jets of one chain of order `s`.
fn random_g(rng: &mut ChaCha8Rng, s: usize) -> String {
    let atom = |rng: &mut ChaCha8Rng| -> String {
        let l = rng.gen_range(0..=s);
        match rng.gen_range(0..6) {
            0 => "t".into(),
            1 => format!("sin(z1_{l})"),
            2 => format!("exp(z1_{l}/2)"),
            _ => format!("z1_{l}"),
        }
    };
    let terms = rng.gen_range(1..=3);
    let mut out = Vec::new();
    for _ in 0..terms {
        let c = rng.gen_range(-4..=4);
        let factors = rng.gen_range(1..=3);
        let mut f = vec![format!("({c})")];
        for _ in 0..factors {
            f.push(atom(rng));
        }
        out.push(f.join("*"));
    }
    if rng.gen_bool(0.2) {
        format!("({})/(1 + z1_0^2)", out.join(" + "))
    } else {
        out.join(" + ")
    }
}

#[test]
fn kernel_corollary_on_200_seeded_random_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..200 {
        let s = rng.gen_range(1..=4);
        let tau = rng.gen_range(0..=s);
        let src = random_g(&mut rng, s);
        let ch = JetChains::from_orders(&[s]).unwrap();
        let k = euler_kernel_image(&e(&src), tau, 1, &ch).unwrap();
        assert!(ctx().is_zero(&k.difference), "g = {src}, sigma = {s}, tau = {tau}");
        // Kernel case: g independent of z_tau.
        let free = e(&src).subst(&HashMap::from([(jet_name(1, tau), e("0"))])).unwrap();
        let k = euler_kernel_image(&free, tau, 1, &ch).unwrap();
        assert!(ctx().is_zero(&k.euler), "E(D_t g) != 0 for g = {free}");
    }
}

// ---------------------------------------------------------- sub-connections

fn bc_chains() -> JetChains {
    JetChains::from_orders(&[2, 1, 1]).unwrap()
}

/// `B(t, z)` read off the composition `B(t) = F2' + (1 + F1'')F1 - (...)F3`
/// with `z1 = F1` (order 2), `z2 = F2`, `z3 = F3`.
const BC_B: &str = "z2_1 + (1 + z1_2)*z1_0 - ((t - 1)*z1_0 - ((t - 1)^2 + 1)/2)*z3_0";

fn bc() -> ContactSubConnection {
    let p = vec![
        e("z3_0"),
        e("z3_0*(z1_0 - t)"),
        e(&format!("{BC_B} - z3_0*(z1_0 + 1 - t)")),
    ];
    let id = (0..3)
        .map(|b| (0..3).map(|a| e(if a == b { "1" } else { "0" })).collect())
        .collect();
    build_subconnection(&bc_chains(), p, id, &ctx()).unwrap()
}

const REDUCTION_EXAMPLE_P: &str = "exp(z1_1*z2_0)";

fn reduction_example() -> ContactSubConnection {
    build_subconnection(&JetChains::from_orders(&[2, 2]).unwrap(), vec![e(REDUCTION_EXAMPLE_P)], one(), &ctx()).unwrap()
}

const SO5_P: &str = "(2*z2_1^2 - z2_1*z1_1 - z1_0)/(z2_1*z1_0 - 2)";

fn so5() -> ContactSubConnection {
    build_subconnection(&JetChains::from_orders(&[2, 2]).unwrap(), vec![e(SO5_P)], one(), &ctx()).unwrap()
}

#[test]
fn bc_subconnection_forms() {
    let c = bc();
    assert_eq!(c.chart().dim(), 11);
    assert_eq!(c.system().rank(), 7);
    assert_eq!(c.distribution().rank(), 4);
    let ch = c.chart();
    for f in [
        "dz1_0 - z1_1*dt",
        "dz1_1 - z1_2*dt",
        "dz2_0 - z2_1*dt",
        "dz3_0 - z3_1*dt",
        "deps1 - z3_0*dt",
        "deps2 - z3_0*(z1_0 - t)*dt",
    ] {
        assert!(c.system().contains(&OneForm::parse(ch, f).unwrap()), "{f}");
    }
    let b = format!("deps3 - ({BC_B} - z3_0*(z1_0 + 1 - t))*dt");
    assert!(c.system().contains(&OneForm::parse(ch, &b).unwrap()));
    // The sub-connection is ESFT-equivalent to the BC system itself.
    assert_eq!(analyze(c.distribution()).unwrap().rdt.to_string(), "[[4,0],[7,3,4],[9,5,5],[11,11]]");
}

#[test]
fn subconnection_rejects_group_dependence() {
    let ch = JetChains::from_orders(&[1]).unwrap();
    let r = build_subconnection(&ch, vec![e("eps1*z1_0")], one(), &ctx());
    assert!(matches!(r, Err(CascadeError::Input(_))));
    let r = build_subconnection(&ch, vec![e("z1_0")], vec![vec![e("z1_0")]], &ctx());
    assert!(matches!(r, Err(CascadeError::Input(_))));
    let r = build_subconnection(&ch, vec![e("z1_0")], vec![vec![e("1"), e("0")]], &ctx());
    assert!(matches!(r, Err(CascadeError::Input(_))));
}

#[test]
fn zero_drift_gives_a_frobenius_factor() {
    let ch = JetChains::from_orders(&[1, 2]).unwrap();
    let c = build_subconnection(&ch, vec![e("0"), e("0")], vec![vec![e("1"), e("0")], vec![e("0"), e("1")]], &ctx())
        .unwrap();
    let chart = c.chart();
    assert!(c.system().contains(&OneForm::parse(chart, "deps1").unwrap()));
    assert!(c.system().contains(&OneForm::parse(chart, "deps2").unwrap()));
    // The Brunovsky part plus two exact forms.
    assert_eq!(c.system().rank(), 3 + 2);
}

#[test]
fn so5_subconnection_form() {
    let c = so5();
    let f = OneForm::parse(c.chart(), &format!("deps - ({SO5_P})*dt").replace("deps", "deps1")).unwrap();
    assert!(c.system().contains(&f));
}

#[test]
fn bc_reduction_refined_derived_type() {
    let r = reduce_along_curves(&bc(), &ContactCurveSpec::new().drop_chain(1, "f")).unwrap();
    assert_eq!(r.chart().dim(), 8);
    assert_eq!(ContactCurveSpec::new().drop_chain(1, "f").codimension(&bc_chains()).unwrap(), 3);
    let b = "z2_1 + (1 + f''(t))*f(t) - ((t - 1)*f(t) - ((t - 1)^2 + 1)/2)*z3_0";
    assert_eq_nf(&r.p()[1], &e("z3_0*(f(t) - t)"));
    assert_eq_nf(&r.p()[2], &e(&format!("{b} - z3_0*(f(t) + 1 - t)")));
    let a = analyze(r.distribution()).unwrap();
    assert_eq!(a.rdt.to_string(), "[[3,0],[5,2,3],[6,4,4],[7,5,5],[8,8]]");
    let v = r.control_distribution().unwrap();
    let (g, esfl) = goursat::esfl_conditions(&v).unwrap();
    assert_eq!(g.signature().unwrap().to_string(), "<1,0,0,1>");
    assert!(esfl.esfl, "{}", esfl.time.detail);
}

#[test]
fn reduce_nothing_is_identity() {
    let c = bc();
    let r = reduce_along_curves(&c, &ContactCurveSpec::new()).unwrap();
    assert!(r.system().span_eq(c.system()));
    assert!(!r.is_reduced());
}

#[test]
fn reduction_commutes_with_building_when_p_ignores_dropped_chains() {
    let ch = JetChains::from_orders(&[1, 2]).unwrap();
    let p = vec![e("z2_0*sin(z2_1) + t")];
    let c = build_subconnection(&ch, p.clone(), one(), &ctx()).unwrap();
    let r = reduce_along_curves(&c, &ContactCurveSpec::new().drop_chain(1, "f")).unwrap();
    let direct = build_subconnection(&JetChains::from_indexed(vec![(2, 2)]).unwrap(), p, one(), &ctx()).unwrap();
    assert_eq!(r.chart().names(), direct.chart().names());
    assert!(r.system().span_eq(&direct.system().clone()));
}

#[test]
fn curve_spec_validation() {
    let ch = JetChains::from_orders(&[1, 1]).unwrap();
    assert!(ContactCurveSpec::new().drop_chain(3, "f").validate(&ch).is_err());
    assert!(ContactCurveSpec::new().drop_chain(1, "f").drop_chain(2, "f").validate(&ch).is_err());
    assert!(ContactCurveSpec::new().drop_chain(1, "f g").validate(&ch).is_err());
}

#[test]
fn pushdown_examples() {
    let ch = JetChains::from_orders(&[2, 2]).unwrap();
    let spec = ContactCurveSpec::new().drop_chain(2, "f");
    let p = reduced_total_derivative_pushdown(&e("z1_0*z2_0"), 1, 1, &ch, &spec).unwrap();
    assert_eq_nf(&p.direct, &e("z1_1*f(t)"));
    assert!(p.difference.is_zero());
    let p = reduced_total_derivative_pushdown(&e("z1_0*z2_1"), 0, 1, &ch, &spec).unwrap();
    assert_eq_nf(&p.direct, &e("z1_0*f'(t)"));
    // so(5): A1 = -ln(z2_1 z1_0 - 2), chain 2 frozen to g.
    let spec = ContactCurveSpec::new().drop_chain(2, "g");
    let p = reduced_total_derivative_pushdown(&e("-ln(z2_1*z1_0 - 2)"), 1, 1, &ch, &spec).unwrap();
    assert!(ctx().is_zero(&p.difference));
    assert_eq_nf(&p.direct, &e("-g'(t)*z1_1/(g'(t)*z1_0 - 2)"));
    assert!(reduced_total_derivative_pushdown(&e("z1_0"), 1, 2, &ch, &spec).is_err());
}

// ------------------------------------------------------------- Q sequence

#[test]
fn q_sequence_of_padding_drift() {
    let ch = JetChains::from_orders(&[3]).unwrap();
    let c = build_subconnection(&ch, vec![e("z1_3")], one(), &ctx()).unwrap();
    let q = q_sequence(&c).unwrap();
    assert_eq!(q.q.len(), 5);
    assert!(q.get(0).is_zero());
    assert_eq_nf(q.get(1), &e("-1"));
    for k in 2..=4 {
        assert!(q.get(k).is_zero(), "Q{k} = {}", q.get(k));
    }
    assert_eq!(q.y.len(), 4);
}

#[test]
fn q_sequence_preconditions() {
    assert!(matches!(q_sequence(&bc()), Err(CascadeError::Precondition(_))));
    assert!(matches!(q_sequence(&so5()), Err(CascadeError::Precondition(_))));
    let ch = JetChains::from_orders(&[1]).unwrap();
    let c = build_subconnection(&ch, vec![e("z1_1")], vec![vec![e("exp(eps1)")]], &ctx()).unwrap();
    assert!(matches!(q_sequence(&c), Err(CascadeError::Precondition(_))));
}

fn so5_reduced() -> ContactSubConnection {
    reduce_along_curves(&so5(), &ContactCurveSpec::new().drop_chain(2, "g")).unwrap()
}

#[test]
fn so5_reduced_drift_uses_first_derivative() {
    let r = so5_reduced();
    assert_eq_nf(&r.p()[0], &e("(2*g'(t)^2 - g'(t)*z1_1 - z1_0)/(g'(t)*z1_0 - 2)"));
}

#[test]
fn so5_q3_matches_independent_derivation() {
    let q = q_sequence(&so5_reduced()).unwrap();
    assert!(q.get(1).is_zero());
    assert_eq_nf(q.get(2), &e("-g'(t)/(g'(t)*z1_0 - 2)"));
    // Q3 by hand: D_t Q2 - dp/dz1_0, simplified.
    let want = e("2*(g'(t)^3 + g''(t) - 1)/(g'(t)*z1_0 - 2)^2");
    assert_eq_nf(q.last(), &want);
    // The variant with g'' in place of g' inside p is a different function.
    let variant = e("(2*g'(t)*g''(t)^2 + 2*(g''(t) - 1))/(g'(t)*z1_0 - 2)^2");
    assert!(!ctx().equal(q.last(), &variant));
    assert!(cc_pde_check(&q, &ctx()).holds());
}

#[test]
fn q_last_is_signed_euler_operator() {
    // Q_{sigma+1} = (-1)^(sigma+1) E_sigma(p).
    let cases = [
        ("exp(z1_1*f(t))", 2),
        ("z1_2^2 + z1_0*z1_1", 2),
        ("sin(z1_0)*z1_1^2 + t*z1_3", 3),
        ("z1_1/(1 + z1_0^2)", 1),
    ];
    for (src, s) in cases {
        let ch = JetChains::from_orders(&[s]).unwrap();
        let c = build_subconnection(&ch, vec![e(src)], one(), &ctx()).unwrap();
        let q = q_sequence(&c).unwrap();
        let mut eu = truncated_euler(&e(src), s, 1, &ch).unwrap();
        if s % 2 == 0 {
            eu = eu.neg();
        }
        assert_eq_nf(q.last(), &eu);
    }
}

#[test]
fn eoq_identity_examples() {
    let ch = JetChains::from_orders(&[2]).unwrap();
    for k in 0..=2 {
        assert!(eoq_identity_check(&e("z1_2^2"), 1, &ch, k, &ctx()).unwrap());
    }
    let r = so5_reduced();
    for k in 0..=2 {
        assert!(eoq_identity_check(&r.p()[0], 1, r.chains(), k, &ctx()).unwrap(), "k = {k}");
    }
    assert!(eoq_identity_check(&e("z1_0"), 1, &ch, 3, &ctx()).is_err());
}

#[test]
fn cc_pde_on_reduction_example() {
    let c = reduction_example();
    let pass = reduce_along_curves(&c, &ContactCurveSpec::new().drop_chain(1, "g")).unwrap();
    assert!(cc_pde_check(&q_sequence(&pass).unwrap(), &ctx()).holds());
    let fail = reduce_along_curves(&c, &ContactCurveSpec::new().drop_chain(2, "f")).unwrap();
    assert!(!cc_pde_check(&q_sequence(&fail).unwrap(), &ctx()).holds());
}

// ------------------------------------------------------------- theorems

#[test]
fn necessity_reproduces_reduction_example() {
    let c = reduction_example();
    let v = necessity_check(&c, &ContactCurveSpec::new().drop_chain(1, "g"), &ctx()).unwrap();
    assert!(v.passed());
    assert_eq_nf(&v.euler, &e("g'(t)*exp(g'(t)*z2_0)"));
    assert!(v.to_string().contains("necessary condition only"));
    let v = necessity_check(&c, &ContactCurveSpec::new().drop_chain(2, "f"), &ctx()).unwrap();
    assert_eq!(v.status, NecessityStatus::FailDepends("z1_2".into()));
    assert_eq_nf(
        &v.euler,
        &e("-exp(z1_1*f(t))*(z1_1*f(t)*f'(t) + z1_2*f(t)^2 + f'(t))"),
    );
}

#[test]
fn necessity_fails_on_padding() {
    let ch = JetChains::from_orders(&[2, 1]).unwrap();
    let c = build_subconnection(&ch, vec![e("z1_2")], one(), &ctx()).unwrap();
    let v = necessity_check(&c, &ContactCurveSpec::new().drop_chain(2, "f"), &ctx()).unwrap();
    assert_eq!(v.status, NecessityStatus::FailZero);
}

#[test]
fn necessity_requires_codimension_one_setting() {
    assert!(matches!(
        necessity_check(&bc(), &ContactCurveSpec::new().drop_chain(1, "f"), &ctx()),
        Err(CascadeError::Precondition(_))
    ));
    assert!(matches!(
        necessity_check(&so5(), &ContactCurveSpec::new(), &ctx()),
        Err(CascadeError::Precondition(_))
    ));
}

#[test]
fn so5_sufficiency_decomposition() {
    let a = vec![e("(2*z2_1^2 - z1_0)/(z2_1*z1_0 - 2)"), e("-ln(z2_1*z1_0 - 2)")];
    let spec = ContactCurveSpec::new().drop_chain(2, "g");
    let v = sufficiency_verify(&so5(), &spec, &a, true, &ctx()).unwrap();
    assert_eq!(v.pipeline_esfl, Some(true));
    assert_eq_nf(&v.side_condition, &e("g'(t)^3 + g''(t) - 1"));
    assert!(v.to_string().contains("side condition"));
    assert!(necessity_check(&so5(), &spec, &ctx()).unwrap().passed());
}

#[test]
fn sufficiency_rejections() {
    let spec = ContactCurveSpec::new().drop_chain(2, "g");
    // Wrong sign on A1.
    let a = vec![e("(2*z2_1^2 - z1_0)/(z2_1*z1_0 - 2)"), e("ln(z2_1*z1_0 - 2)")];
    assert!(matches!(
        sufficiency_verify(&so5(), &spec, &a, false, &ctx()),
        Err(CascadeError::Decomposition { .. })
    ));
    // A_l may not depend on higher jets of the retained chain.
    let a = vec![e(SO5_P)];
    assert!(matches!(
        sufficiency_verify(&so5(), &spec, &a, false, &ctx()),
        Err(CascadeError::Decomposition { .. })
    ));
    // Power of D_t,i above sigma_i.
    let ch = JetChains::from_orders(&[1, 1]).unwrap();
    let big = e("z1_0^3");
    let p = decomposition_sum(&[e("0"), e("0"), big.clone()], 1, &ch).unwrap();
    let c = build_subconnection(&ch, vec![p], one(), &ctx()).unwrap();
    let spec = ContactCurveSpec::new().drop_chain(2, "g");
    let r = sufficiency_verify(&c, &spec, &[e("0"), e("0"), big], false, &ctx());
    assert!(matches!(r, Err(CascadeError::Precondition(_))));
    assert!(!necessity_check(&c, &spec, &ctx()).unwrap().passed());
}

#[test]
fn trivial_sufficiency() {
    let ch = JetChains::from_orders(&[1, 1]).unwrap();
    let c = build_subconnection(&ch, vec![e("z2_0")], one(), &ctx()).unwrap();
    let spec = ContactCurveSpec::new().drop_chain(1, "f");
    let v = sufficiency_verify(&c, &spec, &[e("z2_0")], true, &ctx()).unwrap();
    assert_eq!(v.decomposition.len(), 1);
}

#[test]
fn search_finds_so5_decomposition() {
    let spec = ContactCurveSpec::new().drop_chain(2, "g");
    match sufficiency_search(&so5(), &spec, None, &ctx()).unwrap() {
        SearchOutcome::Found(v) => {
            assert_eq!(v.decomposition.len(), 2);
            assert_eq_nf(&v.decomposition[1], &e("-ln(z2_1*z1_0 - 2)"));
            assert_eq_nf(&v.decomposition[0], &e("(2*z2_1^2 - z1_0)/(z2_1*z1_0 - 2)"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn search_outcomes() {
    let ch = JetChains::from_orders(&[2, 2]).unwrap();
    let c = build_subconnection(&ch, vec![e("z2_1 + z1_1*z2_0")], one(), &ctx()).unwrap();
    let spec = ContactCurveSpec::new().drop_chain(2, "g");
    match sufficiency_search(&c, &spec, None, &ctx()).unwrap() {
        SearchOutcome::Found(v) => {
            assert_eq_nf(&v.decomposition[1], &e("z1_0*z2_0"));
            assert_eq_nf(&v.decomposition[0], &e("z2_1"));
        }
        other => panic!("{other:?}"),
    }
    let c = reduction_example();
    let spec = ContactCurveSpec::new().drop_chain(2, "f");
    assert!(matches!(sufficiency_search(&c, &spec, None, &ctx()).unwrap(), SearchOutcome::Impossible(_)));
}

// ------------------------------------------------------------- reconstruction

/// Oracle: composite adaptive Simpson quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
}

#[test]
fn zero_drift_keeps_group_constant() {
    let ch = JetChains::from_orders(&[1]).unwrap();
    let c = build_subconnection(&ch, vec![e("0")], one(), &ctx()).unwrap();
    let tr = reconstruct_trajectory(&c, &FlatCurves::new().chain(1, e("t^2")), &TimeGrid::new(0.0, 1.0, 10), &[0.25])
        .unwrap();
    assert!(tr.eps.iter().all(|v| v[0] == 0.25));
    assert_eq!(tr.z[10], vec![1.0, 2.0]);
}

#[test]
fn abelian_reconstruction_matches_quadrature() {
    let ch = JetChains::from_orders(&[1, 2]).unwrap();
    let p = vec![e("sin(z1_1) + z2_2"), e("t*z2_0")];
    let id = vec![vec![e("1"), e("0")], vec![e("0"), e("1")]];
    let c = build_subconnection(&ch, p, id, &ctx()).unwrap();
    let curves = FlatCurves::new().chain(1, e("t^3/3")).chain(2, e("cos(t)"));
    let tr = reconstruct_trajectory(&c, &curves, &TimeGrid::new(0.0, 1.0, 100), &[0.0, 1.0]).unwrap();
    assert!(tr.confirmed);
    let f1 = |t: f64| (t * t).sin() - t.cos();
    let f2 = |t: f64| t * t.cos();
    let last = tr.eps.last().unwrap();
    assert!((last[0] - simpson(&f1, 0.0, 1.0, 1e-13)).abs() < 1e-9);
    assert!((last[1] - 1.0 - simpson(&f2, 0.0, 1.0, 1e-13)).abs() < 1e-9);
}

#[test]
fn reconstruction_of_reduced_system_uses_frozen_functions() {
    let r = so5_reduced();
    let curves = FlatCurves::new().chain(1, e("t")).function("g", e("t^2/2"));
    // p = (2t^2 - t*1 - t)/(t*t - 2) along z1 = t, g' = t.
    let tr = reconstruct_trajectory(&r, &curves, &TimeGrid::new(0.0, 1.0, 200), &[0.0]).unwrap();
    let p = |t: f64| (2.0 * t * t - 2.0 * t) / (t * t - 2.0);
    let want = simpson(&p, 0.0, 1.0, 1e-13);
    assert!((tr.eps.last().unwrap()[0] - want).abs() < 1e-9);
    let missing = reconstruct_trajectory(&r, &FlatCurves::new().chain(1, e("t")), &TimeGrid::new(0.0, 1.0, 4), &[0.0]);
    assert!(matches!(missing, Err(CascadeError::Input(_))));
}

#[test]
fn reconstruction_reports_poles() {
    let ch = JetChains::from_orders(&[1]).unwrap();
    let c = build_subconnection(&ch, vec![e("1/(z1_0 - 1/2)")], one(), &ctx()).unwrap();
    let r = reconstruct_trajectory(&c, &FlatCurves::new().chain(1, e("t")), &TimeGrid::new(0.0, 1.0, 10), &[0.0]);
    assert!(matches!(r, Err(CascadeError::Pole { .. })));
}

/// The lifted example: eps1' = exp(eps2),
/// eps2' = exp(z1_1) with chain 1 of order 1 and chain 2 of order 2.
fn lifted_example() -> ContactSubConnection {
    let ch = JetChains::from_orders(&[1, 2]).unwrap();
    build_subconnection(
        &ch,
        vec![e("1"), e("exp(z1_1)")],
        vec![vec![e("exp(eps2)"), e("0")], vec![e("0"), e("1")]],
        &ctx(),
    )
    .unwrap()
}

#[test]
fn worked_example_reconstruction_converges_at_fourth_order() {
    let c = lifted_example();
    let curves = FlatCurves::new().chain(1, e("t^2")).chain(2, e("t^3 - t"));
    // Oracle: eps2 = (e^{2t} - 1)/2 exactly, eps1 = int exp(eps2) by quadrature.
    let eps2 = |t: f64| ((2.0 * t).exp() - 1.0) / 2.0;
    let err = |h: f64| {
        let grid = TimeGrid::with_step(0.0, 1.0, h);
        let tr = reconstruct_trajectory(&c, &curves, &grid, &[0.0, 0.0]).unwrap();
        let mut m: f64 = 0.0;
        let mut acc = 0.0;
        for n in 0..tr.t.len() {
            if n > 0 {
                acc += simpson(&|s| eps2(s).exp(), tr.t[n - 1], tr.t[n], 1e-15);
            }
            m = m.max((tr.eps[n][0] - acc).abs()).max((tr.eps[n][1] - eps2(tr.t[n])).abs());
        }
        (m, tr)
    };
    let (e3, tr) = err(1e-3);
    assert!(e3 <= 1e-6 && tr.confirmed && tr.residual <= 1e-6, "{e3} {}", tr.residual);
    let hs = [1e-2, 5e-3, 2.5e-3];
    let es: Vec<f64> = hs.iter().map(|&h| err(h).0).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = hs.iter().zip(&es).map(|(h, e)| (h.ln(), e.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((3.7..=4.3).contains(&slope), "slope {slope}, errors {es:?}");
}

// ------------------------------------------------------------- properties

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn invariants_are_first_integrals(orders in proptest::collection::vec(1usize..=6, 1..=3)) {
        let ch = JetChains::from_orders(&orders).unwrap();
        for &(i, _) in ch.chains() {
            for f in dt_first_integrals(&ch, i).unwrap().iter().chain(t_independent_invariants(&ch, i).unwrap().iter()) {
                prop_assert!(truncated_total_derivative(f, &ch).is_zero());
            }
        }
    }

    #[test]
    fn eoq_and_recursion_agree(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = rng.gen_range(1..=3);
        let src = random_g(&mut rng, s);
        let ch = JetChains::from_orders(&[s]).unwrap();
        let p = e(&src);
        for k in 0..=s {
            prop_assert!(eoq_identity_check(&p, 1, &ch, k, &ctx()).unwrap(), "p = {}, k = {}", src, k);
        }
    }

    #[test]
    fn accepted_decompositions_pass_necessity(seed in 0u64..10_000) {
        // p = A0 + D_{t,1} A1 with A_l built from z1_0 and chain 2.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pick = |rng: &mut ChaCha8Rng| -> String {
            let opts = ["z1_0", "z2_0", "z2_1", "sin(z1_0)", "exp(z2_0/3)", "z1_0*z2_1", "z1_0^2"];
            opts[rng.gen_range(0..opts.len())].to_string()
        };
        let a0 = format!("{} + {}*{}", pick(&mut rng), rng.gen_range(1..4), pick(&mut rng));
        let a1 = format!("{}*{}", pick(&mut rng), pick(&mut rng));
        let ch = JetChains::from_orders(&[2, 2]).unwrap();
        let a = vec![e(&a0), e(&a1)];
        let p = decomposition_sum(&a, 1, &ch).unwrap();
        let c = build_subconnection(&ch, vec![p], one(), &ctx()).unwrap();
        let spec = ContactCurveSpec::new().drop_chain(2, "g");
        let ok = sufficiency_verify(&c, &spec, &a, false, &ctx());
        prop_assert!(ok.is_ok(), "{:?}", ok.err());
        let n = necessity_check(&c, &spec, &ctx()).unwrap();
        // Necessity holds unless E vanishes (degenerate, not bracket generating).
        prop_assert!(n.passed() || n.status == NecessityStatus::FailZero, "{}", n);
    }

    #[test]
    fn reduction_commutes_with_build(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = random_g(&mut rng, 2).replace("z1_", "z2_");
        let ch = JetChains::from_orders(&[1, 2]).unwrap();
        let c = build_subconnection(&ch, vec![e(&src)], one(), &ctx()).unwrap();
        let r = reduce_along_curves(&c, &ContactCurveSpec::new().drop_chain(1, "f")).unwrap();
        prop_assert!(ctx().equal(&r.p()[0], &e(&src)));
    }
}
