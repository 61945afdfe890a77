use flags::analyze;
use geomcore::linalg::float_rank;
use geomcore::{ControlSystem, Ctx, Distribution, VectorField};
use goursat::{
    esfl_conditions, fundamental_bundle, is_goursat_bundle, polar_matrix, polar_matrix_in_frame, procedure_contact,
    resolvent_bundle, signature_from_rdt, verify_contact_coordinates, weber_structure, FirstIntegralOracle,
    GoursatError, GoursatSignature, Procedure, Status,
};
use symexpr::{nf, NormalForm, Point};

fn hsm() -> ControlSystem {
    ControlSystem::parse(
        &[
            ("x1", "sin(x2)"),
            ("x2", "sin(x3)"),
            ("x3", "x4^3 + u1"),
            ("x4", "x5 + x4^3 - x1^10"),
            ("x5", "u2"),
        ],
        &["u1", "u2"],
    )
    .unwrap()
}

fn sluis() -> ControlSystem {
    ControlSystem::parse(
        &[
            ("x1", "x1 + u1*(1 + x1)"),
            ("x2", "x3 + u2*(1 - x3)"),
            ("x3", "u1"),
            ("x4", "u2"),
        ],
        &["u1", "u2"],
    )
    .unwrap()
}

fn bc() -> ControlSystem {
    ControlSystem::parse(
        &[
            ("x1", "u1"),
            ("x2", "x1"),
            ("x3", "x2 + x6 + x2*u1"),
            ("x4", "u2 + x1*u3"),
            ("x5", "x4"),
            ("x6", "x5 + x2*x4"),
            ("x7", "u3"),
        ],
        &["u1", "u2", "u3"],
    )
    .unwrap()
}

/// The BC system reduced by its three-dimensional symmetry algebra, in the
/// invariant coordinates `y`, `v`.
fn bc_quotient() -> ControlSystem {
    ControlSystem::parse(
        &[
            ("y1", "v1"),
            ("y2", "y1"),
            ("y3", "((t - 1)*y2 - ((t - 1)^2 + 1)/2)*y4 - (1 + v1)*y2 + v3"),
            ("y4", "y1*v3 + v2"),
        ],
        &["v1", "v2", "v3"],
    )
    .unwrap()
}

fn eq(a: &NormalForm, src: &str) -> bool {
    Ctx::default().equal(a, &nf(src).unwrap())
}

#[test]
fn hsm_is_esfl_of_type_011() {
    let v = hsm().distribution(&Ctx::default());
    let (verdict, esfl) = esfl_conditions(&v).unwrap();
    assert!(verdict.is_goursat());
    assert_eq!(verdict.signature().unwrap().rho, vec![0, 1, 1]);
    assert!(verdict.conditions.iter().all(|c| c.status != Status::Fail));
    assert_eq!(verdict.conditions[2].status, Status::NotApplicable);
    assert!(esfl.esfl, "{esfl}");
    assert!(esfl.time.detail.starts_with("dt ∈ Ξ^(2)"));
}

#[test]
fn hsm_fundamental_bundle() {
    let s = hsm();
    let v = s.distribution(&Ctx::default());
    let x = NormalForm::var("t");
    let pi = fundamental_bundle(&v, &x, &s.drift()).unwrap();
    assert_eq!(pi.steps.len(), 3);
    assert!(pi.integrable);
    assert_eq!(pi.corank, 2);
    let expected = Distribution::coordinate(v.chart(), &["u1", "u2", "x2", "x3", "x4", "x5"], v.ctx()).unwrap();
    assert!(pi.last().span_eq(&expected));
    // Z(x) = 1 is enforced.
    assert!(matches!(
        fundamental_bundle(&v, &NormalForm::var("x3"), &s.drift()),
        Err(GoursatError::Input(_))
    ));
}

fn check_hsm_coordinates(c: &goursat::ContactCoordinates) {
    assert_eq!(c.procedure, Procedure::B);
    assert!(eq(&c.x, "t"));
    assert_eq!(c.chains.len(), 2);
    assert_eq!(c.chains[0].order, 2);
    assert_eq!(c.chains[1].order, 3);
    let expected = [
        (1, 0, "x4"),
        (1, 1, "x5 + x4^3 - x1^10"),
        (1, 2, "u2 + 3*x4^2*(x5 + x4^3 - x1^10) - 10*x1^9*sin(x2)"),
        (2, 0, "x1"),
        (2, 1, "sin(x2)"),
        (2, 2, "cos(x2)*sin(x3)"),
        (2, 3, "-sin(x2)*sin(x3)^2 + (x4^3 + u1)*cos(x2)*cos(x3)"),
    ];
    for (chain, s, src) in expected {
        assert!(eq(c.coord(chain, s), src), "z{chain}_{s} = {}", c.coord(chain, s).to_expr());
    }
}

#[test]
fn hsm_contact_coordinates_with_oracle() {
    let v = hsm().distribution(&Ctx::default());
    let oracle = FirstIntegralOracle::new()
        .with_sources("order2", &["x4"])
        .unwrap()
        .with_sources("fundamental", &["x1"])
        .unwrap();
    let c = procedure_contact(&v, &oracle).unwrap();
    check_hsm_coordinates(&c);
    assert!(verify_contact_coordinates(&v, &c).holds());
}

#[test]
fn hsm_contact_coordinates_from_coordinate_bundles() {
    let v = hsm().distribution(&Ctx::default());
    let c = procedure_contact(&v, &FirstIntegralOracle::new()).unwrap();
    check_hsm_coordinates(&c);
}

#[test]
fn perturbed_coordinates_fail_verification() {
    let v = hsm().distribution(&Ctx::default());
    let mut c = procedure_contact(&v, &FirstIntegralOracle::new()).unwrap();
    c.chains[1].coords[1] = c.chains[1].coords[1].add(&NormalForm::var("t"));
    let check = verify_contact_coordinates(&v, &c);
    assert!(!check.holds());
    assert!(!check.recursion);
    assert!(!check.annihilation);
}

#[test]
fn rejected_and_missing_integrals() {
    let v = hsm().distribution(&Ctx::default());
    let bad = FirstIntegralOracle::new().with_sources("order2", &["x3"]).unwrap();
    assert!(matches!(
        procedure_contact(&v, &bad),
        Err(GoursatError::RejectedCandidate { tag, .. }) if tag == "order2"
    ));
    // t is a first integral of the order-2 bundle but lies in Xi^(2).
    let dependent = FirstIntegralOracle::new().with_sources("order2", &["t"]).unwrap();
    assert!(matches!(
        procedure_contact(&v, &dependent),
        Err(GoursatError::MissingIntegrals { needed: 1, found: 0, .. })
    ));
}

fn sluis_fields(v: &Distribution) -> [VectorField; 5] {
    let c = v.chart();
    let p = |s: &str| VectorField::parse(c, s).unwrap();
    [
        p("D_t + (x1 + u1*(1 + x1))*D_x1 + (x3 + u2*(1 - x3))*D_x2 + u1*D_x3 + u2*D_x4"),
        p("(1 + x1)*D_x1 + D_x3"),
        p("(1 - x3)*D_x2 + D_x4"),
        p("D_x1 + (1 - u2)*D_x2"),
        p("u1*D_x2"),
    ]
}

#[test]
fn sluis_flag_and_polar_matrix() {
    let v = sluis().distribution(&Ctx::default());
    let a = analyze(&v).unwrap();
    assert_eq!(a.rdt.to_string(), "[[3,0],[5,2,2],[7,7]]");
    let [x, y1, y2, y3, y4] = sluis_fields(&v);
    assert!(a.flag.step(1).span_eq(&v.extended(&[y1.clone(), y2.clone()]).unwrap()));
    let coeffs: Vec<NormalForm> = ["a0", "a1", "a2"].iter().map(|s| NormalForm::var(s)).collect();
    let m = polar_matrix_in_frame(a.flag.step(1), &[x, y1, y2], &[y3, y4], &coeffs).unwrap();
    let expected = [["a1", "-a0", "0"], ["a2", "a2/u1", "-a0 - a1/u1"]];
    for (row, erow) in m.iter().zip(expected) {
        for (e, src) in row.iter().zip(erow) {
            assert!(eq(e, src), "{} vs {src}", e.to_expr());
        }
    }
}

#[test]
fn sluis_resolvent_and_verdict() {
    let v = sluis().distribution(&Ctx::default());
    let a = analyze(&v).unwrap();
    let [x, y1, y2, ..] = sluis_fields(&v);
    let w = weber_structure(a.flag.step(1)).unwrap();
    assert_eq!((w.c, w.q), (2, 2));
    assert!(w.integrable);
    let u1 = NormalForm::var("u1");
    let bbar = Distribution::new(v.chart(), &[x.sub(&y1.scale(&u1)), y2.clone()], v.ctx()).unwrap();
    assert!(Distribution::new(v.chart(), &w.singular, v.ctx()).unwrap().span_eq(&bbar));
    let expected = bbar.sum(&Distribution::coordinate(v.chart(), &["u1", "u2"], v.ctx()).unwrap()).unwrap();
    assert!(resolvent_bundle(a.flag.step(1)).unwrap().span_eq(&expected));

    let (verdict, esfl) = esfl_conditions(&v).unwrap();
    assert!(verdict.is_goursat());
    assert_eq!(verdict.signature().unwrap().rho, vec![0, 2]);
    assert_eq!(verdict.conditions[2].status, Status::Pass);
    assert!(!esfl.esfl);
    assert_eq!(esfl.controls.status, Status::Pass);
    assert_eq!(esfl.time.status, Status::Fail);
    assert!(esfl.time.detail.starts_with("dt ∉ Υ"), "{}", esfl.time.detail);
}

#[test]
fn sluis_contact_coordinates() {
    let v = sluis().distribution(&Ctx::default());
    let missing = procedure_contact(&v, &FirstIntegralOracle::new()).unwrap_err();
    match &missing {
        GoursatError::MissingIntegrals { tag, needed, generators, .. } => {
            assert_eq!(tag, "resolvent");
            assert_eq!(*needed, 3);
            assert_eq!(generators.len(), 4);
        }
        other => panic!("unexpected {other}"),
    }
    let oracle = FirstIntegralOracle::new()
        .with_sources("resolvent", &["x1*exp(-t)", "x3", "(x4 - t)*x3 + x2 - x4"])
        .unwrap();
    let c = procedure_contact(&v, &oracle).unwrap();
    assert_eq!(c.procedure, Procedure::A);
    assert!(eq(&c.x, "x3"));
    assert!(c.z.sub(&sluis().drift().scale(&nf("1/u1").unwrap())).is_zero());
    let expected = [
        (1, 0, "x1*exp(-t)"),
        (1, 1, "exp(-t)*(1 + x1)"),
        (1, 2, "exp(-t)*(1 + x1 - 1/u1)"),
        (2, 0, "(x4 - t)*x3 + x2 - x4"),
        (2, 1, "x4 - t"),
        // Direct evaluation gives Z(x4 - t) = (u2 - 1)/u1.
        (2, 2, "(u2 - 1)/u1"),
    ];
    for (chain, s, src) in expected {
        assert!(eq(c.coord(chain, s), src), "z{chain}_{s} = {}", c.coord(chain, s).to_expr());
    }
    assert!(verify_contact_coordinates(&v, &c).holds());
}

#[test]
fn bc_is_not_goursat() {
    let v = bc().distribution(&Ctx::default());
    let verdict = is_goursat_bundle(&v).unwrap();
    assert!(!verdict.is_goursat());
    assert_eq!(verdict.conditions[0].status, Status::Fail);
    let mismatch = verdict.signature.as_ref().unwrap_err();
    assert_eq!(mismatch.relation, "chi^2 = 2 m_2 - m_3 - 1");
    assert!(matches!(procedure_contact(&v, &FirstIntegralOracle::new()), Err(GoursatError::NotGoursat(_))));
    let (_, esfl) = esfl_conditions(&v).unwrap();
    assert!(!esfl.esfl);
}

#[test]
fn bc_quotient_is_esfl_with_expected_coordinates() {
    let s = bc_quotient();
    let v = s.distribution(&Ctx::default());
    let (verdict, esfl) = esfl_conditions(&v).unwrap();
    assert_eq!(verdict.analysis.rdt.to_string(), "[[4,0],[7,3,5],[8,8]]");
    assert_eq!(verdict.signature().unwrap().rho, vec![2, 1]);
    assert!(esfl.esfl);
    let pi = fundamental_bundle(&v, &NormalForm::var("t"), &s.drift()).unwrap();
    let ann = geomcore::PfaffianSystem::new(
        v.chart(),
        &[
            geomcore::OneForm::parse(v.chart(), "dt").unwrap(),
            geomcore::OneForm::parse(v.chart(), "dy2").unwrap(),
        ],
        v.ctx(),
    )
    .unwrap();
    assert!(pi.last().annihilator().span_eq(&ann));
    let c = procedure_contact(&v, &FirstIntegralOracle::new()).unwrap();
    assert!(eq(&c.x, "t"));
    let by_z0 = |src: &str| c.chains.iter().find(|ch| eq(&ch.coords[0], src)).unwrap();
    let z1 = by_z0("y2");
    assert_eq!(z1.order, 2);
    assert!(eq(&z1.coords[1], "y1") && eq(&z1.coords[2], "v1"));
    assert!(eq(&by_z0("y3").coords[1], "((t - 1)*y2 - ((t - 1)^2 + 1)/2)*y4 - (1 + v1)*y2 + v3"));
    assert!(eq(&by_z0("y4").coords[1], "y1*v3 + v2"));
}

/// Rank of `sigma(E)` at a point, computed directly: brackets `[E, Y]` for
/// every basis field `Y`, counted modulo `V` by floating-point ranks.
fn numeric_polar_rank(v: &Distribution, e: &VectorField, pt: &Point) -> usize {
    let basis = v.basis();
    let eval = |f: &VectorField| f.coeffs().iter().map(|c| c.eval(pt).unwrap()).collect::<Vec<f64>>();
    let mut rows: Vec<Vec<f64>> = basis.iter().map(eval).collect();
    let base = float_rank(&rows, 1e-9);
    for y in &basis {
        rows.push(eval(&e.bracket(y).unwrap()));
    }
    float_rank(&rows, 1e-9) - base
}

#[test]
fn two_chain_first_jets_resolvent_is_the_fiber() {
    let sig: GoursatSignature = "<2>".parse().unwrap();
    let v = sig.contact_distribution(&Ctx::default()).unwrap();
    let r = resolvent_bundle(&v).unwrap();
    assert!(r.span_eq(&Distribution::coordinate(v.chart(), &["z1_1", "z2_1"], v.ctx()).unwrap()));
    let pt = Point::new().with("t", 0.3).with("z1_0", 0.7).with("z1_1", -1.1).with("z2_0", 0.4).with("z2_1", 1.9);
    for e in r.basis() {
        assert!(numeric_polar_rank(&v, &e, &pt) < 2);
    }
    let total = VectorField::parse(v.chart(), "D_t + z1_1*D_z1_0 + z2_1*D_z2_0 + 3*D_z1_1 - 2*D_z2_1").unwrap();
    assert_eq!(numeric_polar_rank(&v, &total, &pt), 2);
}

#[test]
fn polar_matrix_examples() {
    // First jets of one function: the generic polar matrix has rank 1.
    let sig: GoursatSignature = "<1>".parse().unwrap();
    let v = sig.contact_distribution(&Ctx::default()).unwrap();
    let m = polar_matrix(&v, &[nf("2").unwrap(), nf("-3").unwrap()]).unwrap();
    let pt = Point::new().with("t", 0.2).with("z1_0", 0.5).with("z1_1", 0.9);
    let num: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|e| e.eval(&pt).unwrap()).collect()).collect();
    assert_eq!(float_rank(&num, 1e-12), 1);
    let total = VectorField::parse(v.chart(), "2*D_t + 2*z1_1*D_z1_0 - 3*D_z1_1").unwrap();
    assert_eq!(numeric_polar_rank(&v, &total, &pt), 1);

    // A Cauchy characteristic has the zero polar matrix.
    let s = hsm();
    let v1 = analyze(&s.distribution(&Ctx::default())).unwrap().flag.step(1).clone();
    let c = v1.chart();
    let vbar = [
        VectorField::parse(c, "D_u1").unwrap(),
        s.drift(),
        VectorField::parse(c, "D_x3").unwrap(),
        VectorField::parse(c, "D_x5").unwrap(),
    ];
    let frame = [
        VectorField::parse(c, "D_x1").unwrap(),
        VectorField::parse(c, "D_x2").unwrap(),
        VectorField::parse(c, "D_x4").unwrap(),
    ];
    let one_hot = [NormalForm::one(), NormalForm::zero(), NormalForm::zero(), NormalForm::zero()];
    let m = polar_matrix_in_frame(&v1, &vbar, &frame, &one_hot).unwrap();
    assert!(m.iter().flatten().all(NormalForm::is_zero));
}

#[test]
fn weber_conditions_are_checked() {
    // HSM's V^(2) has corank 1, so q = 1 is too small.
    let v = hsm().distribution(&Ctx::default());
    let v2 = analyze(&v).unwrap().flag.step(2).clone();
    assert!(matches!(weber_structure(&v2), Err(GoursatError::Weber(goursat::WeberError::Conditions(_)))));
}

/// All chain-order multisets with `sum (sigma_i + 1) <= budget`.
fn signatures(budget: usize) -> Vec<Vec<usize>> {
    fn go(min: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for s in min..left {
            if s < left {
                cur.push(s);
                go(s, left - s - 1, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(1, budget, &mut Vec::new(), &mut out);
    out
}

#[test]
fn brunovsky_round_trip() {
    let all = signatures(8);
    assert_eq!(all.len(), 21);
    for orders in all {
        let sig = GoursatSignature::from_chain_orders(&orders).unwrap();
        let v = sig.contact_distribution(&Ctx::default()).unwrap();
        let a = analyze(&v).unwrap();
        assert_eq!(a.rdt, sig.refined_derived_type(), "{sig}");
        assert_eq!(signature_from_rdt(&a.rdt, false).unwrap(), sig);
        let verdict = is_goursat_bundle(&v).unwrap();
        assert!(verdict.is_goursat(), "{sig}: {verdict}");
        if orders == [1] {
            // Derived length 1 with one chain: outside the construction.
            assert!(matches!(procedure_contact(&v, &FirstIntegralOracle::new()), Err(GoursatError::Structure(_))));
            continue;
        }
        // Identity coordinates from the coordinate oracle.
        let c = procedure_contact(&v, &FirstIntegralOracle::new()).unwrap();
        assert!(eq(&c.x, "t"), "{sig}");
        for (n, chain) in c.chains.iter().enumerate() {
            for (s, z) in chain.coords.iter().enumerate() {
                assert!(eq(z, &format!("z{}_{}", n + 1, s)), "{sig}: z{}_{s} = {}", n + 1, z.to_expr());
            }
        }
    }
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    /// Chains `x{c}_1' = x{c}_2, ..., x{c}_s' = u{c} + f_c(x)` with
    /// polynomial `f_c`: static feedback equivalent to Brunovsky form.
    fn feedback_system(orders: &[usize], coeffs: &[i64]) -> ControlSystem {
        let mut states = Vec::new();
        for (c, &s) in orders.iter().enumerate() {
            for l in 1..=s {
                states.push(format!("x{}_{}", c + 1, l));
            }
        }
        let mut odes = Vec::new();
        let mut controls = Vec::new();
        for (c, &s) in orders.iter().enumerate() {
            for l in 1..s {
                odes.push((format!("x{}_{}", c + 1, l), format!("x{}_{}", c + 1, l + 1)));
            }
            let a = coeffs[c % coeffs.len()];
            let b = coeffs[(c + 1) % coeffs.len()];
            let p = &states[(c * 3) % states.len()];
            let q = &states[(c * 5 + 1) % states.len()];
            controls.push(format!("u{}", c + 1));
            odes.push((format!("x{}_{}", c + 1, s), format!("u{} + ({a})*{p}^2 + ({b})*{p}*{q}", c + 1)));
        }
        let o: Vec<(&str, &str)> = odes.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let u: Vec<&str> = controls.iter().map(String::as_str).collect();
        ControlSystem::parse(&o, &u).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn feedback_systems_linearize(
            orders in prop::collection::vec(1usize..=3, 1..=3),
            coeffs in prop::collection::vec(-3i64..=3, 2),
        ) {
            // A single first-order chain has derived length 1 and is outside the construction.
            prop_assume!(orders != [1]);
            let s = feedback_system(&orders, &coeffs);
            let v = s.distribution(&Ctx::default());
            let (verdict, esfl) = esfl_conditions(&v).unwrap();
            let sig = GoursatSignature::from_chain_orders(&orders).unwrap();
            prop_assert_eq!(verdict.signature(), Some(&sig));
            prop_assert!(esfl.esfl);
            let c = procedure_contact(&v, &FirstIntegralOracle::new()).unwrap();
            prop_assert!(verify_contact_coordinates(&v, &c).holds());
            // ESFL: the source is time and zeroth-order coordinates are
            // control independent.
            prop_assert!(eq(&c.x, "t"));
            for chain in &c.chains {
                for u in s.names_with(geomcore::Role::Control) {
                    prop_assert!(!chain.coords[0].depends_on(&u));
                }
            }
        }
    }
}
