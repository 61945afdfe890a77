use geomcore::linalg::{bareiss_rank, float_rank};
use geomcore::{
    brunovsky_matrices, generic_rank, kalman_controllable, kalman_matrix, kalman_rank, Chart, ControlSystem, Ctx,
    Distribution, OneForm, PfaffianSystem, Role, VectorField,
};
use num_rational::BigRational;
use symexpr::{nf, NormalForm};

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

fn lin1() -> ControlSystem {
    ControlSystem::parse(&[("x1", "x2"), ("x2", "u2"), ("x3", "u1"), ("x4", "u2")], &["u1", "u2"]).unwrap()
}

#[test]
fn hsm_bracket_with_dx4() {
    let s = hsm();
    let c = s.chart();
    let x = s.drift();
    let d4 = VectorField::coordinate_named(c, "x4").unwrap();
    let b = d4.bracket(&x).unwrap();
    let expected = VectorField::parse(c, "3*x4^2*(D_x3 + D_x4)").unwrap();
    assert_eq!(b, expected);
    assert!(x.bracket(&x).unwrap().is_zero());
}

#[test]
fn reduced_total_derivative_lowers_jet_order() {
    // [D, d/dz_l] = -d/dz_{l-1} for the truncated total derivative.
    let c = Chart::from_pairs(&[
        ("t", Role::Time),
        ("z0", Role::Jet { chain: 1, order: 0 }),
        ("z1", Role::Jet { chain: 1, order: 1 }),
        ("z2", Role::Jet { chain: 1, order: 2 }),
    ])
    .unwrap();
    let d = VectorField::parse(&c, "D_t + z1*D_z0 + z2*D_z1").unwrap();
    for l in 1..=2 {
        let dz = VectorField::coordinate_named(&c, &format!("z{l}")).unwrap();
        let lower = VectorField::coordinate_named(&c, &format!("z{}", l - 1)).unwrap();
        assert_eq!(d.bracket(&dz).unwrap(), lower.scale(&NormalForm::int(-1)));
    }
}

#[test]
fn apply_builds_hsm_contact_coordinates() {
    let s = hsm();
    let x = s.drift();
    let z11 = nf("x5 + x4^3 - x1^10").unwrap();
    let z12 = x.apply(&z11);
    let expected = nf("u2 + 3*x4^2*(x5 + x4^3 - x1^10) - 10*x1^9*sin(x2)").unwrap();
    assert_eq!(z12, expected);
    assert!(x.apply(&NormalForm::one()).is_zero());
    let z21 = x.apply(&nf("x1").unwrap());
    let z22 = x.apply(&z21);
    let z23 = x.apply(&z22);
    assert_eq!(z22, nf("cos(x2)*sin(x3)").unwrap());
    assert_eq!(
        z23,
        nf("-sin(x2)*sin(x3)^2 + (x4^3 + u1)*cos(x2)*cos(x3)").unwrap()
    );
}

#[test]
fn annihilator_of_scalar_system() {
    let c = Chart::control("t", &["x"], &["u"]).unwrap();
    let ctx = Ctx::default();
    let p = PfaffianSystem::new(&c, &[OneForm::parse(&c, "dx - u*dt").unwrap()], &ctx).unwrap();
    let v = p.annihilator();
    let expected = Distribution::new(
        &c,
        &[
            VectorField::parse(&c, "D_t + u*D_x").unwrap(),
            VectorField::parse(&c, "D_u").unwrap(),
        ],
        &ctx,
    )
    .unwrap();
    assert!(v.span_eq(&expected));
    assert_eq!(v.basis()[0].to_string(), "D_t + u*D_x");
    assert!(v.annihilator().span_eq(&p));
}

#[test]
fn hsm_pfaffian_double_annihilator() {
    let s = hsm();
    let ctx = Ctx::default();
    let omega = s.pfaffian(&ctx);
    assert_eq!(omega.rank(), 5);
    let v = omega.annihilator();
    assert!(v.span_eq(&s.distribution(&ctx)));
    assert!(v.annihilator().span_eq(&omega));
    // dt is the independence condition and does not vanish on X.
    assert!(omega.independence().is_some());
}

#[test]
fn hsm_first_derived_rank() {
    let s = hsm();
    let ctx = Ctx::default();
    let v = s.distribution(&ctx);
    let v1 = v.extended(&v.pairwise_brackets()).unwrap();
    assert_eq!(v1.rank(), 5);
    let rows: Vec<Vec<NormalForm>> = v1.basis().iter().map(|x| x.coeffs().to_vec()).collect();
    let rep = generic_rank(&rows, &ctx);
    assert_eq!(rep.rank, 5);
    assert!(!rep.disagreement);
    assert!(v1.contains(&VectorField::coordinate_named(s.chart(), "x3").unwrap()));
    assert!(v1.contains(&VectorField::coordinate_named(s.chart(), "x5").unwrap()));
    assert!(!v1.contains(&VectorField::coordinate_named(s.chart(), "x4").unwrap()));
}

#[test]
fn exterior_derivative_examples() {
    let c = Chart::plain(&["x", "y", "z"]).unwrap();
    let theta = OneForm::parse(&c, "dy - z*dx").unwrap();
    let d = theta.exterior_derivative();
    // -dz^dx = dx^dz.
    assert_eq!(d.coeff(0, 2), &NormalForm::one());
    assert_eq!(d.coeff(2, 0), &NormalForm::int(-1));
    assert_eq!(d.coeff(0, 1), &NormalForm::zero());
    assert!(d.is_closed());
    let f = nf("x^2*y").unwrap();
    assert!(OneForm::differential(&c, &f).exterior_derivative().is_zero());
    let w = OneForm::parse(&c, "x*dy").unwrap().exterior_derivative();
    assert_eq!(w.coeff(0, 1), &NormalForm::one());
    assert_eq!(w.to_string(), "(1)*dx^dy");
}

#[test]
fn lie_derivative_cartan_formula() {
    let c = Chart::plain(&["x", "y", "z"]).unwrap();
    let theta = OneForm::parse(&c, "dy - z*dx").unwrap();
    let x = VectorField::parse(&c, "D_x + z*D_y").unwrap();
    let y = VectorField::parse(&c, "D_z").unwrap();
    // (L_X theta)(Y) = X(theta(Y)) - theta([X, Y]).
    let lhs = theta.lie_derivative(&x).unwrap().eval(&y);
    let rhs = x.apply(&theta.eval(&y)).sub(&theta.eval(&x.bracket(&y).unwrap()));
    assert_eq!(lhs, rhs);
}

#[test]
fn generic_rank_examples() {
    let ctx = Ctx::default();
    let id: Vec<Vec<NormalForm>> = (0..4)
        .map(|i| (0..4).map(|j| if i == j { NormalForm::one() } else { NormalForm::zero() }).collect())
        .collect();
    assert_eq!(generic_rank(&id, &ctx).rank, 4);
    let m = vec![
        vec![nf("x").unwrap(), nf("y").unwrap()],
        vec![nf("x^2").unwrap(), nf("x*y").unwrap()],
    ];
    let rep = generic_rank(&m, &ctx);
    assert_eq!((rep.symbolic, rep.rank), (1, 1));
    let t = vec![
        vec![nf("sin(x)^2").unwrap(), nf("1").unwrap()],
        vec![nf("1 - cos(x)^2").unwrap(), nf("1").unwrap()],
    ];
    assert_eq!(generic_rank(&t, &ctx).rank, 1);
}

/// The Kalman matrix of the uncontrollable linear example, ranked by
/// floating-point elimination as an independent oracle.
#[test]
fn lin1_kalman_rank_three() {
    let (a, b) = lin1().linear_matrices().expect("linear");
    let k = kalman_matrix(&a, &b).unwrap();
    assert_eq!((k.len(), k[0].len()), (4, 8));
    let f: Vec<Vec<f64>> = k
        .iter()
        .map(|r| r.iter().map(|c| num_traits::ToPrimitive::to_f64(c).unwrap()).collect())
        .collect();
    assert_eq!(float_rank(&f, 1e-12), 3);
    assert_eq!(kalman_rank(&a, &b).unwrap(), 3);
    assert!(!kalman_controllable(&a, &b).unwrap());
    assert!(hsm().linear_matrices().is_none());
}

#[test]
fn brunovsky_forms_are_controllable() {
    for kappa in [vec![1], vec![0, 1], vec![2, 0, 1], vec![0, 1, 1], vec![1, 1, 1]] {
        let (a, b) = brunovsky_matrices(&kappa);
        assert!(kalman_controllable(&a, &b).unwrap(), "{kappa:?}");
    }
}

#[test]
fn bareiss_agrees_with_float_rank_on_small_integers() {
    let rows = [[2, 4, 1], [1, 2, 0], [3, 6, 1]];
    let m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
        .collect();
    let f: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    assert_eq!(bareiss_rank(&m), float_rank(&f, 1e-12));
    assert_eq!(bareiss_rank(&m), 2);
}

#[test]
fn intersection_and_sum() {
    let c = Chart::plain(&["x", "y", "z", "w"]).unwrap();
    let ctx = Ctx::default();
    let a = Distribution::coordinate(&c, &["x", "y"], &ctx).unwrap();
    let b = Distribution::new(
        &c,
        &[
            VectorField::parse(&c, "D_y + z*D_z").unwrap(),
            VectorField::parse(&c, "D_w").unwrap(),
        ],
        &ctx,
    )
    .unwrap();
    let i = a.intersect(&b).unwrap();
    assert_eq!(i.rank(), 0);
    assert_eq!(a.sum(&b).unwrap().rank(), 4);
    let b2 = Distribution::coordinate(&c, &["y", "z"], &ctx).unwrap();
    let i2 = a.intersect(&b2).unwrap();
    assert!(i2.span_eq(&Distribution::coordinate(&c, &["y"], &ctx).unwrap()));
}

#[test]
fn frobenius_test() {
    let c = Chart::plain(&["x", "y", "z"]).unwrap();
    let ctx = Ctx::default();
    let flat = Distribution::coordinate(&c, &["x", "y"], &ctx).unwrap();
    assert!(flat.is_frobenius());
    let contact = Distribution::new(
        &c,
        &[
            VectorField::parse(&c, "D_x + z*D_y").unwrap(),
            VectorField::parse(&c, "D_z").unwrap(),
        ],
        &ctx,
    )
    .unwrap();
    assert!(!contact.is_frobenius());
    assert!(!contact.annihilator().is_frobenius());
    assert_eq!(
        PfaffianSystem::new(&c, &[OneForm::parse(&c, "dz").unwrap()], &ctx)
            .unwrap()
            .coordinate_integrals(),
        Some(vec!["z".to_string()])
    );
}

#[test]
fn parse_errors() {
    let c = Chart::plain(&["x", "y"]).unwrap();
    assert!(VectorField::parse(&c, "D_x*D_y").is_err());
    assert!(VectorField::parse(&c, "D_x + 1").is_err());
    assert!(VectorField::parse(&c, "D_q").is_err());
    assert!(OneForm::parse(&c, "dx^2").is_err());
    let other = Chart::plain(&["x", "y"]).unwrap();
    let d = Chart::plain(&["a", "b"]).unwrap();
    let x = VectorField::coordinate(&c, 0);
    assert!(x.bracket(&VectorField::coordinate(&other, 1)).is_ok());
    assert!(x.bracket(&VectorField::coordinate(&d, 1)).is_err());
}
