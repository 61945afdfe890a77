use flags::{
    acceleration, analyze, cauchy_characteristics, deceleration, derived_flag, pfaffian_derived_flag, velocity,
    FlagError, RefinedDerivedType,
};
use geomcore::linalg::float_rank;
use geomcore::{Chart, ControlSystem, Ctx, Distribution, OneForm, PfaffianSystem, Role, VectorField};
use symexpr::Point;

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

/// Brunovsky contact distribution with one chain per entry of `lengths`.
fn contact(lengths: &[usize]) -> Distribution {
    let mut pairs: Vec<(String, Role)> = vec![("t".into(), Role::Time)];
    for (c, &len) in lengths.iter().enumerate() {
        for l in 0..=len {
            pairs.push((format!("z{}_{}", c + 1, l), Role::Jet { chain: c + 1, order: l }));
        }
    }
    let refs: Vec<(&str, Role)> = pairs.iter().map(|(n, r)| (n.as_str(), *r)).collect();
    let chart = Chart::from_pairs(&refs).unwrap();
    let mut terms = vec!["D_t".to_string()];
    let mut fields = Vec::new();
    for (c, &len) in lengths.iter().enumerate() {
        for l in 0..len {
            terms.push(format!("z{c1}_{l1}*D_z{c1}_{l}", c1 = c + 1, l1 = l + 1));
        }
        fields.push(VectorField::coordinate_named(&chart, &format!("z{}_{}", c + 1, len)).unwrap());
    }
    fields.insert(0, VectorField::parse(&chart, &terms.join(" + ")).unwrap());
    Distribution::new(&chart, &fields, &Ctx::default()).unwrap()
}

/// Independent oracle: ranks of iterated bracket closures, evaluated in
/// floating point at a fixed point.
fn oracle_ranks(d: &Distribution, pt: &Point) -> Vec<usize> {
    let mut fields = d.basis();
    let rank = |fs: &[VectorField]| {
        let m: Vec<Vec<f64>> =
            fs.iter().map(|f| f.coeffs().iter().map(|c| c.eval(pt).unwrap()).collect()).collect();
        float_rank(&m, 1e-9)
    };
    let mut out = vec![rank(&fields)];
    loop {
        let mut next = fields.clone();
        for i in 0..fields.len() {
            for j in i + 1..fields.len() {
                let b = fields[i].bracket(&fields[j]).unwrap();
                if !b.is_zero() {
                    next.push(b);
                }
            }
        }
        let r = rank(&next);
        if r == *out.last().unwrap() {
            return out;
        }
        out.push(r);
        // Keep the list small: retain a maximal independent subset.
        let mut kept: Vec<VectorField> = Vec::new();
        for f in next {
            let mut trial = kept.clone();
            trial.push(f.clone());
            if rank(&trial) > kept.len() {
                kept.push(f);
            }
        }
        fields = kept;
    }
}

fn generic_point(chart: &Chart) -> Point {
    let mut p = Point::new();
    for (i, n) in chart.names().iter().enumerate() {
        p.set(n, 0.31 + 0.17 * i as f64);
    }
    p
}

#[test]
fn hsm_refined_derived_type() {
    let v = hsm().distribution(&Ctx::default());
    let a = analyze(&v).unwrap();
    assert_eq!(a.rdt, "[[3,0],[5,2,2],[7,4,5],[8,8]]".parse::<RefinedDerivedType>().unwrap());
    assert!(a.reseeded);
    assert!(!a.undecided);
    assert_eq!(velocity(&a.ranks()), vec![2, 2, 1]);
    assert_eq!(deceleration(&a.ranks()), vec![0, 1, 1]);
    assert_eq!(acceleration(&a.ranks()), vec![0, -1, 1]);
}

#[test]
fn hsm_flag_members() {
    let s = hsm();
    let c = s.chart();
    let ctx = Ctx::default();
    let f = derived_flag(&s.distribution(&ctx), None).unwrap();
    assert_eq!(f.ranks(), vec![3, 5, 7, 8]);
    assert!(!f.truncated);
    let d = |names: &[&str]| Distribution::coordinate(c, names, &ctx).unwrap();
    assert!(f.step(1).span_eq(&f.step(0).sum(&d(&["x3", "x5"])).unwrap()));
    assert!(f.step(2).span_eq(&f.step(1).sum(&d(&["x2", "x4"])).unwrap()));
    assert!(f.step(3).is_full());
}

#[test]
fn hsm_cauchy_bundles() {
    let s = hsm();
    let c = s.chart();
    let ctx = Ctx::default();
    let a = analyze(&s.distribution(&ctx)).unwrap();
    let d = |names: &[&str]| Distribution::coordinate(c, names, &ctx).unwrap();
    assert!(a.chars[1].span_eq(&d(&["u1", "u2"])));
    assert!(a.chars[2].span_eq(&d(&["u1", "u2", "x3", "x4", "x5"])));
    for ch in &a.chars {
        assert!(ch.is_frobenius());
    }
    for i in 0..a.chars.len() - 1 {
        assert!(a.chars[i + 1].contains_all(&a.chars[i]));
    }
}

#[test]
fn bc_refined_derived_type_and_first_derived() {
    let s = bc();
    let c = s.chart();
    let ctx = Ctx::default();
    let w = s.distribution(&ctx);
    let expected = Distribution::new(
        c,
        &[
            VectorField::parse(
                c,
                "D_t + u1*D_x1 + x1*D_x2 + (x2 + x2*u1 + x6)*D_x3 + (x1*u3 + u2)*D_x4 + x4*D_x5 + (x2*x4 + x5)*D_x6 + u3*D_x7",
            )
            .unwrap(),
            VectorField::parse(c, "D_u1").unwrap(),
            VectorField::parse(c, "D_u2").unwrap(),
            VectorField::parse(c, "D_u3").unwrap(),
        ],
        &ctx,
    )
    .unwrap();
    assert!(w.span_eq(&expected));
    assert!(s.pfaffian(&ctx).annihilator().span_eq(&expected));
    let a = analyze(&w).unwrap();
    assert_eq!(a.rdt.to_string(), "[[4,0],[7,3,4],[9,5,5],[11,11]]");
    assert!(!a.reseeded);
    let w1 = w
        .extended(&[
            VectorField::parse(c, "D_x1 + x2*D_x3").unwrap(),
            VectorField::parse(c, "D_x4").unwrap(),
            VectorField::parse(c, "x1*D_x4 + D_x7").unwrap(),
        ])
        .unwrap();
    assert!(a.flag.step(1).span_eq(&w1));
}

#[test]
fn frobenius_inputs() {
    let c = Chart::plain(&["x", "y", "z"]).unwrap();
    let ctx = Ctx::default();
    let flat = Distribution::coordinate(&c, &["x", "y"], &ctx).unwrap();
    let f = derived_flag(&flat, None).unwrap();
    assert_eq!(f.derived_length(), 0);
    assert!(flat.is_frobenius());
    assert!(cauchy_characteristics(&flat).span_eq(&flat));
    let contact = PfaffianSystem::new(&c, &[OneForm::parse(&c, "dy - z*dx").unwrap()], &ctx)
        .unwrap()
        .annihilator();
    assert!(!contact.is_frobenius());
    assert_eq!(cauchy_characteristics(&contact).rank(), 0);
    let derived = pfaffian_derived_flag(&PfaffianSystem::new(&c, &[OneForm::parse(&c, "dy - z*dx").unwrap()], &ctx).unwrap());
    assert_eq!(derived.last().unwrap().rank(), 0);
    assert!(matches!(
        derived_flag(&Distribution::zero(&c, &ctx), None),
        Err(FlagError::Empty)
    ));
}

#[test]
fn truncated_flag_is_reported() {
    let v = contact(&[3]);
    let f = derived_flag(&v, Some(1)).unwrap();
    assert!(f.truncated);
    assert_eq!(f.ranks(), vec![2, 3]);
}

#[test]
fn contact_system_on_third_jets() {
    let v = contact(&[3]);
    let f = derived_flag(&v, None).unwrap();
    assert_eq!(f.ranks(), vec![2, 3, 4, 5]);
    assert_eq!(f.ranks(), oracle_ranks(&v, &generic_point(v.chart())));
    assert_eq!(velocity(&f.ranks()), vec![1, 1, 1]);
}

#[test]
fn signature_two_one_deceleration() {
    // <2,1>: two chains of length 1 and one of length 2.
    let v = contact(&[1, 1, 2]);
    let f = derived_flag(&v, None).unwrap();
    assert_eq!(f.ranks(), oracle_ranks(&v, &generic_point(v.chart())));
    assert_eq!(deceleration(&f.ranks()), vec![2, 1]);
}

#[test]
fn duality_with_pfaffian_flag() {
    let ctx = Ctx::default();
    for s in [hsm(), bc()] {
        let p = s.pfaffian(&ctx);
        let dual: Vec<usize> = pfaffian_derived_flag(&p).iter().map(|q| s.chart().dim() - q.rank()).collect();
        let f = derived_flag(&s.distribution(&ctx), None).unwrap();
        assert_eq!(dual, f.ranks());
    }
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn contact_flags_match_oracle(lengths in prop::collection::vec(1usize..=3, 1..=3)) {
            let v = contact(&lengths);
            let a = analyze(&v).unwrap();
            prop_assert_eq!(a.ranks(), oracle_ranks(&v, &generic_point(v.chart())));
            for (i, ch) in a.chars.iter().enumerate() {
                prop_assert!(ch.is_frobenius());
                prop_assert!(a.flag.step(i).contains_all(ch));
            }
            for i in 1..a.chars.len() {
                prop_assert!(a.chars[i].contains_all(&a.chars[i - 1]));
            }
        }
    }
}
