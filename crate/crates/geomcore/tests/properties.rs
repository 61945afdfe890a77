use geomcore::linalg::float_rank;
use geomcore::{Chart, Ctx, Distribution, OneForm, VectorField};
use proptest::prelude::*;
use symexpr::{NormalForm, Point};

const VARS: [&str; 4] = ["x", "y", "z", "w"];

fn chart() -> Chart {
    Chart::plain(&VARS).unwrap()
}

/// Polynomial with up to three terms, coefficients in -3..=3 and exponents
/// at most 2 per variable.
fn poly() -> impl Strategy<Value = NormalForm> {
    prop::collection::vec((-3i64..=3, prop::array::uniform4(0u32..=2)), 0..=3).prop_map(|terms| {
        let mut acc = NormalForm::zero();
        for (c, e) in terms {
            let mut t = NormalForm::int(c);
            for (v, k) in VARS.iter().zip(e) {
                t = t.mul(&NormalForm::var(v).pow(k as i64).unwrap());
            }
            acc = acc.add(&t);
        }
        acc
    })
}

/// Coefficients that may also involve `sin` and `exp`.
fn mixed() -> impl Strategy<Value = NormalForm> {
    (poly(), poly(), 0usize..3).prop_map(|(a, b, k)| match k {
        0 => a,
        1 => a.add(&NormalForm::apply(symexpr::Func::Sin, &b).unwrap()),
        _ => a.mul(&NormalForm::apply(symexpr::Func::Exp, &b).unwrap()),
    })
}

fn field(coef: impl Strategy<Value = NormalForm>) -> impl Strategy<Value = VectorField> {
    prop::collection::vec(coef, 4).prop_map(|c| VectorField::new(&chart(), c).unwrap())
}

fn form(coef: impl Strategy<Value = NormalForm>) -> impl Strategy<Value = OneForm> {
    prop::collection::vec(coef, 4).prop_map(|c| OneForm::new(&chart(), c).unwrap())
}

fn numeric_rank(rows: &[Vec<NormalForm>], pt: &Point) -> Option<usize> {
    let m: Option<Vec<Vec<f64>>> = rows
        .iter()
        .map(|r| r.iter().map(|e| e.eval(pt).ok()).collect())
        .collect();
    m.map(|m| float_rank(&m, 1e-9))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn jacobi_identity(x in field(poly()), y in field(poly()), z in field(poly())) {
        let a = x.bracket(&y).unwrap().bracket(&z).unwrap();
        let b = y.bracket(&z).unwrap().bracket(&x).unwrap();
        let c = z.bracket(&x).unwrap().bracket(&y).unwrap();
        prop_assert!(a.add(&b).add(&c).is_zero());
    }

    #[test]
    fn annihilator_involution_and_duality(
        fields in prop::collection::vec(field(poly()), 1..=3),
        k in 1i64..=9,
    ) {
        let c = chart();
        let ctx = Ctx::default();
        let d = Distribution::new(&c, &fields, &ctx).unwrap();
        let ann = d.annihilator();
        prop_assert_eq!(d.rank() + ann.rank(), 4);
        prop_assert!(ann.annihilator().span_eq(&d));
        for f in ann.forms() {
            for x in d.basis() {
                prop_assert!(f.eval(&x).is_zero());
            }
        }
        // Duality at a generic numeric point, counted independently.
        let q = NormalForm::frac(k, 7).as_constant().unwrap();
        let v = num_traits::ToPrimitive::to_f64(&q).unwrap();
        let pt = Point::new().with("x", v).with("y", 1.0 - v).with("z", 2.0 * v + 0.5).with("w", -v - 1.25);
        let drows: Vec<Vec<NormalForm>> = d.basis().iter().map(|x| x.coeffs().to_vec()).collect();
        let arows: Vec<Vec<NormalForm>> = ann.forms().iter().map(|x| x.coeffs().to_vec()).collect();
        if let (Some(r1), Some(r2)) = (numeric_rank(&drows, &pt), numeric_rank(&arows, &pt)) {
            // Rank can only drop at special points, never exceed the generic one.
            prop_assert!(r1 <= d.rank() && r2 <= ann.rank());
        }
    }

    #[test]
    fn d_squared_vanishes(theta in form(mixed()), h in mixed()) {
        let c = chart();
        prop_assert!(OneForm::differential(&c, &h).exterior_derivative().is_zero());
        prop_assert!(theta.exterior_derivative().is_closed());
    }

    #[test]
    fn bracket_is_bilinear_and_antisymmetric(
        x in field(poly()), y in field(poly()), z in field(poly()),
        a in -5i64..=5, b in 1i64..=5,
    ) {
        let ca = NormalForm::int(a);
        let cb = NormalForm::frac(1, b);
        let lhs = x.scale(&ca).add(&y.scale(&cb)).bracket(&z).unwrap();
        let rhs = x.bracket(&z).unwrap().scale(&ca).add(&y.bracket(&z).unwrap().scale(&cb));
        prop_assert!(lhs.sub(&rhs).is_zero());
        prop_assert!(x.bracket(&y).unwrap().add(&y.bracket(&x).unwrap()).is_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn two_form_identity(theta in form(poly()), x in field(poly()), y in field(poly())) {
        // d theta(X, Y) = X(theta(Y)) - Y(theta(X)) - theta([X, Y]).
        let lhs = theta.exterior_derivative().eval(&x, &y);
        let rhs = x.apply(&theta.eval(&y))
            .sub(&y.apply(&theta.eval(&x)))
            .sub(&theta.eval(&x.bracket(&y).unwrap()));
        prop_assert!(lhs.sub(&rhs).is_zero());
    }
}
