use parabola_core::cover::{chop, chop_scale};
use parabola_core::poly::IntegerQuadratic;
use parabola_core::scale::PsiSpec;
use parabola_core::sets::{delta_set, lemma1_verify, pair_union, Threshold};
use parabola_core::{QuadIrr, Rational};
use proptest::prelude::*;

fn quad() -> impl Strategy<Value = IntegerQuadratic> {
    (1i64..40, -40i64..40, -60i64..60).prop_map(|(a2, a1, a0)| IntegerQuadratic::new(a2, a1, a0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn delta_membership_matches_evaluation(f in quad(), tn in 1i64..8, td in 1i64..64, xn in 0i64..=97) {
        let t = Rational::new(tn, td);
        let x = Rational::new(xn, 97);
        let inside = f.eval(&x).abs() < t;
        prop_assert_eq!(delta_set(&f, &t).contains_rational(&x), inside);
    }

    #[test]
    fn chop_tiles_each_component(f in quad(), td in 2i64..200, n in 0u32..4) {
        let t = Rational::new(1, td);
        let u = delta_set(&f, &t);
        let delta = chop_scale(&t, n);
        let pieces = chop(&u, &delta);
        let (d, half) = (delta.to_f64(), delta.to_f64() / 2.0);
        let mut total = 0.0;
        for p in &pieces {
            let len = p.length();
            prop_assert!(len.lo <= d * (1.0 + 1e-9));
            if !p.short {
                prop_assert!(len.hi >= half * (1.0 - 1e-9));
            }
            total += len.mid();
        }
        let m = u.measure();
        prop_assert!((total - m.mid()).abs() <= 1e-9 * (1.0 + m.mid()));
        for w in pieces.windows(2) {
            prop_assert!(w[0].hi <= w[1].lo);
        }
    }
}

#[test]
fn pair_measure_under_bound_against_grid() {
    // fine-grid count over the explicit union as an independent measure estimate
    let psi: PsiSpec = "pow:3".parse().unwrap();
    let n = 3;
    let t = Threshold::for_level(&psi, n).unwrap();
    let grid = 1 << 14;
    for (a2, a1) in [(8i64, 0i64), (9, -9), (15, -7), (12, 5)] {
        let rep = lemma1_verify(a2, a1, n, &psi).unwrap();
        assert!(rep.passed, "{a2},{a1}");
        let hits = (0..=grid)
            .filter(|&i| {
                let x = Rational::new(i, grid);
                (-(4 * (1i64 << n))..(4 * (1i64 << n)))
                    .filter_map(|a0| IntegerQuadratic::new(a2, a1, a0).ok())
                    .filter(|f| f.discriminant() > 0)
                    .any(|f| f.eval(&x).abs() < *t.value())
            })
            .count();
        let est = hits as f64 / grid as f64;
        assert!((est - rep.measure.mid()).abs() < 4.0 * rep.components as f64 / grid as f64, "{a2},{a1}: {est} vs {:?}", rep.measure);
        let union = pair_union(a2, a1, n, &t);
        assert_eq!(union.len(), rep.components);
    }
}

#[test]
fn quadratic_endpoint_ordering() {
    // (1 ± √2)/2 around 1/2
    let lo = QuadIrr::new(Rational::new(1, 2), Rational::new(-1, 2), Rational::from_integer(2));
    let hi = QuadIrr::new(Rational::new(1, 2), Rational::new(1, 2), Rational::from_integer(2));
    assert!(lo < QuadIrr::rational(Rational::new(1, 2)));
    assert!(QuadIrr::rational(Rational::new(1, 2)) < hi);
}
