//! Randomized invariants. Case counts are kept modest because every case
//! runs certified arithmetic; the acceptance suite carries the large fixed
//! samples.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use selfsim::algebra::mahler_measure;
use selfsim::ball::{PrecisionContext, RealBall};
use selfsim::entropy::{entropy_at_scale, smoothed_entropy, GaussianKernel, PointCloud, Position, SmoothMethod};
use selfsim::field::NumberField;
use selfsim::ifs::atoms::detect_exact_overlaps;
use selfsim::ifs::mitm::{delta_n, delta_n_exhaustive, MitmParams};
use selfsim::ifs::{compose_word, IFSSpec};
use selfsim::intpoly::IntPoly;
use selfsim::roots::isolate_roots;

fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn ball_of(r: &BigRational) -> RealBall {
    RealBall::from_ratio(r.numer(), r.denom(), 96)
}

fn int_poly(coeffs: &[i64]) -> IntPoly {
    IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
}

fn golden_ifs() -> IFSSpec {
    IFSSpec::from_json(
        r#"{
            "field_minpoly": ["-1", "1", "1"],
            "lambda": {"minpoly": ["-1", "1", "1"], "isolator": {"re": "0.6", "im": "0", "radius": "0.1"}},
            "translations": [["0", "0", "1"], ["1", "0", "1"]],
            "probs": ["1/2", "1/2"]
        }"#,
        &ctx(),
    )
    .unwrap()
}

fn three_map_ifs(lambda: &BigRational, ts: &[i64; 3]) -> IFSSpec {
    IFSSpec::from_json(
        &format!(
            r#"{{
                "field_minpoly": ["-1", "1"],
                "lambda": {{"decimal": "{}"}},
                "translations": [["{}", "1"], ["{}", "1"], ["{}", "1"]],
                "probs": ["1/3", "1/3", "1/3"]
            }}"#,
            lambda, ts[0], ts[1], ts[2]
        ),
        &ctx(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // every exact rational outcome lies inside the computed ball
    #[test]
    fn ball_ops_enclose_exact_values(
        an in -9999i64..=9999, ad in 1i64..=400,
        bn in -9999i64..=9999, bd in 1i64..=400,
        prec in 24u32..=160,
    ) {
        let a = rational(an, ad);
        let b = rational(bn, bd);
        let (ab, bb) = (ball_of(&a), ball_of(&b));

        let cases = vec![
            (ab.add(&bb, prec), &a + &b),
            (ab.sub(&bb, prec), &a - &b),
            (ab.mul(&bb, prec), &a * &b),
        ];
        for (ball, exact) in cases {
            let x = RealBall::from_ratio(exact.numer(), exact.denom(), 256);
            prop_assert!(ball.contains_ball(&x) || ball.intersects(&x),
                "exact value escaped the ball");
        }
        if !b.is_zero() {
            let q = &a / &b;
            let ball = ab.div(&bb, prec);
            let x = RealBall::from_ratio(q.numer(), q.denom(), 256);
            prop_assert!(ball.intersects(&x), "quotient escaped the ball");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // certified isolation accounts for every root with multiplicity
    #[test]
    fn isolation_counts_match_degree(coeffs in prop::collection::vec(-20i64..=20, 2..=9)) {
        let f = int_poly(&coeffs);
        prop_assume!(f.degree().unwrap_or(0) >= 1);
        let iso = isolate_roots(&f, &ctx()).unwrap();
        prop_assert_eq!(iso.total_multiplicity() as usize, f.degree().unwrap());
    }

    // M(f) >= 1 for integer polynomials
    #[test]
    fn mahler_at_least_one(coeffs in prop::collection::vec(-10i64..=10, 2..=6)) {
        let f = int_poly(&coeffs);
        prop_assume!(f.degree().unwrap_or(0) >= 1);
        let m = mahler_measure(&f, 96, &ctx()).unwrap();
        prop_assert!(m.hi().to_f64() >= 1.0);
        prop_assert!(m.lo().to_f64() > 1.0 - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // translation(uv) = translation(u) + lambda^|u| translation(v), exactly
    #[test]
    fn word_composition_is_associative(
        u in prop::collection::vec(0usize..2, 1..=6),
        v in prop::collection::vec(0usize..2, 1..=6),
    ) {
        let ifs = golden_ifs();
        let f = ifs.field();
        let lam = ifs.lam_in_field().unwrap().clone();

        let eval = |word: &[usize]| {
            let comp = compose_word(&ifs, word).unwrap();
            let mut acc = f.zero();
            for c in comp.coeffs.iter().rev() {
                acc = f.add(&f.mul(&acc, &lam), c);
            }
            acc
        };

        let mut uv = u.clone();
        uv.extend_from_slice(&v);
        let left = eval(&uv);
        let right = f.add(&eval(&u), &f.mul(&f.pow(&lam, u.len() as u32), &eval(&v)));
        prop_assert_eq!(left, right);
    }

    // a nonzero element of a quadratic field is no smaller than H^(-2)
    #[test]
    fn field_values_respect_height_floor(
        a in -12i64..=12, b in 1i64..=12, q in 1i64..=9, flip in any::<bool>(),
    ) {
        let b = if flip { -b } else { b };
        let field = NumberField::new(int_poly(&[-1, 1, 1]), &ctx()).unwrap();
        let alpha = field
            .from_coords(vec![BigInt::from(a), BigInt::from(b)], BigInt::from(q))
            .unwrap();
        prop_assume!(!alpha.is_zero());

        // resultant construction: q^2 X^2 + q(b - 2a) X + (a^2 - a b - b^2)
        let minpoly = int_poly(&[a * a - a * b - b * b, q * (b - 2 * a), q * q]);
        let m = mahler_measure(&minpoly, 96, &ctx()).unwrap();
        let abs = field.abs_enclosure(&alpha, 96).unwrap();
        // |alpha| * M >= 1 up to ball slack
        let prod = abs.mul(&m, 96);
        prop_assert!(prod.hi().to_f64() >= 1.0 - 1e-9,
            "height floor violated: |alpha| * M = {}", prod.to_f64());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // half-table enumeration agrees with the exhaustive scan
    #[test]
    fn mitm_matches_exhaustive(
        ln in 1i64..=9, ld in 10i64..=19,
        t1 in 0i64..=3, t2 in 0i64..=3, n in 1usize..=5,
    ) {
        prop_assume!(ln < ld);
        prop_assume!(t1 != 0 || t2 != 0);
        let lambda = rational(ln, ld);
        let ifs = three_map_ifs(&lambda, &[0, t1, t2]);
        let fast = delta_n(&ifs, n, &MitmParams::default()).unwrap();
        let slow = delta_n_exhaustive(&ifs, n).unwrap();
        prop_assert_eq!(fast.delta_exact.clone(), slow.delta_exact.clone());
        prop_assert_eq!(fast.overlap_word_pairs, slow.overlap_word_pairs);
    }

    // an exact overlap at level n is the same event as delta_n seeing a
    // vanishing word pair
    #[test]
    fn overlap_detection_matches_delta_zero_pairs(
        ln in 1i64..=9, ld in 10i64..=19,
        t1 in 0i64..=2, t2 in 0i64..=2, n_max in 1usize..=4,
    ) {
        prop_assume!(ln < ld);
        prop_assume!(t1 != 0 || t2 != 0);
        let lambda = rational(ln, ld);
        let ifs = three_map_ifs(&lambda, &[0, t1, t2]);
        let witness = detect_exact_overlaps(&ifs, n_max).unwrap();
        let mut first_zero = None;
        for n in 1..=n_max {
            if delta_n(&ifs, n, &MitmParams::default()).unwrap().overlap_word_pairs > 0 {
                first_zero = Some(n);
                break;
            }
        }
        prop_assert_eq!(witness.map(|w| w.n), first_zero);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    // sweep evaluation tracks a midpoint average of the bucket entropy
    #[test]
    fn scale_entropy_tracks_riemann_average(
        xs in prop::collection::btree_set(0i64..=64, 2..=4),
        rn in 1i64..=24,
    ) {
        let c = ctx();
        let xs: Vec<i64> = xs.into_iter().collect();
        let w = rational(1, xs.len() as i64);
        let atoms: Vec<(Position, BigRational)> = xs
            .iter()
            .map(|&x| (Position::Rational(rational(x, 16)), w.clone()))
            .collect();
        let r = rational(rn, 12);

        let swept = entropy_at_scale(&atoms, &r, None, &c).unwrap();
        let v = swept.value.to_f64();

        let rf = rn as f64 / 12.0;
        let scaled: Vec<f64> = xs.iter().map(|&x| (x as f64 / 16.0) / rf).collect();
        let samples = 20_000;
        let mut acc = 0.0f64;
        for i in 0..samples {
            let t = (i as f64 + 0.5) / samples as f64;
            let mut buckets: Vec<(i64, f64)> = Vec::new();
            for x in &scaled {
                let key = (x + t).floor() as i64;
                match buckets.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, bw)) => *bw += 1.0,
                    None => buckets.push((key, 1.0)),
                }
            }
            let m = xs.len() as f64;
            acc += buckets.iter().map(|(_, cnt)| {
                let p = cnt / m;
                -p * p.ln()
            }).sum::<f64>();
        }
        let riemann = acc / samples as f64;
        prop_assert!((v - riemann).abs() <= 2e-3,
            "sweep {} vs riemann {}", v, riemann);
    }

    // smoothing an atomic distribution stays between 0 and its Shannon
    // entropy
    #[test]
    fn smoothed_entropy_between_zero_and_shannon(
        xs in prop::collection::btree_set(-40i64..=40, 1..=5),
    ) {
        let pts: Vec<f64> = xs.iter().map(|&x| x as f64 / 8.0).collect();
        let cloud = PointCloud::uniform_line(&pts).unwrap();
        let est = smoothed_entropy(&cloud, &GaussianKernel::identity(1).unwrap(), &SmoothMethod::Quadrature).unwrap();
        let shannon = cloud.shannon().eval(64).to_f64();
        prop_assert!(est.value >= -est.error - 1e-12);
        prop_assert!(est.value <= shannon + est.error + 1e-12);
    }
}
