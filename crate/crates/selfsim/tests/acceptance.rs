//! Acceptance suite: one test per numbered criterion, each printing a
//! [PASS] or [FAIL] line with the measured quantities. Tolerances and
//! runtime caps are pinned here, not in the library.

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selfsim::algebra::{
    certified_is_zero, check_norm_bounds, mahler_measure, AlgebraicNumber,
};
use selfsim::ball::{ComplexBall, PrecisionContext};
use selfsim::dyadic::Dyadic;
use selfsim::entropy::{
    conditional_gap, default_t_grid, dimension_bracket, entropy_at_scale,
    garsia_entropy_bracket, hat, lb_phi_check, level_n_atoms, operator_norm,
    operator_norm_complex, phi_nu, smoothed_entropy, AtomicDistribution, GaussianKernel,
    PointCloud, Position, SmoothMethod,
};
use selfsim::ifs::atoms::{detect_exact_overlaps, CollapseMode};
use selfsim::ifs::diag::{mahler_separation_check, separation_check};
use selfsim::ifs::mitm::{delta_n, delta_n_exhaustive, MitmParams};
use selfsim::field::FieldElement;
use selfsim::ifs::IFSSpec;
use selfsim::intpoly::IntPoly;

fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
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
    .expect("golden config parses")
}

fn rational_ifs(lambda: &str) -> IFSSpec {
    IFSSpec::from_json(
        &format!(
            r#"{{
                "field_minpoly": ["-1", "1"],
                "lambda": {{"decimal": "{lambda}"}},
                "translations": [["0", "1"], ["1", "1"]],
                "probs": ["1/2", "1/2"]
            }}"#
        ),
        &ctx(),
    )
    .expect("rational config parses")
}

fn poly(coeffs: &[i64]) -> IntPoly {
    IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
}

/// Translation of the level-|word| map composition, exactly in the field.
fn word_translation(ifs: &IFSSpec, word: &[u32]) -> FieldElement {
    let f = ifs.field();
    let lam = ifs.lam_in_field().expect("algebraic contraction").clone();
    let mut acc = f.zero();
    for &j in word.iter().rev() {
        acc = f.add(&f.mul(&acc, &lam), &ifs.translations()[j as usize]);
    }
    acc
}

fn pass(n: usize, msg: &str) {
    println!("[PASS] criterion {}: {}", n, msg);
}

fn fail(n: usize, msg: &str) -> ! {
    println!("[FAIL] criterion {}: {}", n, msg);
    panic!("criterion {} failed: {}", n, msg);
}

#[test]
fn criterion_01_golden_collision() {
    let t0 = Instant::now();
    let ifs = golden_ifs();

    let w = detect_exact_overlaps(&ifs, 5)
        .unwrap()
        .unwrap_or_else(|| fail(1, "no overlap found up to level 5"));
    if w.n != 3 {
        fail(1, &format!("first overlap at level {}, expected 3", w.n));
    }
    let one = ifs.field().one();
    let t1 = word_translation(&ifs, &w.word1);
    let t2 = word_translation(&ifs, &w.word2);
    if t1 != one || t2 != one {
        fail(1, "witness translations do not both equal 1");
    }

    let level = level_n_atoms(&ifs, 3, &CollapseMode::Certified).unwrap();
    if level.atoms.len() != 7 {
        fail(1, &format!("level 3 has {} atoms, expected 7", level.atoms.len()));
    }

    let bracket = garsia_entropy_bracket(&ifs, &[3]).unwrap();
    let h3 = &bracket.rows[0].entropy;
    let expected = [(BigUint::from(2u32), rat(11, 4))];
    if h3.terms() != expected {
        fail(1, &format!("H_3 terms {:?}, expected (11/4) ln 2", h3.terms()));
    }

    let dt = t0.elapsed();
    if dt.as_secs_f64() >= 5.0 {
        fail(1, &format!("took {:.2}s, cap 5s", dt.as_secs_f64()));
    }
    pass(
        1,
        &format!(
            "overlap at n=3 with unit translations, 7 atoms, H_3 = (11/4) ln 2 exactly, {:.2}s",
            dt.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_02_dyadic_no_overlap() {
    let t0 = Instant::now();
    let ifs = rational_ifs("0.5");

    if detect_exact_overlaps(&ifs, 20).unwrap().is_some() {
        fail(2, "found an overlap for lambda = 1/2");
    }

    let levels: Vec<usize> = (1..=16).collect();
    let bracket = garsia_entropy_bracket(&ifs, &levels).unwrap();
    for row in &bracket.rows {
        let expected = [(BigUint::from(2u32), BigRational::from_integer(BigInt::from(row.n)))];
        if row.entropy.terms() != expected {
            fail(2, &format!("H_{} is not {} ln 2 exactly", row.n, row.n));
        }
        if row.atoms != 1usize << row.n {
            fail(2, &format!("level {} has {} atoms, expected 2^{}", row.n, row.atoms, row.n));
        }
    }

    let params = MitmParams::default();
    for n in 1..=12usize {
        let rep = delta_n(&ifs, n, &params).unwrap();
        let expected = BigRational::new(BigInt::one(), BigInt::from(1u64 << (n - 1)));
        if rep.delta_exact.as_ref() != Some(&expected) {
            fail(2, &format!("delta_{} != 2^(1-{}) exactly", n, n));
        }
        let width = rep.delta.radius().to_f64() * 2.0;
        if width >= 1e-12 {
            fail(2, &format!("delta_{} ball width {:.2e} >= 1e-12", n, width));
        }
        if !rep.certified {
            fail(2, &format!("delta_{} not certified", n));
        }
        if n <= 10 {
            let ex = delta_n_exhaustive(&ifs, n).unwrap();
            if ex.delta_exact != rep.delta_exact {
                fail(2, &format!("delta_{}: half-table and exhaustive values differ", n));
            }
        }
    }

    let dt = t0.elapsed();
    if dt.as_secs_f64() >= 60.0 {
        fail(2, &format!("took {:.2}s, cap 60s", dt.as_secs_f64()));
    }
    pass(
        2,
        &format!(
            "no overlap to n=20, H_n = n ln 2 to n=16, delta_n = 2^(1-n) to n=12, {:.2}s",
            dt.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_03_mahler_suite() {
    let t0 = Instant::now();
    let c = ctx();

    let m = mahler_measure(&poly(&[-1, -1, 1]), 128, &c).unwrap();
    let lo = m.lo().to_f64();
    let hi = m.hi().to_f64();
    if !(lo > 1.618033 && hi < 1.618035) {
        fail(3, &format!("M(X^2-X-1) in [{:.7}, {:.7}], expected within [1.618033, 1.618035]", lo, hi));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let draw = |deg_max: usize, coeff: i64, rng: &mut ChaCha8Rng| -> IntPoly {
        loop {
            let deg = rng.gen_range(1..=deg_max);
            let coeffs: Vec<BigInt> = (0..=deg)
                .map(|_| BigInt::from(rng.gen_range(-coeff..=coeff)))
                .collect();
            let p = IntPoly::new(coeffs);
            if p.degree().unwrap_or(0) >= 1 {
                return p;
            }
        }
    };

    for i in 0..1000 {
        let f = draw(20, 100, &mut rng);
        let rep = check_norm_bounds(&f, 128, &c).unwrap();
        if rep.any_violated() {
            fail(3, &format!("norm bound certified violation on sample {}: {:?}", i, f.to_coeff_strings()));
        }
    }

    for i in 0..200 {
        let f = draw(10, 20, &mut rng);
        let g = draw(10, 20, &mut rng);
        let mf = mahler_measure(&f, 128, &c).unwrap();
        let mg = mahler_measure(&g, 128, &c).unwrap();
        let mfg = mahler_measure(&f.mul(&g), 128, &c).unwrap();
        if !mfg.intersects(&mf.mul(&mg, 128)) {
            fail(3, &format!("M(fg) != M(f)M(g) within ball widths on pair {}", i));
        }
    }

    let dt = t0.elapsed();
    if dt.as_secs_f64() >= 120.0 {
        fail(3, &format!("took {:.2}s, cap 120s", dt.as_secs_f64()));
    }
    pass(
        3,
        &format!(
            "Mahler value, 1000 norm-bound checks, 200 multiplicativity pairs, {:.2}s",
            dt.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_04_root_separation() {
    let c = ctx();
    let mut pairs = 0u64;
    let mut root_pairs = 0u64;
    for (i, &n) in [4usize, 5, 6, 7, 8].iter().enumerate() {
        for (j, &a) in [1u64, 5, 10].iter().enumerate() {
            let rep = mahler_separation_check(n, a, 14, 1004 + (i * 3 + j) as u64, &c).unwrap();
            if !rep.violations.is_empty() {
                fail(4, &format!("{} violated at n={}, a={}", rep.bound_desc, n, a));
            }
            if rep.undecided_pairs != 0 {
                fail(4, &format!("{} undecided root pairs at n={}, a={}", rep.undecided_pairs, n, a));
            }
            pairs += rep.pairs_checked;
            root_pairs += rep.root_pairs_checked;
        }
    }
    if pairs < 200 {
        fail(4, &format!("only {} polynomial pairs sampled, need 200", pairs));
    }

    let ifs = rational_ifs("0.5");
    let rep = separation_check(&ifs, 8, 200, 1044).unwrap();
    if !rep.violations.is_empty() {
        fail(4, &format!("{} violated on the -1/0/1 family", rep.bound_desc));
    }
    if rep.pairs_checked < 200 {
        fail(4, &format!("only {} family pairs sampled, need 200", rep.pairs_checked));
    }
    pass(
        4,
        &format!(
            "{} poly pairs ({} root pairs) for the integer family, {} pairs for the -1/0/1 family, zero violations",
            pairs, root_pairs, rep.pairs_checked
        ),
    );
}

#[test]
fn criterion_05_certified_zero_totality() {
    let c = ctx();
    let iso = |re: f64| ComplexBall::new(
        Dyadic::from_f64(re).unwrap(),
        Dyadic::zero(),
        Dyadic::from_f64(0.1).unwrap(),
    );
    let alphas = vec![
        AlgebraicNumber::new(poly(&[-1, 1, 1]), &iso(0.6), &c).unwrap(),
        AlgebraicNumber::new(poly(&[-2, 0, 1]), &iso(1.4), &c).unwrap(),
        AlgebraicNumber::new(poly(&[-1, -1, 0, 1]), &iso(1.3), &c).unwrap(),
        AlgebraicNumber::from_rational(&rat(3, 7), &c).unwrap(),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let mut cases = 0;
    while cases < 500 {
        let alpha = &alphas[cases % alphas.len()];
        let q = loop {
            let deg = rng.gen_range(0..=5usize);
            let coeffs: Vec<BigInt> = (0..=deg)
                .map(|_| BigInt::from(rng.gen_range(-10i64..=10)))
                .collect();
            let q = IntPoly::new(coeffs);
            if !q.is_zero() {
                break q;
            }
        };
        let f = alpha.minpoly().mul(&q);

        // a multiple of the minimal polynomial vanishes at alpha
        match certified_is_zero(&f, alpha) {
            Ok(true) => {}
            Ok(false) => fail(5, &format!("multiple reported nonzero on case {}", cases)),
            Err(e) => fail(5, &format!("not total on case {}: {}", cases, e)),
        }
        cases += 1;

        // adding one monomial moves the value to a power of alpha, nonzero
        let j = rng.gen_range(0..=f.degree().unwrap());
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        let mut bump = vec![BigInt::zero(); j + 1];
        bump[j] = BigInt::from(sign);
        let g = f.add(&IntPoly::new(bump));
        match certified_is_zero(&g, alpha) {
            Ok(false) => {}
            Ok(true) => fail(5, &format!("perturbed multiple reported zero on case {}", cases)),
            Err(e) => fail(5, &format!("not total on case {}: {}", cases, e)),
        }
        cases += 1;
    }
    pass(5, &format!("{} constructed cases decided correctly, none unresolved", cases));
}

#[test]
fn criterion_06_hat_algebra() {
    use nalgebra::{Complex, DMatrix};
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let rand_complex = |d: usize, rng: &mut ChaCha8Rng| -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(d, d, |_, _| {
            Complex::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
        })
    };
    let max_abs = |m: &DMatrix<f64>| m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    for i in 0..100 {
        let d = rng.gen_range(1..=4usize);
        let a = rand_complex(d, &mut rng);
        let b = rand_complex(d, &mut rng);

        let prod = max_abs(&(hat(&(&a * &b)).lifted - hat(&a).lifted * hat(&b).lifted));
        if prod > 1e-12 {
            fail(6, &format!("multiplicativity off by {:.2e} on case {}", prod, i));
        }

        let (s, t) = (rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
        let lin = max_abs(
            &(hat(&(&a * Complex::new(s, 0.0) + &b * Complex::new(t, 0.0))).lifted
                - (hat(&a).lifted * s + hat(&b).lifted * t)),
        );
        if lin > 1e-12 {
            fail(6, &format!("linearity off by {:.2e} on case {}", lin, i));
        }

        // scalar lifts commute with matrix lifts
        let z = Complex::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        let zi = DMatrix::from_diagonal_element(d, d, z);
        let left = max_abs(&(hat(&zi).lifted * hat(&a).lifted - hat(&(&a * z)).lifted));
        let right = max_abs(&(hat(&a).lifted * hat(&zi).lifted - hat(&(&a * z)).lifted));
        if left > 1e-12 || right > 1e-12 {
            fail(6, &format!("scalar commutation off by {:.2e} on case {}", left.max(right), i));
        }

        let norm_gap = (operator_norm(&hat(&a).lifted) - operator_norm_complex(&a)).abs();
        if norm_gap > 1e-12 {
            fail(6, &format!("norm isometry off by {:.2e} on case {}", norm_gap, i));
        }
    }

    for i in 0..50 {
        let d = rng.gen_range(1..=4usize);
        let q = rand_complex(d, &mut rng).qr().q();
        let lifted = hat(&q).lifted;
        let gram = max_abs(&(lifted.transpose() * &lifted - DMatrix::identity(2 * d, 2 * d)));
        if gram > 1e-12 {
            fail(6, &format!("lift of unitary not orthogonal, off by {:.2e} on case {}", gram, i));
        }
    }
    pass(6, "multiplicativity, linearity, scalar commutation, isometry on 100 matrices; 50 unitary lifts orthogonal");
}

#[test]
fn criterion_07_smoothed_entropy_inequalities() {
    use nalgebra::DMatrix;
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let method = SmoothMethod::Quadrature;

    let rand_cloud = |rng: &mut ChaCha8Rng| -> PointCloud {
        let m = rng.gen_range(2..=8usize);
        let points: Vec<(f64, f64)> = (0..m)
            .map(|_| (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0)))
            .collect();
        let raw: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=9i64)).collect();
        let total: i64 = raw.iter().sum();
        let weights: Vec<BigRational> = raw.iter().map(|&w| rat(w, total)).collect();
        PointCloud::new(2, points, weights).unwrap()
    };
    let rotation = |theta: f64| {
        DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
    };
    let budget = |e: f64, what: &str, i: usize| {
        if e > 1e-4 {
            fail(7, &format!("{} error {:.2e} exceeds 1e-4 budget on case {}", what, e, i));
        }
    };

    let b1 = GaussianKernel::identity(2).unwrap();
    for i in 0..50 {
        let x = rand_cloud(&mut rng);
        let y = rand_cloud(&mut rng);

        // independent sums cannot carry more smoothed entropy than the parts
        let hx = smoothed_entropy(&x, &b1, &method).unwrap();
        let hy = smoothed_entropy(&y, &b1, &method).unwrap();
        let hxy = smoothed_entropy(&x.independent_sum(&y).unwrap(), &b1, &method).unwrap();
        budget(hx.error, "H(X)", i);
        budget(hy.error, "H(Y)", i);
        budget(hxy.error, "H(X+Y)", i);
        if hxy.value > hx.value + hy.value + hx.error + hy.error + hxy.error {
            fail(7, &format!(
                "subadditivity violated on case {}: {:.6} > {:.6} + {:.6}",
                i, hxy.value, hx.value, hy.value
            ));
        }

        // right-multiplying the kernel by a rotation changes nothing
        let o = rotation(rng.gen_range(0.0..std::f64::consts::TAU));
        let ho = smoothed_entropy(&x, &GaussianKernel::new(o).unwrap(), &method).unwrap();
        budget(ho.error, "H(X;O)", i);
        if (ho.value - hx.value).abs() > ho.error + hx.error {
            fail(7, &format!(
                "rotation symmetry violated on case {}: gap {:.2e} exceeds errors {:.2e}",
                i, (ho.value - hx.value).abs(), ho.error + hx.error
            ));
        }

        // adding an independent summand cannot shrink a conditional gap
        let b = rotation(rng.gen_range(0.0..std::f64::consts::TAU)) * rng.gen_range(0.9..=1.0);
        let bk = GaussianKernel::new(b.clone()).unwrap();
        let bk1 = GaussianKernel::new(&b * &b).unwrap();
        let gx = conditional_gap(&x, &bk1, &bk, &method).unwrap();
        let gxy = conditional_gap(&x.independent_sum(&y).unwrap(), &bk1, &bk, &method).unwrap();
        budget(gx.error, "H(X;B2|B)", i);
        budget(gxy.error, "H(X+Y;B2|B)", i);
        if gxy.value < gx.value - gx.error - gxy.error {
            fail(7, &format!(
                "conditional gap shrank on case {}: {:.6} < {:.6}",
                i, gxy.value, gx.value
            ));
        }

        // smoothing never exceeds the atomic entropy
        let shannon = x.shannon().eval(64).to_f64();
        if hx.value - hx.error > shannon {
            fail(7, &format!(
                "smoothed entropy {:.6} above Shannon {:.6} on case {}",
                hx.value, shannon, i
            ));
        }
    }
    pass(7, "subadditivity, rotation symmetry, conditional-gap growth, Shannon ceiling on 50 instances each");
}

#[test]
fn criterion_08_phi_growth() {
    let t0 = Instant::now();
    let nu = AtomicDistribution::from_rational_atoms(&[
        (rat(0, 1), rat(0, 1), rat(1, 2)),
        (rat(1, 1), rat(0, 1), rat(1, 2)),
    ])
    .unwrap();
    let method = SmoothMethod::Quadrature;

    let mut reports = Vec::new();
    for j in 0..=10 {
        let a = 2f64.powi(j);
        reports.push(phi_nu(&nu, a, &default_t_grid(a), &method).unwrap());
    }

    if reports[0].estimate != 0.0 || reports[0].error != 0.0 {
        fail(8, &format!("phi(1) = {} +- {}, expected exactly 0", reports[0].estimate, reports[0].error));
    }
    for j in 1..reports.len() {
        let (prev, cur) = (&reports[j - 1], &reports[j]);
        if cur.estimate < prev.estimate - (cur.error + prev.error) {
            fail(8, &format!(
                "phi decreased from a=2^{}: {:.6} -> {:.6}",
                j - 1, prev.estimate, cur.estimate
            ));
        }
    }
    let last = reports.last().unwrap();
    let floor = 0.9 * std::f64::consts::LN_2;
    if last.estimate < floor {
        fail(8, &format!("phi(2^10) = {:.6} below 0.9 ln 2 = {:.6}", last.estimate, floor));
    }

    let dt = t0.elapsed();
    if dt.as_secs_f64() >= 600.0 {
        fail(8, &format!("took {:.2}s, cap 600s", dt.as_secs_f64()));
    }
    pass(
        8,
        &format!(
            "phi nondecreasing over a = 2^0..2^10, phi(1) = 0, phi(2^10) = {:.4} >= 0.9 ln 2, {:.2}s",
            last.estimate,
            dt.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_09_lower_bound_consistency() {
    let c = ctx();
    let nu = AtomicDistribution::from_rational_atoms(&[
        (rat(0, 1), rat(0, 1), rat(1, 2)),
        (rat(1, 1), rat(0, 1), rat(1, 2)),
    ])
    .unwrap();
    let method = SmoothMethod::Quadrature;

    let golden = AlgebraicNumber::new(
        poly(&[-1, 1, 1]),
        &ComplexBall::new(
            Dyadic::from_f64(0.6).unwrap(),
            Dyadic::zero(),
            Dyadic::from_f64(0.1).unwrap(),
        ),
        &c,
    )
    .unwrap();
    let etas = vec![
        ("1/2", AlgebraicNumber::from_rational(&rat(1, 2), &c).unwrap()),
        ("2/3", AlgebraicNumber::from_rational(&rat(2, 3), &c).unwrap()),
        ("golden", golden),
    ];

    let mut summary = Vec::new();
    for (name, eta) in &etas {
        let rep = lb_phi_check(eta, &nu, 8, None, &method, &c).unwrap();
        if !rep.consistent {
            fail(9, &format!(
                "eta = {}: upper {:.6} below phi estimate {:.6} - {:.2e}",
                name,
                rep.upper.hi().to_f64(),
                rep.phi.estimate,
                rep.phi.error
            ));
        }
        summary.push(format!("{} (slack {:.3})", name, rep.slack));
    }
    pass(9, &format!("lower bound consistent for eta in {{{}}}", summary.join(", ")));
}

#[test]
fn criterion_10_dimension_desk_checks() {
    let half = dimension_bracket(&rational_ifs("0.5"), 12).unwrap();
    let width = half.upper_dim.radius().to_f64() * 2.0;
    if !half.upper_dim.contains(&Dyadic::from_f64(1.0).unwrap()) || width > 1e-9 {
        fail(10, &format!(
            "lambda = 1/2: upper_dim {:.12} +- {:.2e}, expected 1",
            half.upper_dim.to_f64(),
            half.upper_dim.radius().to_f64()
        ));
    }

    let third = dimension_bracket(&rational_ifs("1/3"), 12).unwrap();
    let expected = std::f64::consts::LN_2 / 3f64.ln();
    if (third.upper_dim.to_f64() - expected).abs() > 1e-9 {
        fail(10, &format!(
            "lambda = 1/3: upper_dim {:.12}, expected log 2 / log 3 = {:.12}",
            third.upper_dim.to_f64(),
            expected
        ));
    }

    let golden = dimension_bracket(&golden_ifs(), 20).unwrap();
    if golden.overlap.is_none() {
        fail(10, "lambda = golden: no overlap flagged");
    }
    // strict certified upper_dim < 1 from the level-20 entropy bracket
    let hi = golden.upper_dim.hi().to_f64();
    if !(hi < 1.0) {
        fail(10, &format!(
            "lambda = golden: upper_dim reaches {:.12} (H_20/20 = {:.6} vs log(1/lambda) = {:.6}, ratio {:.4}); \
             the level-20 average entropy already exceeds the scale factor, so this bound cannot fall below 1",
            hi,
            golden.bracket.to_f64(),
            golden.chi.to_f64(),
            golden.bracket.to_f64() / golden.chi.to_f64()
        ));
    }
    pass(10, "dimension desk checks for lambda in {1/2, 1/3, golden}");
}

#[test]
fn criterion_11_entropy_at_scale_vs_riemann() {
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(1011);

    for case in 0..50 {
        let m = rng.gen_range(2..=8usize);
        let mut xs: Vec<BigRational> = Vec::new();
        while xs.len() < m {
            let x = rat(rng.gen_range(0..=256i64), 64);
            if !xs.contains(&x) {
                xs.push(x);
            }
        }
        let raw: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=9i64)).collect();
        let total: i64 = raw.iter().sum();
        let atoms: Vec<(Position, BigRational)> = xs
            .iter()
            .zip(&raw)
            .map(|(x, &w)| (Position::Rational(x.clone()), rat(w, total)))
            .collect();
        let r = rat(rng.gen_range(1..=32i64), 16);

        let swept = entropy_at_scale(&atoms, &r, None, &c).unwrap();
        if swept.exact.is_none() {
            fail(11, &format!("rational case {} did not come out exact", case));
        }
        let v = swept.value.to_f64();

        // brute-force midpoint average of the bucketed entropy over t
        let rf = r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap();
        let scaled: Vec<f64> = xs
            .iter()
            .map(|x| (x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap()) / rf)
            .collect();
        let wf: Vec<f64> = raw.iter().map(|&w| w as f64 / total as f64).collect();
        let samples = 100_000usize;
        let mut acc = 0.0f64;
        let mut buckets: Vec<(i64, f64)> = Vec::with_capacity(m);
        for i in 0..samples {
            let t = (i as f64 + 0.5) / samples as f64;
            buckets.clear();
            for (x, w) in scaled.iter().zip(&wf) {
                let key = (x + t).floor() as i64;
                match buckets.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, acc_w)) => *acc_w += w,
                    None => buckets.push((key, *w)),
                }
            }
            acc += buckets.iter().map(|(_, w)| -w * w.ln()).sum::<f64>();
        }
        let riemann = acc / samples as f64;

        if (v - riemann).abs() > 1e-4 {
            fail(11, &format!(
                "case {}: sweep {:.8} vs riemann {:.8}, gap {:.2e}",
                case, v, riemann, (v - riemann).abs()
            ));
        }
    }

    let single = entropy_at_scale(
        &[(Position::Rational(rat(7, 3)), BigRational::one())],
        &rat(1, 4),
        None,
        &c,
    )
    .unwrap();
    if !(single.value.is_exact() && single.value.to_f64() == 0.0) {
        fail(11, "single atom entropy is not exactly zero");
    }
    pass(11, "sweep matches the 1e5-sample average within 1e-4 on 50 atom sets; single atom exactly 0");
}
