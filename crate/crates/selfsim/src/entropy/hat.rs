//! Real lift of complex matrices: each entry a + bi becomes the 2x2 block
//! [[a, -b], [b, a]]. The lift is an injective R-algebra homomorphism and
//! an isometry for the operator norm, which the tests exercise on random
//! instances.

use nalgebra::{Complex, DMatrix};

/// A complex matrix together with its real 2dx2d lift.
#[derive(Debug, Clone)]
pub struct RealLift {
    pub source: DMatrix<Complex<f64>>,
    pub lifted: DMatrix<f64>,
}

/// Block lift of a complex matrix.
pub fn hat(a: &DMatrix<Complex<f64>>) -> RealLift {
    let (r, c) = a.shape();
    let mut m = DMatrix::<f64>::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = a[(i, j)];
            m[(2 * i, 2 * j)] = z.re;
            m[(2 * i, 2 * j + 1)] = -z.im;
            m[(2 * i + 1, 2 * j)] = z.im;
            m[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    RealLift {
        source: a.clone(),
        lifted: m,
    }
}

/// Operator norm (largest singular value).
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values[0]
}

/// Operator norm of a complex matrix.
pub fn operator_norm_complex(m: &DMatrix<Complex<f64>>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_complex(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(d, d, |_, _| {
            Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn imaginary_unit_lifts_to_rotation() {
        let a = DMatrix::from_element(1, 1, Complex::new(0.0, 1.0));
        let h = hat(&a).lifted;
        assert_eq!(h[(0, 0)], 0.0);
        assert_eq!(h[(0, 1)], -1.0);
        assert_eq!(h[(1, 0)], 1.0);
        assert_eq!(h[(1, 1)], 0.0);
    }

    #[test]
    fn identity_lifts_to_identity() {
        for d in 1..=3 {
            let a = DMatrix::from_diagonal_element(d, d, Complex::new(1.0, 0.0));
            assert_eq!(hat(&a).lifted, DMatrix::<f64>::identity(2 * d, 2 * d));
        }
    }

    #[test]
    fn lift_is_real_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..8 {
            let a = random_complex(&mut rng, 3);
            let b = random_complex(&mut rng, 3);
            let s: f64 = rng.gen_range(-2.0..2.0);
            let lhs = hat(&(a.map(|z| z * Complex::new(s, 0.0)) + &b)).lifted;
            let rhs = hat(&a).lifted * s + hat(&b).lifted;
            assert!((lhs - rhs).amax() < 1e-12);
        }
    }

    #[test]
    fn lift_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..8 {
            let a = random_complex(&mut rng, 3);
            let b = random_complex(&mut rng, 3);
            let lhs = hat(&(&a * &b)).lifted;
            let rhs = hat(&a).lifted * hat(&b).lifted;
            assert!((lhs - rhs).amax() < 1e-12);
        }
    }

    #[test]
    fn lift_preserves_operator_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..8 {
            let a = random_complex(&mut rng, 3);
            let na = operator_norm_complex(&a);
            let nh = operator_norm(&hat(&a).lifted);
            assert!((na - nh).abs() < 1e-12, "norms {} vs {}", na, nh);
        }
    }

    #[test]
    fn unitary_lifts_to_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..4 {
            let a = random_complex(&mut rng, 3);
            let u = a.qr().q();
            let h = hat(&u).lifted;
            let gram = &h * h.transpose();
            assert!((gram - DMatrix::<f64>::identity(6, 6)).amax() < 1e-10);
        }
    }

    #[test]
    fn scalars_commute_through_the_lift() {
        // hat(z) hat(B) = hat(zB) = hat(B) hat(z) for scalar z = z I_d
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..6 {
            let b = random_complex(&mut rng, 2);
            let z = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let zi = DMatrix::from_diagonal_element(2, 2, z);
            let zb = b.map(|w| z * w);
            let l = hat(&zi).lifted * hat(&b).lifted;
            let m = hat(&zb).lifted;
            let r = hat(&b).lifted * hat(&zi).lifted;
            assert!((&l - &m).amax() < 1e-12);
            assert!((&m - &r).amax() < 1e-12);
        }
    }
}
