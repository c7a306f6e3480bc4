//! The smoothed-entropy gain functional
//!
//!   Phi_nu(a) = sup_{t>0} [ H(t a xi + G) - H(t xi + G) ],   xi ~ nu on C,
//!
//! evaluated as a grid maximum, which is a lower estimate for the sup up to
//! the per-term error bars. Both terms are smoothed entropies with the
//! identity kernel in the plane: the Gaussian reference entropy cancels in
//! the difference.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::algebra::{mtilde, AlgebraicNumber};
use crate::ball::{PrecisionContext, RealBall};
use crate::error::{Error, Result};
use crate::ifs::{monic_rescale, IFSSpec};

use super::garsia::{garsia_entropy_bracket, GarsiaBracket};
use super::smooth::{smoothed_entropy, GaussianKernel, SmoothMethod};
use super::AtomicDistribution;

/// One grid point of the sup: the entropy gain at dilation t.
#[derive(Debug, Clone, Copy)]
pub struct PhiRow {
    pub t: f64,
    pub gain: f64,
    pub error: f64,
}

/// Grid maximum of the gain, with the row detail kept for series output.
#[derive(Debug, Clone)]
pub struct PhiReport {
    pub a: f64,
    pub estimate: f64,
    pub error: f64,
    pub best_t: f64,
    pub rows: Vec<PhiRow>,
}

/// Geometric grid 2^(j/2), j = -40..=40, with a^(-1/2) always included:
/// the dilation the entropy argument actually uses.
pub fn default_t_grid(a: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (-40..=40).map(|j| 2f64.powf(j as f64 / 2.0)).collect();
    if a.is_finite() && a >= 1.0 {
        grid.push(a.powf(-0.5));
    }
    grid.sort_by(|x, y| x.partial_cmp(y).expect("finite grid"));
    grid.dedup_by(|x, y| (*x - *y).abs() <= f64::EPSILON * y.abs());
    grid
}

/// Lower estimate of Phi_nu(a) over the given dilation grid.
pub fn phi_nu(
    nu: &AtomicDistribution,
    a: f64,
    t_grid: &[f64],
    method: &SmoothMethod,
) -> Result<PhiReport> {
    if !a.is_finite() || a < 1.0 {
        return Err(Error::InvalidInput(format!(
            "the dilation factor must be a finite real >= 1, got {}",
            a
        )));
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty dilation grid".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return Err(Error::InvalidInput(
            "dilation grid entries must be positive finite reals".into(),
        ));
    }
    let cloud = nu.to_points()?;
    let kernel = GaussianKernel::identity(2)?;

    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        // identical arguments: the gain is zero with no estimation error
        if a == 1.0 || cloud.len() == 1 {
            rows.push(PhiRow {
                t,
                gain: 0.0,
                error: 0.0,
            });
            continue;
        }
        let big = smoothed_entropy(&cloud.scaled(t * a), &kernel, method)?;
        let small = smoothed_entropy(&cloud.scaled(t), &kernel, method)?;
        rows.push(PhiRow {
            t,
            gain: big.value - small.value,
            error: big.error + small.error,
        });
    }

    let best = rows
        .iter()
        .enumerate()
        .max_by(|(_, x), (_, y)| x.gain.partial_cmp(&y.gain).expect("finite gains"))
        .map(|(i, _)| i)
        .expect("nonempty grid");
    Ok(PhiReport {
        a,
        estimate: rows[best].gain,
        error: rows[best].error,
        best_t: rows[best].t,
        rows,
    })
}

/// Consistency report for the lower-bound inequality h >= Phi_nu(Mtilde):
/// since the level-entropy bracket u satisfies u >= h, a sound implementation
/// must see u >= phi-hat - err. A violation is a bug witness.
#[derive(Debug, Clone)]
pub struct LbPhiReport {
    pub a: f64,
    /// Upper bracket min_n H_n/n from the certified level walk.
    pub upper: RealBall,
    pub argmin_n: usize,
    pub phi: PhiReport,
    pub slack: f64,
    pub consistent: bool,
}

/// Check u >= phi-hat - err for the self-similar measure with contraction
/// eta and rational real translation atoms nu. The dilation defaults to
/// Mtilde of eta.
pub fn lb_phi_check(
    eta: &AlgebraicNumber,
    nu: &AtomicDistribution,
    n_for_h: usize,
    a_override: Option<f64>,
    method: &SmoothMethod,
    ctx: &PrecisionContext,
) -> Result<LbPhiReport> {
    if n_for_h == 0 {
        return Err(Error::InvalidInput("need at least one entropy level".into()));
    }
    if !eta.is_real() {
        return Err(Error::InvalidInput(
            "the contraction ratio must be real".into(),
        ));
    }
    let ifs = ifs_from_atoms(eta, nu, ctx)?;

    let n_list: Vec<usize> = (1..=n_for_h).collect();
    let bracket: GarsiaBracket = garsia_entropy_bracket(&ifs, &n_list)?;

    let a = match a_override {
        Some(a) => a,
        // Mtilde >= 1 exactly; the enclosure midpoint may round a hair under
        None => mtilde(eta, ctx.working_bits)?.mtilde.to_f64().max(1.0),
    };
    let phi = phi_nu(nu, a, &default_t_grid(a), method)?;

    let upper_hi = bracket.upper.hi().to_f64();
    let slack = upper_hi - (phi.estimate - phi.error);
    Ok(LbPhiReport {
        a,
        upper: bracket.upper,
        argmin_n: bracket.argmin_n,
        phi,
        slack,
        consistent: slack >= 0.0,
    })
}

/// Assemble the IFS with contraction eta and the rational atoms of nu as
/// translations, through the same config path the CLI uses.
fn ifs_from_atoms(
    eta: &AlgebraicNumber,
    nu: &AtomicDistribution,
    ctx: &PrecisionContext,
) -> Result<IFSSpec> {
    let mut rats: Vec<(BigRational, BigRational)> = Vec::new();
    for p in nu.points() {
        match &p.rational {
            Some((re, im)) if im.is_zero() => rats.push((re.clone(), p.weight.clone())),
            _ => {
                return Err(Error::InvalidInput(
                    "the lower-bound check needs rational real atoms".into(),
                ))
            }
        }
    }

    let degree = eta.degree();
    let config = if degree == 1 {
        // rational contraction: work over the rational field directly
        let f = eta.minpoly();
        let lam = BigRational::new(-f.constant().clone(), f.lead().clone());
        if !lam.is_positive() {
            return Err(Error::InvalidInput(format!(
                "the contraction ratio must lie in (0, 1), got {}",
                lam
            )));
        }
        let translations: Vec<Value> = rats
            .iter()
            .map(|(re, _)| json!([re.numer().to_string(), re.denom().to_string()]))
            .collect();
        json!({
            "field_minpoly": ["-1", "1"],
            "lambda": {"decimal": lam.to_string()},
            "translations": translations,
            "probs": rats.iter().map(|(_, w)| w.to_string()).collect::<Vec<_>>(),
        })
    } else {
        let field_poly = monic_rescale(eta.minpoly());
        let disk = eta.refined(-(ctx.working_bits as i64))?;
        let translations: Vec<Value> = rats
            .iter()
            .map(|(re, _)| {
                let mut coords = vec![re.numer().to_string()];
                coords.extend(std::iter::repeat_with(|| "0".to_string()).take(degree - 1));
                coords.push(re.denom().to_string());
                json!(coords)
            })
            .collect();
        json!({
            "field_minpoly": field_poly.to_coeff_strings(),
            "lambda": {
                "minpoly": eta.minpoly().to_coeff_strings(),
                "isolator": {
                    "re": disk.re().to_rational().to_string(),
                    "im": "0",
                    "radius": disk.radius().to_rational().to_string(),
                },
            },
            "translations": translations,
            "probs": rats.iter().map(|(_, w)| w.to_string()).collect::<Vec<_>>(),
        })
    };
    IFSSpec::from_value(&config, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::ComplexBall;
    use crate::dyadic::Dyadic;
    use crate::intpoly::IntPoly;
    use num_bigint::BigInt;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn uniform01() -> AtomicDistribution {
        AtomicDistribution::from_rational_atoms(&[
            (rat(0, 1), rat(0, 1), rat(1, 2)),
            (rat(1, 1), rat(0, 1), rat(1, 2)),
        ])
        .unwrap()
    }

    fn golden_eta() -> AlgebraicNumber {
        let f = IntPoly::new(vec![BigInt::from(-1), BigInt::from(1), BigInt::from(1)]);
        let disk = ComplexBall::new(
            Dyadic::from_f64(0.6).unwrap(),
            Dyadic::zero(),
            Dyadic::from_f64(0.1).unwrap(),
        );
        AlgebraicNumber::new(f, &disk, &ctx()).unwrap()
    }

    #[test]
    fn grid_is_sorted_and_contains_the_natural_dilation() {
        for a in [1.0, 1.5, 2.0, 1024.0] {
            let g = default_t_grid(a);
            assert!(g.windows(2).all(|w| w[0] < w[1]));
            let t = a.powf(-0.5);
            assert!(g.iter().any(|x| (x - t).abs() < 1e-12 * t));
        }
        // half-exponent endpoints
        let g = default_t_grid(4.0);
        assert!((g[0] - 2f64.powi(-20)).abs() < 1e-18);
        assert!((g.last().unwrap() - 2f64.powi(20)).abs() < 1e-3);
        assert_eq!(g.len(), 81);
    }

    #[test]
    fn no_dilation_means_no_gain() {
        let r = phi_nu(&uniform01(), 1.0, &default_t_grid(1.0), &SmoothMethod::Quadrature).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.error, 0.0);
    }

    #[test]
    fn single_atom_gains_nothing_at_any_dilation() {
        let nu =
            AtomicDistribution::from_rational_atoms(&[(rat(7, 2), rat(0, 1), rat(1, 1))]).unwrap();
        for a in [1.0, 4.0, 1000.0] {
            let r = phi_nu(&nu, a, &default_t_grid(a), &SmoothMethod::Quadrature).unwrap();
            assert_eq!(r.estimate, 0.0);
            assert_eq!(r.error, 0.0);
        }
    }

    #[test]
    fn two_atom_gain_at_dilation_two() {
        let r = phi_nu(&uniform01(), 2.0, &default_t_grid(2.0), &SmoothMethod::Quadrature).unwrap();
        assert!(
            (r.estimate - 0.2987).abs() < 0.02,
            "estimate {} best_t {}",
            r.estimate,
            r.best_t
        );
    }

    #[test]
    fn large_dilations_capture_the_full_atom_entropy() {
        let a = 2f64.powi(10);
        let r = phi_nu(&uniform01(), a, &default_t_grid(a), &SmoothMethod::Quadrature).unwrap();
        assert!(r.estimate >= 0.9 * std::f64::consts::LN_2, "{}", r.estimate);
        assert!(r.estimate <= std::f64::consts::LN_2 + r.error + 1e-9);
    }

    #[test]
    fn monte_carlo_tracks_quadrature() {
        let grid = [0.125, 0.25, 0.5, 1.0];
        let q = phi_nu(&uniform01(), 2.0, &grid, &SmoothMethod::Quadrature).unwrap();
        let m = phi_nu(
            &uniform01(),
            2.0,
            &grid,
            &SmoothMethod::MonteCarlo {
                samples: 20_000,
                seed: 7,
            },
        )
        .unwrap();
        assert!(
            (q.estimate - m.estimate).abs() < 4.0 * m.error + q.error + 0.02,
            "quadrature {} vs monte carlo {} +- {}",
            q.estimate,
            m.estimate,
            m.error
        );
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let nu = uniform01();
        assert!(phi_nu(&nu, 0.5, &[1.0], &SmoothMethod::Quadrature).is_err());
        assert!(phi_nu(&nu, 2.0, &[], &SmoothMethod::Quadrature).is_err());
        assert!(phi_nu(&nu, 2.0, &[0.0], &SmoothMethod::Quadrature).is_err());
        assert!(phi_nu(&nu, f64::NAN, &[1.0], &SmoothMethod::Quadrature).is_err());
    }

    #[test]
    fn half_contraction_is_consistent() {
        let eta = AlgebraicNumber::from_rational(&rat(1, 2), &ctx()).unwrap();
        let r = lb_phi_check(&eta, &uniform01(), 4, None, &SmoothMethod::Quadrature, &ctx())
            .unwrap();
        // distinct dyadic sums: the bracket is log 2 at every level
        assert!((r.upper.to_f64() - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((r.a - 2.0).abs() < 1e-9, "Mtilde of 1/2 is 2, got {}", r.a);
        assert!(r.consistent, "slack {}", r.slack);
        assert!(r.slack > 0.3);
    }

    #[test]
    fn golden_contraction_is_consistent() {
        let r = lb_phi_check(
            &golden_eta(),
            &uniform01(),
            8,
            None,
            &SmoothMethod::Quadrature,
            &ctx(),
        )
        .unwrap();
        // Mtilde of the golden contraction is the golden ratio
        assert!((r.a - 1.6180339887498949).abs() < 1e-9, "{}", r.a);
        assert!(r.consistent, "upper {} phi {}", r.upper.to_f64(), r.phi.estimate);
    }

    #[test]
    fn single_atom_check_is_trivially_consistent() {
        let nu =
            AtomicDistribution::from_rational_atoms(&[(rat(0, 1), rat(0, 1), rat(1, 1))]).unwrap();
        let eta = AlgebraicNumber::from_rational(&rat(1, 2), &ctx()).unwrap();
        let r = lb_phi_check(&eta, &nu, 3, None, &SmoothMethod::Quadrature, &ctx()).unwrap();
        assert_eq!(r.phi.estimate, 0.0);
        assert!(r.consistent);
    }

    #[test]
    fn complex_atoms_are_rejected_by_the_check() {
        let nu = AtomicDistribution::from_rational_atoms(&[
            (rat(0, 1), rat(1, 2), rat(1, 2)),
            (rat(1, 1), rat(0, 1), rat(1, 2)),
        ])
        .unwrap();
        let eta = AlgebraicNumber::from_rational(&rat(1, 2), &ctx()).unwrap();
        assert!(matches!(
            lb_phi_check(&eta, &nu, 2, None, &SmoothMethod::Quadrature, &ctx()),
            Err(Error::InvalidInput(_))
        ));
    }
}
