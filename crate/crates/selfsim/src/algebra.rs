//! Mahler measures, heights, norm inequalities, and the certified zero test.
//!
//! The zero test is the engine of every exact decision downstream: a nonzero
//! value F(alpha) with F in Z[X] and alpha of degree k is an algebraic number
//! of height at most l1(F) H(alpha)^{deg F}, hence its modulus is at least
//! B = (l1(F) H(alpha)^{deg F})^{-k}. Evaluating F(alpha) in ball arithmetic
//! and comparing against B therefore always terminates with a certain answer
//! once the ball radius falls below B/2.

use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::{
    eval_ball_poly, eval_int_poly, Certify, ComplexBall, PrecisionContext, RealBall,
};
use crate::dyadic::{Dyadic, Round};
use crate::error::{Error, Result};
use crate::field::{lift_to_int_poly, FieldPoly, NumberField};
use crate::intpoly::IntPoly;
use crate::roots::{isolate_roots, refine_root, select_matching_root, CertifiedRoot};

/// A single algebraic number: primitive minimal polynomial (trusted
/// irreducible) plus a certified disk selecting one of its roots. The disk
/// only ever shrinks; a Mahler enclosure is computed once at construction.
#[derive(Debug)]
pub struct AlgebraicNumber {
    minpoly: IntPoly,
    isolator: Mutex<ComplexBall>,
    is_real: bool,
    mahler: RealBall,
    ctx: PrecisionContext,
}

impl Clone for AlgebraicNumber {
    fn clone(&self) -> Self {
        AlgebraicNumber {
            minpoly: self.minpoly.clone(),
            isolator: Mutex::new(self.isolator.lock().unwrap().clone()),
            is_real: self.is_real,
            mahler: self.mahler.clone(),
            ctx: self.ctx,
        }
    }
}

impl AlgebraicNumber {
    /// `isolator_region` must contain exactly one root of `minpoly` (after
    /// refinement); the polynomial is normalized primitive with positive
    /// leading coefficient.
    pub fn new(
        minpoly: IntPoly,
        isolator_region: &ComplexBall,
        ctx: &PrecisionContext,
    ) -> Result<AlgebraicNumber> {
        let minpoly = minpoly.primitive();
        match minpoly.degree() {
            None | Some(0) => {
                return Err(Error::InvalidInput(
                    "an algebraic number needs a minimal polynomial of positive degree".into(),
                ))
            }
            Some(_) => {}
        }
        if minpoly.squarefree_part() != minpoly {
            return Err(Error::InvalidInput(
                "minimal polynomial has repeated roots".into(),
            ));
        }
        let iso = isolate_roots(&minpoly, ctx)?;
        let mut disks: Vec<ComplexBall> = iso.roots.iter().map(|r| r.disk.clone()).collect();
        let flags: Vec<bool> = iso.roots.iter().map(|r| r.is_real).collect();
        if minpoly.constant().is_zero() {
            // minpoly = X: the number 0; handled by the rational constructor
            return Err(Error::InvalidInput(
                "zero root: use a degree-one polynomial c X - p with p != 0, or the rational constructor".into(),
            ));
        }
        let idx = select_matching_root(&minpoly, &mut disks, isolator_region, ctx)?;
        let mahler = mahler_of_isolation(&minpoly, &iso.roots, 64, ctx)?;
        Ok(AlgebraicNumber {
            minpoly,
            isolator: Mutex::new(disks[idx].clone()),
            is_real: flags[idx],
            mahler,
            ctx: *ctx,
        })
    }

    pub fn from_rational(r: &BigRational, ctx: &PrecisionContext) -> Result<AlgebraicNumber> {
        let minpoly = IntPoly::new(vec![-r.numer().clone(), r.denom().clone()]).primitive();
        let center = RealBall::from_ratio(r.numer(), r.denom(), ctx.working_bits);
        AlgebraicNumber::new(minpoly, &center.to_complex(), ctx)
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree().unwrap()
    }

    pub fn minpoly(&self) -> &IntPoly {
        &self.minpoly
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    /// Mahler measure enclosure (computed at construction).
    pub fn mahler(&self) -> &RealBall {
        &self.mahler
    }

    /// Height H = M^{1/deg}.
    pub fn height(&self, prec: u32) -> RealBall {
        self.mahler.nth_root(self.degree() as u32, prec)
    }

    /// Certified disk with radius at most 2^target_log2; cached, shrinking.
    pub fn refined(&self, target_log2: i64) -> Result<ComplexBall> {
        let mut guard = self.isolator.lock().unwrap();
        if guard.radius().cmp_val(&Dyadic::pow2(target_log2)) == std::cmp::Ordering::Greater {
            *guard = refine_root(&self.minpoly, &guard, target_log2, &self.ctx)?;
        }
        Ok(guard.clone())
    }

    /// Real enclosure (only for real numbers).
    pub fn real_interval(&self, target_log2: i64) -> Result<RealBall> {
        if !self.is_real {
            return Err(Error::InvalidInput(
                "requested a real interval of a nonreal algebraic number".into(),
            ));
        }
        Ok(self.refined(target_log2)?.re_ball())
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }
}

/// M(f) = |lead| * prod over roots of max(1, |root|)^multiplicity.
pub fn mahler_measure(f: &IntPoly, prec: u32, ctx: &PrecisionContext) -> Result<RealBall> {
    if f.is_zero() {
        return Err(Error::InvalidInput("Mahler measure of the zero polynomial".into()));
    }
    let iso = isolate_roots(f, ctx)?;
    mahler_of_isolation(f, &iso.roots, prec, ctx)
}

fn mahler_of_isolation(
    f: &IntPoly,
    roots: &[CertifiedRoot],
    prec: u32,
    ctx: &PrecisionContext,
) -> Result<RealBall> {
    let target = -(prec as i64 + 8);
    let mut acc = RealBall::exact(Dyadic::from_bigint(f.lead().abs()));
    for r in roots {
        let disk = if r.disk.radius().cmp_val(&Dyadic::pow2(target)) == std::cmp::Ordering::Greater
        {
            refine_root(&r.factor, &r.disk, target, ctx)?
        } else {
            r.disk.clone()
        };
        let m = disk.modulus(prec);
        let contrib = clamp_above_one(&m);
        acc = acc.mul(&contrib.pow_u(r.multiplicity, prec), prec);
    }
    Ok(acc)
}

/// Interval image of max(1, x) for x >= 0.
fn clamp_above_one(m: &RealBall) -> RealBall {
    let one = Dyadic::one();
    if m.lo().cmp_val(&one) != std::cmp::Ordering::Less {
        m.clone()
    } else if m.hi().cmp_val(&one) != std::cmp::Ordering::Greater {
        RealBall::exact(one)
    } else {
        RealBall::from_interval(&one, &m.hi())
    }
}

/// Interval image of min(1, x) for x >= 0.
fn clamp_below_one(m: &RealBall) -> RealBall {
    let one = Dyadic::one();
    if m.hi().cmp_val(&one) != std::cmp::Ordering::Greater {
        m.clone()
    } else if m.lo().cmp_val(&one) != std::cmp::Ordering::Less {
        RealBall::exact(one)
    } else {
        RealBall::from_interval(&m.lo(), &one)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqNorm {
    One,
    Two,
    Infinity,
}

/// Coefficient norm of an integer polynomial as a certified ball
/// (exact for q = 1 and q = infinity).
pub fn lq_norm(f: &IntPoly, q: LqNorm, prec: u32) -> RealBall {
    match q {
        LqNorm::One => RealBall::exact(Dyadic::from_bigint(f.l1_norm())),
        LqNorm::Infinity => RealBall::exact(Dyadic::from_bigint(f.linf_norm())),
        LqNorm::Two => f.l2_norm(prec),
    }
}

/// Same for ball coefficients.
pub fn lq_norm_balls(coeffs: &[RealBall], q: LqNorm, prec: u32) -> RealBall {
    let zero = RealBall::exact(Dyadic::zero());
    match q {
        LqNorm::One => coeffs
            .iter()
            .fold(zero, |acc, c| acc.add(&c.abs_ball(), prec)),
        LqNorm::Infinity => coeffs.iter().fold(zero, |acc, c| {
            let a = c.abs_ball();
            let lo = if acc.lo().cmp_val(&a.lo()) == std::cmp::Ordering::Less {
                a.lo()
            } else {
                acc.lo()
            };
            let hi = if acc.hi().cmp_val(&a.hi()) == std::cmp::Ordering::Less {
                a.hi()
            } else {
                acc.hi()
            };
            RealBall::from_interval(&lo, &hi)
        }),
        LqNorm::Two => coeffs
            .iter()
            .fold(zero, |acc, c| acc.add(&c.square_ball(prec), prec))
            .nth_root(2, prec),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated,
    Unknown,
}

/// Certified comparison `a <= b`.
fn verdict_le(a_hi: &Dyadic, a_lo: &Dyadic, b_lo: &Dyadic, b_hi: &Dyadic) -> Verdict {
    if a_hi.cmp_val(b_lo) != std::cmp::Ordering::Greater {
        Verdict::Holds
    } else if a_lo.cmp_val(b_hi) == std::cmp::Ordering::Greater {
        Verdict::Violated
    } else {
        Verdict::Unknown
    }
}

fn ball_le(a: &RealBall, b: &RealBall) -> Verdict {
    verdict_le(&a.hi(), &a.lo(), &b.lo(), &b.hi())
}

/// Certified verdicts for the standard chain of Mahler/coefficient-norm
/// inequalities of a nonzero integer polynomial of degree n:
/// binom(n, n/2)^{-1} linf <= M <= l2 <= sqrt(n+1) linf, M <= l1 <= 2^n M.
#[derive(Debug, Clone)]
pub struct NormBoundsReport {
    pub degree: usize,
    pub mahler: RealBall,
    pub l1: BigInt,
    pub l2: RealBall,
    pub linf: BigInt,
    pub m_le_l1: Verdict,
    pub central_binom_linf_le_m: Verdict,
    pub m_le_l2: Verdict,
    pub l2_le_sqrt_linf: Verdict,
    pub l1_le_pow2n_m: Verdict,
}

impl NormBoundsReport {
    pub fn all_hold(&self) -> bool {
        [
            self.m_le_l1,
            self.central_binom_linf_le_m,
            self.m_le_l2,
            self.l2_le_sqrt_linf,
            self.l1_le_pow2n_m,
        ]
        .iter()
        .all(|v| *v == Verdict::Holds)
    }

    pub fn any_violated(&self) -> bool {
        [
            self.m_le_l1,
            self.central_binom_linf_le_m,
            self.m_le_l2,
            self.l2_le_sqrt_linf,
            self.l1_le_pow2n_m,
        ]
        .iter()
        .any(|v| *v == Verdict::Violated)
    }
}

fn central_binomial(n: usize) -> BigInt {
    let k = n / 2;
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn check_norm_bounds(f: &IntPoly, prec: u32, ctx: &PrecisionContext) -> Result<NormBoundsReport> {
    let n = f
        .degree()
        .ok_or_else(|| Error::InvalidInput("norm bounds of the zero polynomial".into()))?;
    let m = mahler_measure(f, prec, ctx)?;
    let l1 = f.l1_norm();
    let linf = f.linf_norm();
    let l2 = f.l2_norm(prec);
    let l1_ball = RealBall::exact(Dyadic::from_bigint(l1.clone()));

    let m_le_l1 = ball_le(&m, &l1_ball);

    // binom(n, n/2)^{-1} linf <= M, compared as linf <= binom * M
    let binom = central_binomial(n);
    let scaled_m = m.mul_dyadic(&Dyadic::from_bigint(binom.clone()), prec + 8);
    let linf_ball = RealBall::exact(Dyadic::from_bigint(linf.clone()));
    let central_binom_linf_le_m = ball_le(&linf_ball, &scaled_m);

    let m_le_l2 = ball_le(&m, &l2);

    // l2 <= sqrt(n+1) linf is exact on squares: sum a_i^2 <= (n+1) linf^2
    let sq_sum: BigInt = f.coeffs().iter().map(|c| c * c).sum();
    let rhs = BigInt::from(n + 1) * &linf * &linf;
    let l2_le_sqrt_linf = if sq_sum <= rhs { Verdict::Holds } else { Verdict::Violated };

    // l1 <= 2^n M
    let pow2n_m = m.mul_pow2(n as i64);
    let l1_le_pow2n_m = ball_le(&l1_ball, &pow2n_m);

    Ok(NormBoundsReport {
        degree: n,
        mahler: m,
        l1,
        l2,
        linf,
        m_le_l1,
        central_binom_linf_le_m,
        m_le_l2,
        l2_le_sqrt_linf,
        l1_le_pow2n_m,
    })
}

/// Exact decision of F(alpha) = 0 for nonzero F in Z[X].
///
/// Nonzero values are bounded below by B = (l1(F) H^{deg F})^{-k}, so either
/// the value ball excludes zero (nonzero) or it certifies below B (zero);
/// precision escalates until one fires. B is evaluated through integer
/// powers only: B^{-1} = l1^k M^{deg F}.
pub fn certified_is_zero(f: &IntPoly, alpha: &AlgebraicNumber) -> Result<bool> {
    if f.is_zero() {
        return Err(Error::InvalidInput(
            "certified zero test needs a nonzero polynomial".into(),
        ));
    }
    let k = alpha.degree() as u32;
    let deg_f = f.degree().unwrap() as u32;
    let threshold = zero_threshold(&f.l1_norm(), deg_f, alpha, k);
    for prec in alpha.context().ladder() {
        let disk = alpha.refined(-(prec as i64))?;
        let val = eval_int_poly(f.coeffs(), &disk, prec);
        if val.excludes_zero() {
            return Ok(false);
        }
        if val.certify_below(&threshold) == Certify::Below {
            return Ok(true);
        }
    }
    let needed = -threshold.mag_exp().unwrap_or(0) + 8;
    Err(Error::NoConvergence {
        what: format!(
            "zero certification stalled: value ball radius must fall below 2^{} ",
            -needed
        ),
        reached: alpha.context().max_bits,
        ceiling: alpha.context().max_bits,
    })
}

/// Positive lower bound for B = (l1 H^{deg})^{-k}, rounded down.
fn zero_threshold(l1: &BigInt, deg_f: u32, alpha: &AlgebraicNumber, k: u32) -> Dyadic {
    let l1_up = Dyadic::from_bigint(l1.clone());
    let m_up = alpha.mahler().hi();
    // denominator upper bound: l1^k * M^{deg_f}, rounded up as it grows
    let mut denom = Dyadic::one();
    for _ in 0..k {
        denom = denom.mul(&l1_up).round_to_bits(64, Round::Up);
    }
    for _ in 0..deg_f {
        denom = denom.mul(&m_up).round_to_bits(64, Round::Up);
    }
    Dyadic::one().div(&denom, 64, Round::Down)
}

/// M-tilde report: product of 1/min(1, |root|) over the roots of the
/// minimal polynomial, plus the Vieta cross-check M / M-tilde = |b0|.
#[derive(Debug, Clone)]
pub struct MtildeReport {
    pub mtilde: RealBall,
    pub mahler: RealBall,
    pub abs_constant: BigInt,
    /// Ball of M / M-tilde; should contain |b0|.
    pub ratio: RealBall,
    pub identity_consistent: bool,
    pub skipped_zero_roots: u32,
}

pub fn mtilde(alpha: &AlgebraicNumber, prec: u32) -> Result<MtildeReport> {
    let report = mtilde_of_poly(alpha.minpoly(), prec, alpha.context())?;
    Ok(report)
}

/// M-tilde for any nonzero integer polynomial (zero roots skipped and
/// counted; for a true minimal polynomial none occur).
pub fn mtilde_of_poly(f: &IntPoly, prec: u32, ctx: &PrecisionContext) -> Result<MtildeReport> {
    if f.is_zero() {
        return Err(Error::InvalidInput("m-tilde of the zero polynomial".into()));
    }
    let iso = isolate_roots(f, ctx)?;
    let target = -(prec as i64 + 8);
    let mut mtilde_acc = RealBall::exact(Dyadic::one());
    let mut mahler_acc = RealBall::exact(Dyadic::from_bigint(f.lead().abs()));
    for r in &iso.roots {
        let mut disk = r.disk.clone();
        if disk.radius().cmp_val(&Dyadic::pow2(target)) == std::cmp::Ordering::Greater {
            disk = refine_root(&r.factor, &disk, target, ctx)?;
        }
        // the reciprocal needs the modulus certified positive
        let mut m = disk.modulus(prec);
        let mut guard = 0;
        while !m.lo().is_positive() {
            guard += 1;
            if guard > 16 {
                return Err(Error::DegenerateRoot(format!(
                    "root near ({}, {}) cannot be certified nonzero",
                    disk.re(),
                    disk.im()
                )));
            }
            let cur = disk.radius().mag_exp().unwrap_or(target);
            disk = refine_root(&r.factor, &disk, cur - 16, ctx)?;
            m = disk.modulus(prec);
        }
        let clamped = clamp_below_one(&m);
        let recip = RealBall::exact(Dyadic::one()).div(&clamped, prec);
        mtilde_acc = mtilde_acc.mul(&recip.pow_u(r.multiplicity, prec), prec);
        mahler_acc = mahler_acc.mul(&clamp_above_one(&m).pow_u(r.multiplicity, prec), prec);
    }
    let abs_constant = {
        let (_, stripped) = f.primitive().strip_zero_roots();
        stripped.constant().abs()
    };
    let ratio = mahler_acc.div(&mtilde_acc, prec);
    let identity_consistent = ratio.contains(&Dyadic::from_bigint(abs_constant.clone()));
    Ok(MtildeReport {
        mtilde: mtilde_acc,
        mahler: mahler_acc,
        abs_constant,
        ratio,
        identity_consistent,
        skipped_zero_roots: iso.zero_multiplicity,
    })
}

/// M-tilde of a defining polynomial g over the k-th embedding of the field:
/// product of 1/min(1, |rho|) over the roots rho of sigma_k(g). The roots
/// are picked out of the integer lift's root set by certified evaluation of
/// sigma_k(g); candidates that are roots of sibling conjugate factors only
/// are refined away.
pub fn mtilde_over_field(
    g: &FieldPoly,
    field: &NumberField,
    k: usize,
    prec: u32,
) -> Result<RealBall> {
    let e = g
        .degree()
        .ok_or_else(|| Error::InvalidInput("m-tilde of the zero polynomial".into()))?;
    if e == 0 {
        return Ok(RealBall::exact(Dyadic::one()));
    }
    let lifted = lift_to_int_poly(g, field)?;
    let iso = isolate_roots(&lifted, field.context())?;
    if iso.zero_multiplicity > 0 {
        return Err(Error::DegenerateRoot(
            "defining polynomial has a zero root; m-tilde over the field excludes it".into(),
        ));
    }
    let mut disks: Vec<ComplexBall> = iso.roots.iter().map(|r| r.disk.clone()).collect();
    let factors: Vec<IntPoly> = iso.roots.iter().map(|r| r.factor.clone()).collect();

    for eval_prec in field.context().ladder() {
        // sigma_k(g) as a ball-coefficient polynomial
        let coeffs: Vec<ComplexBall> = g
            .coeffs()
            .iter()
            .map(|c| field.embed(c, k, eval_prec))
            .collect::<Result<_>>()?;
        let selected: Vec<usize> = (0..disks.len())
            .filter(|&i| eval_ball_poly(&coeffs, &disks[i], eval_prec).contains_zero())
            .collect();
        if selected.len() == e {
            let mut acc = RealBall::exact(Dyadic::one());
            for &i in &selected {
                let target = -(prec as i64 + 8);
                let disk = if disks[i].radius().cmp_val(&Dyadic::pow2(target))
                    == std::cmp::Ordering::Greater
                {
                    refine_root(&factors[i], &disks[i], target, field.context())?
                } else {
                    disks[i].clone()
                };
                let m = disk.modulus(prec);
                if !m.lo().is_positive() {
                    return Err(Error::DegenerateRoot(
                        "conjugate root cannot be certified nonzero".into(),
                    ));
                }
                let recip = RealBall::exact(Dyadic::one()).div(&clamp_below_one(&m), prec);
                acc = acc.mul(&recip, prec);
            }
            return Ok(acc);
        }
        // too many candidates: shrink all of them and try again sharper
        for i in 0..disks.len() {
            let cur = disks[i].radius().mag_exp().unwrap_or(-8);
            disks[i] = refine_root(&factors[i], &disks[i], cur - 16, field.context())?;
        }
    }
    Err(Error::NoConvergence {
        what: "root selection for m-tilde over the field".into(),
        reached: field.context().max_bits,
        ceiling: field.context().max_bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn golden() -> AlgebraicNumber {
        // (sqrt(5)-1)/2 = 0.618..., the positive root of X^2 + X - 1
        let region = ComplexBall::new(
            Dyadic::from_f64(0.6).unwrap(),
            Dyadic::zero(),
            Dyadic::from_f64(0.1).unwrap(),
        );
        AlgebraicNumber::new(IntPoly::from_i64(&[-1, 1, 1]), &region, &ctx()).unwrap()
    }

    #[test]
    fn mahler_of_simple_polynomials() {
        // M(X) = 1, M(2X - 1) = 2, M(X^2 - X - 1) = phi
        let m = mahler_measure(&IntPoly::x_pow(1), 64, &ctx()).unwrap();
        assert!(m.contains(&Dyadic::one()));
        assert!(m.radius_f64_up() < 1e-12);

        let m = mahler_measure(&IntPoly::from_i64(&[-1, 2]), 64, &ctx()).unwrap();
        assert!(m.contains(&Dyadic::from_i64(2)));

        let m = mahler_measure(&IntPoly::from_i64(&[-1, -1, 1]), 64, &ctx()).unwrap();
        let phi = 1.618033988749895_f64;
        assert!(m.lo().to_f64() <= phi && phi <= m.hi().to_f64());
        assert!(m.radius_f64_up() < 1e-10);
    }

    #[test]
    fn mahler_counts_multiplicities() {
        // M((2X-1)^3) = 8
        let f = IntPoly::from_i64(&[-1, 2]);
        let f3 = f.mul(&f).mul(&f);
        let m = mahler_measure(&f3, 64, &ctx()).unwrap();
        assert!(m.contains(&Dyadic::from_i64(8)));
    }

    #[test]
    fn mahler_multiplicative_spot_check() {
        let f = IntPoly::from_i64(&[-1, -1, 1]);
        let g = IntPoly::from_i64(&[3, 0, 0, 2]);
        let mf = mahler_measure(&f, 96, &ctx()).unwrap();
        let mg = mahler_measure(&g, 96, &ctx()).unwrap();
        let mfg = mahler_measure(&f.mul(&g), 96, &ctx()).unwrap();
        assert!(mfg.intersects(&mf.mul(&mg, 96)));
    }

    #[test]
    fn heights() {
        // H(3) = 3, H(1/2) = 2, H(golden) = phi^(1/2)
        let three = AlgebraicNumber::from_rational(
            &BigRational::from_integer(BigInt::from(3)),
            &ctx(),
        )
        .unwrap();
        assert!(three.height(64).contains(&Dyadic::from_i64(3)));

        let half = AlgebraicNumber::from_rational(
            &BigRational::new(BigInt::from(1), BigInt::from(2)),
            &ctx(),
        )
        .unwrap();
        assert!(half.height(64).contains(&Dyadic::from_i64(2)));

        let g = golden();
        let h = g.height(64);
        let truth = 1.618033988749895_f64.sqrt(); // 1.27201964951...
        assert!(h.lo().to_f64() <= truth && truth <= h.hi().to_f64());
    }

    #[test]
    fn lq_norms() {
        let f = IntPoly::from_i64(&[1, 1, 1]);
        assert!(lq_norm(&f, LqNorm::One, 64).contains(&Dyadic::from_i64(3)));
        let f = IntPoly::from_i64(&[3, 4]);
        assert!(lq_norm(&f, LqNorm::Two, 64).contains(&Dyadic::from_i64(5)));
        let f = IntPoly::from_i64(&[-2, 0, 0, 7]);
        assert!(lq_norm(&f, LqNorm::Infinity, 64).contains(&Dyadic::from_i64(7)));
    }

    #[test]
    fn norm_bounds_hold_on_examples() {
        for f in [
            IntPoly::from_i64(&[-1, 1]),
            IntPoly::from_i64(&[-1, -1, 1]),
            IntPoly::from_i64(&[5, -3, 0, 2, 9]),
        ] {
            let rep = check_norm_bounds(&f, 96, &ctx()).unwrap();
            assert!(rep.all_hold(), "violated for {}: {:?}", f, rep);
        }
    }

    #[test]
    fn certified_zero_on_golden() {
        let g = golden();
        // defining relation
        assert!(certified_is_zero(&IntPoly::from_i64(&[-1, 1, 1]), &g).unwrap());
        // a constructed multiple
        let f = IntPoly::from_i64(&[-1, 1, 1]).mul(&IntPoly::from_i64(&[-3, 1]));
        assert!(certified_is_zero(&f, &g).unwrap());
        // a perturbation is certified nonzero
        let f = IntPoly::from_i64(&[0, 1, 1]);
        assert!(!certified_is_zero(&f, &g).unwrap());
        // and at another number the relation fails: F(1/2) = -1/4... times 4
        let half = AlgebraicNumber::from_rational(
            &BigRational::new(BigInt::from(1), BigInt::from(2)),
            &ctx(),
        )
        .unwrap();
        assert!(!certified_is_zero(&IntPoly::from_i64(&[-1, 1, 1]), &half).unwrap());
    }

    #[test]
    fn certified_zero_with_tiny_nonzero_value() {
        // F(g) = g^40, astronomically small but certified nonzero
        let g = golden();
        let f = IntPoly::x_pow(40);
        assert!(!certified_is_zero(&f, &g).unwrap());
    }

    #[test]
    fn mtilde_examples() {
        // alpha = 1/2: single root 1/2, M-tilde = 2, M = 2, |b0| = 1
        let half = AlgebraicNumber::from_rational(
            &BigRational::new(BigInt::from(1), BigInt::from(2)),
            &ctx(),
        )
        .unwrap();
        let rep = mtilde(&half, 64).unwrap();
        assert!(rep.mtilde.contains(&Dyadic::from_i64(2)));
        assert!(rep.identity_consistent);
        assert_eq!(rep.abs_constant, BigInt::one());

        // golden: roots 0.618... and -1.618...; only the small one contributes
        let g = golden();
        let rep = mtilde(&g, 64).unwrap();
        let phi = 1.618033988749895_f64;
        assert!(rep.mtilde.lo().to_f64() <= phi && phi <= rep.mtilde.hi().to_f64());
        assert!(rep.identity_consistent);
        assert_eq!(rep.skipped_zero_roots, 0);
    }

    #[test]
    fn mtilde_skips_zero_roots_defensively() {
        // X^2 (2X - 1): zero roots skipped and reported
        let f = IntPoly::x_pow(2).mul(&IntPoly::from_i64(&[-1, 2]));
        let rep = mtilde_of_poly(&f, 64, &ctx()).unwrap();
        assert_eq!(rep.skipped_zero_roots, 2);
        assert!(rep.mtilde.contains(&Dyadic::from_i64(2)));
    }

    #[test]
    fn mtilde_over_field_matches_rational_case() {
        use crate::field::NumberField;
        // degree-one field: sigma_1 is the identity, so this must agree
        // with plain m-tilde of the lifted polynomial
        let f = NumberField::new(IntPoly::from_i64(&[-3, 1]), &ctx()).unwrap();
        // g = X^2 - X - 1 over Q
        let g = FieldPoly::new(vec![
            f.from_rational(&BigRational::from_integer(BigInt::from(-1))),
            f.from_rational(&BigRational::from_integer(BigInt::from(-1))),
            f.from_rational(&BigRational::from_integer(BigInt::from(1))),
        ]);
        let mt = mtilde_over_field(&g, &f, 0, 64).unwrap();
        let phi = 1.618033988749895_f64;
        assert!(mt.lo().to_f64() <= phi && phi <= mt.hi().to_f64());
    }

    #[test]
    fn mtilde_over_quadratic_field() {
        use crate::field::NumberField;
        // field Q(sqrt2), g = X - sqrt(2)/2: sigma_1(g) root is sqrt(2)/2
        // (primary = positive root), so M-tilde = sqrt(2)
        let iso = ComplexBall::new(
            Dyadic::from_f64(1.4).unwrap(),
            Dyadic::zero(),
            Dyadic::from_f64(0.2).unwrap(),
        );
        let f = NumberField::with_isolator(IntPoly::from_i64(&[-2, 0, 1]), &iso, &ctx()).unwrap();
        let half_t = f.mul_rational(
            &f.theta(),
            &BigRational::new(BigInt::from(1), BigInt::from(2)),
        );
        let g = FieldPoly::new(vec![half_t.neg(), f.one()]);
        let mt = mtilde_over_field(&g, &f, f.primary_index(), 96).unwrap();
        let rt2 = std::f64::consts::SQRT_2;
        assert!(
            mt.lo().to_f64() <= rt2 && rt2 <= mt.hi().to_f64(),
            "expected sqrt(2) in {:?}",
            mt
        );
    }

    #[test]
    fn algebraic_number_validation() {
        // repeated roots rejected
        let sq = IntPoly::from_i64(&[1, 2, 1]);
        let region = ComplexBall::new(Dyadic::from_f64(-1.0).unwrap(), Dyadic::zero(), Dyadic::one());
        assert!(AlgebraicNumber::new(sq, &region, &ctx()).is_err());
        // region must hit a root
        let far = ComplexBall::new(Dyadic::from_f64(9.0).unwrap(), Dyadic::zero(), Dyadic::pow2(-4));
        assert!(AlgebraicNumber::new(IntPoly::from_i64(&[-1, 1, 1]), &far, &ctx()).is_err());
        // content is stripped
        let g = AlgebraicNumber::new(
            IntPoly::from_i64(&[-2, 2, 2]),
            &ComplexBall::new(Dyadic::from_f64(0.6).unwrap(), Dyadic::zero(), Dyadic::pow2(-3)),
            &ctx(),
        )
        .unwrap();
        assert_eq!(g.minpoly(), &IntPoly::from_i64(&[-1, 1, 1]));
        assert!(g.is_real());
        assert_eq!(g.degree(), 2);
    }

    #[test]
    fn refined_disks_shrink_monotonically() {
        let g = golden();
        let d1 = g.refined(-100).unwrap();
        let d2 = g.refined(-300).unwrap();
        assert!(d1.contains_ball(&d2));
        assert!(d2.radius().cmp_val(&Dyadic::pow2(-300)) != std::cmp::Ordering::Greater);
        let r = g.real_interval(-80).unwrap();
        assert!((r.lo().to_f64() - 0.6180339887498949).abs() < 1e-14);
        assert!((r.hi().to_f64() - 0.6180339887498949).abs() < 1e-14);
    }
}
