//! Certified ball arithmetic: real intervals and complex disks with dyadic
//! centers and radii.
//!
//! Inclusion contract: if the true inputs lie in the argument balls, the true
//! result lies in the returned ball. Centers are rounded to the working
//! precision and the committed rounding error is folded into the radius, so
//! the contract survives precision truncation. Radii are always rounded up.
//!
//! Zero / sign tests (`contains_zero`, `excludes_zero`, disk disjointness)
//! compare exact dyadic squares and involve no rounding at all.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::dyadic::{Dyadic, Round};

/// Radii carry few significant bits; what matters is the exponent.
const RADIUS_BITS: u32 = 24;

/// Verdict of comparing a certified magnitude against a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certify {
    Below,
    Above,
    Unknown,
}

/// Working-precision ladder shared by everything that escalates.
#[derive(Debug, Clone, Copy)]
pub struct PrecisionContext {
    pub working_bits: u32,
    pub max_bits: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext { working_bits: 128, max_bits: 8192 }
    }
}

impl PrecisionContext {
    pub fn new(working_bits: u32, max_bits: u32) -> Self {
        PrecisionContext { working_bits, max_bits: max_bits.max(working_bits) }
    }

    /// working, 2*working, ... up to and including max (exactly once).
    pub fn ladder(&self) -> impl Iterator<Item = u32> {
        let start = self.working_bits.max(8);
        let max = self.max_bits;
        let mut cur = Some(start);
        std::iter::from_fn(move || {
            let p = cur?;
            cur = if p >= max {
                None
            } else {
                Some(p.saturating_mul(2).min(max))
            };
            Some(p)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealBall {
    center: Dyadic,
    radius: Dyadic, // >= 0
}

impl RealBall {
    pub fn exact(center: Dyadic) -> RealBall {
        RealBall { center, radius: Dyadic::zero() }
    }

    pub fn from_i64(v: i64) -> RealBall {
        RealBall::exact(Dyadic::from_i64(v))
    }

    pub fn new(center: Dyadic, radius: Dyadic) -> RealBall {
        assert!(!radius.is_negative());
        RealBall { center, radius: radius.round_to_bits(RADIUS_BITS, Round::Up) }
    }

    /// Ball spanning `[lo, hi]` exactly (midpoint halving is exact in dyadics).
    pub fn from_interval(lo: &Dyadic, hi: &Dyadic) -> RealBall {
        assert!(lo.cmp_val(hi) != std::cmp::Ordering::Greater, "inverted interval");
        let center = lo.add(hi).mul_pow2(-1);
        let radius = hi.sub(lo).mul_pow2(-1);
        RealBall { center, radius: radius.round_to_bits(RADIUS_BITS, Round::Up) }
    }

    /// Enclosure of `num/den`.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> RealBall {
        let n = Dyadic::from_bigint(num.clone());
        let d = Dyadic::from_bigint(den.clone());
        if let Some(exact) = Dyadic::try_from_ratio(num, den) {
            return RealBall::exact(exact);
        }
        let lo = n.div(&d, prec, Round::Down);
        let hi = n.div(&d, prec, Round::Up);
        RealBall::from_interval(&lo, &hi)
    }

    pub fn center(&self) -> &Dyadic {
        &self.center
    }

    pub fn radius(&self) -> &Dyadic {
        &self.radius
    }

    pub fn lo(&self) -> Dyadic {
        self.center.sub(&self.radius)
    }

    pub fn hi(&self) -> Dyadic {
        self.center.add(&self.radius)
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    fn settle(center: Dyadic, radius: Dyadic, prec: u32) -> RealBall {
        let (c, err) = center.round_with_err(prec);
        RealBall {
            center: c,
            radius: radius.add(&err).round_to_bits(RADIUS_BITS, Round::Up),
        }
    }

    pub fn neg(&self) -> RealBall {
        RealBall { center: self.center.neg(), radius: self.radius.clone() }
    }

    pub fn add(&self, other: &RealBall, prec: u32) -> RealBall {
        RealBall::settle(
            self.center.add(&other.center),
            self.radius.add(&other.radius),
            prec,
        )
    }

    pub fn sub(&self, other: &RealBall, prec: u32) -> RealBall {
        self.add(&other.neg(), prec)
    }

    pub fn mul(&self, other: &RealBall, prec: u32) -> RealBall {
        let c = self.center.mul(&other.center);
        let r = self
            .center
            .abs()
            .mul(&other.radius)
            .add(&other.center.abs().mul(&self.radius))
            .add(&self.radius.mul(&other.radius));
        RealBall::settle(c, r, prec)
    }

    pub fn mul_dyadic(&self, k: &Dyadic, prec: u32) -> RealBall {
        RealBall::settle(self.center.mul(k), self.radius.mul(&k.abs()), prec)
    }

    pub fn mul_pow2(&self, e: i64) -> RealBall {
        RealBall { center: self.center.mul_pow2(e), radius: self.radius.mul_pow2(e) }
    }

    pub fn square_ball(&self, prec: u32) -> RealBall {
        // tighter than generic mul when the ball straddles zero
        let lo = self.lo();
        let hi = self.hi();
        let a = lo.square();
        let b = hi.square();
        let (mut l, h) = if a.cmp_val(&b) == std::cmp::Ordering::Less { (a, b) } else { (b, a) };
        if self.contains(&Dyadic::zero()) {
            l = Dyadic::zero();
        }
        RealBall::settle_interval(l, h, prec)
    }

    fn settle_interval(lo: Dyadic, hi: Dyadic, prec: u32) -> RealBall {
        let b = RealBall::from_interval(&lo, &hi);
        RealBall::settle(b.center, b.radius, prec)
    }

    /// `self / other`; `other` must exclude zero.
    pub fn div(&self, other: &RealBall, prec: u32) -> RealBall {
        assert!(other.excludes_zero(), "ball division by an interval containing zero");
        let (a, b) = (self.lo(), self.hi());
        let (c, d) = (other.lo(), other.hi());
        let mut lo: Option<Dyadic> = None;
        let mut hi: Option<Dyadic> = None;
        for num in [&a, &b] {
            for den in [&c, &d] {
                let l = num.div(den, prec + 4, Round::Down);
                let h = num.div(den, prec + 4, Round::Up);
                lo = Some(match lo {
                    Some(x) if x.cmp_val(&l) != std::cmp::Ordering::Greater => x,
                    _ => l,
                });
                hi = Some(match hi {
                    Some(x) if x.cmp_val(&h) != std::cmp::Ordering::Less => x,
                    _ => h,
                });
            }
        }
        RealBall::settle_interval(lo.unwrap(), hi.unwrap(), prec)
    }

    /// k-th root; the interval must be certified non-negative.
    pub fn nth_root(&self, k: u32, prec: u32) -> RealBall {
        let lo = self.lo();
        assert!(
            !lo.is_negative(),
            "nth_root on an interval not certified non-negative"
        );
        let hi = self.hi();
        let l = lo.nth_root(k, prec + 4, Round::Down);
        let h = hi.nth_root(k, prec + 4, Round::Up);
        RealBall::settle_interval(l, h, prec)
    }

    /// Natural log; the interval must be certified positive.
    pub fn ln(&self, prec: u32) -> RealBall {
        let lo = self.lo();
        assert!(lo.is_positive(), "ln on an interval not certified positive");
        let l = lo.ln(prec + 4, Round::Down);
        let h = self.hi().ln(prec + 4, Round::Up);
        RealBall::settle_interval(l, h, prec)
    }

    pub fn abs_ball(&self) -> RealBall {
        let lo = self.lo();
        let hi = self.hi();
        if !lo.is_negative() {
            self.clone()
        } else if !hi.is_positive() {
            self.neg()
        } else {
            let m = if lo.neg().cmp_val(&hi) == std::cmp::Ordering::Greater {
                lo.neg()
            } else {
                hi
            };
            RealBall::from_interval(&Dyadic::zero(), &m)
        }
    }

    pub fn pow_u(&self, mut n: u32, prec: u32) -> RealBall {
        let mut base = self.clone();
        let mut acc = RealBall::exact(Dyadic::one());
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base, prec);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base, prec);
            }
        }
        acc
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        x.sub(&self.center).abs().cmp_val(&self.radius) != std::cmp::Ordering::Greater
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Dyadic::zero())
    }

    pub fn excludes_zero(&self) -> bool {
        !self.contains_zero()
    }

    pub fn contains_ball(&self, other: &RealBall) -> bool {
        // |c1-c2| + r2 <= r1, all exact
        other
            .center
            .sub(&self.center)
            .abs()
            .add(&other.radius)
            .cmp_val(&self.radius)
            != std::cmp::Ordering::Greater
    }

    pub fn intersects(&self, other: &RealBall) -> bool {
        self.center.sub(&other.center).abs().cmp_val(&self.radius.add(&other.radius))
            != std::cmp::Ordering::Greater
    }

    /// Interval hull.
    pub fn union(&self, other: &RealBall) -> RealBall {
        let lo = match self.lo().cmp_val(&other.lo()) {
            std::cmp::Ordering::Greater => other.lo(),
            _ => self.lo(),
        };
        let hi = match self.hi().cmp_val(&other.hi()) {
            std::cmp::Ordering::Less => other.hi(),
            _ => self.hi(),
        };
        RealBall::from_interval(&lo, &hi)
    }

    /// Some(Ordering) when every point of `self` compares the same way
    /// against every point of `other`; None when the balls overlap.
    pub fn certified_cmp(&self, other: &RealBall) -> Option<std::cmp::Ordering> {
        if self.hi().cmp_val(&other.lo()) == std::cmp::Ordering::Less {
            Some(std::cmp::Ordering::Less)
        } else if self.lo().cmp_val(&other.hi()) == std::cmp::Ordering::Greater {
            Some(std::cmp::Ordering::Greater)
        } else if self.is_exact() && other.is_exact() && self.center == other.center {
            Some(std::cmp::Ordering::Equal)
        } else {
            None
        }
    }

    /// Compare `|self|` against a threshold.
    pub fn certify_below(&self, threshold: &Dyadic) -> Certify {
        let a = self.abs_ball();
        if a.hi().cmp_val(threshold) == std::cmp::Ordering::Less {
            Certify::Below
        } else if a.lo().cmp_val(threshold) == std::cmp::Ordering::Greater {
            Certify::Above
        } else {
            Certify::Unknown
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.center.to_f64()
    }

    /// Upper bound on the radius as f64, never under-reported.
    pub fn radius_f64_up(&self) -> f64 {
        self.radius.to_f64_dir(Round::Up)
    }

    pub fn to_complex(&self) -> ComplexBall {
        ComplexBall {
            re: self.center.clone(),
            im: Dyadic::zero(),
            radius: self.radius.clone(),
        }
    }
}

/// Closed disk `|z - (re + i im)| <= radius` in the complex plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexBall {
    re: Dyadic,
    im: Dyadic,
    radius: Dyadic, // >= 0
}

impl ComplexBall {
    pub fn exact(re: Dyadic, im: Dyadic) -> ComplexBall {
        ComplexBall { re, im, radius: Dyadic::zero() }
    }

    pub fn new(re: Dyadic, im: Dyadic, radius: Dyadic) -> ComplexBall {
        assert!(!radius.is_negative());
        ComplexBall { re, im, radius: radius.round_to_bits(RADIUS_BITS, Round::Up) }
    }

    pub fn from_f64(re: f64, im: f64) -> Option<ComplexBall> {
        Some(ComplexBall::exact(Dyadic::from_f64(re)?, Dyadic::from_f64(im)?))
    }

    pub fn zero() -> ComplexBall {
        ComplexBall::exact(Dyadic::zero(), Dyadic::zero())
    }

    pub fn re(&self) -> &Dyadic {
        &self.re
    }

    pub fn im(&self) -> &Dyadic {
        &self.im
    }

    pub fn radius(&self) -> &Dyadic {
        &self.radius
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    /// Real-part interval (radius bounds both coordinates).
    pub fn re_ball(&self) -> RealBall {
        RealBall::new(self.re.clone(), self.radius.clone())
    }

    pub fn im_ball(&self) -> RealBall {
        RealBall::new(self.im.clone(), self.radius.clone())
    }

    fn settle(re: Dyadic, im: Dyadic, radius: Dyadic, prec: u32) -> ComplexBall {
        let (rc, re_err) = re.round_with_err(prec);
        let (ic, im_err) = im.round_with_err(prec);
        // coordinate errors combine into the disk radius via |dr| + |di| >= sqrt
        let radius = radius.add(&re_err).add(&im_err);
        ComplexBall {
            re: rc,
            im: ic,
            radius: radius.round_to_bits(RADIUS_BITS, Round::Up),
        }
    }

    pub fn neg(&self) -> ComplexBall {
        ComplexBall { re: self.re.neg(), im: self.im.neg(), radius: self.radius.clone() }
    }

    pub fn conj(&self) -> ComplexBall {
        ComplexBall { re: self.re.clone(), im: self.im.neg(), radius: self.radius.clone() }
    }

    pub fn add(&self, other: &ComplexBall, prec: u32) -> ComplexBall {
        ComplexBall::settle(
            self.re.add(&other.re),
            self.im.add(&other.im),
            self.radius.add(&other.radius),
            prec,
        )
    }

    pub fn sub(&self, other: &ComplexBall, prec: u32) -> ComplexBall {
        self.add(&other.neg(), prec)
    }

    /// Exact squared modulus of the center.
    fn center_norm2(&self) -> Dyadic {
        self.re.square().add(&self.im.square())
    }

    /// Upper bound on the modulus of the center.
    fn center_abs_up(&self, prec: u32) -> Dyadic {
        self.center_norm2().nth_root(2, prec, Round::Up)
    }

    fn center_abs_down(&self, prec: u32) -> Dyadic {
        self.center_norm2().nth_root(2, prec, Round::Down)
    }

    pub fn mul(&self, other: &ComplexBall, prec: u32) -> ComplexBall {
        let re = self.re.mul(&other.re).sub(&self.im.mul(&other.im));
        let im = self.re.mul(&other.im).add(&self.im.mul(&other.re));
        let a1 = self.center_abs_up(RADIUS_BITS);
        let a2 = other.center_abs_up(RADIUS_BITS);
        let r = a1
            .mul(&other.radius)
            .add(&a2.mul(&self.radius))
            .add(&self.radius.mul(&other.radius));
        ComplexBall::settle(re, im, r, prec)
    }

    pub fn mul_dyadic(&self, k: &Dyadic, prec: u32) -> ComplexBall {
        ComplexBall::settle(self.re.mul(k), self.im.mul(k), self.radius.mul(&k.abs()), prec)
    }

    pub fn mul_int(&self, k: &BigInt, prec: u32) -> ComplexBall {
        self.mul_dyadic(&Dyadic::from_bigint(k.clone()), prec)
    }

    pub fn mul_pow2(&self, e: i64) -> ComplexBall {
        ComplexBall {
            re: self.re.mul_pow2(e),
            im: self.im.mul_pow2(e),
            radius: self.radius.mul_pow2(e),
        }
    }

    /// Reciprocal; the disk must exclude zero.
    pub fn recip(&self, prec: u32) -> ComplexBall {
        assert!(self.excludes_zero(), "reciprocal of a disk containing zero");
        let n2 = self.center_norm2();
        let re = self.re.div(&n2, prec + 4, Round::Nearest);
        let im = self.im.neg().div(&n2, prec + 4, Round::Nearest);
        // rounding slack of the two nearest-divisions
        let ulp = Dyadic::pow2(
            re.mag_exp().unwrap_or(0).max(im.mag_exp().unwrap_or(0)) - (prec as i64 + 2),
        );
        // |1/z - 1/c| <= r / (|c| (|c| - r))
        let abs_dn = self.center_abs_down(prec + 4);
        let gap = abs_dn.sub(&self.radius);
        assert!(gap.is_positive());
        let denom = abs_dn.mul(&gap);
        let prop = self.radius.div(&denom, RADIUS_BITS, Round::Up);
        ComplexBall::settle(re, im, prop.add(&ulp).add(&ulp), prec)
    }

    pub fn div(&self, other: &ComplexBall, prec: u32) -> ComplexBall {
        self.mul(&other.recip(prec + 8), prec)
    }

    pub fn pow_u(&self, mut n: u32, prec: u32) -> ComplexBall {
        let mut base = self.clone();
        let mut acc = ComplexBall::exact(Dyadic::one(), Dyadic::zero());
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base, prec);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base, prec);
            }
        }
        acc
    }

    /// Certified modulus interval.
    pub fn modulus(&self, prec: u32) -> RealBall {
        let lo = self.center_abs_down(prec + 4).sub(&self.radius);
        let hi = self.center_abs_up(prec + 4).add(&self.radius);
        let lo = if lo.is_negative() { Dyadic::zero() } else { lo };
        RealBall::from_interval(&lo, &hi)
    }

    /// Exact: does the disk contain 0?
    pub fn contains_zero(&self) -> bool {
        self.center_norm2().cmp_val(&self.radius.square()) != std::cmp::Ordering::Greater
    }

    pub fn excludes_zero(&self) -> bool {
        !self.contains_zero()
    }

    /// Exact disk disjointness: |c1-c2| > r1+r2.
    pub fn is_disjoint(&self, other: &ComplexBall) -> bool {
        let d2 = self.re.sub(&other.re).square().add(&self.im.sub(&other.im).square());
        let rr = self.radius.add(&other.radius).square();
        d2.cmp_val(&rr) == std::cmp::Ordering::Greater
    }

    /// Exact disk containment: other ⊆ self.
    pub fn contains_ball(&self, other: &ComplexBall) -> bool {
        let slack = self.radius.sub(&other.radius);
        if slack.is_negative() {
            return false;
        }
        let d2 = self.re.sub(&other.re).square().add(&self.im.sub(&other.im).square());
        d2.cmp_val(&slack.square()) != std::cmp::Ordering::Greater
    }

    /// Compare `|self|` against a threshold without rounding leaks.
    pub fn certify_below(&self, threshold: &Dyadic) -> Certify {
        if threshold.is_negative() {
            return Certify::Above;
        }
        let m = self.modulus(RADIUS_BITS * 4);
        if m.hi().cmp_val(threshold) == std::cmp::Ordering::Less {
            Certify::Below
        } else if m.lo().cmp_val(threshold) == std::cmp::Ordering::Greater {
            Certify::Above
        } else {
            Certify::Unknown
        }
    }

    /// Certified distance interval between the two disk centers' true values.
    pub fn distance(&self, other: &ComplexBall, prec: u32) -> RealBall {
        self.sub(other, prec).modulus(prec)
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn radius_f64_up(&self) -> f64 {
        self.radius.to_f64_dir(Round::Up)
    }
}

/// Horner evaluation of an integer polynomial (coeffs[i] multiplies X^i).
pub fn eval_int_poly(coeffs: &[BigInt], z: &ComplexBall, prec: u32) -> ComplexBall {
    let mut acc = ComplexBall::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(z, prec);
        if !c.is_zero() {
            acc = acc.add(&ComplexBall::exact(Dyadic::from_bigint(c.clone()), Dyadic::zero()), prec);
        }
    }
    acc
}

/// Horner evaluation with ball coefficients.
pub fn eval_ball_poly(coeffs: &[ComplexBall], z: &ComplexBall, prec: u32) -> ComplexBall {
    let mut acc = ComplexBall::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(z, prec).add(c, prec);
    }
    acc
}

/// Horner evaluation of an integer polynomial on a real interval.
pub fn eval_int_poly_real(coeffs: &[BigInt], x: &RealBall, prec: u32) -> RealBall {
    let mut acc = RealBall::exact(Dyadic::zero());
    for c in coeffs.iter().rev() {
        acc = acc.mul(x, prec);
        if !c.is_zero() {
            acc = acc.add(&RealBall::exact(Dyadic::from_bigint(c.clone())), prec);
        }
    }
    acc
}
