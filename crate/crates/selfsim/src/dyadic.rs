//! Exact dyadic rationals `m * 2^e` with directed rounding.
//!
//! Every certified quantity in this crate bottoms out here: ball centers and
//! radii are `Dyadic`, so radius bookkeeping is exact integer arithmetic and
//! never hides decimal rounding. Representation invariant: the mantissa is
//! odd or zero (zero is stored as `0 * 2^0`), which makes `Eq`/`Ord`/`Hash`
//! agree with numeric equality.
//!
//! `ln` and `nth_root` return one-sided bounds under `Round::Down`/`Round::Up`;
//! those two directions are what the ball layer composes into enclosures.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rounding direction for precision-limited operations.
/// `Down` is toward negative infinity, `Up` toward positive infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
    Nearest,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exp: i64) -> Dyadic {
        let mut d = Dyadic { mantissa, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mantissa >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn zero() -> Dyadic {
        Dyadic { mantissa: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Dyadic {
        Dyadic { mantissa: BigInt::one(), exp: 0 }
    }

    pub fn from_i64(v: i64) -> Dyadic {
        Dyadic::new(BigInt::from(v), 0)
    }

    pub fn from_bigint(v: BigInt) -> Dyadic {
        Dyadic::new(v, 0)
    }

    /// 2^e.
    pub fn pow2(e: i64) -> Dyadic {
        Dyadic { mantissa: BigInt::one(), exp: e }
    }

    /// Exact conversion; every finite f64 is dyadic.
    pub fn from_f64(v: f64) -> Option<Dyadic> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        Some(Dyadic::new(BigInt::from(sign) * BigInt::from(mant), exp))
    }

    /// Exact conversion of `num/den` when `den` reduces to a power of two.
    pub fn try_from_ratio(num: &BigInt, den: &BigInt) -> Option<Dyadic> {
        if den.is_zero() {
            return None;
        }
        let g = num.gcd(den);
        let n = num / &g;
        let d = (den / &g).abs();
        let tz = d.trailing_zeros().unwrap_or(0);
        if (&d >> tz).is_one() {
            let n = if den.is_negative() { -n } else { n };
            Some(Dyadic::new(n, -(tz as i64)))
        } else {
            None
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    /// Exact value as a rational (dyadics are rationals with 2-power denominators).
    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mantissa << self.exp as usize)
        } else {
            BigRational::new(
                self.mantissa.clone(),
                BigInt::one() << (-self.exp) as usize,
            )
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    pub fn signum(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Significand length in bits (0 for zero).
    pub fn bits(&self) -> u64 {
        self.mantissa.bits()
    }

    /// Smallest `t` with `|self| < 2^t`; `None` for zero.
    pub fn mag_exp(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp + self.mantissa.bits() as i64)
        }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic { mantissa: self.mantissa.abs(), exp: self.exp }
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { mantissa: -&self.mantissa, exp: self.exp }
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let m = (&self.mantissa << (self.exp - e) as u64)
            + (&other.mantissa << (other.exp - e) as u64);
        Dyadic::new(m, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mantissa: &self.mantissa * &other.mantissa,
            exp: self.exp + other.exp,
        }
    }

    pub fn square(&self) -> Dyadic {
        self.mul(self)
    }

    pub fn mul_pow2(&self, e: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mantissa: self.mantissa.clone(), exp: self.exp + e }
    }

    pub fn mul_i64(&self, k: i64) -> Dyadic {
        Dyadic::new(&self.mantissa * BigInt::from(k), self.exp)
    }

    /// Round to at most `bits` significand bits in the given direction.
    pub fn round_to_bits(&self, bits: u32, dir: Round) -> Dyadic {
        assert!(bits >= 1);
        let mb = self.mantissa.bits();
        if mb <= bits as u64 {
            return self.clone();
        }
        let drop = (mb - bits as u64) as u64;
        let mag = self.mantissa.magnitude();
        let q: BigUint = mag >> drop;
        let rem: BigUint = mag - (&q << drop);
        let negative = self.mantissa.is_negative();
        let bump = match dir {
            Round::Down => !rem.is_zero() && negative,
            Round::Up => !rem.is_zero() && !negative,
            Round::Nearest => &rem << 1u8 >= BigUint::one() << drop,
        };
        let mut qi = BigInt::from(q);
        if bump {
            qi += 1;
        }
        if negative {
            qi = -qi;
        }
        Dyadic::new(qi, self.exp + drop as i64)
    }

    /// Round-to-nearest together with the exact absolute error committed.
    pub fn round_with_err(&self, bits: u32) -> (Dyadic, Dyadic) {
        let r = self.round_to_bits(bits, Round::Nearest);
        let err = self.sub(&r).abs();
        (r, err)
    }

    /// Directed quotient `self / other` with `bits` significand bits.
    pub fn div(&self, other: &Dyadic, bits: u32, dir: Round) -> Dyadic {
        assert!(!other.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let na = self.mantissa.magnitude();
        let nb = other.mantissa.magnitude();
        let shift = bits as i64 + 2 + nb.bits() as i64 - na.bits() as i64;
        let shift = shift.max(0) as u64;
        let (q, r) = (na << shift).div_rem(nb);
        let negative = self.mantissa.is_negative() != other.mantissa.is_negative();
        let bump = match dir {
            Round::Down => !r.is_zero() && negative,
            Round::Up => !r.is_zero() && !negative,
            Round::Nearest => &r << 1u8 >= *nb,
        };
        let mut qi = BigInt::from(q);
        if bump {
            qi += 1;
        }
        if negative {
            qi = -qi;
        }
        Dyadic::new(qi, self.exp - other.exp - shift as i64).round_to_bits(bits, dir)
    }

    /// Directed k-th root (requires `self >= 0`).
    pub fn nth_root(&self, k: u32, bits: u32, dir: Round) -> Dyadic {
        assert!(k >= 1);
        assert!(!self.is_negative(), "nth_root of a negative dyadic");
        if self.is_zero() {
            return Dyadic::zero();
        }
        if k == 1 {
            return self.round_to_bits(bits, dir);
        }
        let needed = (k as u64) * (bits as u64 + 2);
        let mb = self.mantissa.bits();
        let s0 = needed.saturating_sub(mb) as i64;
        let s = s0 + (self.exp - s0).rem_euclid(k as i64);
        let n = self.mantissa.magnitude() << s as u64;
        let root = n.nth_root(k);
        let exact = num_traits::pow::Pow::pow(&root, k) == n;
        let m = match dir {
            Round::Down => root,
            Round::Up => {
                if exact {
                    root
                } else {
                    root + 1u32
                }
            }
            Round::Nearest => {
                // midpoint test via squaring is overkill here; nearest callers
                // tolerate one ulp, so bias up on inexact.
                if exact {
                    root
                } else {
                    root + 1u32
                }
            }
        };
        Dyadic::new(BigInt::from(m), (self.exp - s) / k as i64).round_to_bits(bits, dir)
    }

    /// Directed natural logarithm (requires `self > 0`).
    ///
    /// Fixed-point evaluation of `ln m = 2 atanh((m-1)/(m+1))` for the
    /// significand in [1,2) plus an exponent multiple of `ln 2`; all floor
    /// losses are counted into the upper bound, so Down/Up really bracket.
    pub fn ln(&self, bits: u32, dir: Round) -> Dyadic {
        assert!(self.is_positive(), "ln of a non-positive dyadic");
        if self.mantissa.is_one() && self.exp == 0 {
            return Dyadic::zero();
        }
        match dir {
            Round::Nearest => {
                let lo = self.ln(bits + 2, Round::Down);
                return lo.round_to_bits(bits, Round::Nearest);
            }
            _ => {}
        }
        let w = bits as u64 + 32;
        let x = self.round_to_bits(w as u32, dir);
        let mb = x.mantissa.bits();
        // x = m' * 2^c with m' in [1,2): scaled significand m_fix = m' * 2^w
        let c = x.exp + mb as i64 - 1;
        let m_fix: BigUint = x.mantissa.magnitude() << (w - (mb - 1));
        let one_fix = BigUint::one() << w;

        let (frac_lo, frac_slack) = if m_fix == one_fix {
            (BigUint::zero(), 0u64)
        } else {
            atanh_fixed(&m_fix, &one_fix, w)
        };
        // ln m' in [2*frac_lo, 2*(frac_lo + frac_slack)] * 2^-w
        let (ln2_lo, ln2_slack) = ln2_fixed(w);

        let two = |v: BigUint| BigInt::from(v) << 1u8;
        let frac_lo = two(frac_lo);
        let frac_hi = &frac_lo + BigInt::from(2 * frac_slack);
        let ln2_lo = BigInt::from(ln2_lo);
        let ln2_hi = &ln2_lo + BigInt::from(ln2_slack);

        let fixed = match (dir, c.signum()) {
            (Round::Down, 0) => frac_lo,
            (Round::Up, 0) => frac_hi,
            (Round::Down, 1) => frac_lo + ln2_lo * c,
            (Round::Up, 1) => frac_hi + ln2_hi * c,
            (Round::Down, -1) => frac_lo + ln2_hi * c,
            (Round::Up, -1) => frac_hi + ln2_lo * c,
            _ => unreachable!(),
        };
        Dyadic::new(fixed, -(w as i64)).round_to_bits(bits, dir)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_f64_dir(Round::Nearest)
    }

    /// f64 conversion with a directional guarantee (saturating; `Up` on a
    /// positive underflow yields the smallest positive subnormal so error
    /// radii are never under-reported).
    pub fn to_f64_dir(&self, dir: Round) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.round_to_bits(53, dir);
        let m = r.mantissa.to_i64().expect("53-bit mantissa fits i64") as f64;
        let v = libm_ldexp(m, r.exp);
        if v == 0.0 {
            match dir {
                Round::Up if self.is_positive() => f64::from_bits(1),
                Round::Down if self.is_negative() => -f64::from_bits(1),
                _ => 0.0,
            }
        } else {
            v
        }
    }

    pub fn cmp_val(&self, other: &Dyadic) -> Ordering {
        match (self.signum(), other.signum()) {
            (a, b) if a != b => a.cmp(&b),
            (0, 0) => Ordering::Equal,
            _ => {
                let e = self.exp.min(other.exp);
                let a = &self.mantissa << (self.exp - e) as u64;
                let b = &other.mantissa << (other.exp - e) as u64;
                a.cmp(&b)
            }
        }
    }
}

fn libm_ldexp(m: f64, e: i64) -> f64 {
    let e = e.clamp(-2200, 2200) as i32;
    // split to stay inside powi's exponent range
    if e.abs() <= 1000 {
        m * 2f64.powi(e)
    } else {
        let h = e / 2;
        m * 2f64.powi(h) * 2f64.powi(e - h)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_val(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_val(other)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({} * 2^{} ~ {})", self.mantissa, self.exp, self.to_f64())
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// atanh((m-1)/(m+1)) for fixed-point m in (1,2), scale 2^w.
/// Returns (lower bound, slack in ulps): truth lies in [lo, lo+slack]*2^-w.
fn atanh_fixed(m_fix: &BigUint, one_fix: &BigUint, w: u64) -> (BigUint, u64) {
    let num = (m_fix - one_fix) << w;
    let den = m_fix + one_fix;
    let z = num / den; // floor; z/2^w in [0, 1/3)
    if z.is_zero() {
        return (BigUint::zero(), 3);
    }
    let z2 = (&z * &z) >> w;
    let mut t = z.clone();
    let mut s = z;
    let mut slack = 5u64; // z floor propagation (|atanh'| <= 9/8) + tail
    let mut j = 1u64;
    loop {
        t = (&t * &z2) >> w;
        if t.is_zero() {
            break;
        }
        let term = &t / BigUint::from(2 * j + 1);
        if term.is_zero() {
            break;
        }
        s += term;
        slack += 3; // one ulp each: t floor, term floor, drift carry
        j += 1;
        if j > 4 * w {
            break; // unreachable for z < 1/3; defensive
        }
    }
    (s, slack)
}

/// ln 2 at fixed-point scale 2^w: truth in [lo, lo+slack]*2^-w.
fn ln2_fixed(w: u64) -> (BigUint, u64) {
    static CACHE: OnceLock<Mutex<BTreeMap<u64, (BigUint, u64)>>> = OnceLock::new();
    let w_canon = w.next_multiple_of(64);
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let (lo_c, slack_c) = {
        let mut guard = cache.lock().unwrap();
        guard
            .entry(w_canon)
            .or_insert_with(|| ln2_fixed_compute(w_canon))
            .clone()
    };
    let shift = w_canon - w;
    ((lo_c >> shift), (slack_c >> shift) + 2)
}

/// ln 2 = 2 atanh(1/3) = 2 * sum (1/3)^(2j+1) / (2j+1).
fn ln2_fixed_compute(w: u64) -> (BigUint, u64) {
    let mut t = (BigUint::one() << w) / BigUint::from(3u32);
    let mut s = t.clone();
    let mut slack = 3u64;
    let mut j = 1u64;
    loop {
        t /= BigUint::from(9u32);
        if t.is_zero() {
            break;
        }
        let term = &t / BigUint::from(2 * j + 1);
        if term.is_zero() {
            break;
        }
        s += term;
        slack += 2;
        j += 1;
    }
    (s << 1u8, 2 * slack + 2)
}
