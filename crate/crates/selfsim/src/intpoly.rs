//! Integer polynomials: arithmetic, norms, gcd, squarefree decomposition.
//!
//! Coefficient index = power of X; invariant: no trailing zero coefficient
//! (the zero polynomial is the empty vector). Gcd and Yun's squarefree
//! decomposition run over the rationals internally, with results returned as
//! primitive integer polynomials with positive leading coefficient. Degrees
//! in this crate stay small (tens), so exact rational arithmetic is cheaper
//! to trust than pseudo-remainder bookkeeping.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::RealBall;
use crate::dyadic::Dyadic;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> IntPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> IntPoly {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> IntPoly {
        IntPoly { coeffs: vec![] }
    }

    pub fn one() -> IntPoly {
        IntPoly { coeffs: vec![BigInt::one()] }
    }

    pub fn x_pow(k: usize) -> IntPoly {
        let mut c = vec![BigInt::zero(); k + 1];
        c[k] = BigInt::one();
        IntPoly { coeffs: c }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn lead(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn constant(&self) -> BigInt {
        self.coeff(0)
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + other.coeff(i));
        }
        IntPoly::new(out)
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    pub fn mul_scalar(&self, k: &BigInt) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn mul_x_pow(&self, k: usize) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut c = vec![BigInt::zero(); k];
        c.extend(self.coeffs.iter().cloned());
        IntPoly { coeffs: c }
    }

    pub fn derivative(&self) -> IntPoly {
        if self.coeffs.len() <= 1 {
            return IntPoly::zero();
        }
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }

    /// Gcd of all coefficients, positive (0 for the zero polynomial).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Content-free with positive leading coefficient.
    pub fn primitive(&self) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut g = self.content();
        if self.lead().is_negative() {
            g = -g;
        }
        IntPoly { coeffs: self.coeffs.iter().map(|c| c / &g).collect() }
    }

    /// Factor out X^v: returns (v, quotient with nonzero constant term).
    pub fn strip_zero_roots(&self) -> (usize, IntPoly) {
        if self.is_zero() {
            return (0, IntPoly::zero());
        }
        let v = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        (v, IntPoly { coeffs: self.coeffs[v..].to_vec() })
    }

    pub fn l1_norm(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn linf_norm(&self) -> BigInt {
        self.coeffs
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// Certified enclosure of the Euclidean coefficient norm.
    pub fn l2_norm(&self, prec: u32) -> RealBall {
        let s: BigInt = self.coeffs.iter().map(|c| c * c).sum();
        RealBall::exact(Dyadic::from_bigint(s)).nth_root(2, prec)
    }

    /// Exact quotient if `other` divides `self` in Q[X] and the quotient has
    /// integer coefficients; None otherwise.
    pub fn div_exact(&self, other: &IntPoly) -> Option<IntPoly> {
        if other.is_zero() {
            return None;
        }
        let (q, r) = rat_divmod(&to_rat(self), &to_rat(other));
        if !r.iter().all(|c| c.is_zero()) {
            return None;
        }
        let mut out = Vec::with_capacity(q.len());
        for c in q {
            if !c.is_integer() {
                return None;
            }
            out.push(c.to_integer());
        }
        Some(IntPoly::new(out))
    }

    /// Primitive gcd with positive leading coefficient.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() {
            return other.primitive();
        }
        if other.is_zero() {
            return self.primitive();
        }
        let g = rat_gcd(to_rat(self), to_rat(other));
        rat_to_primitive_int(&g)
    }

    /// Yun decomposition: pairwise-coprime squarefree factors with their
    /// multiplicities, `self = lead_constant * prod f_i^{m_i}`. Zero roots
    /// are reported as an (X, v) entry. Factors are primitive with positive
    /// leading coefficient; constant factors are dropped.
    pub fn squarefree_decomposition(&self) -> Vec<(IntPoly, u32)> {
        assert!(!self.is_zero(), "squarefree decomposition of zero");
        let (v, f) = self.strip_zero_roots();
        let mut out: Vec<(IntPoly, u32)> = Vec::new();
        if v > 0 {
            out.push((IntPoly::x_pow(1), v as u32));
        }
        if f.degree() == Some(0) {
            return out;
        }
        // Yun over Q: b = f/gcd(f,f'), d = f'/gcd(f,f') - b'
        let fr = rat_monic(&to_rat(&f));
        let dfr = rat_derivative(&fr);
        let g = rat_gcd(fr.clone(), dfr.clone());
        let mut b = rat_divmod(&fr, &g).0;
        let mut d = rat_sub(&rat_divmod(&dfr, &g).0, &rat_derivative(&b));
        let mut mult = 1u32;
        while rat_deg(&b) >= 1 {
            let a = rat_gcd(b.clone(), d.clone());
            if rat_deg(&a) >= 1 {
                out.push((rat_to_primitive_int(&a), mult));
            }
            b = rat_divmod(&b, &a).0;
            d = rat_sub(&rat_divmod(&d, &a).0, &rat_derivative(&b));
            mult += 1;
        }
        out
    }

    /// Product of the distinct irreducible factors, each to the first power.
    pub fn squarefree_part(&self) -> IntPoly {
        let mut acc = IntPoly::one();
        for (f, _) in self.squarefree_decomposition() {
            acc = acc.mul(&f);
        }
        acc
    }

    pub fn to_coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    pub fn from_coeff_strings(strs: &[String]) -> Option<IntPoly> {
        let mut out = Vec::with_capacity(strs.len());
        for s in strs {
            out.push(s.trim().parse::<BigInt>().ok()?);
        }
        Some(IntPoly::new(out))
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{}", mag)?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{}*", mag)?;
                    }
                    if i == 1 {
                        write!(f, "X")?;
                    } else {
                        write!(f, "X^{}", i)?;
                    }
                }
            }
        }
        Ok(())
    }
}

// rational-coefficient helpers (dense Vec<BigRational>, no trailing zeros)

type RatPoly = Vec<BigRational>;

fn to_rat(p: &IntPoly) -> RatPoly {
    p.coeffs()
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect()
}

fn rat_trim(mut p: RatPoly) -> RatPoly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn rat_deg(p: &RatPoly) -> isize {
    p.len() as isize - 1
}

fn rat_sub(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let n = a.len().max(b.len());
    let zero = BigRational::zero();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(a.get(i).unwrap_or(&zero) - b.get(i).unwrap_or(&zero));
    }
    rat_trim(out)
}

fn rat_derivative(p: &RatPoly) -> RatPoly {
    if p.len() <= 1 {
        return vec![];
    }
    rat_trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
            .collect(),
    )
}

fn rat_monic(p: &RatPoly) -> RatPoly {
    match p.last() {
        None => vec![],
        Some(l) => p.iter().map(|c| c / l).collect(),
    }
}

/// Euclidean division in Q[X]: (quotient, remainder).
fn rat_divmod(a: &RatPoly, b: &RatPoly) -> (RatPoly, RatPoly) {
    let db = rat_deg(b);
    assert!(db >= 0, "division by zero polynomial");
    let mut r = a.clone();
    if rat_deg(&r) < db {
        return (vec![], rat_trim(r));
    }
    let mut q = vec![BigRational::zero(); (rat_deg(&r) - db + 1) as usize];
    let lb = b.last().unwrap().clone();
    while rat_deg(&r) >= db {
        let dr = rat_deg(&r) as usize;
        let c = r.last().unwrap() / &lb;
        let k = dr - db as usize;
        q[k] = c.clone();
        for (i, bc) in b.iter().enumerate() {
            let idx = i + k;
            let delta = &c * bc;
            r[idx] -= delta;
        }
        r = rat_trim(r);
        if r.is_empty() {
            break;
        }
    }
    (rat_trim(q), r)
}

/// Monic gcd in Q[X] (1 for coprime inputs, 0 only if both inputs are 0).
fn rat_gcd(mut a: RatPoly, mut b: RatPoly) -> RatPoly {
    a = rat_trim(a);
    b = rat_trim(b);
    while !b.is_empty() {
        let (_, r) = rat_divmod(&a, &b);
        a = b;
        b = r;
    }
    rat_monic(&a)
}

/// Clear denominators; primitive integer polynomial, positive lead.
fn rat_to_primitive_int(p: &RatPoly) -> IntPoly {
    if p.is_empty() {
        return IntPoly::zero();
    }
    let mut den = BigInt::one();
    for c in p {
        den = den.lcm(c.denom());
    }
    let d = BigRational::from_integer(den);
    IntPoly::new(p.iter().map(|c| (c * &d).to_integer()).collect()).primitive()
}
