//! Number fields Q(theta) with exact coordinate arithmetic and certified
//! embeddings.
//!
//! theta is an algebraic integer: its minimal polynomial is monic, so power
//! reduction keeps coordinates in Z. Elements are (sum coords_i theta^i) / denom
//! with integer coordinates and a positive denominator, stored in lowest
//! terms so derived equality and hashing are semantic.
//!
//! Irreducibility of the minimal polynomial is the caller's contract; the
//! constructor verifies monicity and squarefreeness but does not factor.
//! Embeddings are certified root disks, refined monotonically on demand and
//! shared behind a lock so concurrent sweeps can reuse one field.

use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::{eval_int_poly, ComplexBall, PrecisionContext, RealBall};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::intpoly::IntPoly;
use crate::roots::{isolate_roots, refine_root, select_matching_root};

#[derive(Debug)]
pub struct NumberField {
    minpoly: IntPoly,
    degree: usize,
    embeddings: Mutex<Vec<ComplexBall>>,
    real_embedding: Vec<bool>,
    primary: usize,
    ctx: PrecisionContext,
}

impl NumberField {
    /// Field defined by a monic integer polynomial, trusted irreducible.
    /// The primary embedding defaults to the smallest real root, or the
    /// first root in canonical order when no root is real.
    pub fn new(minpoly: IntPoly, ctx: &PrecisionContext) -> Result<NumberField> {
        Self::build(minpoly, None, ctx)
    }

    /// Same, selecting the primary embedding as the unique root inside
    /// `isolator` (error if zero or several roots match).
    pub fn with_isolator(
        minpoly: IntPoly,
        isolator: &ComplexBall,
        ctx: &PrecisionContext,
    ) -> Result<NumberField> {
        Self::build(minpoly, Some(isolator), ctx)
    }

    fn build(
        minpoly: IntPoly,
        isolator: Option<&ComplexBall>,
        ctx: &PrecisionContext,
    ) -> Result<NumberField> {
        let d = match minpoly.degree() {
            None | Some(0) => {
                return Err(Error::InvalidInput(
                    "field polynomial must have positive degree".into(),
                ))
            }
            Some(d) => d,
        };
        if !minpoly.lead().is_one() {
            return Err(Error::InvalidInput(format!(
                "field polynomial must be monic, got leading coefficient {}",
                minpoly.lead()
            )));
        }
        if d > 1 && minpoly.constant().is_zero() {
            return Err(Error::InvalidInput(
                "field polynomial has the root 0 and cannot be irreducible".into(),
            ));
        }
        if minpoly.squarefree_part() != minpoly.primitive() {
            return Err(Error::InvalidInput(
                "field polynomial has repeated roots".into(),
            ));
        }
        let iso = isolate_roots(&minpoly, ctx)?;
        let mut disks: Vec<ComplexBall> = Vec::with_capacity(d);
        let mut real_flags = Vec::with_capacity(d);
        for r in &iso.roots {
            disks.push(r.disk.clone());
            real_flags.push(r.is_real);
        }
        let primary = match isolator {
            None => 0, // canonical order puts the smallest real root first
            Some(target) => select_matching_root(&minpoly, &mut disks, target, ctx)?,
        };
        Ok(NumberField {
            minpoly,
            degree: d,
            embeddings: Mutex::new(disks),
            real_embedding: real_flags,
            primary,
            ctx: *ctx,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn minpoly(&self) -> &IntPoly {
        &self.minpoly
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    /// Index of the distinguished embedding.
    pub fn primary_index(&self) -> usize {
        self.primary
    }

    pub fn embedding_is_real(&self, k: usize) -> bool {
        self.real_embedding[k]
    }

    /// Certified disk for theta_k with radius at most 2^target_log2.
    /// Refinements are cached and only ever shrink.
    pub fn conjugate(&self, k: usize, target_log2: i64) -> Result<ComplexBall> {
        let mut guard = self.embeddings.lock().unwrap();
        let cur = guard[k].clone();
        if cur.radius().cmp_val(&Dyadic::pow2(target_log2)) == std::cmp::Ordering::Greater {
            guard[k] = refine_root(&self.minpoly, &cur, target_log2, &self.ctx)?;
        }
        Ok(guard[k].clone())
    }

    pub fn conjugates(&self, target_log2: i64) -> Result<Vec<ComplexBall>> {
        (0..self.degree).map(|k| self.conjugate(k, target_log2)).collect()
    }

    // element constructors

    pub fn zero(&self) -> FieldElement {
        FieldElement::new(vec![BigInt::zero(); self.degree], BigInt::one())
    }

    pub fn one(&self) -> FieldElement {
        let mut c = vec![BigInt::zero(); self.degree];
        c[0] = BigInt::one();
        FieldElement::new(c, BigInt::one())
    }

    pub fn theta(&self) -> FieldElement {
        if self.degree == 1 {
            // X + c0 monic: theta = -c0
            let mut c = vec![BigInt::zero()];
            c[0] = -self.minpoly.constant();
            return FieldElement::new(c, BigInt::one());
        }
        let mut c = vec![BigInt::zero(); self.degree];
        c[1] = BigInt::one();
        FieldElement::new(c, BigInt::one())
    }

    pub fn from_rational(&self, r: &BigRational) -> FieldElement {
        let mut c = vec![BigInt::zero(); self.degree];
        c[0] = r.numer().clone();
        FieldElement::new(c, r.denom().clone())
    }

    pub fn from_coords(&self, coords: Vec<BigInt>, denom: BigInt) -> Result<FieldElement> {
        if coords.len() != self.degree {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinates, got {}",
                self.degree,
                coords.len()
            )));
        }
        if denom.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(FieldElement::new(coords, denom))
    }

    // ring operations (exact)

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let l = a.denom.lcm(&b.denom);
        let fa = &l / &a.denom;
        let fb = &l / &b.denom;
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| x * &fa + y * &fb)
            .collect();
        FieldElement::new(coords, l)
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.add(a, &b.neg())
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let d = self.degree;
        let mut prod = vec![BigInt::zero(); 2 * d - 1];
        for (i, x) in a.coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coords.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        // monic reduction: theta^d = -(m_0 + m_1 theta + ... + m_{d-1} theta^{d-1})
        for i in (d..2 * d - 1).rev() {
            let c = std::mem::replace(&mut prod[i], BigInt::zero());
            if c.is_zero() {
                continue;
            }
            for j in 0..d {
                let m = self.minpoly.coeff(j);
                if !m.is_zero() {
                    prod[i - d + j] -= &c * m;
                }
            }
        }
        prod.truncate(d);
        FieldElement::new(prod, &a.denom * &b.denom)
    }

    pub fn mul_rational(&self, a: &FieldElement, r: &BigRational) -> FieldElement {
        FieldElement::new(
            a.coords.iter().map(|c| c * r.numer()).collect(),
            &a.denom * r.denom(),
        )
    }

    pub fn pow(&self, a: &FieldElement, mut n: u32) -> FieldElement {
        let mut base = a.clone();
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Ball containing sigma_k(x) = (sum coords_i theta_k^i) / denom.
    pub fn embed(&self, x: &FieldElement, k: usize, prec: u32) -> Result<ComplexBall> {
        let theta = self.conjugate(k, -(prec as i64 + 16))?;
        let num = eval_int_poly(&x.coords, &theta, prec + 8);
        let den = RealBall::from_ratio(&BigInt::one(), &x.denom, prec + 8);
        Ok(num.mul(&den.to_complex(), prec))
    }

    /// Embedding at the distinguished root.
    pub fn embed_primary(&self, x: &FieldElement, prec: u32) -> Result<ComplexBall> {
        self.embed(x, self.primary, prec)
    }

    /// Exact sign of x under the primary embedding: -1, 0, or 1. Rational
    /// elements are decided without embedding; irrational ones require a
    /// real primary root (a nonzero element's ball eventually excludes 0).
    pub fn sign(&self, x: &FieldElement) -> Result<i32> {
        if let Some(r) = x.to_rational() {
            return Ok(if r.is_positive() {
                1
            } else if r.is_negative() {
                -1
            } else {
                0
            });
        }
        for prec in self.ctx.ladder() {
            let b = self.embed_primary(x, prec)?.re_ball();
            if b.lo().is_positive() {
                return Ok(1);
            }
            if b.hi().is_negative() {
                return Ok(-1);
            }
        }
        Err(Error::NoConvergence {
            what: format!("sign of {}", x),
            reached: self.ctx.max_bits,
            ceiling: self.ctx.max_bits,
        })
    }

    /// |x| as a field element, the sign decided exactly.
    pub fn abs(&self, x: &FieldElement) -> Result<FieldElement> {
        Ok(if self.sign(x)? >= 0 { x.clone() } else { x.neg() })
    }

    /// Exact three-way comparison of |x| against |y|.
    pub fn cmp_abs(&self, x: &FieldElement, y: &FieldElement) -> Result<std::cmp::Ordering> {
        let ax = self.abs(x)?;
        let ay = self.abs(y)?;
        let z = self.sub(&ax, &ay);
        if z.is_zero() {
            return Ok(std::cmp::Ordering::Equal);
        }
        Ok(if self.sign(&z)? > 0 {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Less
        })
    }

    /// Enclosure of |x| under the primary embedding, refined toward radius
    /// 2^-target_bits (best effort at the precision ceiling). Exact zero for
    /// the zero element.
    pub fn abs_enclosure(&self, x: &FieldElement, target_bits: u32) -> Result<RealBall> {
        if x.is_zero() {
            return Ok(RealBall::exact(Dyadic::zero()));
        }
        let target = Dyadic::pow2(-(target_bits as i64));
        let mut best = None;
        for prec in self.ctx.ladder() {
            let b = self.embed_primary(x, prec)?.re_ball().abs_ball();
            if b.radius().cmp_val(&target) != std::cmp::Ordering::Greater {
                return Ok(b);
            }
            best = Some(b);
        }
        Ok(best.expect("precision ladder is never empty"))
    }
}

/// Element of Q(theta): (sum coords_i theta^i) / denom in lowest terms,
/// denom > 0. Equality and hashing are semantic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    coords: Vec<BigInt>,
    denom: BigInt,
}

impl FieldElement {
    fn new(coords: Vec<BigInt>, denom: BigInt) -> FieldElement {
        let mut e = FieldElement { coords, denom };
        e.reduce();
        e
    }

    fn reduce(&mut self) {
        if self.denom.is_negative() {
            self.denom = -&self.denom;
            for c in &mut self.coords {
                *c = -&*c;
            }
        }
        let mut g = self.denom.clone();
        for c in &self.coords {
            g = g.gcd(c);
            if g.is_one() {
                return;
            }
        }
        if g.is_zero() {
            // all-zero coords: canonical zero has denom 1
            self.denom = BigInt::one();
            return;
        }
        if !g.is_one() {
            self.denom = &self.denom / &g;
            for c in &mut self.coords {
                *c = &*c / &g;
            }
        }
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement {
            coords: self.coords.iter().map(|c| -c).collect(),
            denom: self.denom.clone(),
        }
    }

    pub fn is_rational(&self) -> bool {
        self.coords.iter().skip(1).all(|c| c.is_zero())
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(BigRational::new(self.coords[0].clone(), self.denom.clone()))
        } else {
            None
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let t = match i {
                0 => format!("{}", c),
                1 => format!("{}*t", c),
                _ => format!("{}*t^{}", c, i),
            };
            parts.push(t);
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        let body = parts.join(" + ").replace("+ -", "- ");
        if self.denom.is_one() {
            write!(f, "{}", body)
        } else {
            write!(f, "({})/{}", body, self.denom)
        }
    }
}

/// Polynomial with coefficients in Q(theta); index = power of X.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldPoly {
    coeffs: Vec<FieldElement>,
}

impl FieldPoly {
    pub fn new(mut coeffs: Vec<FieldElement>) -> FieldPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        FieldPoly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }
}

/// Product of the conjugate polynomials of `L f`, an integer polynomial that
/// vanishes at every root of `f`. Coefficients come from ball products of
/// certified embeddings, rounded to integers once each ball certifies a
/// unique one; sign-normalized to a positive leading coefficient.
pub fn lift_to_int_poly(f: &FieldPoly, field: &NumberField) -> Result<IntPoly> {
    if f.is_zero() {
        return Ok(IntPoly::zero());
    }
    // L: common denominator, so L*f has Z[theta] coefficients
    let mut l = BigInt::one();
    for c in f.coeffs() {
        l = l.lcm(c.denom());
    }
    // integer coordinate vectors of the coefficients of L*f
    let int_coords: Vec<Vec<BigInt>> = f
        .coeffs()
        .iter()
        .map(|c| {
            let scale = &l / c.denom();
            c.coords().iter().map(|x| x * &scale).collect()
        })
        .collect();

    if field.degree() == 1 {
        // single embedding sends theta to an integer: evaluate exactly
        let t = -field.minpoly().constant();
        let coeffs: Vec<BigInt> = int_coords
            .iter()
            .map(|v| IntPoly::new(v.clone()).eval_int(&t))
            .collect();
        return Ok(sign_normalize(IntPoly::new(coeffs)));
    }

    let d = field.degree();
    for prec in field.context().ladder() {
        let mut acc: Vec<ComplexBall> =
            vec![ComplexBall::exact(Dyadic::one(), Dyadic::zero())];
        for k in 0..d {
            let theta = field.conjugate(k, -(prec as i64 + 16))?;
            let factor: Vec<ComplexBall> = int_coords
                .iter()
                .map(|v| eval_int_poly(v, &theta, prec))
                .collect();
            acc = convolve_balls(&acc, &factor, prec);
        }
        if let Some(coeffs) = round_to_integers(&acc) {
            return Ok(sign_normalize(IntPoly::new(coeffs)));
        }
    }
    Err(Error::NoConvergence {
        what: "integer rounding of conjugate-product coefficients".into(),
        reached: field.context().max_bits,
        ceiling: field.context().max_bits,
    })
}

fn sign_normalize(f: IntPoly) -> IntPoly {
    if f.lead().is_negative() {
        f.neg()
    } else {
        f
    }
}

fn convolve_balls(a: &[ComplexBall], b: &[ComplexBall], prec: u32) -> Vec<ComplexBall> {
    let mut out = vec![ComplexBall::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let t = x.mul(y, prec);
            out[i + j] = out[i + j].add(&t, prec);
        }
    }
    out
}

/// Each ball must contain a unique integer: |re - z| + r < 1/2 and
/// |im| + r < 1/2, checked exactly.
fn round_to_integers(balls: &[ComplexBall]) -> Option<Vec<BigInt>> {
    let half = Dyadic::pow2(-1);
    let mut out = Vec::with_capacity(balls.len());
    for b in balls {
        if b.im().abs().add(b.radius()).cmp_val(&half) != std::cmp::Ordering::Less {
            return None;
        }
        let z = nearest_int(b.re());
        let err = b.re().sub(&Dyadic::from_bigint(z.clone())).abs();
        if err.add(b.radius()).cmp_val(&half) != std::cmp::Ordering::Less {
            return None;
        }
        out.push(z);
    }
    Some(out)
}

/// Nearest integer to a dyadic (ties toward +infinity; callers certify the
/// distance is below 1/2, so ties never decide anything).
fn nearest_int(x: &Dyadic) -> BigInt {
    let shifted = x.add(&Dyadic::pow2(-1));
    let e = shifted.exp();
    let m = shifted.mantissa().clone();
    if e >= 0 {
        m << e as u64
    } else {
        // floor division by 2^-e, exact for both signs
        let div = BigInt::one() << (-e) as u64;
        m.div_floor(&div)
    }
}
