//! Shannon entropies of rational-weight distributions, kept symbolic.
//!
//! The entropy of a rational distribution is a rational combination of
//! logarithms of integers. Stored over a pairwise-coprime base set, such a
//! combination is zero iff every coefficient is zero (a product of powers of
//! pairwise-coprime integers > 1 can only be 1 when all exponents vanish),
//! so equality of entropies and subadditivity defects are decidable exactly,
//! and a nonzero combination separates from zero at finite precision.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::{PrecisionContext, RealBall};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// A rational combination of natural logarithms of integers, in the
/// refined form sum c_b * ln(b) with bases > 1 pairwise coprime.
#[derive(Debug, Clone)]
pub struct ExactEntropy {
    /// (base, coefficient), bases pairwise coprime and > 1, coefficients
    /// nonzero, sorted by base.
    terms: Vec<(BigUint, BigRational)>,
}

impl ExactEntropy {
    pub fn zero() -> ExactEntropy {
        ExactEntropy { terms: Vec::new() }
    }

    /// c * ln(n) for an integer n >= 1.
    pub fn log_integer(n: &BigUint, c: &BigRational) -> ExactEntropy {
        let mut e = ExactEntropy::zero();
        e.insert(n.clone(), c.clone());
        e.canonicalize();
        e
    }

    /// Shannon entropy sum -p ln p of a rational probability vector.
    /// Weights must be positive and sum to 1.
    pub fn from_weights(weights: &[BigRational]) -> Result<ExactEntropy> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("entropy of an empty distribution".into()));
        }
        let mut sum = BigRational::zero();
        for w in weights {
            if !w.is_positive() {
                return Err(Error::InvalidInput(format!(
                    "entropy weight {} is not positive",
                    w
                )));
            }
            sum += w;
        }
        if !sum.is_one() {
            return Err(Error::InvalidInput(format!(
                "entropy weights sum to {}, not 1",
                sum
            )));
        }
        // group equal weights: -p ln p repeats exactly across equal atoms
        let mut groups: Vec<(&BigRational, usize)> = Vec::new();
        let mut sorted: Vec<&BigRational> = weights.iter().collect();
        sorted.sort();
        for w in sorted {
            match groups.last_mut() {
                Some((g, k)) if *g == w => *k += 1,
                _ => groups.push((w, 1)),
            }
        }
        let mut e = ExactEntropy::zero();
        for (w, k) in groups {
            // -p ln p = p ln(den) - p ln(num), repeated k times
            let c = w * BigRational::from_integer(BigInt::from(k));
            e.insert(w.denom().to_biguint().expect("positive"), c.clone());
            e.insert(w.numer().to_biguint().expect("positive"), -c);
        }
        e.canonicalize();
        Ok(e)
    }

    pub fn terms(&self) -> &[(BigUint, BigRational)] {
        &self.terms
    }

    /// Exactly zero, by coprime-base independence.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &ExactEntropy) -> ExactEntropy {
        let mut e = self.clone();
        for (b, c) in &other.terms {
            e.insert(b.clone(), c.clone());
        }
        e.canonicalize();
        e
    }

    pub fn sub(&self, other: &ExactEntropy) -> ExactEntropy {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> ExactEntropy {
        if c.is_zero() {
            return ExactEntropy::zero();
        }
        ExactEntropy {
            terms: self.terms.iter().map(|(b, k)| (b.clone(), k * c)).collect(),
        }
    }

    pub fn div_int(&self, n: usize) -> ExactEntropy {
        self.scale(&BigRational::new(BigInt::one(), BigInt::from(n)))
    }

    /// Value equality (representations over different bases compare equal
    /// when the refined difference cancels).
    pub fn same_value(&self, other: &ExactEntropy) -> bool {
        self.sub(other).is_zero()
    }

    /// Enclosure of the value.
    pub fn eval(&self, prec: u32) -> RealBall {
        let p = prec + 16;
        let mut acc = RealBall::exact(Dyadic::zero());
        for (b, c) in &self.terms {
            let lb = RealBall::exact(Dyadic::from_bigint(BigInt::from(b.clone()))).ln(p);
            let cb = RealBall::from_ratio(c.numer(), c.denom(), p);
            acc = acc.add(&lb.mul(&cb, p), p);
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        self.eval(64).to_f64()
    }

    /// Certified sign of the value: exact zero detection, then precision
    /// escalation, which terminates on any nonzero combination.
    pub fn certified_sign(&self, ctx: &PrecisionContext) -> Result<std::cmp::Ordering> {
        if self.is_zero() {
            return Ok(std::cmp::Ordering::Equal);
        }
        for prec in ctx.ladder() {
            let b = self.eval(prec);
            if b.excludes_zero() {
                return Ok(if b.lo().is_positive() {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Less
                });
            }
        }
        Err(Error::NoConvergence {
            what: "sign of an exact entropy combination".into(),
            reached: ctx.max_bits,
            ceiling: ctx.max_bits,
        })
    }

    /// Certified comparison of two exact entropies.
    pub fn certified_cmp(
        &self,
        other: &ExactEntropy,
        ctx: &PrecisionContext,
    ) -> Result<std::cmp::Ordering> {
        self.sub(other).certified_sign(ctx)
    }

    /// Add c * ln(base) and refine the base set so it stays pairwise
    /// coprime (factor refinement; no integer factorization needed).
    fn insert(&mut self, base: BigUint, coeff: BigRational) {
        let mut work = vec![(base, coeff)];
        while let Some((n, c)) = work.pop() {
            if n.is_one() || c.is_zero() {
                continue;
            }
            debug_assert!(!n.is_zero(), "logarithm of zero");
            let hit = self.terms.iter().position(|(b, _)| {
                let g = n.gcd(b);
                !g.is_one()
            });
            match hit {
                None => self.terms.push((n, c)),
                Some(i) => {
                    let (b, cb) = self.terms.swap_remove(i);
                    let g = n.gcd(&b);
                    if g == b && g == n {
                        // same base: merge coefficients
                        let merged = cb + c;
                        if !merged.is_zero() {
                            self.terms.push((b, merged));
                        }
                    } else {
                        // ln n = ln g + ln(n/g), ln b = ln g + ln(b/g);
                        // the pieces may still share factors, so requeue
                        work.push((&n / &g, c.clone()));
                        work.push((&b / &g, cb.clone()));
                        work.push((g, c + cb));
                    }
                }
            }
        }
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|(_, c)| !c.is_zero());
        // reduce perfect powers: ln(a^k) = k ln a. Coprime bases have
        // coprime roots, so this never breaks pairwise coprimality and
        // never makes two bases collide.
        for (b, c) in self.terms.iter_mut() {
            let (root, k) = power_free_root(b);
            if k > 1 {
                *b = root;
                *c *= BigRational::from_integer(BigInt::from(k));
            }
        }
        self.terms.sort_by(|a, b| a.0.cmp(&b.0));
    }
}

/// Largest k with b = a^k, returning (a, k); (b, 1) when b is power-free.
fn power_free_root(b: &BigUint) -> (BigUint, u32) {
    let bits = b.bits() as u32;
    for k in (2..=bits.max(2)).rev() {
        let root = b.nth_root(k);
        if root.pow(k) == *b {
            return (root, k);
        }
    }
    (b.clone(), 1)
}

/// Shannon entropy of a rational probability vector, exactly.
pub fn shannon(weights: &[BigRational]) -> Result<ExactEntropy> {
    ExactEntropy::from_weights(weights)
}
