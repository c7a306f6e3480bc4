//! Entropy at scale: H(X; r) = integral over t in [0,1) of H(floor(X/r + t)).
//!
//! The integrand is a step function of t. Writing y_i = x_i / r with
//! floor k_i and fractional part f_i, atom i changes bucket exactly once,
//! at t = 1 - f_i (never, when f_i = 0). Sorting those breakpoints splits
//! [0,1) into segments with a constant bucket partition, so the integral is
//! a finite sum of segment lengths times exact Shannon entropies. With
//! rational or field-exact positions every decision in the sweep is exact;
//! with inexact ball positions each decision must be certified outright or
//! the sweep reports the ambiguous pair.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::{PrecisionContext, RealBall};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::field::{FieldElement, NumberField};
use crate::ifs::atoms::CollapseMode;
use crate::ifs::IFSSpec;

use super::exact::ExactEntropy;
use super::garsia::level_n_atoms;

/// An atom position for the scale sweep.
#[derive(Debug, Clone)]
pub enum Position {
    Rational(BigRational),
    Field(FieldElement),
    Ball(RealBall),
}

/// Result of the sweep: an enclosure, plus the exact value when every
/// breakpoint and segment length is rational.
#[derive(Debug, Clone)]
pub struct ScaleEntropy {
    pub value: RealBall,
    pub exact: Option<ExactEntropy>,
    pub segments: usize,
}

/// Exact or field-exact scaled position.
enum Ex {
    Rat(BigRational),
    Fld(FieldElement),
}

struct ExOps<'a> {
    field: Option<&'a NumberField>,
    ctx: &'a PrecisionContext,
}

impl<'a> ExOps<'a> {
    fn need_field(&self) -> Result<&'a NumberField> {
        self.field.ok_or_else(|| {
            Error::InvalidInput("field-valued positions need the number field".into())
        })
    }

    fn sub(&self, a: &Ex, b: &Ex) -> Result<Ex> {
        Ok(match (a, b) {
            (Ex::Rat(x), Ex::Rat(y)) => Ex::Rat(x - y),
            _ => {
                let f = self.need_field()?;
                let xa = self.to_field(a, f);
                let xb = self.to_field(b, f);
                Ex::Fld(f.sub(&xa, &xb))
            }
        })
    }

    fn to_field(&self, a: &Ex, f: &NumberField) -> FieldElement {
        match a {
            Ex::Rat(x) => f.from_rational(x),
            Ex::Fld(x) => x.clone(),
        }
    }

    fn cmp(&self, a: &Ex, b: &Ex) -> Result<std::cmp::Ordering> {
        if let (Ex::Rat(x), Ex::Rat(y)) = (a, b) {
            return Ok(x.cmp(y));
        }
        let f = self.need_field()?;
        let d = f.sub(&self.to_field(a, f), &self.to_field(b, f));
        Ok(match f.sign(&d)? {
            s if s < 0 => std::cmp::Ordering::Less,
            0 => std::cmp::Ordering::Equal,
            _ => std::cmp::Ordering::Greater,
        })
    }

    fn ball(&self, a: &Ex, prec: u32) -> Result<RealBall> {
        Ok(match a {
            Ex::Rat(x) => RealBall::from_ratio(x.numer(), x.denom(), prec),
            Ex::Fld(x) => self.need_field()?.embed_primary(x, prec)?.re_ball(),
        })
    }

    /// Certified floor. Field positions here are irrational, so refinement
    /// separates them from every integer.
    fn floor(&self, a: &Ex) -> Result<BigInt> {
        match a {
            Ex::Rat(x) => Ok(x.floor().to_integer()),
            Ex::Fld(x) => {
                let f = self.need_field()?;
                for prec in self.ctx.ladder() {
                    let b = f.embed_primary(x, prec)?.re_ball();
                    let lo = b.lo().to_rational().floor().to_integer();
                    let hi = b.hi().to_rational().floor().to_integer();
                    if lo == hi {
                        return Ok(lo);
                    }
                }
                Err(Error::NoConvergence {
                    what: "floor of a field-valued position".into(),
                    reached: self.ctx.max_bits,
                    ceiling: self.ctx.max_bits,
                })
            }
        }
    }
}

/// -w ln w as an exact combination, for a positive rational w.
fn neg_xlnx(w: &BigRational) -> ExactEntropy {
    let den = ExactEntropy::log_integer(&w.denom().to_biguint().expect("positive"), w);
    let num = ExactEntropy::log_integer(&w.numer().to_biguint().expect("positive"), &-w.clone());
    den.add(&num)
}

fn validate_weights(weights: &[BigRational]) -> Result<()> {
    let mut total = BigRational::zero();
    for w in weights {
        if !w.is_positive() {
            return Err(Error::InvalidInput("weights must be positive".into()));
        }
        total += w;
    }
    if !total.is_one() {
        return Err(Error::InvalidInput(format!(
            "weights sum to {}, not 1",
            total
        )));
    }
    Ok(())
}

/// Entropy of X at scale r for a finite real distribution. Positions may be
/// exact rationals, elements of one real number field (pass it), or real
/// balls; r is a positive rational.
pub fn entropy_at_scale(
    atoms: &[(Position, BigRational)],
    r: &BigRational,
    field: Option<&NumberField>,
    ctx: &PrecisionContext,
) -> Result<ScaleEntropy> {
    if atoms.is_empty() {
        return Err(Error::InvalidInput("entropy of an empty distribution".into()));
    }
    if !r.is_positive() {
        return Err(Error::InvalidInput("the scale must be positive".into()));
    }
    let weights: Vec<BigRational> = atoms.iter().map(|(_, w)| w.clone()).collect();
    validate_weights(&weights)?;
    if atoms.len() == 1 {
        return Ok(ScaleEntropy {
            value: RealBall::exact(Dyadic::zero()),
            exact: Some(ExactEntropy::zero()),
            segments: 1,
        });
    }

    let ops = ExOps { field, ctx };
    let inv_r = r.recip();

    // scaled positions y = x / r, exactly where possible
    let mut exact_pos: Vec<Option<Ex>> = Vec::with_capacity(atoms.len());
    let mut any_ball = false;
    for (p, _) in atoms {
        match p {
            Position::Rational(q) => exact_pos.push(Some(Ex::Rat(q * &inv_r))),
            Position::Field(fe) => {
                if let Some(q) = fe.to_rational() {
                    exact_pos.push(Some(Ex::Rat(q * &inv_r)));
                } else {
                    let f = ops.need_field()?;
                    exact_pos.push(Some(Ex::Fld(f.mul_rational(fe, &inv_r))));
                }
            }
            Position::Ball(b) => {
                if b.is_exact() {
                    exact_pos.push(Some(Ex::Rat(b.center().to_rational() * &inv_r)));
                } else {
                    exact_pos.push(None);
                    any_ball = true;
                }
            }
        }
    }

    if any_ball {
        sweep_balls(atoms, &exact_pos, r, &weights, &ops)
    } else {
        sweep_exact(&exact_pos, &weights, &ops)
    }
}

/// Exact sweep: rational and field positions only.
fn sweep_exact(
    pos: &[Option<Ex>],
    weights: &[BigRational],
    ops: &ExOps,
) -> Result<ScaleEntropy> {
    let n = pos.len();
    let mut floors = Vec::with_capacity(n);
    let mut taus: Vec<Option<Ex>> = Vec::with_capacity(n);
    let one = Ex::Rat(BigRational::one());
    for p in pos {
        let y = p.as_ref().expect("exact sweep has exact positions");
        let k = ops.floor(y)?;
        let frac = ops.sub(y, &Ex::Rat(BigRational::from_integer(k.clone())))?;
        floors.push(k);
        // f = 0 means the atom never changes bucket on [0,1)
        let is_zero = matches!(&frac, Ex::Rat(q) if q.is_zero());
        taus.push(if is_zero {
            None
        } else {
            Some(ops.sub(&one, &frac)?)
        });
    }

    // distinct breakpoints, sorted; each atom gets the rank of its own
    let mut distinct: Vec<Ex> = Vec::new();
    let mut ranks: Vec<Option<usize>> = vec![None; n];
    for (i, t) in taus.iter().enumerate() {
        let Some(t) = t else { continue };
        let mut lo = 0usize;
        let mut hi = distinct.len();
        let mut found = None;
        while lo < hi {
            let mid = (lo + hi) / 2;
            match ops.cmp(t, &distinct[mid])? {
                std::cmp::Ordering::Less => hi = mid,
                std::cmp::Ordering::Greater => lo = mid + 1,
                std::cmp::Ordering::Equal => {
                    found = Some(mid);
                    break;
                }
            }
        }
        let idx = match found {
            Some(m) => m,
            None => {
                let cloned = match t {
                    Ex::Rat(q) => Ex::Rat(q.clone()),
                    Ex::Fld(f) => Ex::Fld(f.clone()),
                };
                distinct.insert(lo, cloned);
                // earlier atoms pointing at or past the insertion shift up
                for r in ranks.iter_mut().flatten() {
                    if *r >= lo {
                        *r += 1;
                    }
                }
                lo
            }
        };
        ranks[i] = Some(idx);
    }

    // segment lengths from the boundary chain 0, tau_0, ..., tau_{B-1}, 1
    let zero = Ex::Rat(BigRational::zero());
    let mut lens_exact: Option<Vec<BigRational>> = Some(Vec::new());
    let mut len_balls: Vec<RealBall> = Vec::new();
    let prec = ops.ctx.working_bits;
    let mut prev = &zero;
    for b in distinct.iter().chain(std::iter::once(&one)) {
        let len = ops.sub(b, prev)?;
        if let (Some(v), Ex::Rat(q)) = (&mut lens_exact, &len) {
            v.push(q.clone());
        } else {
            lens_exact = None;
        }
        len_balls.push(ops.ball(&len, prec)?);
        prev = b;
    }

    accumulate(&floors, &ranks, distinct.len(), weights, &len_balls, lens_exact, prec)
}

/// Ball sweep: every decision certified from the given enclosures, with
/// ambiguity reported rather than guessed.
fn sweep_balls(
    atoms: &[(Position, BigRational)],
    exact_pos: &[Option<Ex>],
    r: &BigRational,
    weights: &[BigRational],
    ops: &ExOps,
) -> Result<ScaleEntropy> {
    let prec = ops.ctx.working_bits;
    let n = atoms.len();
    let mut floors = Vec::with_capacity(n);
    let mut taus: Vec<Option<RealBall>> = Vec::with_capacity(n);
    let one = RealBall::exact(Dyadic::one());
    for (i, (p, _)) in atoms.iter().enumerate() {
        let y = match (&exact_pos[i], p) {
            (Some(e), _) => ops.ball(e, prec)?,
            (None, Position::Ball(b)) => {
                let rb = RealBall::from_ratio(r.numer(), r.denom(), prec + 8);
                b.div(&rb, prec)
            }
            _ => unreachable!("inexact position is a ball"),
        };
        let lo_f = y.lo().to_rational().floor();
        let hi_f = y.hi().to_rational().floor();
        if lo_f != hi_f {
            return Err(Error::AmbiguousBreakpoint(format!(
                "position {} cannot be certified into one floor cell at radius {:e}",
                i,
                y.radius_f64_up()
            )));
        }
        let k = lo_f.to_integer();
        let kb = RealBall::from_ratio(&k, &BigInt::one(), prec);
        let frac = y.sub(&kb, prec);
        floors.push(k);
        if frac.is_exact() && frac.center().is_zero() {
            taus.push(None);
        } else if !frac.excludes_zero() {
            return Err(Error::AmbiguousBreakpoint(format!(
                "position {} sits at a bucket boundary within its radius",
                i
            )));
        } else {
            taus.push(Some(one.sub(&frac, prec)));
        }
    }

    // sort by center; consecutive breakpoints must be certified apart
    let mut order: Vec<usize> = (0..n).filter(|&i| taus[i].is_some()).collect();
    order.sort_by(|&a, &b| {
        let ta = taus[a].as_ref().expect("filtered");
        let tb = taus[b].as_ref().expect("filtered");
        ta.center().cmp_val(tb.center())
    });
    let mut distinct: Vec<RealBall> = Vec::new();
    let mut ranks: Vec<Option<usize>> = vec![None; n];
    for &i in &order {
        let t = taus[i].as_ref().expect("filtered");
        if let Some(last) = distinct.last() {
            match last.certified_cmp(t) {
                Some(std::cmp::Ordering::Less) => distinct.push(t.clone()),
                _ => {
                    return Err(Error::AmbiguousBreakpoint(format!(
                        "breakpoints of atoms {} and the previous one overlap",
                        i
                    )))
                }
            }
        } else {
            distinct.push(t.clone());
        }
        ranks[i] = Some(distinct.len() - 1);
    }

    let zero = RealBall::exact(Dyadic::zero());
    let mut len_balls = Vec::with_capacity(distinct.len() + 1);
    let mut prev = &zero;
    for b in distinct.iter().chain(std::iter::once(&one)) {
        let len = b.sub(prev, prec);
        if !len.lo().is_positive() {
            return Err(Error::AmbiguousBreakpoint(
                "a breakpoint cannot be separated from the segment boundary".into(),
            ));
        }
        len_balls.push(len);
        prev = b;
    }

    accumulate(&floors, &ranks, distinct.len(), weights, &len_balls, None, prec)
}

/// Shared accumulation: walk the segments, maintaining the bucket weight map
/// and its exact entropy incrementally (one atom moves per crossing).
fn accumulate(
    floors: &[BigInt],
    ranks: &[Option<usize>],
    n_taus: usize,
    weights: &[BigRational],
    len_balls: &[RealBall],
    lens_exact: Option<Vec<BigRational>>,
    prec: u32,
) -> Result<ScaleEntropy> {
    debug_assert_eq!(len_balls.len(), n_taus + 1);
    let mut crossings: Vec<Vec<usize>> = vec![Vec::new(); n_taus];
    for (i, r) in ranks.iter().enumerate() {
        if let Some(rank) = r {
            crossings[*rank].push(i);
        }
    }

    let mut buckets: HashMap<BigInt, BigRational> = HashMap::new();
    for (i, k) in floors.iter().enumerate() {
        *buckets.entry(k.clone()).or_insert_with(BigRational::zero) += &weights[i];
    }
    let mut h_cur = ExactEntropy::zero();
    for w in buckets.values() {
        h_cur = h_cur.add(&neg_xlnx(w));
    }

    let mut total_exact = lens_exact.as_ref().map(|_| ExactEntropy::zero());
    let mut total_ball = RealBall::exact(Dyadic::zero());
    for (j, len) in len_balls.iter().enumerate() {
        if let (Some(acc), Some(lens)) = (&mut total_exact, &lens_exact) {
            *acc = acc.add(&h_cur.scale(&lens[j]));
        } else {
            total_ball = total_ball.add(&len.mul(&h_cur.eval(prec), prec), prec);
        }
        if j == n_taus {
            break;
        }
        for &i in &crossings[j] {
            let w = &weights[i];
            let old_key = floors[i].clone();
            let new_key = &floors[i] + 1;
            let old_w = buckets.remove(&old_key).expect("atom in its bucket");
            h_cur = h_cur.sub(&neg_xlnx(&old_w));
            let rem = &old_w - w;
            if rem.is_positive() {
                h_cur = h_cur.add(&neg_xlnx(&rem));
                buckets.insert(old_key, rem);
            }
            if let Some(dst) = buckets.get_mut(&new_key) {
                h_cur = h_cur.sub(&neg_xlnx(dst));
                *dst += w;
                h_cur = h_cur.add(&neg_xlnx(dst));
            } else {
                buckets.insert(new_key, w.clone());
                h_cur = h_cur.add(&neg_xlnx(w));
            }
        }
    }

    let (value, exact) = match total_exact {
        Some(acc) => (acc.eval(prec), Some(acc)),
        None => (total_ball, None),
    };
    Ok(ScaleEntropy {
        value,
        exact,
        segments: n_taus + 1,
    })
}

/// H(level-n measure; r): certified collapse for exact contraction ratios,
/// numeric collapse at tolerance 1e-12 otherwise.
pub fn level_entropy_at_scale(ifs: &IFSSpec, n: usize, r: &BigRational) -> Result<ScaleEntropy> {
    let mode = if ifs.lam().is_exact() {
        CollapseMode::Certified
    } else {
        CollapseMode::Numeric(Dyadic::from_f64(1e-12).expect("finite tolerance"))
    };
    let level = level_n_atoms(ifs, n, &mode)?;
    let atoms: Vec<(Position, BigRational)> = level
        .atoms
        .atoms
        .iter()
        .map(|a| {
            let pos = match &a.exact {
                Some(fe) => Position::Field(fe.clone()),
                None => Position::Ball(a.value.clone()),
            };
            (pos, a.prob.clone())
        })
        .collect();
    entropy_at_scale(&atoms, r, Some(ifs.field()), ifs.context())
}
