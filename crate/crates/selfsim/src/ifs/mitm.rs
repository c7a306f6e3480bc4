//! Minimum word-pair distances and near-overlap search, meet-in-the-middle.
//!
//! A difference of two level-n compositions is sum d_k lam^k with each d_k
//! in the difference set, so both problems reduce to scanning the sum set
//! {A + C} where A ranges over low-half sums and C over high-half sums.
//! Tables hold exact field values when lam lies in the translation field;
//! otherwise ball values with the digit vector kept for certified re-checks.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::algebra::{certified_is_zero, Verdict};
use crate::ball::RealBall;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::field::{lift_to_int_poly, FieldElement, FieldPoly};

use super::{DifferenceSet, FamilyPolynomial, IFSSpec};

/// Resource knobs for the table enumerations.
#[derive(Debug, Clone)]
pub struct MitmParams {
    /// Maximum number of entries per half table.
    pub memory_cap: u64,
}

impl Default for MitmParams {
    fn default() -> Self {
        MitmParams {
            memory_cap: 1 << 26,
        }
    }
}

/// Minimum distance between distinct same-length word compositions.
#[derive(Debug, Clone)]
pub struct DeltaReport {
    pub n: usize,
    /// Enclosure of the minimum nonzero distance.
    pub delta: RealBall,
    /// Exact value when the computation stayed rational.
    pub delta_exact: Option<BigRational>,
    /// A word pair attaining the minimum (0-based letters).
    pub witness: Option<(Vec<u32>, Vec<u32>)>,
    /// Number of distinct word pairs at distance exactly zero (overlaps),
    /// excluded from the minimum.
    pub overlap_word_pairs: u128,
    pub overlap_example: Option<(Vec<u32>, Vec<u32>)>,
    /// False only when lam is numeric and zero-distance candidates could not
    /// be decided; such pairs are counted in unresolved_pairs and skipped.
    pub certified: bool,
    pub unresolved_pairs: u64,
}

#[derive(Debug, Clone)]
struct HalfMeta {
    digits: Vec<u32>,
    count: u128,
    zero_vec: bool,
}

#[derive(Debug, Clone)]
struct Entry {
    ball: RealBall,
    exact: Option<FieldElement>,
    meta: HalfMeta,
}

/// Values sum_{k} d_{digits[k]} lam^(start+k), exact when possible.
fn build_half_table(
    ifs: &IFSSpec,
    dset: &DifferenceSet,
    start: usize,
    len: usize,
    merge: bool,
    cap: u64,
    prec: u32,
) -> Result<Vec<Entry>> {
    let field = ifs.field();
    let exact_mode = ifs.lam_in_field().is_some();
    let needed = (dset.len() as u128).saturating_pow(len as u32);
    if !merge && needed > cap as u128 {
        return Err(Error::MemoryBudget {
            what: format!("half table of {} positions over {} differences", len, dset.len()),
            needed,
            cap,
        });
    }

    // per-position addends: d * lam^(start+k)
    let lam_ball = ifs.lambda_ball(prec + 16)?;
    let mut addend_balls: Vec<Vec<RealBall>> = Vec::with_capacity(len);
    let mut addend_exact: Vec<Vec<FieldElement>> = Vec::with_capacity(len);
    for k in 0..len {
        let pw = lam_ball.pow_u((start + k) as u32, prec + 16);
        let mut balls = Vec::with_capacity(dset.len());
        for e in dset.elements() {
            let eb = field.embed_primary(e, prec + 16)?.re_ball();
            balls.push(eb.mul(&pw, prec + 8));
        }
        addend_balls.push(balls);
        if exact_mode {
            let lf = ifs.lam_in_field().unwrap();
            let lam_pow = field.pow(lf, (start + k) as u32);
            addend_exact.push(
                dset.elements()
                    .iter()
                    .map(|e| field.mul(e, &lam_pow))
                    .collect(),
            );
        }
    }

    let zero_idx = dset.zero_index() as u32;
    if exact_mode && merge {
        let mut table: HashMap<FieldElement, (RealBall, HalfMeta)> = HashMap::new();
        table.insert(
            field.zero(),
            (
                RealBall::exact(Dyadic::zero()),
                HalfMeta {
                    digits: Vec::new(),
                    count: 1,
                    zero_vec: true,
                },
            ),
        );
        for k in 0..len {
            let mut next: HashMap<FieldElement, (RealBall, HalfMeta)> =
                HashMap::with_capacity(table.len() * dset.len());
            for (val, (ball, meta)) in &table {
                for (di, ax) in addend_exact[k].iter().enumerate() {
                    let nv = field.add(val, ax);
                    let nb = ball.add(&addend_balls[k][di], prec + 8);
                    let mut digits = meta.digits.clone();
                    digits.push(di as u32);
                    let zero_vec = meta.zero_vec && di as u32 == zero_idx;
                    match next.get_mut(&nv) {
                        None => {
                            next.insert(
                                nv,
                                (
                                    nb,
                                    HalfMeta {
                                        digits,
                                        count: meta.count,
                                        zero_vec,
                                    },
                                ),
                            );
                        }
                        Some((b0, m0)) => {
                            m0.count = m0.count.saturating_add(meta.count);
                            m0.zero_vec |= zero_vec;
                            if digits < m0.digits {
                                m0.digits = digits;
                            }
                            *b0 = b0.union(&nb);
                        }
                    }
                }
            }
            if next.len() as u128 > cap as u128 {
                return Err(Error::MemoryBudget {
                    what: format!("half table at position {} of {}", k + 1, len),
                    needed: next.len() as u128,
                    cap,
                });
            }
            table = next;
        }
        let mut out: Vec<Entry> = table
            .into_iter()
            .map(|(val, (ball, meta))| Entry {
                ball,
                exact: Some(val),
                meta,
            })
            .collect();
        sort_entries(&mut out);
        Ok(out)
    } else {
        // full enumeration, one entry per digit vector
        let mut table: Vec<Entry> = vec![Entry {
            ball: RealBall::exact(Dyadic::zero()),
            exact: if exact_mode { Some(field.zero()) } else { None },
            meta: HalfMeta {
                digits: Vec::new(),
                count: 1,
                zero_vec: true,
            },
        }];
        for k in 0..len {
            let mut next = Vec::with_capacity(table.len() * dset.len());
            for e in &table {
                for di in 0..dset.len() {
                    let mut digits = e.meta.digits.clone();
                    digits.push(di as u32);
                    next.push(Entry {
                        ball: e.ball.add(&addend_balls[k][di], prec + 8),
                        exact: e
                            .exact
                            .as_ref()
                            .map(|v| field.add(v, &addend_exact[k][di])),
                        meta: HalfMeta {
                            digits,
                            count: 1,
                            zero_vec: e.meta.zero_vec && di as u32 == zero_idx,
                        },
                    });
                }
            }
            if next.len() as u128 > cap as u128 {
                return Err(Error::MemoryBudget {
                    what: format!("half table at position {} of {}", k + 1, len),
                    needed: needed.max(next.len() as u128),
                    cap,
                });
            }
            table = next;
        }
        sort_entries(&mut table);
        Ok(table)
    }
}

fn sort_entries(t: &mut [Entry]) {
    t.sort_by(|a, b| {
        a.ball
            .center()
            .cmp_val(b.ball.center())
            .then_with(|| a.meta.digits.cmp(&b.meta.digits))
    });
}

fn max_radius(t: &[Entry]) -> Dyadic {
    let mut m = Dyadic::zero();
    for e in t {
        if e.ball.radius().cmp_val(&m) == Ordering::Greater {
            m = e.ball.radius().clone();
        }
    }
    m
}

/// Words realizing a difference digit vector, built from representative
/// translation pairs. When the vector is all-zero (possible only with
/// duplicated translations) a duplicated pair is used at position 0.
fn words_from_digits(ifs: &IFSSpec, dset: &DifferenceSet, digits: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let mut w1 = Vec::with_capacity(digits.len());
    let mut w2 = Vec::with_capacity(digits.len());
    for &d in digits {
        let (i, j) = dset.rep(d as usize);
        w1.push(i as u32);
        w2.push(j as u32);
    }
    if w1 == w2 {
        // all-zero vector: find a duplicated translation pair
        let t = ifs.translations();
        'outer: for i in 0..t.len() {
            for j in (i + 1)..t.len() {
                if ifs.field().sub(&t[i], &t[j]).is_zero() {
                    w1[0] = i as u32;
                    w2[0] = j as u32;
                    break 'outer;
                }
            }
        }
    }
    (w1, w2)
}

/// P(lam) = 0 decided exactly for a difference digit vector (requires exact
/// lam; in-field values decide by coordinates, otherwise the lifted integer
/// polynomial goes through the certified zero test).
pub(crate) fn dvec_is_zero(ifs: &IFSSpec, dset: &DifferenceSet, digits: &[u32]) -> Result<bool> {
    let field = ifs.field();
    if let Some(lf) = ifs.lam_in_field() {
        let mut acc = field.zero();
        let mut pw = field.one();
        for &d in digits {
            acc = field.add(&acc, &field.mul(&dset.elements()[d as usize], &pw));
            pw = field.mul(&pw, lf);
        }
        return Ok(acc.is_zero());
    }
    let lam = ifs.lam().as_algebraic().ok_or_else(|| {
        Error::InvalidInput("exact zero decisions require an exact contraction".into())
    })?;
    let coeffs: Vec<FieldElement> = digits
        .iter()
        .map(|&d| dset.elements()[d as usize].clone())
        .collect();
    let poly = FieldPoly::new(coeffs);
    if poly.is_zero() {
        return Ok(true);
    }
    let lifted = lift_to_int_poly(&poly, field)?;
    certified_is_zero(&lifted, lam)
}

/// Ball value of a difference digit vector at the given precision.
pub(crate) fn dvec_ball(ifs: &IFSSpec, dset: &DifferenceSet, digits: &[u32], prec: u32) -> Result<RealBall> {
    let field = ifs.field();
    let lam = ifs.lambda_ball(prec + 16)?;
    let mut acc = RealBall::exact(Dyadic::zero());
    for &d in digits.iter().rev() {
        let eb = field.embed_primary(&dset.elements()[d as usize], prec + 16)?.re_ball();
        acc = acc.mul(&lam, prec + 8).add(&eb, prec + 8);
    }
    Ok(acc)
}

/// Minimum distance between distinct same-length word compositions at level
/// n. Zero-distance pairs (exact overlaps) are excluded from the minimum and
/// reported on the side.
pub fn delta_n(ifs: &IFSSpec, n: usize, params: &MitmParams) -> Result<DeltaReport> {
    if n == 0 {
        return Err(Error::InvalidInput("delta_n needs n >= 1".into()));
    }
    let dset = ifs.difference_set()?;
    if dset.len() == 1 && !dset.dup_translations() {
        return Err(Error::InvalidInput(
            "the minimum over distinct word pairs is empty for a single map".into(),
        ));
    }
    let field = ifs.field();
    let prec = ifs.context().working_bits;
    let h = n.div_ceil(2);
    let low = build_half_table(ifs, &dset, 0, h, true, params.memory_cap, prec)?;
    let high = build_half_table(ifs, &dset, h, n - h, true, params.memory_cap, prec)?;
    let exact_mode = ifs.lam_in_field().is_some();
    let slack = max_radius(&low).add(&max_radius(&high)).mul_i64(2);

    let mut overlap_word_pairs: u128 = 0;
    let mut overlap_example: Option<(Vec<u32>, Vec<u32>)> = None;
    let mut unresolved: u64 = 0;

    // candidates for the minimum: (combined digits, exact sum)
    let mut best_exact: Option<FieldElement> = None;
    let mut best_digits: Vec<Vec<u32>> = Vec::new(); // ball mode may hold ties
    let mut best_hi: Option<Dyadic> = None;

    let centers: Vec<&Dyadic> = high.iter().map(|e| e.ball.center()).collect();
    for a in &low {
        let target = a.ball.center().neg();
        let width = match &best_hi {
            Some(b) => b.add(&slack),
            None => Dyadic::pow2(4000), // effectively unbounded until seeded
        };
        let lo_bound = target.sub(&width);
        let hi_bound = target.add(&width);
        let start = centers.partition_point(|c| c.cmp_val(&lo_bound) == Ordering::Less);
        for c in &high[start..] {
            if c.ball.center().cmp_val(&hi_bound) == Ordering::Greater {
                break;
            }
            let sum_ball = a.ball.add(&c.ball, prec + 8);
            let combined = || {
                let mut d = a.meta.digits.clone();
                d.extend_from_slice(&c.meta.digits);
                d
            };
            if exact_mode {
                let s = field.add(a.exact.as_ref().unwrap(), c.exact.as_ref().unwrap());
                if s.is_zero() {
                    let both_zero_only =
                        a.meta.zero_vec && a.meta.count == 1 && c.meta.zero_vec && c.meta.count == 1;
                    let mut pairs = a.meta.count.saturating_mul(c.meta.count);
                    if both_zero_only && !dset.dup_translations() {
                        continue; // only the trivial equal-word pairing
                    }
                    if a.meta.zero_vec && c.meta.zero_vec && !dset.dup_translations() {
                        pairs = pairs.saturating_sub(1);
                    }
                    overlap_word_pairs = overlap_word_pairs.saturating_add(pairs);
                    if overlap_example.is_none() {
                        let digits = combined();
                        // prefer a nonzero position for a valid distinct-word witness
                        let w = words_from_digits(ifs, &dset, &digits);
                        if w.0 != w.1 {
                            overlap_example = Some(w);
                        }
                    }
                    continue;
                }
                let better = match &best_exact {
                    None => true,
                    Some(b) => {
                        // cheap ball rejection first
                        let reject = match &best_hi {
                            Some(bh) => {
                                sum_ball.abs_ball().lo().cmp_val(bh) == Ordering::Greater
                            }
                            None => false,
                        };
                        if reject {
                            false
                        } else {
                            field.cmp_abs(&s, b)? == Ordering::Less
                        }
                    }
                };
                if better {
                    best_hi = Some(field.abs_enclosure(&s, prec)?.hi());
                    best_exact = Some(s);
                    best_digits = vec![combined()];
                }
            } else {
                // ball mode: zero-or-tiny candidates need a decision
                if sum_ball.contains_zero() {
                    if ifs.lam().is_exact() {
                        let digits = combined();
                        if dvec_is_zero(ifs, &dset, &digits)? {
                            overlap_word_pairs = overlap_word_pairs.saturating_add(1);
                            if overlap_example.is_none() {
                                let w = words_from_digits(ifs, &dset, &digits);
                                if w.0 != w.1 {
                                    overlap_example = Some(w);
                                }
                            }
                            continue;
                        }
                        // nonzero: sharpen until the ball shows it
                        let mut p = prec * 2;
                        let mut vb = sum_ball.clone();
                        while vb.contains_zero() {
                            if p > ifs.context().max_bits {
                                return Err(Error::NoConvergence {
                                    what: "separating a certified-nonzero distance from zero".into(),
                                    reached: p / 2,
                                    ceiling: ifs.context().max_bits,
                                });
                            }
                            vb = dvec_ball(ifs, &dset, &digits, p)?;
                            p *= 2;
                        }
                        consider_ball_candidate(&mut best_hi, &mut best_digits, vb, digits, &slack);
                        continue;
                    } else {
                        unresolved += 1;
                        continue;
                    }
                }
                consider_ball_candidate(
                    &mut best_hi,
                    &mut best_digits,
                    sum_ball.abs_ball(),
                    combined(),
                    &slack,
                );
            }
        }
    }

    let certified = exact_mode || ifs.lam().is_exact();
    match (best_exact, best_digits.first()) {
        (Some(s), _) => {
            let delta = field.abs_enclosure(&s, prec)?;
            let delta_exact = field.abs(&s)?.to_rational();
            let digits = best_digits.first().cloned().unwrap_or_default();
            let witness = Some(words_from_digits(ifs, &dset, &digits));
            Ok(DeltaReport {
                n,
                delta,
                delta_exact,
                witness,
                overlap_word_pairs,
                overlap_example,
                certified,
                unresolved_pairs: unresolved,
            })
        }
        (None, Some(_)) => {
            // ball mode: sharpen all surviving tied candidates and report the union
            let mut enclosure: Option<RealBall> = None;
            let mut winner: Option<Vec<u32>> = None;
            let p = (prec * 2).min(ifs.context().max_bits);
            for digits in &best_digits {
                let vb = if ifs.lam().is_exact() {
                    dvec_ball(ifs, &dset, digits, p)?.abs_ball()
                } else {
                    dvec_ball(ifs, &dset, digits, prec)?.abs_ball()
                };
                match (&mut enclosure, &winner) {
                    (None, _) => {
                        enclosure = Some(vb);
                        winner = Some(digits.clone());
                    }
                    (Some(e), Some(w)) => {
                        if vb.hi().cmp_val(&e.lo()) == Ordering::Less {
                            *e = vb;
                            winner = Some(digits.clone());
                        } else {
                            *e = e.union(&vb);
                            if digits < w {
                                winner = Some(digits.clone());
                            }
                        }
                    }
                    _ => unreachable!(),
                }
            }
            let digits = winner.unwrap();
            Ok(DeltaReport {
                n,
                delta: enclosure.unwrap(),
                delta_exact: None,
                witness: Some(words_from_digits(ifs, &dset, &digits)),
                overlap_word_pairs,
                overlap_example,
                certified,
                unresolved_pairs: unresolved,
            })
        }
        (None, None) => Err(Error::InvalidInput(
            "no nonzero word-pair difference exists at this level".into(),
        )),
    }
}

fn consider_ball_candidate(
    best_hi: &mut Option<Dyadic>,
    best_digits: &mut Vec<Vec<u32>>,
    abs_ball: RealBall,
    digits: Vec<u32>,
    slack: &Dyadic,
) {
    let hi = abs_ball.hi();
    match best_hi {
        None => {
            *best_hi = Some(hi);
            best_digits.push(digits);
        }
        Some(bh) => {
            if hi.cmp_val(bh) == Ordering::Less {
                *bh = hi;
                // drop ties that are now certainly worse
                // (cheap filter; final resolution re-evaluates)
                best_digits.push(digits);
                if best_digits.len() > 64 {
                    best_digits.drain(0..best_digits.len() - 64);
                }
            } else if abs_ball.lo().cmp_val(&bh.add(slack)) != Ordering::Greater {
                best_digits.push(digits);
                if best_digits.len() > 64 {
                    best_digits.drain(0..best_digits.len() - 64);
                }
            }
        }
    }
}

/// Per-level verdicts of delta_n >= c^n.
#[derive(Debug, Clone)]
pub struct ProbeRow {
    pub n: usize,
    pub delta: RealBall,
    pub threshold: BigRational,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub c: BigRational,
    pub rows: Vec<ProbeRow>,
    /// Levels with a certified delta_n >= c^n.
    pub holding: Vec<usize>,
}

pub fn exp_separation_probe(
    ifs: &IFSSpec,
    c: &BigRational,
    n_max: usize,
    params: &MitmParams,
) -> Result<ProbeReport> {
    if !c.is_positive() || *c >= BigRational::one() {
        return Err(Error::InvalidInput("the separation base must lie in (0, 1)".into()));
    }
    let mut rows = Vec::with_capacity(n_max);
    let mut holding = Vec::new();
    let mut cn = BigRational::one();
    for n in 1..=n_max {
        cn *= c;
        let rep = delta_n(ifs, n, params)?;
        let verdict = match &rep.delta_exact {
            Some(d) => {
                if *d >= cn {
                    Verdict::Holds
                } else {
                    Verdict::Violated
                }
            }
            None => {
                let t = RealBall::from_ratio(cn.numer(), cn.denom(), 128);
                if rep.delta.lo().cmp_val(&t.hi()) != Ordering::Less {
                    Verdict::Holds
                } else if rep.delta.hi().cmp_val(&t.lo()) == Ordering::Less {
                    Verdict::Violated
                } else {
                    Verdict::Unknown
                }
            }
        };
        if verdict == Verdict::Holds {
            holding.push(n);
        }
        rows.push(ProbeRow {
            n,
            delta: rep.delta,
            threshold: cn.clone(),
            verdict,
        });
    }
    Ok(ProbeReport {
        c: c.clone(),
        rows,
        holding,
    })
}

/// One family polynomial with |P(lam)| at most the search radius.
#[derive(Debug, Clone)]
pub struct NearHit {
    pub poly: FamilyPolynomial,
    /// Enclosure of |P(lam)|.
    pub value: RealBall,
    pub certified_zero: bool,
    /// Could not be certified on either side of the radius at the precision
    /// ceiling (kept for completeness).
    pub ambiguous: bool,
}

#[derive(Debug, Clone)]
pub struct NearOverlapReport {
    pub n: usize,
    pub radius: BigRational,
    /// Sorted by |value| upper bound, then digits; the first is the minimizer.
    pub hits: Vec<NearHit>,
}

/// All nonzero polynomials of degree <= n with coefficients in the
/// difference set whose value at lam has modulus at most r.
pub fn near_overlap_search(
    ifs: &IFSSpec,
    n: usize,
    r: &BigRational,
    params: &MitmParams,
) -> Result<NearOverlapReport> {
    if r.is_negative() {
        return Err(Error::InvalidInput("the search radius must be nonnegative".into()));
    }
    let dset = ifs.difference_set()?;
    let field = ifs.field();
    let prec = ifs.context().working_bits;
    // coefficient positions 0..=n; low half 0..=floor(n/2)
    let hl = n / 2 + 1;
    let low = build_half_table(ifs, &dset, 0, hl, false, params.memory_cap, prec)?;
    let high = build_half_table(ifs, &dset, hl, n + 1 - hl, false, params.memory_cap, prec)?;
    let exact_mode = ifs.lam_in_field().is_some();
    let r_ball = RealBall::from_ratio(r.numer(), r.denom(), 128);
    let slack = max_radius(&low)
        .add(&max_radius(&high))
        .mul_i64(4)
        .add(&r_ball.hi());

    let mut hits: Vec<NearHit> = Vec::new();
    let centers: Vec<&Dyadic> = high.iter().map(|e| e.ball.center()).collect();
    for a in &low {
        let target = a.ball.center().neg();
        let lo_bound = target.sub(&slack);
        let hi_bound = target.add(&slack);
        let start = centers.partition_point(|c| c.cmp_val(&lo_bound) == Ordering::Less);
        for c in &high[start..] {
            if c.ball.center().cmp_val(&hi_bound) == Ordering::Greater {
                break;
            }
            if a.meta.zero_vec && c.meta.zero_vec {
                continue; // the zero polynomial
            }
            let mut digits = a.meta.digits.clone();
            digits.extend_from_slice(&c.meta.digits);
            if exact_mode {
                let s = field.add(a.exact.as_ref().unwrap(), c.exact.as_ref().unwrap());
                if s.is_zero() {
                    hits.push(NearHit {
                        poly: FamilyPolynomial::new(digits),
                        value: RealBall::exact(Dyadic::zero()),
                        certified_zero: true,
                        ambiguous: false,
                    });
                    continue;
                }
                let av = field.abs(&s)?;
                let z = field.sub(&av, &field.from_rational(r));
                let inside = z.is_zero() || field.sign(&z)? < 0;
                if inside {
                    hits.push(NearHit {
                        poly: FamilyPolynomial::new(digits),
                        value: field.abs_enclosure(&s, prec)?,
                        certified_zero: false,
                        ambiguous: false,
                    });
                }
            } else {
                let sum = a.ball.add(&c.ball, prec + 8).abs_ball();
                if sum.lo().cmp_val(&r_ball.hi()) == Ordering::Greater {
                    continue; // certainly outside
                }
                // escalate until decided, certifying zeros when lam is exact
                let mut p = prec;
                let mut vb = sum;
                let decided = loop {
                    if vb.hi().cmp_val(&r_ball.lo()) != Ordering::Greater {
                        break Some((vb.clone(), false));
                    }
                    if vb.lo().cmp_val(&r_ball.hi()) == Ordering::Greater {
                        break None;
                    }
                    if vb.contains_zero() && ifs.lam().is_exact() {
                        if dvec_is_zero(ifs, &dset, &digits)? {
                            break Some((RealBall::exact(Dyadic::zero()), true));
                        }
                    }
                    if p >= ifs.context().max_bits || !ifs.lam().is_exact() {
                        hits.push(NearHit {
                            poly: FamilyPolynomial::new(digits.clone()),
                            value: vb.clone(),
                            certified_zero: false,
                            ambiguous: true,
                        });
                        break None;
                    }
                    p = (p * 2).min(ifs.context().max_bits);
                    vb = dvec_ball(ifs, &dset, &digits, p)?.abs_ball();
                };
                if let Some((vb, is_zero)) = decided {
                    hits.push(NearHit {
                        poly: FamilyPolynomial::new(digits),
                        value: vb,
                        certified_zero: is_zero,
                        ambiguous: false,
                    });
                }
            }
        }
    }
    hits.sort_by(|x, y| {
        x.value
            .hi()
            .cmp_val(&y.value.hi())
            .then_with(|| x.poly.coeff_indices.cmp(&y.poly.coeff_indices))
    });
    Ok(NearOverlapReport {
        n,
        radius: r.clone(),
        hits,
    })
}

/// Exhaustive reference for delta_n (oracle for small n).
pub fn delta_n_exhaustive(ifs: &IFSSpec, n: usize) -> Result<DeltaReport> {
    let dset = ifs.difference_set()?;
    let field = ifs.field();
    if ifs.lam_in_field().is_none() {
        return Err(Error::InvalidInput(
            "the exhaustive reference runs on in-field contractions only".into(),
        ));
    }
    let lf = ifs.lam_in_field().unwrap();
    let prec = ifs.context().working_bits;

    // powers of lam
    let mut pows = vec![field.one()];
    for _ in 1..n {
        let last = pows.last().unwrap().clone();
        pows.push(field.mul(&last, lf));
    }

    let mut best: Option<(FieldElement, Vec<u32>)> = None;
    let mut overlap_word_pairs: u128 = 0;
    let mut overlap_example = None;
    let mut digits = vec![0u32; n];
    let zero_idx = dset.zero_index() as u32;
    loop {
        if !digits.iter().all(|&d| d == zero_idx) || dset.dup_translations() {
            let mut s = field.zero();
            for (k, &d) in digits.iter().enumerate() {
                s = field.add(&s, &field.mul(&dset.elements()[d as usize], &pows[k]));
            }
            let all_zero_digits = digits.iter().all(|&d| d == zero_idx);
            if s.is_zero() {
                if !all_zero_digits || dset.dup_translations() {
                    overlap_word_pairs += 1;
                    if overlap_example.is_none() {
                        let w = words_from_digits(ifs, &dset, &digits);
                        if w.0 != w.1 {
                            overlap_example = Some(w);
                        }
                    }
                }
            } else {
                let better = match &best {
                    None => true,
                    Some((b, _)) => field.cmp_abs(&s, b)? == Ordering::Less,
                };
                if better {
                    best = Some((s, digits.clone()));
                }
            }
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == n {
                let (s, d) = best.ok_or_else(|| {
                    Error::InvalidInput("no nonzero difference at this level".into())
                })?;
                let delta = field.abs_enclosure(&s, prec)?;
                let delta_exact = field.abs(&s)?.to_rational();
                return Ok(DeltaReport {
                    n,
                    delta,
                    delta_exact,
                    witness: Some(words_from_digits(ifs, &dset, &d)),
                    overlap_word_pairs,
                    overlap_example,
                    certified: true,
                    unresolved_pairs: 0,
                });
            }
            digits[pos] += 1;
            if (digits[pos] as usize) < dset.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::PrecisionContext;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn golden_ifs() -> IFSSpec {
        IFSSpec::from_json(crate::ifs::tests::golden_json(), &ctx()).unwrap()
    }

    fn dyadic_ifs() -> IFSSpec {
        IFSSpec::from_json(crate::ifs::tests::dyadic_json(), &ctx()).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn dyadic_delta_is_two_to_one_minus_n() {
        let ifs = dyadic_ifs();
        for n in 1..=12 {
            let rep = delta_n(&ifs, n, &MitmParams::default()).unwrap();
            assert_eq!(rep.delta_exact.as_ref().unwrap(), &rat(2, 1 << n), "n = {}", n);
            assert_eq!(rep.overlap_word_pairs, 0);
            assert!(rep.certified);
        }
    }

    #[test]
    fn dyadic_delta_n3_quarter_with_witness() {
        let ifs = dyadic_ifs();
        let rep = delta_n(&ifs, 3, &MitmParams::default()).unwrap();
        assert_eq!(rep.delta_exact.unwrap(), rat(1, 4));
        let (w1, w2) = rep.witness.unwrap();
        assert_ne!(w1, w2);
        // the witness words really are at distance 1/4
        let a = crate::ifs::compose_word(&ifs, &w1.iter().map(|&x| x as usize).collect::<Vec<_>>())
            .unwrap();
        let b = crate::ifs::compose_word(&ifs, &w2.iter().map(|&x| x as usize).collect::<Vec<_>>())
            .unwrap();
        let d = a.value.sub(&b.value, 96).abs_ball();
        assert!(d.contains(&Dyadic::from_f64(0.25).unwrap()));
    }

    #[test]
    fn mitm_matches_exhaustive_oracle() {
        let ifs = dyadic_ifs();
        for n in 1..=8 {
            let a = delta_n(&ifs, n, &MitmParams::default()).unwrap();
            let b = delta_n_exhaustive(&ifs, n).unwrap();
            assert_eq!(a.delta_exact, b.delta_exact, "n = {}", n);
            assert_eq!(a.overlap_word_pairs, b.overlap_word_pairs);
        }
        let ifs = golden_ifs();
        for n in 1..=6 {
            let a = delta_n(&ifs, n, &MitmParams::default()).unwrap();
            let b = delta_n_exhaustive(&ifs, n).unwrap();
            // both enclose the same exact value
            assert!(a.delta.intersects(&b.delta), "n = {}", n);
            assert!((a.overlap_word_pairs > 0) == (b.overlap_word_pairs > 0));
        }
    }

    #[test]
    fn golden_delta3_excludes_overlap_and_is_g_cubed() {
        let ifs = golden_ifs();
        let rep = delta_n(&ifs, 3, &MitmParams::default()).unwrap();
        assert!(rep.overlap_word_pairs > 0);
        let (w1, w2) = rep.overlap_example.unwrap();
        assert_ne!(w1, w2);
        // min nonzero distance at level 3 is g^3 = 2g - 1 = 0.23606...
        let g3 = 0.2360679774997896_f64;
        assert!((rep.delta.to_f64() - g3).abs() < 1e-9);
        assert!(rep.certified);
    }

    #[test]
    fn overlap_detection_consistency_with_delta() {
        // the level where overlaps first appear is where delta_n first
        // reports excluded zero pairs
        let ifs = golden_ifs();
        let first_overlap = crate::ifs::atoms::detect_exact_overlaps(&ifs, 5)
            .unwrap()
            .unwrap()
            .n;
        for n in 1..=5 {
            let rep = delta_n(&ifs, n, &MitmParams::default()).unwrap();
            assert_eq!(
                rep.overlap_word_pairs > 0,
                n >= first_overlap,
                "n = {}",
                n
            );
        }
    }

    #[test]
    fn memory_cap_triggers() {
        let ifs = dyadic_ifs();
        let params = MitmParams { memory_cap: 10 };
        match delta_n(&ifs, 20, &params) {
            Err(Error::MemoryBudget { cap, .. }) => assert_eq!(cap, 10),
            other => panic!("expected MemoryBudget, got {:?}", other.map(|r| r.delta)),
        }
    }

    #[test]
    fn probe_dyadic_c04_all_hold() {
        let ifs = dyadic_ifs();
        let rep = exp_separation_probe(&ifs, &rat(2, 5), 10, &MitmParams::default()).unwrap();
        assert_eq!(rep.holding, (1..=10).collect::<Vec<_>>());
        assert!(rep.rows.iter().all(|r| r.verdict == Verdict::Holds));
    }

    #[test]
    fn probe_dyadic_c06_fails_from_four() {
        let ifs = dyadic_ifs();
        let rep = exp_separation_probe(&ifs, &rat(3, 5), 10, &MitmParams::default()).unwrap();
        assert_eq!(rep.holding, vec![1, 2, 3]);
        for r in &rep.rows {
            let expect = if r.n <= 3 { Verdict::Holds } else { Verdict::Violated };
            assert_eq!(r.verdict, expect, "n = {}", r.n);
        }
    }

    #[test]
    fn near_overlap_dyadic_examples() {
        let ifs = dyadic_ifs();
        // n=2, r=0.3: includes 1 - X - X^2 with value 1/4
        let rep = near_overlap_search(&ifs, 2, &rat(3, 10), &MitmParams::default()).unwrap();
        let dset = ifs.difference_set().unwrap();
        let target: Vec<String> = vec!["1".into(), "-1".into(), "-1".into()];
        let hit = rep
            .hits
            .iter()
            .find(|h| h.poly.coeff_strings(&dset) == target)
            .expect("1 - X - X^2 is a hit");
        assert!(hit.value.contains(&Dyadic::from_f64(0.25).unwrap()));
        assert!(!hit.certified_zero);
        // no polynomial gets below 1/4, so a smaller radius finds nothing
        let rep = near_overlap_search(&ifs, 2, &rat(1, 100), &MitmParams::default()).unwrap();
        assert!(rep.hits.is_empty());
    }

    #[test]
    fn near_overlap_golden_finds_vanishing_polynomials() {
        let ifs = golden_ifs();
        // r = 0: exactly the family polynomials vanishing at g, which are
        // +-(1 - X - X^2)
        let rep = near_overlap_search(&ifs, 2, &rat(0, 1), &MitmParams::default()).unwrap();
        assert_eq!(rep.hits.len(), 2);
        assert!(rep.hits.iter().all(|h| h.certified_zero));
        let dset = ifs.difference_set().unwrap();
        let strs: Vec<Vec<String>> = rep
            .hits
            .iter()
            .map(|h| h.poly.coeff_strings(&dset))
            .collect();
        assert!(strs.contains(&vec!["1".into(), "-1".into(), "-1".into()]));
        assert!(strs.contains(&vec!["-1".into(), "1".into(), "1".into()]));
        // any positive radius keeps them as zero-value minimizers
        let rep = near_overlap_search(&ifs, 2, &rat(1, 10), &MitmParams::default()).unwrap();
        assert!(rep.hits[0].certified_zero);
    }

    #[test]
    fn ball_path_delta_agrees_with_field_path() {
        // golden contraction over a degree-1 field runs the lifted-test path
        let json = r#"{
            "field_minpoly": ["-1", "1"],
            "lambda": {"minpoly": ["-1", "1", "1"], "isolator": {"re": "0.6", "im": "0", "radius": "0.1"}},
            "translations": [["0", "1"], ["1", "1"]],
            "probs": ["1/2", "1/2"]
        }"#;
        let ifs = IFSSpec::from_json(json, &ctx()).unwrap();
        assert!(ifs.lam_in_field().is_none());
        let rep = delta_n(&ifs, 3, &MitmParams::default()).unwrap();
        assert!(rep.overlap_word_pairs > 0);
        let g3 = 0.2360679774997896_f64;
        assert!((rep.delta.to_f64() - g3).abs() < 1e-9);
        assert!(rep.certified);

        let reference = delta_n(&golden_ifs(), 3, &MitmParams::default()).unwrap();
        assert!(rep.delta.intersects(&reference.delta));
    }

    #[test]
    fn numeric_lambda_delta_is_uncertified() {
        let json = r#"{
            "field_minpoly": ["-1", "1"],
            "lambda": {"numeric": {"value": "0.61803398874989484", "radius": "1e-14"}},
            "translations": [["0", "1"], ["1", "1"]],
            "probs": ["1/2", "1/2"]
        }"#;
        let ifs = IFSSpec::from_json(json, &ctx()).unwrap();
        let rep = delta_n(&ifs, 3, &MitmParams::default()).unwrap();
        assert!(!rep.certified);
        assert!(rep.unresolved_pairs > 0); // the overlap pair cannot be decided
        let g3 = 0.2360679774997896_f64;
        assert!((rep.delta.to_f64() - g3).abs() < 1e-6);
    }
}
