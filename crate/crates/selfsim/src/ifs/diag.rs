//! Root-geometry diagnostics for the coefficient family: counting small
//! roots against the theoretical cap, locating the family root nearest the
//! contraction, vanishing orders at algebraic points, and spot checks of
//! root-separation lower bounds.
//!
//! Everything here decides through certified disks or exact field
//! arithmetic; sampled checks are one-sided (a violation would falsify, a
//! clean run corroborates) and say so in their reports.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{certified_is_zero, mahler_measure, AlgebraicNumber, Verdict};
use crate::ball::{eval_ball_poly, ComplexBall, PrecisionContext, RealBall};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::field::{lift_to_int_poly, FieldPoly, NumberField};
use crate::intpoly::IntPoly;
use crate::roots::{isolate_roots, refine_root, CertifiedRoot};

use super::mitm::{dvec_ball, dvec_is_zero};
use super::{DifferenceSet, FamilyPolynomial, IFSSpec};

fn rat_pow(r: &BigRational, n: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..n {
        acc *= r;
    }
    acc
}

/// Smallest j with (j/(j+1)) (rho (j+1))^(-1/j) > 1 - eps/2. A polynomial
/// whose nonzero coefficient magnitudes stay within ratio rho has at most
/// this many nonzero roots of modulus at most 1 - eps.
pub fn small_root_bound(
    eps: &BigRational,
    rho: &RealBall,
    ctx: &PrecisionContext,
) -> Result<u32> {
    if !eps.is_positive() || *eps >= BigRational::one() {
        return Err(Error::InvalidInput("eps must lie in (0, 1)".into()));
    }
    if !rho.lo().is_positive() {
        return Err(Error::InvalidInput(
            "the magnitude ratio must be certified positive".into(),
        ));
    }
    let tau = BigRational::one() - eps / BigRational::from_integer(2.into());
    for j in 1u32..100_000 {
        let mut prec = ctx.working_bits;
        loop {
            let jj = RealBall::from_ratio(&BigInt::from(j), &BigInt::from(j + 1), prec);
            let x = rho.mul(&RealBall::from_i64(j as i64 + 1), prec);
            let a = jj.div(&x.nth_root(j, prec), prec);
            if a.lo().to_rational() > tau {
                return Ok(j);
            }
            if a.hi().to_rational() <= tau {
                break;
            }
            if prec >= ctx.max_bits {
                return Err(Error::NoConvergence {
                    what: format!("deciding the root-count criterion at j = {}", j),
                    reached: prec,
                    ceiling: ctx.max_bits,
                });
            }
            prec = (prec * 2).min(ctx.max_bits);
        }
    }
    Err(Error::InvalidInput(
        "no admissible root-count bound below 100000".into(),
    ))
}

/// Integer model of a polynomial with rational coefficients (denominators
/// cleared by their lcm), sharing its roots with multiplicity; None if a
/// coefficient is irrational.
fn rational_int_poly(fp: &FieldPoly) -> Option<IntPoly> {
    let mut rats = Vec::with_capacity(fp.coeffs().len());
    for c in fp.coeffs() {
        rats.push(c.to_rational()?);
    }
    Some(clear_denominators(&rats))
}

fn clear_denominators(rats: &[BigRational]) -> IntPoly {
    let mut l = BigInt::one();
    for r in rats {
        l = l.lcm(r.denom());
    }
    IntPoly::new(rats.iter().map(|r| r.numer() * (&l / r.denom())).collect())
}

/// Integer model when the polynomial is a field-scalar multiple of a
/// rational polynomial: fp = c0 * q with q rational. Shares the roots of fp
/// with multiplicity. Verified coefficient by coefficient, so a None is a
/// proof of failure, not a heuristic.
fn scalar_rational_model(field: &NumberField, fp: &FieldPoly) -> Option<IntPoly> {
    let c0 = fp.coeffs().iter().find(|c| !c.is_zero())?;
    if c0.is_rational() {
        // a rational scalar cannot rationalize irrational coefficients
        return None;
    }
    let k = c0.coords().iter().position(|x| !x.is_zero())?;
    let mut rats = Vec::with_capacity(fp.coeffs().len());
    for c in fp.coeffs() {
        if c.is_zero() {
            rats.push(BigRational::zero());
            continue;
        }
        let r = BigRational::new(
            c.coords()[k].clone() * c0.denom(),
            c.denom() * &c0.coords()[k],
        );
        if !field.sub(c, &field.mul_rational(c0, &r)).is_zero() {
            return None;
        }
        rats.push(r);
    }
    Some(clear_denominators(&rats))
}

enum ModelKind {
    /// The model's roots are exactly the polynomial's roots, with
    /// multiplicity.
    Exact,
    /// Conjugate-product lift: the model's roots are the union of all
    /// conjugate polynomials' roots.
    Lift,
}

fn integer_model(field: &NumberField, fp: &FieldPoly) -> Result<(IntPoly, ModelKind)> {
    if let Some(ip) = rational_int_poly(fp) {
        return Ok((ip, ModelKind::Exact));
    }
    if let Some(ip) = scalar_rational_model(field, fp) {
        return Ok((ip, ModelKind::Exact));
    }
    Ok((lift_to_int_poly(fp, field)?, ModelKind::Lift))
}

/// Which embedding's conjugate polynomial vanishes at the root certified by
/// this disk. Sound only when the lift is squarefree, which makes the
/// vanishing embedding unique; the others are excluded by refinement.
fn vanishing_conjugate(
    field: &NumberField,
    fp: &FieldPoly,
    root: &CertifiedRoot,
    ctx: &PrecisionContext,
) -> Result<usize> {
    let d = field.degree();
    let mut disk = root.disk.clone();
    for prec in ctx.ladder() {
        let mut alive = Vec::new();
        for j in 0..d {
            let coeffs: Vec<ComplexBall> = fp
                .coeffs()
                .iter()
                .map(|c| field.embed(c, j, prec))
                .collect::<Result<_>>()?;
            if eval_ball_poly(&coeffs, &disk, prec).contains_zero() {
                alive.push(j);
            }
        }
        match alive.len() {
            0 => {
                return Err(Error::InvalidInput(
                    "a lifted root escapes every conjugate polynomial".into(),
                ))
            }
            1 => return Ok(alive[0]),
            _ => {
                let cur = disk.radius().mag_exp().unwrap_or(-8);
                disk = refine_root(&root.factor, &disk, cur - 16, ctx)?;
            }
        }
    }
    Err(Error::NoConvergence {
        what: "attributing a lifted root to one embedding".into(),
        reached: ctx.max_bits,
        ceiling: ctx.max_bits,
    })
}

/// Roots of the family polynomial itself: the multiplicity of X = 0, the
/// certified nonzero roots, and the integer polynomial they were isolated
/// from. Exact integer models keep multiplicities directly; a genuine lift
/// must be squarefree so each root attributes to one embedding, and only
/// the primary embedding's roots are kept.
fn family_roots(
    ifs: &IFSSpec,
    p: &FamilyPolynomial,
) -> Result<(u32, Vec<CertifiedRoot>, IntPoly)> {
    let dset = ifs.difference_set()?;
    let field = ifs.field();
    let ctx = ifs.context();
    let fp = p.to_field_poly(&dset);
    if fp.is_zero() {
        return Err(Error::InvalidInput(
            "the zero polynomial has no root data".into(),
        ));
    }
    let (model, kind) = integer_model(field, &fp)?;
    let iso = isolate_roots(&model, ctx)?;
    match kind {
        ModelKind::Exact => Ok((iso.zero_multiplicity, iso.roots, model)),
        ModelKind::Lift => {
            let d = field.degree() as u32;
            let z = fp.coeffs().iter().take_while(|c| c.is_zero()).count() as u32;
            if iso.zero_multiplicity != d * z {
                return Err(Error::InvalidInput(
                    "lift zero-multiplicity is inconsistent with the coefficients".into(),
                ));
            }
            if iso.roots.iter().any(|r| r.multiplicity > 1) {
                return Err(Error::InvalidInput(
                    "conjugate polynomials share roots; multiplicities cannot be \
                     attributed to one embedding"
                        .into(),
                ));
            }
            let mut kept = Vec::new();
            for r in &iso.roots {
                if vanishing_conjugate(field, &fp, r, ctx)? == field.primary_index() {
                    kept.push(r.clone());
                }
            }
            let want = fp.degree().unwrap() as u32 - z;
            if kept.len() as u32 != want {
                return Err(Error::InvalidInput(
                    "lifted root attribution does not match the polynomial degree".into(),
                ));
            }
            Ok((z, kept, model))
        }
    }
}

/// |z| <= bnd for the root certified by the disk, decided by refinement; a
/// real root exactly on the boundary is recognized by exact evaluation of
/// the model polynomial (whose disks are pairwise disjoint, so a model root
/// inside this disk is this root).
fn root_modulus_at_most(
    model: &IntPoly,
    r: &CertifiedRoot,
    bnd: &BigRational,
    ctx: &PrecisionContext,
) -> Result<bool> {
    let mut disk = r.disk.clone();
    let mut prec = ctx.working_bits;
    loop {
        let m = disk.modulus(prec);
        if m.hi().to_rational() <= *bnd {
            return Ok(true);
        }
        if m.lo().to_rational() > *bnd {
            return Ok(false);
        }
        if prec >= ctx.max_bits {
            if r.is_real {
                for s in [bnd.clone(), -bnd.clone()] {
                    if model.eval_rational(&s).is_zero()
                        && disk.re_ball().lo().to_rational() <= s
                        && disk.re_ball().hi().to_rational() >= s
                    {
                        return Ok(true);
                    }
                }
            }
            return Err(Error::NoConvergence {
                what: format!("separating a root modulus from {}", bnd),
                reached: prec,
                ceiling: ctx.max_bits,
            });
        }
        let cur = disk.radius().mag_exp().unwrap_or(-8);
        disk = refine_root(&r.factor, &disk, cur - 16, ctx)?;
        prec = (prec * 2).min(ctx.max_bits);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SmallRootsReport {
    /// Nonzero roots with modulus at most 1 - eps, counted with multiplicity.
    pub count: u32,
    /// The theoretical cap for this coefficient family.
    pub bound_k: u32,
}

/// Certified count of the polynomial's own nonzero roots with modulus at
/// most 1 - eps, checked against the family cap.
pub fn count_small_roots(
    ifs: &IFSSpec,
    p: &FamilyPolynomial,
    eps: &BigRational,
) -> Result<SmallRootsReport> {
    if !eps.is_positive() || *eps >= BigRational::one() {
        return Err(Error::InvalidInput("eps must lie in (0, 1)".into()));
    }
    let ctx = ifs.context();
    let (_, roots, model) = family_roots(ifs, p)?;
    let bnd = BigRational::one() - eps;
    let mut count = 0u32;
    for r in &roots {
        if root_modulus_at_most(&model, r, &bnd, ctx)? {
            count += r.multiplicity;
        }
    }
    let dset = ifs.difference_set()?;
    let rho = dset.magnitude_ratio(ifs.field(), ctx.working_bits)?;
    let bound_k = small_root_bound(eps, &rho, ctx)?;
    if count > bound_k {
        return Err(Error::InvalidInput(format!(
            "{} small roots exceed the theoretical cap {}",
            count, bound_k
        )));
    }
    Ok(SmallRootsReport { count, bound_k })
}

/// Value data for a family polynomial at the contraction: enclosure of
/// |P(lam)| and whether P(lam) = 0 exactly (decidable when lam is exact).
fn family_value(
    ifs: &IFSSpec,
    dset: &DifferenceSet,
    digits: &[u32],
    prec: u32,
) -> Result<(RealBall, bool)> {
    let field = ifs.field();
    if let Some(lf) = ifs.lam_in_field() {
        let mut acc = field.zero();
        let mut pw = field.one();
        for &d in digits {
            acc = field.add(&acc, &field.mul(&dset.elements()[d as usize], &pw));
            pw = field.mul(&pw, lf);
        }
        if acc.is_zero() {
            return Ok((RealBall::exact(Dyadic::zero()), true));
        }
        return Ok((field.abs_enclosure(&acc, prec)?, false));
    }
    if ifs.lam().is_exact() {
        if dvec_is_zero(ifs, dset, digits)? {
            return Ok((RealBall::exact(Dyadic::zero()), true));
        }
        let mut pq = prec;
        loop {
            let b = dvec_ball(ifs, dset, digits, pq)?.abs_ball();
            if b.lo().is_positive() {
                return Ok((b, false));
            }
            if pq >= ifs.context().max_bits {
                return Err(Error::NoConvergence {
                    what: "separating a certified-nonzero value from zero".into(),
                    reached: pq,
                    ceiling: ifs.context().max_bits,
                });
            }
            pq = (pq * 2).min(ifs.context().max_bits);
        }
    }
    Ok((dvec_ball(ifs, dset, digits, prec)?.abs_ball(), false))
}

/// Certify eps <= |lam| <= 1 - eps.
fn check_lambda_range(ifs: &IFSSpec, eps: &BigRational) -> Result<()> {
    let hi_cap = BigRational::one() - eps;
    let mut prec = ifs.context().working_bits;
    loop {
        let ab = ifs.lambda_ball(prec)?.abs_ball();
        if ab.lo().to_rational() >= *eps && ab.hi().to_rational() <= hi_cap {
            return Ok(());
        }
        if ab.hi().to_rational() < *eps || ab.lo().to_rational() > hi_cap {
            return Err(Error::InvalidInput(format!(
                "the contraction must satisfy eps <= |lam| <= 1 - eps for eps = {}",
                eps
            )));
        }
        if prec >= ifs.context().max_bits {
            return Err(Error::InvalidInput(
                "cannot certify eps <= |lam| <= 1 - eps at the precision ceiling".into(),
            ));
        }
        prec = (prec * 2).min(ifs.context().max_bits);
    }
}

#[derive(Debug, Clone)]
pub struct RootNearReport {
    /// Nominal degree of the polynomial.
    pub n: usize,
    /// Enclosure of |P(lam)|.
    pub value: RealBall,
    /// The model root nearest to lam.
    pub root: ComplexBall,
    pub distance: RealBall,
    /// ((2/eps)^n |P(lam)|)^(1/k).
    pub bound: RealBall,
    pub k: u32,
    pub within_bound: Verdict,
    /// P(lam) = 0 exactly; the nearest root is lam itself.
    pub exact_zero: bool,
}

/// Locate the model root nearest to the contraction and compare the
/// distance against its a-priori bound. Requires a certifiably small
/// |P(lam)|: below eps^n 2^-n. The model is exact when the coefficients
/// rationalize; otherwise its roots are the union over conjugates, a
/// superset of the polynomial's own, which only shrinks the reported
/// distance and keeps the bound comparison sound.
pub fn root_near(
    ifs: &IFSSpec,
    p: &FamilyPolynomial,
    eps: &BigRational,
) -> Result<RootNearReport> {
    let two = BigRational::from_integer(2.into());
    if !eps.is_positive() || *eps >= BigRational::new(BigInt::one(), 2.into()) {
        return Err(Error::InvalidInput("eps must lie in (0, 1/2)".into()));
    }
    let ctx = ifs.context();
    let prec = ctx.working_bits;
    let dset = ifs.difference_set()?;
    let field = ifs.field();
    let n = p
        .coeff_indices
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::InvalidInput("empty polynomial".into()))? as u32;
    let fp = p.to_field_poly(&dset);
    if fp.is_zero() {
        return Err(Error::InvalidInput(
            "the zero polynomial is excluded from the family".into(),
        ));
    }

    check_lambda_range(ifs, eps)?;
    let (value, exact_zero) = family_value(ifs, &dset, &p.coeff_indices, prec)?;

    // |P(lam)| < eps^n 2^-n
    let r_cap = rat_pow(eps, n) / rat_pow(&two, n);
    if !exact_zero {
        let mut vb = value.clone();
        let mut pq = prec;
        loop {
            if vb.hi().to_rational() < r_cap {
                break;
            }
            if vb.lo().to_rational() >= r_cap {
                return Err(Error::InvalidInput(format!(
                    "|P(lam)| must be below eps^n 2^-n = {}",
                    r_cap
                )));
            }
            if pq >= ctx.max_bits {
                return Err(Error::InvalidInput(
                    "cannot certify |P(lam)| below eps^n 2^-n at the precision ceiling".into(),
                ));
            }
            pq = (pq * 2).min(ctx.max_bits);
            vb = dvec_ball(ifs, &dset, &p.coeff_indices, pq)?.abs_ball();
        }
    }

    let rho = dset.magnitude_ratio(field, prec)?;
    let k = small_root_bound(eps, &rho, ctx)?;
    let bound = if exact_zero {
        RealBall::exact(Dyadic::zero())
    } else {
        let factor = rat_pow(&(two / eps), n);
        let fb = RealBall::from_ratio(factor.numer(), factor.denom(), prec);
        fb.mul(&value, prec).abs_ball().nth_root(k, prec)
    };

    if exact_zero {
        let root = ifs.lambda_ball(prec)?.to_complex();
        return Ok(RootNearReport {
            n: n as usize,
            value,
            root,
            distance: RealBall::exact(Dyadic::zero()),
            bound,
            k,
            within_bound: Verdict::Holds,
            exact_zero: true,
        });
    }

    let (model, _) = integer_model(field, &fp)?;
    let iso = isolate_roots(&model, ctx)?;
    let mut cands: Vec<(ComplexBall, Option<IntPoly>)> = iso
        .roots
        .iter()
        .map(|r| (r.disk.clone(), Some(r.factor.clone())))
        .collect();
    if iso.zero_multiplicity > 0 {
        cands.push((ComplexBall::zero(), None));
    }
    if cands.is_empty() {
        return Err(Error::InvalidInput(
            "the model polynomial has no roots to compare against".into(),
        ));
    }

    let mut p2 = prec;
    let (winner, distance) = loop {
        let lamb = ifs.lambda_ball(p2)?.to_complex();
        let dists: Vec<RealBall> = cands.iter().map(|(d, _)| lamb.distance(d, p2)).collect();
        let mut min_hi = dists[0].hi();
        for d in &dists[1..] {
            if d.hi().cmp_val(&min_hi) == Ordering::Less {
                min_hi = d.hi();
            }
        }
        let survivors: Vec<usize> = (0..cands.len())
            .filter(|&i| dists[i].lo().cmp_val(&min_hi) != Ordering::Greater)
            .collect();
        if survivors.len() == 1 {
            let i = survivors[0];
            break (i, dists[i].clone());
        }
        // a real contraction is equidistant from a conjugate pair: prefer
        // the upper half-plane representative
        if survivors.len() == 2 {
            let (a, b) = (survivors[0], survivors[1]);
            if !cands[a].0.conj().is_disjoint(&cands[b].0) {
                let pick = if cands[a].0.im_ball().lo().is_negative() { b } else { a };
                break (pick, dists[a].union(&dists[b]));
            }
        }
        if p2 >= ctx.max_bits {
            let mut acc = dists[survivors[0]].clone();
            for &i in &survivors[1..] {
                acc = acc.union(&dists[i]);
            }
            break (survivors[0], acc);
        }
        for &i in &survivors {
            if let (d, Some(f)) = &mut cands[i] {
                let cur = d.radius().mag_exp().unwrap_or(-8);
                *d = refine_root(f, d, cur - 16, ctx)?;
            }
        }
        p2 = (p2 * 2).min(ctx.max_bits);
    };

    let within_bound = if distance.hi().cmp_val(&bound.lo()) != Ordering::Greater {
        Verdict::Holds
    } else if distance.lo().cmp_val(&bound.hi()) == Ordering::Greater {
        return Err(Error::InvalidInput(
            "nearest-root distance exceeds its certified bound".into(),
        ));
    } else {
        Verdict::Unknown
    };
    Ok(RootNearReport {
        n: n as usize,
        value,
        root: cands[winner].0.clone(),
        distance,
        bound,
        k,
        within_bound,
        exact_zero: false,
    })
}

fn field_poly_derivative(field: &NumberField, f: &FieldPoly) -> FieldPoly {
    let mut out = Vec::new();
    for (i, c) in f.coeffs().iter().enumerate().skip(1) {
        out.push(field.mul_rational(c, &BigRational::from_integer(BigInt::from(i))));
    }
    FieldPoly::new(out)
}

/// Exact multiplicity of eta as a root of P: the first derivative that does
/// not vanish at eta. Each derivative goes through the certified zero test
/// on its integer model. When only the conjugate-product lift is available,
/// the lift vanishes iff some conjugate polynomial does, so a nonzero order
/// certifies vanishing of a conjugate; with rational or scalar-rational
/// coefficients (every exact-model case) the order is P's own.
pub fn vanishing_order(
    ifs: &IFSSpec,
    p: &FamilyPolynomial,
    eta: &AlgebraicNumber,
) -> Result<u32> {
    let dset = ifs.difference_set()?;
    let field = ifs.field();
    let fp = p.to_field_poly(&dset);
    if fp.is_zero() {
        return Err(Error::InvalidInput(
            "the zero polynomial vanishes to every order".into(),
        ));
    }
    let deg = fp.degree().unwrap() as u32;
    let mut cur = fp;
    for m in 0..=deg {
        let (model, _) = integer_model(field, &cur)?;
        if !certified_is_zero(&model, eta)? {
            return Ok(m);
        }
        cur = field_poly_derivative(field, &cur);
    }
    Err(Error::InvalidInput(
        "every derivative vanished; the polynomial must have been zero".into(),
    ))
}

/// The two sides of the locality inequality around an algebraic point,
/// reported without judgement: experiments compare lhs <= |lam - eta| <= rhs
/// in the regime where a large vanishing order is forced.
#[derive(Debug, Clone)]
pub struct OrderDiagnostics {
    pub order: u32,
    /// |P(lam)|.
    pub value: RealBall,
    /// |lam - eta|.
    pub distance: RealBall,
    pub mahler_eta: RealBall,
    /// ((2 M(eta))^(d n') |P(lam)|)^(1/k).
    pub lhs: RealBall,
    /// (2 M(eta))^(-d n').
    pub rhs: RealBall,
    pub k: u32,
    pub field_degree: u32,
    pub poly_degree: u32,
}

pub fn order_diagnostics(
    ifs: &IFSSpec,
    p: &FamilyPolynomial,
    eta: &AlgebraicNumber,
    eps: &BigRational,
) -> Result<OrderDiagnostics> {
    let ctx = ifs.context();
    let prec = ctx.working_bits;
    let dset = ifs.difference_set()?;
    let order = vanishing_order(ifs, p, eta)?;
    let (value, exact_zero) = family_value(ifs, &dset, &p.coeff_indices, prec)?;
    let m = mahler_measure(eta.minpoly(), prec, ctx)?;
    let d = ifs.field().degree() as u32;
    let np = p.coeff_indices.len().saturating_sub(1) as u32;
    let rho = dset.magnitude_ratio(ifs.field(), prec)?;
    let k = small_root_bound(eps, &rho, ctx)?;
    let pw = m.mul_pow2(1).pow_u(d * np, prec);
    let lhs = if exact_zero {
        RealBall::exact(Dyadic::zero())
    } else {
        pw.mul(&value, prec).abs_ball().nth_root(k, prec)
    };
    let rhs = RealBall::exact(Dyadic::one()).div(&pw, prec);
    let lam_c = ifs.lambda_ball(prec)?.to_complex();
    let eta_c = eta.refined(-(prec as i64))?;
    let distance = lam_c.distance(&eta_c, prec);
    Ok(OrderDiagnostics {
        order,
        value,
        distance,
        mahler_eta: m,
        lhs,
        rhs,
        k,
        field_degree: d,
        poly_degree: np,
    })
}

#[derive(Debug, Clone)]
pub struct SeparationViolation {
    pub poly1: Vec<String>,
    pub poly2: Vec<String>,
    pub root1: ComplexBall,
    pub root2: ComplexBall,
    pub distance: RealBall,
}

#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub n: usize,
    /// The claimed lower bound on distances between distinct roots.
    pub bound: BigRational,
    pub bound_desc: String,
    pub pairs_checked: u64,
    pub root_pairs_checked: u64,
    pub equal_root_pairs_skipped: u64,
    pub undecided_pairs: u64,
    pub violations: Vec<SeparationViolation>,
    pub exhaustive: bool,
    pub note: String,
}

enum PairCheck {
    Pass,
    Violation(ComplexBall, ComplexBall, RealBall),
    Undecided,
}

struct IsoEntry {
    zero_mult: u32,
    roots: Vec<(ComplexBall, IntPoly)>,
}

/// Shared machinery for pairwise root-distance checks over integer
/// polynomials, with caches for isolations and gcds.
struct PairChecker<'a> {
    ctx: &'a PrecisionContext,
    iso_cache: HashMap<Vec<BigInt>, Rc<IsoEntry>>,
    gcd_cache: HashMap<(Vec<BigInt>, Vec<BigInt>), Rc<IntPoly>>,
}

struct PairStats {
    root_pairs: u64,
    equal_skipped: u64,
    undecided: u64,
    violations: Vec<(ComplexBall, ComplexBall, RealBall)>,
}

impl<'a> PairChecker<'a> {
    fn new(ctx: &'a PrecisionContext) -> Self {
        PairChecker {
            ctx,
            iso_cache: HashMap::new(),
            gcd_cache: HashMap::new(),
        }
    }

    fn isolation(&mut self, f: &IntPoly) -> Result<Rc<IsoEntry>> {
        if let Some(e) = self.iso_cache.get(f.coeffs()) {
            return Ok(e.clone());
        }
        let iso = isolate_roots(f, self.ctx)?;
        let mut roots = Vec::with_capacity(iso.roots.len());
        for r in iso.roots {
            // pre-shrink so genuinely distinct roots separate immediately
            let disk = refine_root(&r.factor, &r.disk, -64, self.ctx)?;
            roots.push((disk, r.factor));
        }
        let e = Rc::new(IsoEntry {
            zero_mult: iso.zero_multiplicity,
            roots,
        });
        self.iso_cache.insert(f.coeffs().to_vec(), e.clone());
        Ok(e)
    }

    fn gcd(&mut self, f1: &IntPoly, f2: &IntPoly) -> Rc<IntPoly> {
        let key = if f1.coeffs() <= f2.coeffs() {
            (f1.coeffs().to_vec(), f2.coeffs().to_vec())
        } else {
            (f2.coeffs().to_vec(), f1.coeffs().to_vec())
        };
        if let Some(h) = self.gcd_cache.get(&key) {
            return h.clone();
        }
        let h = Rc::new(f1.gcd(f2));
        self.gcd_cache.insert(key, h.clone());
        h
    }

    /// Which root of h (if any) equals the root certified by (factor, disk).
    /// Decided by exclusion: factor's roots split disjointly into roots of h
    /// and roots of factor/h, and the disk eventually intersects disks of
    /// only one side.
    fn match_root(
        &mut self,
        factor: &IntPoly,
        disk: &ComplexBall,
        h: &IntPoly,
    ) -> Result<Option<usize>> {
        let q = factor
            .div_exact(h)
            .ok_or_else(|| Error::InvalidInput("gcd does not divide its argument".into()))?;
        let h_entry = self.isolation(h)?;
        let mut h_disks: Vec<(ComplexBall, IntPoly)> = h_entry.roots.clone();
        let mut q_disks: Vec<(ComplexBall, IntPoly)> = if q.degree().unwrap_or(0) >= 1 {
            self.isolation(&q)?.roots.clone()
        } else {
            Vec::new()
        };
        let mut d = disk.clone();
        for _ in 0..64 {
            let h_hits: Vec<usize> = (0..h_disks.len())
                .filter(|&i| !h_disks[i].0.is_disjoint(&d))
                .collect();
            if h_hits.is_empty() {
                return Ok(None);
            }
            let q_hits: Vec<usize> = (0..q_disks.len())
                .filter(|&i| !q_disks[i].0.is_disjoint(&d))
                .collect();
            if q_hits.is_empty() && h_hits.len() == 1 {
                return Ok(Some(h_hits[0]));
            }
            let cur = d.radius().mag_exp().unwrap_or(-8);
            d = refine_root(factor, &d, cur - 16, self.ctx)?;
            for &i in &h_hits {
                let (hd, hf) = &mut h_disks[i];
                let c = hd.radius().mag_exp().unwrap_or(-8);
                *hd = refine_root(hf, hd, c - 16, self.ctx)?;
            }
            for &i in &q_hits {
                let (qd, qf) = &mut q_disks[i];
                let c = qd.radius().mag_exp().unwrap_or(-8);
                *qd = refine_root(qf, qd, c - 16, self.ctx)?;
            }
        }
        Err(Error::NoConvergence {
            what: "resolving root identity against a shared factor".into(),
            reached: self.ctx.max_bits,
            ceiling: self.ctx.max_bits,
        })
    }

    /// Distance of two certifiably distinct roots against the bound, by
    /// exact dyadic interval arithmetic on the disks.
    fn distance_check(
        &self,
        d1: &ComplexBall,
        f1: Option<&IntPoly>,
        d2: &ComplexBall,
        f2: Option<&IntPoly>,
        bound: &BigRational,
    ) -> Result<PairCheck> {
        let mut a = d1.clone();
        let mut b = d2.clone();
        for _ in 0..48 {
            let dre = a.re().sub(b.re()).abs();
            let dim = a.im().sub(b.im()).abs();
            let maxnorm = if dre.cmp_val(&dim) == Ordering::Greater {
                dre.clone()
            } else {
                dim.clone()
            };
            let lower = maxnorm.sub(a.radius()).sub(b.radius());
            if lower.is_positive() && lower.to_rational() > *bound {
                return Ok(PairCheck::Pass);
            }
            let upper = dre.add(&dim).add(a.radius()).add(b.radius());
            if upper.to_rational() <= *bound {
                let dist = a.distance(&b, self.ctx.working_bits);
                return Ok(PairCheck::Violation(a, b, dist));
            }
            if f1.is_none() && f2.is_none() {
                break;
            }
            if let Some(f) = f1 {
                let c = a.radius().mag_exp().unwrap_or(-8);
                a = refine_root(f, &a, c - 16, self.ctx)?;
            }
            if let Some(f) = f2 {
                let c = b.radius().mag_exp().unwrap_or(-8);
                b = refine_root(f, &b, c - 16, self.ctx)?;
            }
        }
        Ok(PairCheck::Undecided)
    }

    /// All root pairs of two distinct polynomials: equal roots are skipped,
    /// distinct ones are checked against the bound.
    fn check_pair(&mut self, p1: &IntPoly, p2: &IntPoly, bound: &BigRational) -> Result<PairStats> {
        let e1 = self.isolation(p1)?;
        let e2 = self.isolation(p2)?;
        let mut stats = PairStats {
            root_pairs: 0,
            equal_skipped: 0,
            undecided: 0,
            violations: Vec::new(),
        };
        let zero = ComplexBall::zero();
        if e1.zero_mult > 0 && e2.zero_mult > 0 {
            stats.equal_skipped += 1;
        }
        if e1.zero_mult > 0 {
            for (d2, f2) in &e2.roots {
                stats.root_pairs += 1;
                match self.distance_check(&zero, None, d2, Some(f2), bound)? {
                    PairCheck::Pass => {}
                    PairCheck::Violation(a, b, dist) => stats.violations.push((a, b, dist)),
                    PairCheck::Undecided => stats.undecided += 1,
                }
            }
        }
        if e2.zero_mult > 0 {
            for (d1, f1) in &e1.roots {
                stats.root_pairs += 1;
                match self.distance_check(d1, Some(f1), &zero, None, bound)? {
                    PairCheck::Pass => {}
                    PairCheck::Violation(a, b, dist) => stats.violations.push((a, b, dist)),
                    PairCheck::Undecided => stats.undecided += 1,
                }
            }
        }
        for (d1, f1) in &e1.roots {
            for (d2, f2) in &e2.roots {
                stats.root_pairs += 1;
                // cheap certified pass: exact center/radius arithmetic
                let dre = d1.re().sub(d2.re()).abs();
                let dim = d1.im().sub(d2.im()).abs();
                let maxnorm = if dre.cmp_val(&dim) == Ordering::Greater { dre } else { dim };
                let lower = maxnorm.sub(d1.radius()).sub(d2.radius());
                if lower.is_positive() && lower.to_rational() > *bound {
                    continue;
                }
                // possibly the same algebraic number
                let h = self.gcd(f1, f2);
                if h.degree().unwrap_or(0) >= 1 {
                    let m1 = self.match_root(f1, d1, &h)?;
                    let m2 = self.match_root(f2, d2, &h)?;
                    if m1.is_some() && m1 == m2 {
                        stats.equal_skipped += 1;
                        continue;
                    }
                }
                match self.distance_check(d1, Some(f1), d2, Some(f2), bound)? {
                    PairCheck::Pass => {}
                    PairCheck::Violation(a, b, dist) => stats.violations.push((a, b, dist)),
                    PairCheck::Undecided => stats.undecided += 1,
                }
            }
        }
        Ok(stats)
    }
}

fn decode_digits(mut idx: u64, base: u64, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((idx % base) as u32);
        idx /= base;
    }
    out
}

/// Spot-check the lower bound 2 n^(-Mn) on distances between distinct roots
/// of distinct family polynomials of degree at most n, with M = 4d^2+4d+1
/// at d = 1 for rational coefficient sets. Exhaustive when the family is
/// small enough, sampled otherwise. One-sided: no violations corroborates
/// the bound for this n, it does not prove it.
pub fn separation_check(
    ifs: &IFSSpec,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<SeparationReport> {
    if n == 0 {
        return Err(Error::InvalidInput("separation check needs n >= 1".into()));
    }
    if n > 64 {
        return Err(Error::InvalidInput(
            "separation bound exponents above n = 64 are not desk-scale".into(),
        ));
    }
    let dset = ifs.difference_set()?;
    let rats = dset.as_rationals().ok_or_else(|| {
        Error::InvalidInput(
            "the separation check runs over rational difference sets only".into(),
        )
    })?;
    let d = 1u32;
    let m_exp = 4 * d * d + 4 * d + 1;
    let bound = BigRational::new(
        BigInt::from(2),
        BigInt::from(n as u64).pow(m_exp * n as u32),
    );
    let bound_desc = format!("2 n^(-Mn) with M = {} (d = {})", m_exp, d);

    let ints: Vec<BigInt> = {
        let mut l = BigInt::one();
        for r in &rats {
            l = l.lcm(r.denom());
        }
        rats.iter().map(|r| r.numer() * (&l / r.denom())).collect()
    };
    let base = dset.len() as u64;
    let len = n + 1;
    let t = (base as u128)
        .checked_pow(len as u32)
        .filter(|&t| t <= u64::MAX as u128)
        .ok_or_else(|| {
            Error::InvalidInput("the family is too large to index for sampling".into())
        })? as u64;
    let zero_idx = {
        let z = dset.zero_index() as u64;
        let mut acc = 0u64;
        let mut pw = 1u64;
        for _ in 0..len {
            acc += z * pw;
            pw = pw.saturating_mul(base);
        }
        acc
    };
    let poly_of = |idx: u64| -> IntPoly {
        IntPoly::new(
            decode_digits(idx, base, len)
                .iter()
                .map(|&d| ints[d as usize].clone())
                .collect(),
        )
    };

    let ctx = ifs.context();
    let mut checker = PairChecker::new(ctx);
    let mut report = SeparationReport {
        n,
        bound: bound.clone(),
        bound_desc,
        pairs_checked: 0,
        root_pairs_checked: 0,
        equal_root_pairs_skipped: 0,
        undecided_pairs: 0,
        violations: Vec::new(),
        exhaustive: false,
        note: "one-sided corroboration: absence of violations supports the bound \
               without proving it"
            .into(),
    };
    let record = |stats: PairStats, i: u64, j: u64, report: &mut SeparationReport| {
        report.pairs_checked += 1;
        report.root_pairs_checked += stats.root_pairs;
        report.equal_root_pairs_skipped += stats.equal_skipped;
        report.undecided_pairs += stats.undecided;
        for (root1, root2, distance) in stats.violations {
            report.violations.push(SeparationViolation {
                poly1: FamilyPolynomial::new(decode_digits(i, base, len)).coeff_strings(&dset),
                poly2: FamilyPolynomial::new(decode_digits(j, base, len)).coeff_strings(&dset),
                root1,
                root2,
                distance,
            });
        }
    };
    let total_pairs = (t as u128) * (t as u128 - 1) / 2;
    if total_pairs <= samples as u128 {
        report.exhaustive = true;
        for i in 0..t {
            if i == zero_idx {
                continue;
            }
            let p1 = poly_of(i);
            for j in (i + 1)..t {
                if j == zero_idx {
                    continue;
                }
                let stats = checker.check_pair(&p1, &poly_of(j), &bound)?;
                record(stats, i, j, &mut report);
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut drawn = 0u64;
        let mut attempts = 0u64;
        while drawn < samples && attempts < samples.saturating_mul(20) {
            attempts += 1;
            let i = rng.gen_range(0..t);
            let j = rng.gen_range(0..t);
            if i == j || i == zero_idx || j == zero_idx {
                continue;
            }
            let stats = checker.check_pair(&poly_of(i), &poly_of(j), &bound)?;
            record(stats, i, j, &mut report);
            drawn += 1;
        }
    }
    Ok(report)
}

/// Spot-check the separation bound 2 n^(-4n) a^(-4n+2) for distinct roots of
/// distinct integer polynomials of degree at most n with coefficients of
/// magnitude at most a. Random sampling only; one-sided like
/// separation_check.
pub fn mahler_separation_check(
    n: usize,
    max_coeff: u64,
    samples: u64,
    seed: u64,
    ctx: &PrecisionContext,
) -> Result<SeparationReport> {
    if n < 4 {
        return Err(Error::InvalidInput(
            "the integer-family separation bound needs n >= 4".into(),
        ));
    }
    if n > 64 {
        return Err(Error::InvalidInput(
            "separation bound exponents above n = 64 are not desk-scale".into(),
        ));
    }
    if max_coeff == 0 {
        return Err(Error::InvalidInput(
            "the coefficient bound must be positive".into(),
        ));
    }
    let nn = BigInt::from(n as u64).pow(4 * n as u32);
    let aa = BigInt::from(max_coeff).pow(4 * n as u32 - 2);
    let bound = BigRational::new(BigInt::from(2), nn * aa);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = max_coeff as i64;
    let draw = |rng: &mut ChaCha8Rng| -> IntPoly {
        loop {
            let coeffs: Vec<BigInt> = (0..=n)
                .map(|_| BigInt::from(rng.gen_range(-a..=a)))
                .collect();
            let p = IntPoly::new(coeffs);
            if !p.is_zero() {
                return p;
            }
        }
    };
    let mut checker = PairChecker::new(ctx);
    let mut report = SeparationReport {
        n,
        bound: bound.clone(),
        bound_desc: format!("2 n^(-4n) a^(-4n+2) with a = {}", max_coeff),
        pairs_checked: 0,
        root_pairs_checked: 0,
        equal_root_pairs_skipped: 0,
        undecided_pairs: 0,
        violations: Vec::new(),
        exhaustive: false,
        note: "one-sided corroboration over random draws from the coefficient box".into(),
    };
    while report.pairs_checked < samples {
        let p1 = draw(&mut rng);
        let p2 = draw(&mut rng);
        if p1 == p2 {
            continue;
        }
        let stats = checker.check_pair(&p1, &p2, &bound)?;
        report.pairs_checked += 1;
        report.root_pairs_checked += stats.root_pairs;
        report.equal_root_pairs_skipped += stats.equal_skipped;
        report.undecided_pairs += stats.undecided;
        for (root1, root2, distance) in stats.violations {
            report.violations.push(SeparationViolation {
                poly1: p1.to_coeff_strings(),
                poly2: p2.to_coeff_strings(),
                root1,
                root2,
                distance,
            });
        }
    }
    Ok(report)
}
