//! Certified complex root isolation for integer polynomials.
//!
//! Pipeline: squarefree decomposition, fast f64 Aberth iteration for
//! approximations, then rigorous certification. The certificate rests on one
//! inequality: for any z with f'(z) != 0, the nearest root of f lies within
//! deg(f) * |f(z)/f'(z)| of z (log-derivative bound). Radii are computed in
//! ball arithmetic at exact evaluation points, so they are true bounds. When
//! the resulting disks for a squarefree factor are pairwise disjoint, each
//! contains exactly one root; otherwise we rerun Aberth in dyadic arithmetic
//! up the precision ladder.
//!
//! Real-root flags are certified, not guessed: a disk that excludes the real
//! axis is nonreal; a disk whose conjugate is disjoint from all sibling disks
//! holds a real root (the conjugate root would otherwise have nowhere to go).
//! Ambiguous disks are refined until one test fires.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;

use crate::ball::{eval_int_poly, ComplexBall, PrecisionContext, RealBall};
use crate::dyadic::{Dyadic, Round};
use crate::error::{Error, Result};
use crate::intpoly::IntPoly;

/// One certified root of the input polynomial.
#[derive(Debug, Clone)]
pub struct CertifiedRoot {
    /// Disk containing exactly one root of `factor`.
    pub disk: ComplexBall,
    /// Multiplicity of that root in the original polynomial.
    pub multiplicity: u32,
    pub is_real: bool,
    /// The squarefree factor the disk certifies against; pass this to
    /// `refine_root` when shrinking the disk further.
    pub factor: IntPoly,
}

#[derive(Debug, Clone)]
pub struct RootIsolation {
    /// Multiplicity of X = 0 as a root (reported separately; no disk).
    pub zero_multiplicity: u32,
    /// Nonzero roots, sorted: real roots first by position, then complex by
    /// (re, im). Exact center comparisons keep the order deterministic.
    pub roots: Vec<CertifiedRoot>,
}

impl RootIsolation {
    /// Total root count with multiplicity, zero roots included.
    pub fn total_multiplicity(&self) -> u32 {
        self.zero_multiplicity + self.roots.iter().map(|r| r.multiplicity).sum::<u32>()
    }
}

pub fn isolate_roots(f: &IntPoly, ctx: &PrecisionContext) -> Result<RootIsolation> {
    if f.is_zero() {
        return Err(Error::InvalidInput(
            "cannot isolate roots of the zero polynomial".into(),
        ));
    }
    let mut zero_multiplicity = 0;
    let mut roots = Vec::new();
    for (g, m) in f.squarefree_decomposition() {
        if g == IntPoly::x_pow(1) {
            zero_multiplicity = m;
            continue;
        }
        let disks = isolate_squarefree(&g, ctx)?;
        for (disk, is_real) in flag_real(&g, disks, ctx)? {
            roots.push(CertifiedRoot { disk, multiplicity: m, is_real, factor: g.clone() });
        }
    }
    sort_roots(&mut roots);
    Ok(RootIsolation { zero_multiplicity, roots })
}

fn sort_roots(roots: &mut [CertifiedRoot]) {
    roots.sort_by(|a, b| {
        b.is_real
            .cmp(&a.is_real)
            .then_with(|| a.disk.re().cmp_val(b.disk.re()))
            .then_with(|| a.disk.im().cmp_val(b.disk.im()))
    });
}

/// Pairwise-disjoint certified disks, one root of squarefree `g` in each.
pub fn isolate_squarefree(g: &IntPoly, ctx: &PrecisionContext) -> Result<Vec<ComplexBall>> {
    let n = match g.degree() {
        None | Some(0) => return Ok(vec![]),
        Some(n) => n,
    };
    if n == 1 {
        let root = RealBall::from_ratio(&(-g.coeff(0)), &g.coeff(1), ctx.working_bits);
        return Ok(vec![root.to_complex()]);
    }
    let dg = g.derivative();

    let f64_pts = aberth_f64(g);
    if let Some(pts) = &f64_pts {
        let exact: Vec<(Dyadic, Dyadic)> = pts
            .iter()
            .filter_map(|z| Some((Dyadic::from_f64(z.re)?, Dyadic::from_f64(z.im)?)))
            .collect();
        if exact.len() == n {
            if let Some(disks) = certify_disks(g, &dg, &exact, ctx.working_bits) {
                return Ok(disks);
            }
        }
    }

    // escalation: Aberth in rounded dyadic arithmetic
    let mut pts: Vec<(Dyadic, Dyadic)> = match &f64_pts {
        Some(ps) => ps
            .iter()
            .map(|z| {
                (
                    Dyadic::from_f64(if z.re.is_finite() { z.re } else { 0.0 }).unwrap(),
                    Dyadic::from_f64(if z.im.is_finite() { z.im } else { 0.0 }).unwrap(),
                )
            })
            .collect(),
        None => circle_init(g, n),
    };
    for prec in ctx.ladder() {
        aberth_dyadic(g, &dg, &mut pts, prec);
        if let Some(disks) = certify_disks(g, &dg, &pts, prec) {
            return Ok(disks);
        }
    }
    Err(Error::NoConvergence {
        what: format!("root isolation for degree {} polynomial", n),
        reached: ctx.max_bits,
        ceiling: ctx.max_bits,
    })
}

/// Log-derivative disk at an exact point: contains at least one root of `g`,
/// or None when `g'` cannot be bounded away from zero there.
fn henrici_disk(
    g: &IntPoly,
    dg: &IntPoly,
    pt: &(Dyadic, Dyadic),
    prec: u32,
) -> Option<ComplexBall> {
    let n = g.degree()? as i64;
    let z = ComplexBall::exact(pt.0.clone(), pt.1.clone());
    let dval = eval_int_poly(dg.coeffs(), &z, prec);
    let dlo = dval.modulus(prec).lo();
    if !dlo.is_positive() {
        return None;
    }
    let vhi = eval_int_poly(g.coeffs(), &z, prec).modulus(prec).hi();
    let r = vhi.div(&dlo, 24, Round::Up).mul_i64(n);
    Some(ComplexBall::new(pt.0.clone(), pt.1.clone(), r))
}

fn certify_disks(
    g: &IntPoly,
    dg: &IntPoly,
    pts: &[(Dyadic, Dyadic)],
    prec: u32,
) -> Option<Vec<ComplexBall>> {
    let mut disks = Vec::with_capacity(pts.len());
    for pt in pts {
        disks.push(henrici_disk(g, dg, pt, prec)?);
    }
    for i in 0..disks.len() {
        for j in (i + 1)..disks.len() {
            if !disks[i].is_disjoint(&disks[j]) {
                return None;
            }
        }
    }
    Some(disks)
}

/// Shrink a disk known to contain exactly one root of `g` until its radius is
/// at most 2^target_log2. Newton steps with recertification; the returned
/// disk is contained in the input disk, so it holds the same root.
pub fn refine_root(
    g: &IntPoly,
    disk: &ComplexBall,
    target_log2: i64,
    ctx: &PrecisionContext,
) -> Result<ComplexBall> {
    let target = Dyadic::pow2(target_log2);
    let mut cur = disk.clone();
    if cur.radius().cmp_val(&target) != std::cmp::Ordering::Greater {
        return Ok(cur);
    }
    let dg = g.derivative();
    for prec in ctx.ladder() {
        let mut z = (cur.re().clone(), cur.im().clone());
        // Newton: quadratic convergence, so prec/16 full-precision steps
        // are far more than enough between certifications
        let steps = 8 + prec / 16;
        for _ in 0..steps {
            let (val, dval) = horner_pair_dyadic(g.coeffs(), &z, prec);
            let Some(q) = c_div(&val, &dval, prec) else { break };
            z = (z.0.sub(&q.0).round_to_bits(prec, Round::Nearest),
                 z.1.sub(&q.1).round_to_bits(prec, Round::Nearest));
        }
        if let Some(d2) = henrici_disk(g, &dg, &z, prec) {
            if cur.contains_ball(&d2) {
                cur = d2;
                if cur.radius().cmp_val(&target) != std::cmp::Ordering::Greater {
                    return Ok(cur);
                }
            }
        }
    }
    Err(Error::NoConvergence {
        what: format!("root refinement to radius 2^{}", target_log2),
        reached: ctx.max_bits,
        ceiling: ctx.max_bits,
    })
}

/// Refine until exactly one of the disks (each holding one root of the
/// squarefree `poly`) meets the target region; returns its index. Disks are
/// refined in place, so ambiguity from fat disks resolves itself; a region
/// that truly straddles two roots or contains none is an input error.
pub fn select_matching_root(
    poly: &IntPoly,
    disks: &mut [ComplexBall],
    target: &ComplexBall,
    ctx: &PrecisionContext,
) -> Result<usize> {
    for _ in 0..64 {
        let hits: Vec<usize> = (0..disks.len())
            .filter(|&i| !disks[i].is_disjoint(target))
            .collect();
        match hits.len() {
            0 => {
                return Err(Error::InvalidInput(
                    "isolator region contains no root of the polynomial".into(),
                ))
            }
            1 => return Ok(hits[0]),
            _ => {
                for &i in &hits {
                    let cur = disks[i].radius().mag_exp().unwrap_or(-8);
                    disks[i] = refine_root(poly, &disks[i], cur - 8, ctx)?;
                }
            }
        }
    }
    Err(Error::InvalidInput(
        "isolator region cannot be resolved to a single root; widen or shift it".into(),
    ))
}

/// Decide for each certified disk whether its root is real.
fn flag_real(
    g: &IntPoly,
    disks: Vec<ComplexBall>,
    ctx: &PrecisionContext,
) -> Result<Vec<(ComplexBall, bool)>> {
    let mut disks = disks;
    let mut out: Vec<Option<bool>> = vec![None; disks.len()];
    for attempt in 0..24 {
        for i in 0..disks.len() {
            if out[i].is_some() {
                continue;
            }
            let d = &disks[i];
            // excludes the real axis: |im center| > radius, exact
            if d.im().abs().cmp_val(d.radius()) == std::cmp::Ordering::Greater {
                out[i] = Some(false);
                continue;
            }
            // conjugate disk disjoint from every sibling: were the root
            // nonreal, its conjugate (also a root of g) would have no disk
            let conj = d.conj();
            if (0..disks.len()).all(|j| j == i || conj.is_disjoint(&disks[j])) {
                out[i] = Some(true);
            }
        }
        if out.iter().all(|o| o.is_some()) {
            break;
        }
        // shrink the undecided disks and retry
        for i in 0..disks.len() {
            if out[i].is_none() {
                let cur_log2 = disks[i].radius().mag_exp().unwrap_or(-8);
                let target = cur_log2 - 6 * (attempt as i64 + 1);
                disks[i] = refine_root(g, &disks[i], target, ctx)?;
            }
        }
    }
    if let Some(i) = out.iter().position(|o| o.is_none()) {
        return Err(Error::NoConvergence {
            what: format!(
                "real/nonreal decision for root near ({}, {})",
                disks[i].re(),
                disks[i].im()
            ),
            reached: ctx.max_bits,
            ceiling: ctx.max_bits,
        });
    }
    Ok(disks.into_iter().zip(out.into_iter().map(|o| o.unwrap())).collect())
}

// f64 stage

fn coeffs_f64(g: &IntPoly) -> Option<Vec<f64>> {
    let max_bits = g.coeffs().iter().map(|c| c.bits()).max()?;
    let shift = max_bits.saturating_sub(900) as i64;
    let v: Vec<f64> = g
        .coeffs()
        .iter()
        .map(|c| Dyadic::from_bigint(c.clone()).mul_pow2(-shift).to_f64())
        .collect();
    if v.iter().all(|x| x.is_finite()) && *v.last()? != 0.0 {
        Some(v)
    } else {
        None
    }
}

fn horner2_f64(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut b = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        d = d * z + b;
        b = b * z + c;
    }
    (b, d)
}

fn aberth_f64(g: &IntPoly) -> Option<Vec<Complex64>> {
    let n = g.degree()?;
    let coeffs = coeffs_f64(g)?;
    let an = *coeffs.last()?;
    let radius = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| (c / an).abs())
            .fold(0.0_f64, f64::max);
    if !radius.is_finite() {
        return None;
    }
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::new(radius * theta.cos(), radius * theta.sin())
        })
        .collect();
    let tol = 1e-13_f64;
    for _ in 0..600 {
        let mut done = true;
        for k in 0..n {
            let (p, dp) = horner2_f64(&coeffs, z[k]);
            if !p.re.is_finite() || !p.im.is_finite() {
                return None;
            }
            if p.norm_sqr() == 0.0 {
                continue;
            }
            if dp.norm_sqr() == 0.0 {
                z[k] += Complex64::new(1e-4 * radius, 1.7e-4 * radius);
                done = false;
                continue;
            }
            let w = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            let mut degenerate = false;
            for j in 0..n {
                if j == k {
                    continue;
                }
                let d = z[k] - z[j];
                if d.norm_sqr() == 0.0 {
                    degenerate = true;
                    break;
                }
                s += Complex64::new(1.0, 0.0) / d;
            }
            if degenerate {
                z[k] += Complex64::new(1.3e-4 * radius, -0.7e-4 * radius);
                done = false;
                continue;
            }
            let denom = Complex64::new(1.0, 0.0) - w * s;
            if denom.norm_sqr() == 0.0 {
                z[k] += Complex64::new(-0.9e-4 * radius, 1.1e-4 * radius);
                done = false;
                continue;
            }
            let corr = w / denom;
            z[k] -= corr;
            if corr.norm_sqr() > tol * tol * (1.0 + z[k].norm_sqr()) {
                done = false;
            }
        }
        if done {
            return Some(z);
        }
    }
    Some(z)
}

// dyadic stage

fn circle_init(g: &IntPoly, n: usize) -> Vec<(Dyadic, Dyadic)> {
    let max_bits = g.coeffs().iter().map(|c| c.bits()).max().unwrap_or(1);
    let lead_bits = g.lead().bits();
    let e = 1 + max_bits as i64 - lead_bits as i64;
    (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            (
                Dyadic::from_f64(theta.cos()).unwrap().mul_pow2(e),
                Dyadic::from_f64(theta.sin()).unwrap().mul_pow2(e),
            )
        })
        .collect()
}

type C = (Dyadic, Dyadic);

fn c_mul(a: &C, b: &C, prec: u32) -> C {
    let re = a.0.mul(&b.0).sub(&a.1.mul(&b.1));
    let im = a.0.mul(&b.1).add(&a.1.mul(&b.0));
    (re.round_to_bits(prec, Round::Nearest), im.round_to_bits(prec, Round::Nearest))
}

fn c_div(a: &C, b: &C, prec: u32) -> Option<C> {
    let n2 = b.0.square().add(&b.1.square());
    if n2.is_zero() {
        return None;
    }
    let re = a.0.mul(&b.0).add(&a.1.mul(&b.1)).div(&n2, prec, Round::Nearest);
    let im = a.1.mul(&b.0).sub(&a.0.mul(&b.1)).div(&n2, prec, Round::Nearest);
    Some((re, im))
}

fn c_norm2_f64(a: &C) -> f64 {
    let n2 = a.0.square().add(&a.1.square());
    n2.to_f64()
}

/// Value and derivative of an integer polynomial at a rounded dyadic point.
fn horner_pair_dyadic(coeffs: &[BigInt], z: &C, prec: u32) -> (C, C) {
    let mut b: C = (Dyadic::zero(), Dyadic::zero());
    let mut d: C = (Dyadic::zero(), Dyadic::zero());
    for c in coeffs.iter().rev() {
        d = c_mul(&d, z, prec);
        d = (d.0.add(&b.0).round_to_bits(prec, Round::Nearest),
             d.1.add(&b.1).round_to_bits(prec, Round::Nearest));
        b = c_mul(&b, z, prec);
        if !c.is_zero() {
            b.0 = b.0.add(&Dyadic::from_bigint(c.clone())).round_to_bits(prec, Round::Nearest);
        }
    }
    (b, d)
}

fn aberth_dyadic(g: &IntPoly, _dg: &IntPoly, pts: &mut [(Dyadic, Dyadic)], prec: u32) {
    let n = pts.len();
    let max_iter = 40 + 4 * n as u32 + prec / 8;
    // convergence: |corr|^2 <= (1 + |z|^2) * 2^-prec, checked exactly
    let is_small = |corr: &C, z: &C| {
        let c2 = corr.0.square().add(&corr.1.square());
        let z2 = z.0.square().add(&z.1.square()).add(&Dyadic::one());
        c2.cmp_val(&z2.mul_pow2(-(prec as i64))) != std::cmp::Ordering::Greater
    };
    for _ in 0..max_iter {
        let mut done = true;
        for k in 0..n {
            let (p, dp) = horner_pair_dyadic(g.coeffs(), &pts[k], prec);
            if p.0.is_zero() && p.1.is_zero() {
                continue;
            }
            let Some(w) = c_div(&p, &dp, prec) else {
                pts[k].0 = pts[k].0.add(&Dyadic::pow2(-(prec as i64 / 2)));
                done = false;
                continue;
            };
            let mut s: C = (Dyadic::zero(), Dyadic::zero());
            let mut degenerate = false;
            for j in 0..n {
                if j == k {
                    continue;
                }
                let d: C = (pts[k].0.sub(&pts[j].0), pts[k].1.sub(&pts[j].1));
                match c_div(&(Dyadic::one(), Dyadic::zero()), &d, prec) {
                    Some(r) => {
                        s = (s.0.add(&r.0).round_to_bits(prec, Round::Nearest),
                             s.1.add(&r.1).round_to_bits(prec, Round::Nearest));
                    }
                    None => {
                        degenerate = true;
                        break;
                    }
                }
            }
            if degenerate {
                pts[k].1 = pts[k].1.add(&Dyadic::pow2(-(prec as i64 / 2)));
                done = false;
                continue;
            }
            let ws = c_mul(&w, &s, prec);
            let denom: C = (Dyadic::one().sub(&ws.0), ws.1.neg());
            let Some(corr) = c_div(&w, &denom, prec) else {
                pts[k].0 = pts[k].0.sub(&Dyadic::pow2(-(prec as i64 / 2)));
                done = false;
                continue;
            };
            pts[k] = (
                pts[k].0.sub(&corr.0).round_to_bits(prec, Round::Nearest),
                pts[k].1.sub(&corr.1).round_to_bits(prec, Round::Nearest),
            );
            if !is_small(&corr, &pts[k]) {
                done = false;
            }
        }
        if done {
            break;
        }
    }
    let _ = c_norm2_f64(&pts[0]);
}
