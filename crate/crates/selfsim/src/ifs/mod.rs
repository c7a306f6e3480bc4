//! Homogeneous self-similar iterated function systems x -> lam*x + t_j.
//!
//! The contraction ratio lam is either an exact algebraic number or a plain
//! real ball; translations always live in one shared number field. Exact
//! decisions (atom collapse, overlap detection) require exact lam and route
//! through the fastest sound path available: rational arithmetic, field
//! arithmetic when lam lies in the translation field, or the certified zero
//! test on lifted integer polynomials in the general case.

pub mod atoms;
pub mod diag;
pub mod mitm;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

use crate::algebra::AlgebraicNumber;
use crate::ball::{ComplexBall, PrecisionContext, RealBall};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldPoly, NumberField};
use crate::intpoly::IntPoly;
use crate::roots::{isolate_roots, select_matching_root};

/// Contraction ratio: exact algebraic or numeric-only.
#[derive(Debug, Clone)]
pub enum Lambda {
    Exact(AlgebraicNumber),
    Numeric(RealBall),
}

impl Lambda {
    pub fn is_exact(&self) -> bool {
        matches!(self, Lambda::Exact(_))
    }

    pub fn as_algebraic(&self) -> Option<&AlgebraicNumber> {
        match self {
            Lambda::Exact(a) => Some(a),
            Lambda::Numeric(_) => None,
        }
    }

    /// Real enclosure with radius at most 2^-prec when exact (numeric lam
    /// returns its fixed ball).
    pub fn ball(&self, prec: u32) -> Result<RealBall> {
        match self {
            Lambda::Exact(a) => Ok(a.refined(-(prec as i64))?.re_ball()),
            Lambda::Numeric(b) => Ok(b.clone()),
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Lambda::Exact(a) if a.degree() == 1 => {
                let f = a.minpoly();
                Some(BigRational::new(-f.constant().clone(), f.lead().clone()))
            }
            _ => None,
        }
    }
}

/// A homogeneous IFS with probability weights.
#[derive(Debug)]
pub struct IFSSpec {
    field: NumberField,
    lam: Lambda,
    /// Set when lam is recognized as an element of the translation field
    /// (rational, or equal to the field generator up to denominator).
    lam_in_field: Option<FieldElement>,
    translations: Vec<FieldElement>,
    probs: Vec<BigRational>,
}

impl IFSSpec {
    pub fn new(
        field: NumberField,
        lam: Lambda,
        translations: Vec<FieldElement>,
        probs: Vec<BigRational>,
    ) -> Result<IFSSpec> {
        if translations.is_empty() {
            return Err(Error::InvalidInput("an IFS needs at least one map".into()));
        }
        if translations.len() != probs.len() {
            return Err(Error::InvalidInput(format!(
                "{} translations but {} probabilities",
                translations.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_positive()) {
            return Err(Error::InvalidInput(
                "probabilities must be strictly positive".into(),
            ));
        }
        let total: BigRational = probs.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {}, not 1",
                total
            )));
        }
        if !field.embedding_is_real(field.primary_index())
            && translations.iter().any(|t| !t.is_rational())
        {
            return Err(Error::InvalidInput(
                "translations must be real: the field's primary embedding is complex and a translation has nonconstant coordinates".into(),
            ));
        }
        validate_lambda_range(&lam, field.context())?;
        let lam_in_field = recognize_lambda_in_field(&lam, &field)?;
        Ok(IFSSpec {
            field,
            lam,
            lam_in_field,
            translations,
            probs,
        })
    }

    pub fn from_json(text: &str, ctx: &PrecisionContext) -> Result<IFSSpec> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("config is not valid JSON: {}", e)))?;
        IFSSpec::from_value(&v, ctx)
    }

    pub fn from_value(v: &Value, ctx: &PrecisionContext) -> Result<IFSSpec> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::InvalidInput("config root must be a JSON object".into()))?;

        let fm = obj
            .get("field_minpoly")
            .ok_or_else(|| Error::InvalidInput("missing field_minpoly".into()))?;
        let field_minpoly = parse_int_poly(fm)?;

        let lam_val = obj
            .get("lambda")
            .ok_or_else(|| Error::InvalidInput("missing lambda".into()))?;
        let lam = parse_lambda(lam_val, ctx)?;

        // lambda's isolator pins which real embedding the config means: when
        // theta = lead*lam has the field polynomial, theta embeds to that root
        let field = match field_isolator_from_lambda(&field_minpoly, &lam, ctx)? {
            Some(disk) => NumberField::with_isolator(field_minpoly, &disk, ctx)?,
            None => NumberField::new(field_minpoly, ctx)?,
        };

        let trs = obj
            .get("translations")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("translations must be an array".into()))?;
        let mut translations = Vec::with_capacity(trs.len());
        for (i, t) in trs.iter().enumerate() {
            let row = t.as_array().ok_or_else(|| {
                Error::InvalidInput(format!(
                    "translation {} must be an array [coords..., denom]",
                    i
                ))
            })?;
            if row.len() != field.degree() + 1 {
                return Err(Error::InvalidInput(format!(
                    "translation {} has {} entries; expected {} coordinates plus a denominator",
                    i,
                    row.len(),
                    field.degree()
                )));
            }
            let coords: Vec<BigInt> = row[..field.degree()]
                .iter()
                .map(parse_bigint_value)
                .collect::<Result<_>>()?;
            let denom = parse_bigint_value(&row[field.degree()])?;
            translations.push(field.from_coords(coords, denom)?);
        }

        let ps = obj
            .get("probs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("probs must be an array".into()))?;
        let probs: Vec<BigRational> = ps
            .iter()
            .map(|p| {
                p.as_str()
                    .ok_or_else(|| Error::InvalidInput("probabilities must be strings".into()))
                    .and_then(parse_rational_str)
            })
            .collect::<Result<_>>()?;

        IFSSpec::new(field, lam, translations, probs)
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn lam(&self) -> &Lambda {
        &self.lam
    }

    /// lam as an element of the translation field, when recognized.
    pub fn lam_in_field(&self) -> Option<&FieldElement> {
        self.lam_in_field.as_ref()
    }

    pub fn translations(&self) -> &[FieldElement] {
        &self.translations
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn num_maps(&self) -> usize {
        self.translations.len()
    }

    pub fn context(&self) -> &PrecisionContext {
        self.field.context()
    }

    pub fn lambda_ball(&self, prec: u32) -> Result<RealBall> {
        self.lam.ball(prec)
    }

    /// |log lam| enclosure (the similarity dimension denominator).
    pub fn log_lambda_abs(&self, prec: u32) -> Result<RealBall> {
        let b = self.lambda_ball(prec + 8)?.abs_ball();
        Ok(b.ln(prec))
    }

    pub fn difference_set(&self) -> Result<DifferenceSet> {
        DifferenceSet::new(self)
    }

    pub fn translation_ball(&self, j: usize, prec: u32) -> Result<RealBall> {
        let b = self.field.embed_primary(&self.translations[j], prec)?;
        Ok(b.re_ball())
    }
}

fn validate_lambda_range(lam: &Lambda, ctx: &PrecisionContext) -> Result<()> {
    let in_range = |b: &RealBall| -> bool {
        b.lo().cmp_val(&Dyadic::from_i64(-1)) == std::cmp::Ordering::Greater
            && b.hi().cmp_val(&Dyadic::one()) == std::cmp::Ordering::Less
            && b.excludes_zero()
    };
    match lam {
        Lambda::Numeric(b) => {
            if in_range(b) {
                Ok(())
            } else {
                Err(Error::InvalidInput(
                    "numeric contraction ball must certify 0 < |lam| < 1".into(),
                ))
            }
        }
        Lambda::Exact(a) => {
            if !a.is_real() {
                return Err(Error::InvalidInput(
                    "the contraction ratio must be real".into(),
                ));
            }
            if let Some(r) = (Lambda::Exact(a.clone())).as_rational() {
                let abs = r.abs();
                return if abs.is_zero() || abs >= BigRational::one() {
                    Err(Error::InvalidInput(format!(
                        "rational contraction {} is outside (-1,1) or zero",
                        r
                    )))
                } else {
                    Ok(())
                };
            }
            // degree >= 2: lam is never exactly 0 or +-1, so refinement decides
            for prec in ctx.ladder() {
                let b = a.real_interval(-(prec as i64))?;
                if in_range(&b) {
                    return Ok(());
                }
                let outside = b.hi().cmp_val(&Dyadic::from_i64(-1)) != std::cmp::Ordering::Greater
                    || b.lo().cmp_val(&Dyadic::one()) != std::cmp::Ordering::Less;
                if outside {
                    return Err(Error::InvalidInput(
                        "contraction ratio lies outside (-1, 1)".into(),
                    ));
                }
            }
            Err(Error::NoConvergence {
                what: "certifying 0 < |lam| < 1".into(),
                reached: ctx.max_bits,
                ceiling: ctx.max_bits,
            })
        }
    }
}

/// Minimal polynomial of theta = lead * lam, given the minimal polynomial of
/// lam: lead^(d-1) f(X/lead), which is monic with integer coefficients.
pub(crate) fn monic_rescale(f: &IntPoly) -> IntPoly {
    let d = f.degree().unwrap_or(0);
    let lead = f.lead();
    IntPoly::new(
        f.coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == d {
                    BigInt::one()
                } else {
                    c * lead.pow((d - 1 - i) as u32)
                }
            })
            .collect(),
    )
}

/// When an exact irrational lambda's monic rescaling theta = lead * lam has
/// the field's polynomial, the config pins the embedding: theta must map to
/// lead * lam. Returns an isolator disk for that root.
fn field_isolator_from_lambda(
    minpoly: &IntPoly,
    lam: &Lambda,
    ctx: &PrecisionContext,
) -> Result<Option<ComplexBall>> {
    let a = match lam {
        Lambda::Exact(a) => a,
        Lambda::Numeric(_) => return Ok(None),
    };
    if a.degree() < 2
        || a.degree() != minpoly.degree().unwrap_or(0)
        || monic_rescale(a.minpoly()) != *minpoly
    {
        return Ok(None);
    }
    let lam_disk = a.refined(-(ctx.working_bits as i64))?;
    Ok(Some(lam_disk.mul_int(&a.minpoly().lead(), ctx.working_bits)))
}

/// Decide whether lam is (recognizably) an element of the translation field:
/// rational lam always is; otherwise lam qualifies when its monic rescaling
/// theta = lead * lam has the field's minimal polynomial and selects the
/// field's primary root.
fn recognize_lambda_in_field(lam: &Lambda, field: &NumberField) -> Result<Option<FieldElement>> {
    let a = match lam {
        Lambda::Exact(a) => a,
        Lambda::Numeric(_) => return Ok(None),
    };
    if let Some(r) = lam.as_rational() {
        return Ok(Some(field.from_rational(&r)));
    }
    if a.degree() != field.degree() {
        return Ok(None);
    }
    let lead = a.minpoly().lead();
    if monic_rescale(a.minpoly()) != *field.minpoly() {
        return Ok(None);
    }
    // same polynomial: check the selected root matches the primary embedding
    let iso = isolate_roots(field.minpoly(), field.context())?;
    let mut disks: Vec<ComplexBall> = iso.roots.iter().map(|r| r.disk.clone()).collect();
    let lam_disk = a.refined(-(field.context().working_bits as i64))?;
    let target = lam_disk.mul_int(&lead, field.context().working_bits);
    let idx = select_matching_root(field.minpoly(), &mut disks, &target, field.context())?;
    if idx != field.primary_index() {
        return Ok(None);
    }
    let mut coords = vec![BigInt::zero(); field.degree()];
    coords[1] = BigInt::one();
    Ok(Some(field.from_coords(coords, lead)?))
}

fn parse_lambda(v: &Value, ctx: &PrecisionContext) -> Result<Lambda> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::InvalidInput("lambda must be a JSON object".into()))?;
    if let Some(d) = obj.get("decimal") {
        let s = d
            .as_str()
            .ok_or_else(|| Error::InvalidInput("lambda.decimal must be a string".into()))?;
        let r = parse_rational_str(s)?;
        let a = AlgebraicNumber::from_rational(&r, ctx)?;
        return Ok(Lambda::Exact(a));
    }
    if let Some(m) = obj.get("minpoly") {
        let minpoly = parse_int_poly(m)?;
        let iso = obj
            .get("isolator")
            .ok_or_else(|| Error::InvalidInput("lambda.minpoly needs an isolator".into()))?;
        let disk = parse_complex_ball(iso, ctx.working_bits)?;
        let a = AlgebraicNumber::new(minpoly, &disk, ctx)?;
        return Ok(Lambda::Exact(a));
    }
    if let Some(nv) = obj.get("numeric") {
        let no = nv
            .as_object()
            .ok_or_else(|| Error::InvalidInput("lambda.numeric must be an object".into()))?;
        let val = no
            .get("value")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidInput("lambda.numeric.value must be a string".into()))?;
        let rad = no
            .get("radius")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidInput("lambda.numeric.radius must be a string".into()))?;
        let c = parse_rational_str(val)?;
        let r = parse_rational_str(rad)?;
        if r.is_negative() {
            return Err(Error::InvalidInput("radius must be nonnegative".into()));
        }
        let center = RealBall::from_ratio(c.numer(), c.denom(), 128);
        let rb = RealBall::from_ratio(r.numer(), r.denom(), 64);
        let ball = RealBall::new(center.center().clone(), center.radius().add(&rb.hi()));
        return Ok(Lambda::Numeric(ball));
    }
    Err(Error::InvalidInput(
        "lambda needs one of: {minpoly, isolator}, {decimal}, {numeric}".into(),
    ))
}

/// Accepts JSON integers or decimal-integer strings.
pub(crate) fn parse_bigint_value(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else {
                Err(Error::InvalidInput(format!("{} is not an integer", n)))
            }
        }
        Value::String(s) => s
            .trim()
            .parse::<BigInt>()
            .map_err(|_| Error::InvalidInput(format!("'{}' is not an integer", s))),
        _ => Err(Error::InvalidInput(format!(
            "expected an integer, got {}",
            v
        ))),
    }
}

pub(crate) fn parse_int_poly(v: &Value) -> Result<IntPoly> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::InvalidInput("a polynomial must be a coefficient array".into()))?;
    let coeffs: Vec<BigInt> = arr.iter().map(parse_bigint_value).collect::<Result<_>>()?;
    Ok(IntPoly::new(coeffs))
}

/// "p/q", plain integers, and decimal notation with optional exponent
/// ("0.25", "-1.5e-3") all parse exactly.
pub fn parse_rational_str(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("'{}' is not a rational number", s));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mant, exp10) = match s.split_once(|c| c == 'e' || c == 'E') {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    if frac_part.contains(['+', '-']) {
        return Err(bad());
    }
    let digits = format!("{}{}", int_part, frac_part);
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(bad());
    }
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let shift = exp10 - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if shift >= 0 {
        BigRational::from_integer(n * ten.pow(shift as u32))
    } else {
        BigRational::new(n, ten.pow((-shift) as u32))
    })
}

fn parse_complex_ball(v: &Value, bits: u32) -> Result<ComplexBall> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::InvalidInput("an isolator must be {re, im, radius}".into()))?;
    let get = |key: &str| -> Result<BigRational> {
        match obj.get(key) {
            Some(Value::String(s)) => parse_rational_str(s),
            Some(other) => Err(Error::InvalidInput(format!(
                "isolator.{} must be a string, got {}",
                key, other
            ))),
            None if key == "im" => Ok(BigRational::zero()),
            None => Err(Error::InvalidInput(format!("isolator is missing {}", key))),
        }
    };
    let re = get("re")?;
    let im = get("im")?;
    let rad = get("radius")?;
    if rad.is_negative() {
        return Err(Error::InvalidInput("isolator radius must be nonnegative".into()));
    }
    let reb = RealBall::from_ratio(re.numer(), re.denom(), bits);
    let imb = RealBall::from_ratio(im.numer(), im.denom(), bits);
    let radb = RealBall::from_ratio(rad.numer(), rad.denom(), 64);
    let radius = reb.radius().add(imb.radius()).add(&radb.hi());
    Ok(ComplexBall::new(
        reb.center().clone(),
        imb.center().clone(),
        radius,
    ))
}

/// The deduplicated difference set {t_i - t_j}, sorted by numeric value for
/// stable indexing. Always contains 0 and is closed under negation.
#[derive(Debug, Clone)]
pub struct DifferenceSet {
    elements: Vec<FieldElement>,
    /// Lexicographically least (i, j) with t_i - t_j = element.
    reps: Vec<(usize, usize)>,
    zero_index: usize,
    /// Whether two distinct maps share a translation, i.e. the zero
    /// difference is realized by distinct letters.
    dup_translations: bool,
}

impl DifferenceSet {
    pub fn new(ifs: &IFSSpec) -> Result<DifferenceSet> {
        let field = ifs.field();
        let t = ifs.translations();
        let mut by_elem: HashMap<FieldElement, (usize, usize)> = HashMap::new();
        let mut dup = false;
        for i in 0..t.len() {
            for j in 0..t.len() {
                let d = field.sub(&t[i], &t[j]);
                if d.is_zero() && i != j {
                    dup = true;
                }
                by_elem.entry(d).or_insert((i, j));
            }
        }
        let mut rows: Vec<(FieldElement, (usize, usize))> = by_elem.into_iter().collect();
        // order by numeric value; distinct field elements separate under
        // refinement, and exact equality was already merged
        let prec = ifs.context().working_bits;
        let mut keyed: Vec<(Dyadic, FieldElement, (usize, usize))> = rows
            .drain(..)
            .map(|(e, rep)| {
                let c = field.embed_primary(&e, prec).map(|b| b.re().clone());
                c.map(|c| (c, e, rep))
            })
            .collect::<Result<_>>()?;
        keyed.sort_by(|a, b| {
            a.0.cmp_val(&b.0)
                .then_with(|| a.1.coords().cmp(b.1.coords()))
                .then_with(|| a.1.denom().cmp(b.1.denom()))
        });
        let mut elements = Vec::with_capacity(keyed.len());
        let mut reps = Vec::with_capacity(keyed.len());
        let mut zero_index = usize::MAX;
        for (k, (_, e, rep)) in keyed.into_iter().enumerate() {
            if e.is_zero() {
                zero_index = k;
            }
            elements.push(e);
            reps.push(rep);
        }
        debug_assert!(zero_index != usize::MAX);
        Ok(DifferenceSet {
            elements,
            reps,
            zero_index,
            dup_translations: dup,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.elements
    }

    pub fn zero_index(&self) -> usize {
        self.zero_index
    }

    pub fn dup_translations(&self) -> bool {
        self.dup_translations
    }

    /// A translation pair (i, j) realizing element k.
    pub fn rep(&self, k: usize) -> (usize, usize) {
        self.reps[k]
    }

    /// All elements as exact rationals, when the set is rational.
    pub fn as_rationals(&self) -> Option<Vec<BigRational>> {
        self.elements.iter().map(|e| e.to_rational()).collect()
    }

    /// Ratio max|d| / min|d| over nonzero elements, as a certified ball.
    /// Needs at least one nonzero element.
    pub fn magnitude_ratio(&self, field: &NumberField, prec: u32) -> Result<RealBall> {
        let mut lo_min: Option<Dyadic> = None;
        let mut hi_min: Option<Dyadic> = None;
        let mut lo_max: Option<Dyadic> = None;
        let mut hi_max: Option<Dyadic> = None;
        for (k, e) in self.elements.iter().enumerate() {
            if k == self.zero_index {
                continue;
            }
            // nonzero element: refine until the magnitude is certified positive
            let mut p = prec;
            let b = loop {
                let b = field.embed_primary(e, p)?.modulus(p);
                if b.lo().is_positive() {
                    break b;
                }
                if p >= field.context().max_bits {
                    return Err(Error::NoConvergence {
                        what: format!("certifying |{}| > 0", e),
                        reached: p,
                        ceiling: field.context().max_bits,
                    });
                }
                p *= 2;
            };
            let (lo, hi) = (b.lo(), b.hi());
            if lo_min.as_ref().map_or(true, |m| lo.cmp_val(m) == std::cmp::Ordering::Less) {
                lo_min = Some(lo.clone());
            }
            if hi_min.as_ref().map_or(true, |m| hi.cmp_val(m) == std::cmp::Ordering::Less) {
                hi_min = Some(hi.clone());
            }
            if lo_max.as_ref().map_or(true, |m| lo.cmp_val(m) == std::cmp::Ordering::Greater) {
                lo_max = Some(lo.clone());
            }
            if hi_max.as_ref().map_or(true, |m| hi.cmp_val(m) == std::cmp::Ordering::Greater) {
                hi_max = Some(hi.clone());
            }
        }
        let (lo_min, hi_min, lo_max, hi_max) = match (lo_min, hi_min, lo_max, hi_max) {
            (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
            _ => {
                return Err(Error::InvalidInput(
                    "magnitude ratio needs a nonzero difference".into(),
                ))
            }
        };
        // ratio in [lo_max/hi_min, hi_max/lo_min]
        let num = RealBall::from_interval(&lo_max, &hi_max);
        let den = RealBall::from_interval(&lo_min, &hi_min);
        Ok(num.div(&den, prec))
    }
}

/// A polynomial with coefficients drawn from a difference set, stored as
/// indices. Length is degree bound + 1; trailing zero coefficients allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FamilyPolynomial {
    pub coeff_indices: Vec<u32>,
}

impl FamilyPolynomial {
    pub fn new(coeff_indices: Vec<u32>) -> FamilyPolynomial {
        FamilyPolynomial { coeff_indices }
    }

    pub fn to_field_poly(&self, dset: &DifferenceSet) -> FieldPoly {
        FieldPoly::new(
            self.coeff_indices
                .iter()
                .map(|&k| dset.elements()[k as usize].clone())
                .collect(),
        )
    }

    pub fn is_zero(&self, dset: &DifferenceSet) -> bool {
        self.coeff_indices
            .iter()
            .all(|&k| k as usize == dset.zero_index())
    }

    pub fn coeff_strings(&self, dset: &DifferenceSet) -> Vec<String> {
        self.coeff_indices
            .iter()
            .map(|&k| dset.elements()[k as usize].to_string())
            .collect()
    }
}

/// The composition of the maps along a word, as an affine map
/// x -> lam^depth * x + translation.
#[derive(Debug, Clone)]
pub struct ComposedMap {
    pub depth: usize,
    /// translation = sum coeffs[k] * lam^k, exactly.
    pub coeffs: Vec<FieldElement>,
    pub value: RealBall,
}

/// Word letters are 0-based map indices.
pub fn compose_word(ifs: &IFSSpec, word: &[usize]) -> Result<ComposedMap> {
    if word.is_empty() {
        return Err(Error::InvalidInput("the empty word has no composition".into()));
    }
    if let Some(&bad) = word.iter().find(|&&j| j >= ifs.num_maps()) {
        return Err(Error::InvalidInput(format!(
            "letter {} exceeds the map count {}",
            bad,
            ifs.num_maps()
        )));
    }
    let coeffs: Vec<FieldElement> = word
        .iter()
        .map(|&j| ifs.translations()[j].clone())
        .collect();
    let value = eval_lambda_poly(ifs, &coeffs, ifs.context().working_bits)?;
    Ok(ComposedMap {
        depth: word.len(),
        coeffs,
        value,
    })
}

/// Numeric value of sum coeffs[k] * lam^k as a real ball.
pub fn eval_lambda_poly(ifs: &IFSSpec, coeffs: &[FieldElement], prec: u32) -> Result<RealBall> {
    let lam = ifs.lambda_ball(prec + 8)?;
    let mut acc = RealBall::exact(Dyadic::zero());
    for c in coeffs.iter().rev() {
        let cb = ifs.field().embed_primary(c, prec + 8)?.re_ball();
        acc = acc.mul(&lam, prec + 8).add(&cb, prec + 8);
    }
    Ok(acc)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    pub(crate) fn golden_json() -> &'static str {
        r#"{
            "field_minpoly": ["-1", "1", "1"],
            "lambda": {"minpoly": ["-1", "1", "1"], "isolator": {"re": "0.6", "im": "0", "radius": "0.1"}},
            "translations": [["0", "0", "1"], ["1", "0", "1"]],
            "probs": ["1/2", "1/2"]
        }"#
    }

    pub(crate) fn dyadic_json() -> &'static str {
        r#"{
            "field_minpoly": ["-1", "1"],
            "lambda": {"decimal": "0.5"},
            "translations": [["0", "1"], ["1", "1"]],
            "probs": ["1/2", "1/2"]
        }"#
    }

    #[test]
    fn rational_string_forms() {
        assert_eq!(parse_rational_str("1/2").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational_str("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_rational_str("-1.5e-2").unwrap(), BigRational::new((-3).into(), 200.into()));
        assert_eq!(parse_rational_str("7").unwrap(), BigRational::from_integer(7.into()));
        assert!(parse_rational_str("1/0").is_err());
        assert!(parse_rational_str("abc").is_err());
    }

    #[test]
    fn golden_config_parses_with_lambda_as_generator() {
        let ifs = IFSSpec::from_json(golden_json(), &ctx()).unwrap();
        assert_eq!(ifs.num_maps(), 2);
        assert_eq!(ifs.field().degree(), 2);
        // lam = theta recognized
        let lf = ifs.lam_in_field().expect("lambda is the field generator");
        assert_eq!(lf, &ifs.field().theta());
        let b = ifs.lambda_ball(64).unwrap();
        assert!((b.to_f64() - 0.6180339887498949).abs() < 1e-12);
    }

    #[test]
    fn dyadic_config_parses_rational() {
        let ifs = IFSSpec::from_json(dyadic_json(), &ctx()).unwrap();
        let r = ifs.lam().as_rational().unwrap();
        assert_eq!(r, BigRational::new(1.into(), 2.into()));
        assert!(ifs.lam_in_field().is_some());
    }

    #[test]
    fn validation_rejects_bad_probs_and_range() {
        let bad_probs = dyadic_json().replace("\"1/2\", \"1/2\"", "\"1/2\", \"1/3\"");
        assert!(IFSSpec::from_json(&bad_probs, &ctx()).is_err());
        let bad_lam = dyadic_json().replace("0.5", "1.5");
        assert!(IFSSpec::from_json(&bad_lam, &ctx()).is_err());
        let zero_lam = dyadic_json().replace("0.5", "0");
        assert!(IFSSpec::from_json(&zero_lam, &ctx()).is_err());
    }

    #[test]
    fn difference_set_examples() {
        let ifs = IFSSpec::from_json(dyadic_json(), &ctx()).unwrap();
        let d = ifs.difference_set().unwrap();
        // t = {0, 1} -> {-1, 0, 1}, sorted
        assert_eq!(d.len(), 3);
        let rats = d.as_rationals().unwrap();
        let expect: Vec<BigRational> = [-1i64, 0, 1]
            .iter()
            .map(|&v| BigRational::from_integer(v.into()))
            .collect();
        assert_eq!(rats, expect);
        assert_eq!(d.zero_index(), 1);
        assert!(!d.dup_translations());
        // closed under negation and representatives are consistent
        for k in 0..d.len() {
            let (i, j) = d.rep(k);
            let diff = ifs.field().sub(&ifs.translations()[i], &ifs.translations()[j]);
            assert_eq!(&diff, &d.elements()[k]);
        }
    }

    #[test]
    fn difference_set_three_translations() {
        let json = r#"{
            "field_minpoly": ["-1", "1"],
            "lambda": {"decimal": "0.5"},
            "translations": [["0", "1"], ["1", "1"], ["3", "1"]],
            "probs": ["1/3", "1/3", "1/3"]
        }"#;
        let ifs = IFSSpec::from_json(json, &ctx()).unwrap();
        let d = ifs.difference_set().unwrap();
        let rats = d.as_rationals().unwrap();
        let expect: Vec<BigRational> = [-3i64, -2, -1, 0, 1, 2, 3]
            .iter()
            .map(|&v| BigRational::from_integer(v.into()))
            .collect();
        assert_eq!(rats, expect);
    }

    #[test]
    fn single_map_difference_set_is_zero() {
        let json = r#"{
            "field_minpoly": ["-1", "1"],
            "lambda": {"decimal": "0.5"},
            "translations": [["0", "1"]],
            "probs": ["1"]
        }"#;
        let ifs = IFSSpec::from_json(json, &ctx()).unwrap();
        let d = ifs.difference_set().unwrap();
        assert_eq!(d.len(), 1);
        assert!(d.elements()[0].is_zero());
    }

    #[test]
    fn compose_word_examples() {
        // lam = 1/2, t = {0, 1}, word (2,2) 1-based = (1,1) 0-based:
        // translation 1 + 1/2 = 3/2
        let ifs = IFSSpec::from_json(dyadic_json(), &ctx()).unwrap();
        let c = compose_word(&ifs, &[1, 1]).unwrap();
        assert_eq!(c.depth, 2);
        assert!((c.value.to_f64() - 1.5).abs() < 1e-12);

        // golden, word (1,2,2) 1-based = (0,1,1) 0-based: g + g^2 = 1
        let ifs = IFSSpec::from_json(golden_json(), &ctx()).unwrap();
        let c = compose_word(&ifs, &[0, 1, 1]).unwrap();
        assert!((c.value.to_f64() - 1.0).abs() < 1e-12);
        assert!(c.value.contains(&Dyadic::one()));

        // singleton
        let c = compose_word(&ifs, &[1]).unwrap();
        assert_eq!(c.coeffs.len(), 1);
        assert_eq!(c.coeffs[0], ifs.field().one());
    }

    #[test]
    fn compose_word_concatenation_is_symbolic_concat() {
        let ifs = IFSSpec::from_json(golden_json(), &ctx()).unwrap();
        let j1 = [0usize, 1];
        let j2 = [1usize, 0, 1];
        let whole: Vec<usize> = j1.iter().chain(j2.iter()).cloned().collect();
        let a = compose_word(&ifs, &j1).unwrap();
        let b = compose_word(&ifs, &j2).unwrap();
        let c = compose_word(&ifs, &whole).unwrap();
        let mut expect = a.coeffs.clone();
        expect.extend(b.coeffs.iter().cloned());
        assert_eq!(c.coeffs, expect);
    }

    #[test]
    fn numeric_lambda_accepted_but_not_in_field() {
        let json = r#"{
            "field_minpoly": ["-1", "1"],
            "lambda": {"numeric": {"value": "0.61803398874989", "radius": "1e-10"}},
            "translations": [["0", "1"], ["1", "1"]],
            "probs": ["1/2", "1/2"]
        }"#;
        let ifs = IFSSpec::from_json(json, &ctx()).unwrap();
        assert!(!ifs.lam().is_exact());
        assert!(ifs.lam_in_field().is_none());
    }

    #[test]
    fn magnitude_ratio_of_unit_differences() {
        let ifs = IFSSpec::from_json(dyadic_json(), &ctx()).unwrap();
        let d = ifs.difference_set().unwrap();
        let rho = d.magnitude_ratio(ifs.field(), 64).unwrap();
        assert!(rho.contains(&Dyadic::one()));
        assert!(rho.radius_f64_up() < 1e-10);
    }
}
