//! Level-n atom distributions and exact-overlap detection.
//!
//! The level-n measure is the push-forward of the uniform word measure:
//! atom value sum_{k<n} lam^k t_{w_k}, weight prod p_{w_k}. Collapsing the
//! word tree level by level keeps the working set at the number of distinct
//! atoms instead of m^n, and a merge event during extension is precisely an
//! exact overlap at that level.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::One;

use crate::ball::RealBall;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldPoly};
use crate::algebra::certified_is_zero;
use crate::field::lift_to_int_poly;

use super::IFSSpec;

/// How atom values are compared when collapsing.
#[derive(Debug, Clone)]
pub enum CollapseMode {
    /// Exact decisions; requires an exact contraction ratio.
    Certified,
    /// Merge values closer than the tolerance, error when a pair cannot be
    /// certified on either side of it.
    Numeric(Dyadic),
}

#[derive(Debug, Clone)]
pub struct Atom {
    /// Lexicographically least word mapping to this atom (0-based letters).
    pub word: Vec<u32>,
    pub prob: BigRational,
    pub value: RealBall,
    /// Exact value when lam lies in the translation field.
    pub exact: Option<FieldElement>,
    /// Number of length-n words collapsed into this atom.
    pub merged_words: u128,
}

#[derive(Debug, Clone)]
pub struct AtomSet {
    pub level: usize,
    pub atoms: Vec<Atom>,
}

impl AtomSet {
    pub fn root(ifs: &IFSSpec) -> AtomSet {
        let exact = ifs.lam_in_field().map(|_| ifs.field().zero());
        AtomSet {
            level: 0,
            atoms: vec![Atom {
                word: Vec::new(),
                prob: BigRational::one(),
                value: RealBall::exact(Dyadic::zero()),
                exact,
                merged_words: 1,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total probability, exactly (sanity invariant: always 1).
    pub fn total_prob(&self) -> BigRational {
        self.atoms.iter().map(|a| a.prob.clone()).sum()
    }
}

/// A pair of distinct equal-length words whose compositions coincide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapWitness {
    pub n: usize,
    pub word1: Vec<u32>,
    pub word2: Vec<u32>,
}

impl OverlapWitness {
    /// 1-based letters for reports.
    pub fn one_based(&self) -> (Vec<u32>, Vec<u32>) {
        (
            self.word1.iter().map(|&l| l + 1).collect(),
            self.word2.iter().map(|&l| l + 1).collect(),
        )
    }
}

struct Candidate {
    word: Vec<u32>,
    prob: BigRational,
    value: RealBall,
    exact: Option<FieldElement>,
    merged_words: u128,
}

/// Extend a collapsed level to the next one, reporting merge events
/// (pairs of representative words that collided).
pub fn extend_atoms(
    ifs: &IFSSpec,
    set: &AtomSet,
    mode: &CollapseMode,
) -> Result<(AtomSet, Vec<(Vec<u32>, Vec<u32>)>)> {
    let level = set.level;
    let m = ifs.num_maps();
    let prec = ifs.context().working_bits;

    // addend for letter j at this depth: lam^level * t_j
    let lam_pow_exact = ifs
        .lam_in_field()
        .map(|lf| ifs.field().pow(lf, level as u32));
    let lam_pow_ball = ifs.lambda_ball(prec + 16)?.pow_u(level as u32, prec + 16);
    let mut addends: Vec<(RealBall, Option<FieldElement>)> = Vec::with_capacity(m);
    for j in 0..m {
        let tb = ifs.translation_ball(j, prec + 16)?;
        let ball = lam_pow_ball.mul(&tb, prec + 8);
        let exact = lam_pow_exact
            .as_ref()
            .map(|lp| ifs.field().mul(lp, &ifs.translations()[j]));
        addends.push((ball, exact));
    }

    let mut cands: Vec<Candidate> = Vec::with_capacity(set.atoms.len() * m);
    for atom in &set.atoms {
        for (j, (ab, ae)) in addends.iter().enumerate() {
            let mut word = atom.word.clone();
            word.push(j as u32);
            cands.push(Candidate {
                word,
                prob: &atom.prob * &ifs.probs()[j],
                value: atom.value.add(ab, prec + 8),
                exact: match (&atom.exact, ae) {
                    (Some(x), Some(a)) => Some(ifs.field().add(x, a)),
                    _ => None,
                },
                merged_words: atom.merged_words,
            });
        }
    }

    let (atoms, merges) = match mode {
        CollapseMode::Certified => {
            if ifs.lam_in_field().is_some() {
                collapse_exact(cands)
            } else if ifs.lam().is_exact() {
                collapse_certified_general(ifs, cands)?
            } else {
                return Err(Error::InvalidInput(
                    "certified collapse requires an exact contraction ratio".into(),
                ));
            }
        }
        CollapseMode::Numeric(tol) => collapse_numeric(cands, tol)?,
    };

    let mut out = AtomSet {
        level: level + 1,
        atoms,
    };
    sort_atoms(&mut out);
    Ok((out, merges))
}

/// Collapsed atoms at level n.
pub fn atoms(ifs: &IFSSpec, n: usize, mode: &CollapseMode) -> Result<AtomSet> {
    let mut set = AtomSet::root(ifs);
    for _ in 0..n {
        set = extend_atoms(ifs, &set, mode)?.0;
    }
    Ok(set)
}

/// The least n <= n_max at which two distinct equal-length words compose to
/// the same map, with the lexicographically least witness pair.
pub fn detect_exact_overlaps(ifs: &IFSSpec, n_max: usize) -> Result<Option<OverlapWitness>> {
    if !ifs.lam().is_exact() {
        return Err(Error::InvalidInput(
            "overlap detection requires an exact contraction ratio".into(),
        ));
    }
    let mut set = AtomSet::root(ifs);
    for level in 1..=n_max {
        let (next, merges) = extend_atoms(ifs, &set, &CollapseMode::Certified)?;
        if let Some(best) = merges
            .into_iter()
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .min()
        {
            return Ok(Some(OverlapWitness {
                n: level,
                word1: best.0,
                word2: best.1,
            }));
        }
        set = next;
    }
    Ok(None)
}

fn sort_atoms(set: &mut AtomSet) {
    set.atoms.sort_by(|a, b| {
        a.value
            .center()
            .cmp_val(b.value.center())
            .then_with(|| a.word.cmp(&b.word))
    });
}

fn collapse_exact(cands: Vec<Candidate>) -> (Vec<Atom>, Vec<(Vec<u32>, Vec<u32>)>) {
    let mut by_value: HashMap<FieldElement, Atom> = HashMap::with_capacity(cands.len());
    let mut merges = Vec::new();
    for c in cands {
        let key = c.exact.clone().expect("exact path requires exact values");
        match by_value.get_mut(&key) {
            None => {
                by_value.insert(
                    key,
                    Atom {
                        word: c.word,
                        prob: c.prob,
                        value: c.value,
                        exact: c.exact,
                        merged_words: c.merged_words,
                    },
                );
            }
            Some(atom) => {
                merges.push((atom.word.clone(), c.word.clone()));
                atom.prob += c.prob;
                atom.merged_words += c.merged_words;
                atom.value = atom.value.union(&c.value);
                if c.word < atom.word {
                    atom.word = c.word;
                }
            }
        }
    }
    (by_value.into_values().collect(), merges)
}

/// General exact lam: group candidates whose value balls overlap, then decide
/// each in-group pair by the certified zero test on the lifted difference
/// polynomial. Total and exact, if slower than the in-field path.
fn collapse_certified_general(
    ifs: &IFSSpec,
    mut cands: Vec<Candidate>,
) -> Result<(Vec<Atom>, Vec<(Vec<u32>, Vec<u32>)>)> {
    let lam = ifs
        .lam()
        .as_algebraic()
        .expect("caller checked exactness");
    cands.sort_by(|a, b| {
        a.value
            .center()
            .cmp_val(b.value.center())
            .then_with(|| a.word.cmp(&b.word))
    });
    let n = cands.len();
    // union-find over candidates
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = i;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }

    // sweep: a group is a maximal run of candidates whose value balls
    // intersect the running envelope
    let mut group_start = 0usize;
    let mut envelope_hi = cands[0].value.hi();
    for i in 1..n {
        let v = &cands[i].value;
        if v.lo().cmp_val(&envelope_hi) == std::cmp::Ordering::Greater {
            resolve_group(ifs, lam, &cands, group_start..i, &mut parent)?;
            group_start = i;
            envelope_hi = v.hi();
        } else if v.hi().cmp_val(&envelope_hi) == std::cmp::Ordering::Greater {
            envelope_hi = v.hi();
        }
    }
    resolve_group(ifs, lam, &cands, group_start..n, &mut parent)?;

    // merge by root
    let mut by_root: HashMap<usize, Atom> = HashMap::new();
    let mut merges = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let c = &cands[i];
        match by_root.get_mut(&r) {
            None => {
                by_root.insert(
                    r,
                    Atom {
                        word: c.word.clone(),
                        prob: c.prob.clone(),
                        value: c.value.clone(),
                        exact: None,
                        merged_words: c.merged_words,
                    },
                );
            }
            Some(atom) => {
                merges.push((atom.word.clone(), c.word.clone()));
                atom.prob += &c.prob;
                atom.merged_words += c.merged_words;
                atom.value = atom.value.union(&c.value);
                if c.word < atom.word {
                    atom.word = c.word.clone();
                }
            }
        }
    }
    Ok((by_root.into_values().collect(), merges))
}

fn resolve_group(
    ifs: &IFSSpec,
    lam: &crate::algebra::AlgebraicNumber,
    cands: &[Candidate],
    range: std::ops::Range<usize>,
    parent: &mut Vec<usize>,
) -> Result<()> {
    let idx: Vec<usize> = range.collect();
    if idx.len() < 2 {
        return Ok(());
    }
    for a in 0..idx.len() {
        for b in (a + 1)..idx.len() {
            let (i, j) = (idx[a], idx[b]);
            if words_certified_equal(ifs, lam, &cands[i].word, &cands[j].word)? {
                // union
                let mut ri = i;
                while parent[ri] != ri {
                    ri = parent[ri];
                }
                let mut rj = j;
                while parent[rj] != rj {
                    rj = parent[rj];
                }
                if ri != rj {
                    let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
                    parent[hi] = lo;
                }
            }
        }
    }
    Ok(())
}

/// Exact equality of two same-length words' translations, via the certified
/// zero test on the lifted difference polynomial.
pub fn words_certified_equal(
    ifs: &IFSSpec,
    lam: &crate::algebra::AlgebraicNumber,
    w1: &[u32],
    w2: &[u32],
) -> Result<bool> {
    debug_assert_eq!(w1.len(), w2.len());
    let field = ifs.field();
    let t = ifs.translations();
    let coeffs: Vec<FieldElement> = w1
        .iter()
        .zip(w2.iter())
        .map(|(&a, &b)| field.sub(&t[a as usize], &t[b as usize]))
        .collect();
    let diff = FieldPoly::new(coeffs);
    if diff.is_zero() {
        return Ok(true);
    }
    let lifted = lift_to_int_poly(&diff, field)?;
    certified_is_zero(&lifted, lam)
}

fn collapse_numeric(
    mut cands: Vec<Candidate>,
    tol: &Dyadic,
) -> Result<(Vec<Atom>, Vec<(Vec<u32>, Vec<u32>)>)> {
    cands.sort_by(|a, b| {
        a.value
            .center()
            .cmp_val(b.value.center())
            .then_with(|| a.word.cmp(&b.word))
    });
    // link consecutive candidates whose certified gap is at most tol;
    // a gap straddling tol is ambiguous
    let mut ambiguous = 0usize;
    let mut first_amb = String::new();
    let mut links = vec![false; cands.len().saturating_sub(1)];
    for i in 0..links.len() {
        let gap = cands[i + 1].value.sub(&cands[i].value, 96).abs_ball();
        if gap.hi().cmp_val(tol) != std::cmp::Ordering::Greater {
            links[i] = true;
        } else if gap.lo().cmp_val(tol) != std::cmp::Ordering::Greater {
            ambiguous += 1;
            if ambiguous == 1 {
                first_amb = format!(
                    "words {:?} and {:?}, gap in [{}, {}]",
                    cands[i].word,
                    cands[i + 1].word,
                    gap.lo(),
                    gap.hi()
                );
            }
        }
    }
    if ambiguous > 0 {
        return Err(Error::AmbiguousCollapse {
            tol: tol.to_string(),
            count: ambiguous,
            first: first_amb,
        });
    }
    let mut atoms = Vec::new();
    let mut merges = Vec::new();
    let mut iter = cands.into_iter().enumerate();
    let (_, first) = iter.next().expect("at least one candidate");
    let mut cur = Atom {
        word: first.word,
        prob: first.prob,
        value: first.value,
        exact: None,
        merged_words: first.merged_words,
    };
    for (i, c) in iter {
        if links[i - 1] {
            merges.push((cur.word.clone(), c.word.clone()));
            cur.prob += c.prob;
            cur.merged_words += c.merged_words;
            cur.value = cur.value.union(&c.value);
            if c.word < cur.word {
                cur.word = c.word;
            }
        } else {
            atoms.push(cur);
            cur = Atom {
                word: c.word,
                prob: c.prob,
                value: c.value,
                exact: None,
                merged_words: c.merged_words,
            };
        }
    }
    atoms.push(cur);
    Ok((atoms, merges))
}
