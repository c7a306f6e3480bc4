//! Level-n measures, Garsia entropy brackets, and the dimension formulas.
//!
//! H_n is the Shannon entropy of the level-n atoms with their exact
//! rational weights, so each H_n is an ExactEntropy and the subadditive
//! bracket min_n H_n/n is selected by certified comparisons, not floats.
//! Only the upper bracket is reported: H_n/n converges to the Garsia
//! entropy from above, and no finite-n certified lower bound is available.

use std::collections::BTreeSet;

use num_rational::BigRational;

use crate::ball::{PrecisionContext, RealBall};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::ifs::atoms::{atoms, extend_atoms, AtomSet, CollapseMode, OverlapWitness};
use crate::ifs::IFSSpec;

use super::exact::{shannon, ExactEntropy};

/// The law of sum_{k<n} xi_k lambda^k: collapsed level-n atoms.
#[derive(Debug, Clone)]
pub struct LevelNMeasure {
    pub n: usize,
    pub atoms: AtomSet,
}

impl LevelNMeasure {
    pub fn weights(&self) -> Vec<BigRational> {
        self.atoms.atoms.iter().map(|a| a.prob.clone()).collect()
    }

    /// Exact Shannon entropy H_n of the atom weights.
    pub fn shannon(&self) -> Result<ExactEntropy> {
        shannon(&self.weights())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Collapsed distribution of sum_{k<n} xi_k lambda^k, n >= 1.
pub fn level_n_atoms(ifs: &IFSSpec, n: usize, mode: &CollapseMode) -> Result<LevelNMeasure> {
    if n == 0 {
        return Err(Error::InvalidInput("level index must be positive".into()));
    }
    Ok(LevelNMeasure {
        n,
        atoms: atoms(ifs, n, mode)?,
    })
}

/// One computed level of the entropy bracket.
#[derive(Debug, Clone)]
pub struct GarsiaRow {
    pub n: usize,
    pub atoms: usize,
    pub entropy: ExactEntropy,
    /// Enclosure of H_n.
    pub value: RealBall,
    /// Enclosure of H_n / n.
    pub ratio: RealBall,
}

/// Subadditive upper bracket for the Garsia entropy.
#[derive(Debug, Clone)]
pub struct GarsiaBracket {
    pub rows: Vec<GarsiaRow>,
    /// min over the computed n of H_n / n, as an exact combination.
    pub upper_exact: ExactEntropy,
    /// Enclosure of the bracket value.
    pub upper: RealBall,
    pub argmin_n: usize,
}

/// Walk levels 1..=max under certified collapse, recording requested rows
/// and the first merge witness.
fn entropy_rows(
    ifs: &IFSSpec,
    wanted: &BTreeSet<usize>,
    max: usize,
) -> Result<(Vec<GarsiaRow>, Option<OverlapWitness>)> {
    let prec = ifs.context().working_bits;
    let mut set = AtomSet::root(ifs);
    let mut witness: Option<OverlapWitness> = None;
    let mut rows = Vec::with_capacity(wanted.len());
    for level in 1..=max {
        let (next, merges) = extend_atoms(ifs, &set, &CollapseMode::Certified)?;
        if witness.is_none() {
            if let Some(best) = merges
                .into_iter()
                .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
                .min()
            {
                witness = Some(OverlapWitness {
                    n: level,
                    word1: best.0,
                    word2: best.1,
                });
            }
        }
        set = next;
        if wanted.contains(&level) {
            let weights: Vec<BigRational> = set.atoms.iter().map(|a| a.prob.clone()).collect();
            let entropy = shannon(&weights)?;
            let value = entropy.eval(prec);
            let ratio = entropy.div_int(level).eval(prec);
            rows.push(GarsiaRow {
                n: level,
                atoms: set.len(),
                entropy,
                value,
                ratio,
            });
        }
    }
    Ok((rows, witness))
}

/// Select the certified minimum of H_n/n over the rows (ties resolve to the
/// smaller n).
fn bracket_of_rows(rows: &[GarsiaRow], ctx: &PrecisionContext) -> Result<(ExactEntropy, usize)> {
    let mut best: Option<(ExactEntropy, usize)> = None;
    for row in rows {
        let ratio = row.entropy.div_int(row.n);
        best = match best {
            None => Some((ratio, row.n)),
            Some((cur, cur_n)) => {
                if ratio.certified_cmp(&cur, ctx)? == std::cmp::Ordering::Less {
                    Some((ratio, row.n))
                } else {
                    Some((cur, cur_n))
                }
            }
        };
    }
    best.ok_or_else(|| Error::InvalidInput("entropy bracket needs at least one level".into()))
}

/// Exact H_n for each requested level and the subadditive upper bracket
/// min_n H_n/n. Requires certified collapse (exact contraction ratio).
pub fn garsia_entropy_bracket(ifs: &IFSSpec, n_list: &[usize]) -> Result<GarsiaBracket> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::InvalidInput(
            "the level list must be nonempty with positive entries".into(),
        ));
    }
    let wanted: BTreeSet<usize> = n_list.iter().copied().collect();
    let max = *wanted.iter().next_back().expect("nonempty");
    let (rows, _) = entropy_rows(ifs, &wanted, max)?;
    let (upper_exact, argmin_n) = bracket_of_rows(&rows, ifs.context())?;
    let upper = upper_exact.eval(ifs.context().working_bits);
    Ok(GarsiaBracket {
        rows,
        upper_exact,
        upper,
        argmin_n,
    })
}

/// Dimension report from the entropy bracket and the similarity bound.
#[derive(Debug, Clone)]
pub struct DimensionBracket {
    pub n_max: usize,
    pub rows: Vec<GarsiaRow>,
    /// min_n H_n/n over 1..=n_max.
    pub bracket: RealBall,
    pub argmin_n: usize,
    /// -log |lambda|.
    pub chi: RealBall,
    /// min{1, bracket/chi}: a rigorous upper bound for the measure dimension.
    pub upper_dim: RealBall,
    /// min{1, H(p)/chi}: the no-overlap similarity bound.
    pub natural_upper: RealBall,
    pub overlap: Option<OverlapWitness>,
}

/// Clamp an enclosure at 1 from above.
fn min_one(b: &RealBall) -> RealBall {
    let one = Dyadic::one();
    if b.lo().cmp_val(&one) != std::cmp::Ordering::Less {
        return RealBall::exact(one);
    }
    let hi = if b.hi().cmp_val(&one) == std::cmp::Ordering::Greater {
        one
    } else {
        b.hi()
    };
    RealBall::from_interval(&b.lo(), &hi)
}

/// Upper dimension bracket, similarity bound, and exact-overlap flag for an
/// exact algebraic contraction ratio.
pub fn dimension_bracket(ifs: &IFSSpec, n_max: usize) -> Result<DimensionBracket> {
    if !ifs.lam().is_exact() {
        return Err(Error::InvalidInput(
            "the dimension bracket requires an exact contraction ratio".into(),
        ));
    }
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be positive".into()));
    }
    let prec = ifs.context().working_bits;
    let wanted: BTreeSet<usize> = (1..=n_max).collect();
    let (rows, overlap) = entropy_rows(ifs, &wanted, n_max)?;
    let (bracket_exact, argmin_n) = bracket_of_rows(&rows, ifs.context())?;
    let bracket = bracket_exact.eval(prec);
    let chi = ifs.log_lambda_abs(prec)?.neg();
    let upper_dim = min_one(&bracket.div(&chi, prec));
    let hp = shannon(ifs.probs())?;
    let natural_upper = min_one(&hp.eval(prec).div(&chi, prec));
    Ok(DimensionBracket {
        n_max,
        rows,
        bracket,
        argmin_n,
        chi,
        upper_dim,
        natural_upper,
        overlap,
    })
}
