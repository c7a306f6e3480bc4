//! Entropy functionals for finitely supported measures: exact Shannon
//! combinations, the level-n measure walk with its subadditive bracket,
//! entropy at scale, Gaussian-smoothed differential entropies with error
//! estimates, the dilation-gain functional built on them, and the complex
//! matrix lift used by the smoothing inequalities.
//!
//! Exactness policy: weights are rationals throughout, and anything that can
//! be an exact log-combination is one (`ExactEntropy`). The smoothed
//! quantities are floating-point estimates that carry explicit error terms;
//! every inequality checked against them is checked modulo those errors.

pub mod exact;
pub mod garsia;
pub mod hat;
pub mod phi;
pub mod scale;
pub mod smooth;

pub use exact::{shannon, ExactEntropy};
pub use garsia::{
    dimension_bracket, garsia_entropy_bracket, level_n_atoms, DimensionBracket, GarsiaBracket,
    GarsiaRow, LevelNMeasure,
};
pub use hat::{hat, operator_norm, operator_norm_complex, RealLift};
pub use phi::{default_t_grid, lb_phi_check, phi_nu, LbPhiReport, PhiReport, PhiRow};
pub use scale::{entropy_at_scale, level_entropy_at_scale, Position, ScaleEntropy};
pub use smooth::{
    conditional_gap, smoothed_entropy, EntropyEstimate, GaussianKernel, PointCloud, SmoothMethod,
};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::RealBall;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::ifs::IFSSpec;

/// One weighted atom in the plane. The enclosure is always present; the
/// rational coordinates are kept when the position is exactly known.
#[derive(Debug, Clone)]
pub struct MassPoint {
    pub re: RealBall,
    pub im: RealBall,
    pub rational: Option<(BigRational, BigRational)>,
    pub weight: BigRational,
}

/// A finitely supported probability measure on the plane. Weights sum to 1
/// exactly; positions are pairwise distinct under whichever collapse policy
/// produced them (constructors taking exact data enforce this themselves).
#[derive(Debug, Clone)]
pub struct AtomicDistribution {
    points: Vec<MassPoint>,
}

const ATOM_BITS: u32 = 64;

impl AtomicDistribution {
    pub fn new(points: Vec<MassPoint>) -> Result<AtomicDistribution> {
        if points.is_empty() {
            return Err(Error::InvalidInput("a measure needs at least one atom".into()));
        }
        let mut total = BigRational::zero();
        for p in &points {
            if !p.weight.is_positive() {
                return Err(Error::InvalidInput("atom weights must be positive".into()));
            }
            total += &p.weight;
        }
        if !total.is_one() {
            return Err(Error::InvalidInput(format!(
                "atom weights sum to {}, not 1",
                total
            )));
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if let (Some(a), Some(b)) = (&points[i].rational, &points[j].rational) {
                    if a == b {
                        return Err(Error::InvalidInput(format!(
                            "atoms {} and {} share the position ({}, {})",
                            i, j, a.0, a.1
                        )));
                    }
                }
            }
        }
        Ok(AtomicDistribution { points })
    }

    /// Atoms at exact rational points (re, im, weight).
    pub fn from_rational_atoms(
        atoms: &[(BigRational, BigRational, BigRational)],
    ) -> Result<AtomicDistribution> {
        let points = atoms
            .iter()
            .map(|(re, im, w)| MassPoint {
                re: RealBall::from_ratio(re.numer(), re.denom(), ATOM_BITS),
                im: RealBall::from_ratio(im.numer(), im.denom(), ATOM_BITS),
                rational: Some((re.clone(), im.clone())),
                weight: w.clone(),
            })
            .collect();
        AtomicDistribution::new(points)
    }

    /// The translation measure of an IFS: mass p_j at t_j, equal
    /// translations merged exactly.
    pub fn translation_measure(ifs: &IFSSpec) -> Result<AtomicDistribution> {
        Self::embedded_translations(ifs, None)
    }

    /// The translation measure pushed through the field's k-th embedding,
    /// giving atoms in the plane.
    pub fn conjugate_measure(ifs: &IFSSpec, k: usize) -> Result<AtomicDistribution> {
        Self::embedded_translations(ifs, Some(k))
    }

    fn embedded_translations(ifs: &IFSSpec, embedding: Option<usize>) -> Result<AtomicDistribution> {
        let prec = ifs.context().working_bits;
        // merge equal translations first; equality is exact in the field
        let ts = ifs.translations();
        let mut merged: Vec<(usize, BigRational)> = Vec::new();
        'outer: for (j, t) in ts.iter().enumerate() {
            for (rep, w) in merged.iter_mut() {
                if &ts[*rep] == t {
                    *w += &ifs.probs()[j];
                    continue 'outer;
                }
            }
            merged.push((j, ifs.probs()[j].clone()));
        }
        let mut points = Vec::with_capacity(merged.len());
        for (j, w) in merged {
            let t = &ts[j];
            let (re, im) = match embedding {
                None => (
                    ifs.translation_ball(j, prec)?,
                    RealBall::exact(Dyadic::zero()),
                ),
                Some(k) => {
                    let z = ifs.field().embed(t, k, prec)?;
                    (z.re_ball(), z.im_ball())
                }
            };
            let rational = t
                .to_rational()
                .map(|q| (q, BigRational::zero()));
            points.push(MassPoint {
                re,
                im,
                rational,
                weight: w,
            });
        }
        AtomicDistribution::new(points)
    }

    /// The level-n measure as a planar distribution on the real axis.
    pub fn from_level(level: &LevelNMeasure) -> Result<AtomicDistribution> {
        let points = level
            .atoms
            .atoms
            .iter()
            .map(|a| MassPoint {
                re: a.value.clone(),
                im: RealBall::exact(Dyadic::zero()),
                rational: a
                    .exact
                    .as_ref()
                    .and_then(|fe| fe.to_rational())
                    .map(|q| (q, BigRational::zero())),
                weight: a.prob.clone(),
            })
            .collect();
        AtomicDistribution::new(points)
    }

    pub fn points(&self) -> &[MassPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weights(&self) -> Vec<BigRational> {
        self.points.iter().map(|p| p.weight.clone()).collect()
    }

    /// Shannon entropy of the weight vector, as an exact combination.
    pub fn shannon(&self) -> ExactEntropy {
        shannon(&self.weights()).expect("weights validated at construction")
    }

    /// Planar point cloud at the enclosure centers, for the smoothed
    /// functionals.
    pub fn to_points(&self) -> Result<PointCloud> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|p| (p.re.to_f64(), p.im.to_f64()))
            .collect();
        PointCloud::new(2, pts, self.weights())
    }
}
