//! Gaussian-smoothed differential entropies of finite point masses.
//!
//! H(X; B) = H(X + G_B) - H(G_B) where G_B is a centered Gaussian with
//! covariance B B^t. Whitening by B^(-1) cancels the determinant terms, so
//! the routine integrates the standard-normal mixture sum q_i phi(y - y_i)
//! and subtracts (k/2) ln(2 pi e). Unlike the certified layers, these are
//! numerical estimates with explicit error reports: quadrature error is
//! estimated by Richardson extrapolation plus Gaussian tail bounds, Monte
//! Carlo error by the standard error of the mean.

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

use super::exact::ExactEntropy;

/// ln(2 pi e), the differential entropy of a standard normal per dimension
/// (times 1/2).
const LN_2PE: f64 = 2.837877066409345;
/// ln(2 pi).
const LN_2P: f64 = 1.8378770664093453;
/// Clusters split where whitened gaps exceed this many standard deviations.
const LINK: f64 = 16.0;
/// Quadrature boxes extend this far beyond the cluster hull.
const PAD: f64 = 8.5;
/// Cap on fine-grid evaluation points across all clusters.
const BUDGET: usize = 20_000_000;

/// Invertible kernel matrix B defining the Gaussian G_B with covariance
/// B B^t. Dimensions 1 and 2 are supported.
#[derive(Debug, Clone)]
pub struct GaussianKernel {
    mat: DMatrix<f64>,
    dim: usize,
    det: f64,
}

impl GaussianKernel {
    pub fn new(mat: DMatrix<f64>) -> Result<GaussianKernel> {
        let (r, c) = mat.shape();
        if r != c || !(1..=2).contains(&r) {
            return Err(Error::InvalidInput(format!(
                "kernel must be 1x1 or 2x2, got {}x{}",
                r, c
            )));
        }
        if mat.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("kernel entries must be finite".into()));
        }
        let det = if r == 1 {
            mat[(0, 0)]
        } else {
            mat[(0, 0)] * mat[(1, 1)] - mat[(0, 1)] * mat[(1, 0)]
        };
        // invertibility with margin: determinant against the squared scale
        let scale = mat.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        if det.abs() <= 1e-12 * scale * scale {
            return Err(Error::InvalidInput(
                "kernel matrix is not invertible within tolerance".into(),
            ));
        }
        Ok(GaussianKernel { mat, dim: r, det })
    }

    pub fn identity(dim: usize) -> Result<GaussianKernel> {
        GaussianKernel::new(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// H(G_B) = (k/2) ln(2 pi e) + ln |det B|.
    pub fn gaussian_entropy(&self) -> f64 {
        (self.dim as f64) / 2.0 * LN_2PE + self.det.abs().ln()
    }

    /// Left-multiplied kernel A * B (for the scaling identities).
    pub fn left_mul(&self, a: &DMatrix<f64>) -> Result<GaussianKernel> {
        GaussianKernel::new(a * &self.mat)
    }

    /// Solve B y = x for each point.
    fn whiten(&self, pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
        if self.dim == 1 {
            let b = self.mat[(0, 0)];
            pts.iter().map(|&(x, _)| (x / b, 0.0)).collect()
        } else {
            let (a, b) = (self.mat[(0, 0)], self.mat[(0, 1)]);
            let (c, d) = (self.mat[(1, 0)], self.mat[(1, 1)]);
            pts.iter()
                .map(|&(x, y)| ((d * x - b * y) / self.det, (a * y - c * x) / self.det))
                .collect()
        }
    }
}

/// Finite point masses in R^1 or R^2 with exact rational weights.
#[derive(Debug, Clone)]
pub struct PointCloud {
    dim: usize,
    points: Vec<(f64, f64)>,
    weights: Vec<BigRational>,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<(f64, f64)>, weights: Vec<BigRational>) -> Result<PointCloud> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidInput("point clouds live in R^1 or R^2".into()));
        }
        if points.len() != weights.len() || points.is_empty() {
            return Err(Error::InvalidInput(
                "point and weight counts must match and be nonzero".into(),
            ));
        }
        if points
            .iter()
            .any(|&(x, y)| !x.is_finite() || !y.is_finite() || (dim == 1 && y != 0.0))
        {
            return Err(Error::InvalidInput(
                "points must be finite (second coordinate zero in R^1)".into(),
            ));
        }
        let mut total = BigRational::zero();
        for w in &weights {
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
        Ok(PointCloud {
            dim,
            points,
            weights,
        })
    }

    pub fn line(xs: &[f64], weights: &[BigRational]) -> Result<PointCloud> {
        PointCloud::new(1, xs.iter().map(|&x| (x, 0.0)).collect(), weights.to_vec())
    }

    pub fn plane(points: &[(f64, f64)], weights: &[BigRational]) -> Result<PointCloud> {
        PointCloud::new(2, points.to_vec(), weights.to_vec())
    }

    pub fn uniform_line(xs: &[f64]) -> Result<PointCloud> {
        let w = BigRational::new(1.into(), (xs.len() as i64).into());
        PointCloud::line(xs, &vec![w; xs.len()])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    /// Positions scaled by s (weights unchanged).
    pub fn scaled(&self, s: f64) -> PointCloud {
        PointCloud {
            dim: self.dim,
            points: self.points.iter().map(|&(x, y)| (s * x, s * y)).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Image under an invertible matrix (positions only; Shannon entropy of
    /// the weights is untouched, which is the affine-invariance statement
    /// for discrete entropy).
    pub fn transformed(&self, a: &DMatrix<f64>) -> Result<PointCloud> {
        if a.shape() != (self.dim, self.dim) {
            return Err(Error::InvalidInput("transform dimension mismatch".into()));
        }
        let points = if self.dim == 1 {
            self.points
                .iter()
                .map(|&(x, _)| (a[(0, 0)] * x, 0.0))
                .collect()
        } else {
            self.points
                .iter()
                .map(|&(x, y)| {
                    (
                        a[(0, 0)] * x + a[(0, 1)] * y,
                        a[(1, 0)] * x + a[(1, 1)] * y,
                    )
                })
                .collect()
        };
        Ok(PointCloud {
            dim: self.dim,
            points,
            weights: self.weights.clone(),
        })
    }

    /// Distribution of X + Y for independent X, Y (all pairwise sums).
    pub fn independent_sum(&self, other: &PointCloud) -> Result<PointCloud> {
        if self.dim != other.dim {
            return Err(Error::InvalidInput("summand dimension mismatch".into()));
        }
        let mut points = Vec::with_capacity(self.len() * other.len());
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for (p, w) in self.points.iter().zip(&self.weights) {
            for (q, v) in other.points.iter().zip(&other.weights) {
                points.push((p.0 + q.0, p.1 + q.1));
                weights.push(w * v);
            }
        }
        PointCloud::new(self.dim, points, weights)
    }

    /// Exact Shannon entropy of the weight vector.
    pub fn shannon(&self) -> ExactEntropy {
        ExactEntropy::from_weights(&self.weights).expect("validated weights")
    }

    fn weights_f64(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.to_f64().expect("finite rational"))
            .collect()
    }
}

/// How a smoothed entropy is evaluated.
#[derive(Debug, Clone)]
pub enum SmoothMethod {
    /// Clustered Simpson quadrature with Richardson error estimation.
    Quadrature,
    /// Seeded Monte Carlo; the error field is the standard error.
    MonteCarlo { samples: u64, seed: u64 },
}

/// A numerical estimate with its reported error.
#[derive(Debug, Clone)]
pub struct EntropyEstimate {
    pub value: f64,
    pub error: f64,
    pub method: &'static str,
}

/// H(X; B) = H(X + G_B) - H(G_B).
pub fn smoothed_entropy(
    x: &PointCloud,
    b: &GaussianKernel,
    method: &SmoothMethod,
) -> Result<EntropyEstimate> {
    if x.dim() != b.dim() {
        return Err(Error::InvalidInput(format!(
            "cloud dimension {} does not match kernel dimension {}",
            x.dim(),
            b.dim()
        )));
    }
    // translation invariance: a single atom contributes nothing
    if x.len() == 1 {
        return Ok(EntropyEstimate {
            value: 0.0,
            error: 0.0,
            method: method_name(method),
        });
    }
    let pts = b.whiten(x.points());
    let w = x.weights_f64();
    let k = x.dim();
    let h_diff = match method {
        SmoothMethod::Quadrature => mixture_entropy_quadrature(&pts, &w, k)?,
        SmoothMethod::MonteCarlo { samples, seed } => {
            mixture_entropy_montecarlo(&pts, &w, k, *samples, *seed)?
        }
    };
    Ok(EntropyEstimate {
        value: h_diff.0 - (k as f64) / 2.0 * LN_2PE,
        error: h_diff.1,
        method: method_name(method),
    })
}

/// H(X; B1 | B2) = H(X; B1) - H(X; B2). Both terms share the method (and
/// the seed, so equal kernels cancel exactly).
pub fn conditional_gap(
    x: &PointCloud,
    b1: &GaussianKernel,
    b2: &GaussianKernel,
    method: &SmoothMethod,
) -> Result<EntropyEstimate> {
    let h1 = smoothed_entropy(x, b1, method)?;
    let h2 = smoothed_entropy(x, b2, method)?;
    Ok(EntropyEstimate {
        value: h1.value - h2.value,
        error: h1.error + h2.error,
        method: h1.method,
    })
}

fn method_name(m: &SmoothMethod) -> &'static str {
    match m {
        SmoothMethod::Quadrature => "quadrature",
        SmoothMethod::MonteCarlo { .. } => "montecarlo",
    }
}

/// Upper estimate of the standard normal tail mass beyond T > 0.
fn gauss_tail(t: f64) -> f64 {
    (-(t * t) / 2.0).exp() / (t * (2.0 * std::f64::consts::PI).sqrt())
}

/// Differential entropy of sum w_i N(p_i, I_k) with an error estimate.
fn mixture_entropy_quadrature(pts: &[(f64, f64)], w: &[f64], k: usize) -> Result<(f64, f64)> {
    let clusters = link_clusters(pts, k);
    // budget check on the fine grids before doing any work
    let mut fine_points = 0usize;
    for c in &clusters {
        if c.len() == 1 {
            continue;
        }
        let (sx, sy) = cluster_span(pts, c, k);
        let nx = 2 * intervals(sx + 2.0 * PAD) + 1;
        let ny = if k == 2 { 2 * intervals(sy + 2.0 * PAD) + 1 } else { 1 };
        fine_points = fine_points.saturating_add(nx * ny);
    }
    if fine_points > BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "quadrature needs {} grid points (cap {}); reduce the spread or use montecarlo",
            fine_points, BUDGET
        )));
    }

    let mut value = 0.0;
    let mut error = 0.0;
    for c in &clusters {
        let wc: f64 = c.iter().map(|&i| w[i]).sum();
        // mixing entropy of the cluster decomposition
        value -= wc * wc.ln();
        if c.len() == 1 {
            // a single standard normal: exact closed form, no quadrature
            value += wc * (k as f64) / 2.0 * LN_2PE;
            continue;
        }
        let (hc, ec) = cluster_entropy(pts, w, c, wc, k);
        value += wc * hc;
        error += wc * ec;
    }
    // interaction between clusters, separated by at least LINK in every
    // pairing: density leakage at a box is at most the tail beyond LINK-PAD
    if clusters.len() > 1 {
        let t = LINK - PAD;
        error += gauss_tail(t) * (LINK * LINK + 20.0);
    }
    error += 1e-13 * (1.0 + value.abs());
    Ok((value, error))
}

/// Single-linkage clusters at distance LINK.
fn link_clusters(pts: &[(f64, f64)], k: usize) -> Vec<Vec<usize>> {
    let n = pts.len();
    if k == 1 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| pts[a].0.partial_cmp(&pts[b].0).expect("finite"));
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in order {
            match out.last_mut() {
                Some(c) if pts[i].0 - pts[*c.last().expect("nonempty")].0 <= LINK => c.push(i),
                _ => out.push(vec![i]),
            }
        }
        return out;
    }
    // union-find over all pairs
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pts[i].0 - pts[j].0;
            let dy = pts[i].1 - pts[j].1;
            if (dx * dx + dy * dy).sqrt() <= LINK {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

fn cluster_span(pts: &[(f64, f64)], c: &[usize], k: usize) -> (f64, f64) {
    let xs: Vec<f64> = c.iter().map(|&i| pts[i].0).collect();
    let sx = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if k == 1 {
        return (sx, 0.0);
    }
    let ys: Vec<f64> = c.iter().map(|&i| pts[i].1).collect();
    let sy = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    (sx, sy)
}

/// Simpson interval count for a span at the base resolution h = 1/8.
fn intervals(span: f64) -> usize {
    let n = (span * 8.0).ceil() as usize;
    (n + (n % 2)).max(2)
}

/// Entropy of one normalized cluster via two-resolution Simpson quadrature
/// with Richardson extrapolation and a tail estimate.
fn cluster_entropy(pts: &[(f64, f64)], w: &[f64], c: &[usize], wc: f64, k: usize) -> (f64, f64) {
    let q: Vec<f64> = c.iter().map(|&i| w[i] / wc).collect();
    let members: Vec<(f64, f64)> = c.iter().map(|&i| pts[i]).collect();
    let x_lo = members.iter().map(|p| p.0).fold(f64::INFINITY, f64::min) - PAD;
    let x_hi = members.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max) + PAD;
    let (y_lo, y_hi) = if k == 2 {
        (
            members.iter().map(|p| p.1).fold(f64::INFINITY, f64::min) - PAD,
            members.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max) + PAD,
        )
    } else {
        (0.0, 0.0)
    };

    let coarse = simpson_box(&members, &q, k, (x_lo, x_hi), (y_lo, y_hi), 1);
    let fine = simpson_box(&members, &q, k, (x_lo, x_hi), (y_lo, y_hi), 2);
    let value = fine + (fine - coarse) / 15.0;
    let mut err = (fine - coarse).abs() / 15.0;
    // Gaussian mass escaping the box: every member sits at least PAD from
    // the boundary; weight the escaped mass by a generous -ln f bound
    for qi in &q {
        let c_i = (k as f64) * 0.92 + qi.ln().abs() + PAD * PAD / 2.0 + 2.0;
        err += qi * (k as f64) * gauss_tail(PAD) * c_i;
    }
    (value, err)
}

/// Composite Simpson integral of -f ln f over a box, at refine times the
/// base resolution.
fn simpson_box(
    members: &[(f64, f64)],
    q: &[f64],
    k: usize,
    (x_lo, x_hi): (f64, f64),
    (y_lo, y_hi): (f64, f64),
    refine: usize,
) -> f64 {
    let norm = (2.0 * std::f64::consts::PI).powf(-(k as f64) / 2.0);
    let density = |x: f64, y: f64| -> f64 {
        let mut s = 0.0;
        for (m, qi) in members.iter().zip(q) {
            let dx = x - m.0;
            let dy = y - m.1;
            s += qi * (-(dx * dx + dy * dy) / 2.0).exp();
        }
        s * norm
    };
    let integrand = |x: f64, y: f64| -> f64 {
        let f = density(x, y);
        if f < 1e-300 {
            0.0
        } else {
            -f * f.ln()
        }
    };

    let nx = refine * intervals(x_hi - x_lo);
    let hx = (x_hi - x_lo) / nx as f64;
    if k == 1 {
        let mut acc = 0.0;
        for i in 0..=nx {
            let cw = simpson_coeff(i, nx);
            acc += cw * integrand(x_lo + hx * i as f64, 0.0);
        }
        return acc * hx / 3.0;
    }
    let ny = refine * intervals(y_hi - y_lo);
    let hy = (y_hi - y_lo) / ny as f64;
    let acc: f64 = (0..=ny)
        .into_par_iter()
        .map(|j| {
            let y = y_lo + hy * j as f64;
            let cwy = simpson_coeff(j, ny);
            let mut row = 0.0;
            for i in 0..=nx {
                row += simpson_coeff(i, nx) * integrand(x_lo + hx * i as f64, y);
            }
            cwy * row
        })
        .sum();
    acc * hx * hy / 9.0
}

fn simpson_coeff(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Monte Carlo estimate of the mixture differential entropy: draw from the
/// mixture, average -ln f. Deterministic for a fixed seed.
fn mixture_entropy_montecarlo(
    pts: &[(f64, f64)],
    w: &[f64],
    k: usize,
    samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::InvalidInput("montecarlo needs samples > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cum = Vec::with_capacity(w.len());
    let mut acc = 0.0;
    for wi in w {
        acc += wi;
        cum.push(acc);
    }
    let log_w: Vec<f64> = w.iter().map(|wi| wi.ln()).collect();

    let mut mean = 0.0;
    let mut m2 = 0.0;
    for s in 0..samples {
        let u: f64 = rng.gen::<f64>() * acc;
        let i = cum.partition_point(|&c| c < u).min(w.len() - 1);
        let (z0, z1) = box_muller(&mut rng);
        let y = if k == 1 {
            (pts[i].0 + z0, 0.0)
        } else {
            (pts[i].0 + z0, pts[i].1 + z1)
        };
        // -ln f via log-sum-exp over the atoms
        let mut best = f64::NEG_INFINITY;
        let mut terms = Vec::with_capacity(pts.len());
        for (p, lw) in pts.iter().zip(&log_w) {
            let dx = y.0 - p.0;
            let dy = y.1 - p.1;
            let t = lw - (dx * dx + dy * dy) / 2.0;
            best = best.max(t);
            terms.push(t);
        }
        let lse = best + terms.iter().map(|t| (t - best).exp()).sum::<f64>().ln();
        let val = (k as f64) / 2.0 * LN_2P - lse;
        let delta = val - mean;
        mean += delta / (s + 1) as f64;
        m2 += delta * (val - mean);
    }
    let var = if samples > 1 {
        m2 / (samples - 1) as f64
    } else {
        f64::INFINITY
    };
    let stderr = (var / samples as f64).sqrt();
    Ok((mean, stderr))
}

fn box_muller(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn rot(theta: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
    }

    fn random_cloud(rng: &mut ChaCha8Rng, dim: usize, n: usize, spread: f64) -> PointCloud {
        let raw: Vec<u32> = (0..n).map(|_| rng.gen_range(1..6)).collect();
        let total: u32 = raw.iter().sum();
        let weights: Vec<BigRational> = raw
            .iter()
            .map(|&a| BigRational::new((a as i64).into(), (total as i64).into()))
            .collect();
        let points: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                (
                    rng.gen_range(-spread..spread),
                    if dim == 2 {
                        rng.gen_range(-spread..spread)
                    } else {
                        0.0
                    },
                )
            })
            .collect();
        PointCloud::new(dim, points, weights).unwrap()
    }

    #[test]
    fn degenerate_distribution_has_zero_smoothed_entropy() {
        let x = PointCloud::uniform_line(&[3.7]).unwrap();
        let b = GaussianKernel::identity(1).unwrap();
        let e = smoothed_entropy(&x, &b, &SmoothMethod::Quadrature).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.error, 0.0);
    }

    #[test]
    fn far_separated_pair_approaches_log_two() {
        let x = PointCloud::uniform_line(&[0.0, 20.0]).unwrap();
        let b = GaussianKernel::identity(1).unwrap();
        let e = smoothed_entropy(&x, &b, &SmoothMethod::Quadrature).unwrap();
        assert!(
            (e.value - std::f64::consts::LN_2).abs() < 1e-6,
            "value {}",
            e.value
        );
    }

    #[test]
    fn close_pair_stays_between_zero_and_shannon() {
        let b = GaussianKernel::identity(1).unwrap();
        for sep in [0.1, 0.5, 1.0, 3.0, 10.0, 30.0] {
            let x = PointCloud::uniform_line(&[0.0, sep]).unwrap();
            let e = smoothed_entropy(&x, &b, &SmoothMethod::Quadrature).unwrap();
            assert!(e.value >= -e.error - 1e-9, "sep {}: {}", sep, e.value);
            assert!(
                e.value <= std::f64::consts::LN_2 + e.error + 1e-9,
                "sep {}: {}",
                sep,
                e.value
            );
        }
    }

    #[test]
    fn smoothed_entropy_bounded_by_shannon_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [1usize, 2] {
            for _ in 0..4 {
                let x = random_cloud(&mut rng, dim, 4, 6.0);
                let b = GaussianKernel::identity(dim).unwrap();
                let e = smoothed_entropy(&x, &b, &SmoothMethod::Quadrature).unwrap();
                let h = x.shannon().to_f64();
                assert!(e.value >= -e.error - 1e-9);
                assert!(e.value <= h + e.error + 1e-9, "H(X;B) {} vs H(X) {}", e.value, h);
            }
        }
    }

    #[test]
    fn equal_kernels_cancel_exactly() {
        let x = PointCloud::uniform_line(&[0.0, 1.5, 4.0]).unwrap();
        let b = GaussianKernel::new(DMatrix::from_element(1, 1, 0.7)).unwrap();
        for method in [
            SmoothMethod::Quadrature,
            SmoothMethod::MonteCarlo {
                samples: 2000,
                seed: 5,
            },
        ] {
            let g = conditional_gap(&x, &b, &b, &method).unwrap();
            assert_eq!(g.value, 0.0);
        }
    }

    #[test]
    fn montecarlo_is_deterministic_and_agrees_with_quadrature() {
        let x = PointCloud::uniform_line(&[0.0, 1.0, 2.5]).unwrap();
        let b = GaussianKernel::identity(1).unwrap();
        let m = SmoothMethod::MonteCarlo {
            samples: 40_000,
            seed: 99,
        };
        let e1 = smoothed_entropy(&x, &b, &m).unwrap();
        let e2 = smoothed_entropy(&x, &b, &m).unwrap();
        assert_eq!(e1.value.to_bits(), e2.value.to_bits());
        assert_eq!(e1.error.to_bits(), e2.error.to_bits());
        let q = smoothed_entropy(&x, &b, &SmoothMethod::Quadrature).unwrap();
        assert!(
            (e1.value - q.value).abs() < 4.0 * e1.error + q.error + 1e-6,
            "mc {} vs quad {}",
            e1.value,
            q.value
        );
    }

    #[test]
    fn scaling_identity_on_random_kernels() {
        // H(X; B1 | B2) = H(BX; BB1 | BB2)
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..3 {
            let x = random_cloud(&mut rng, 2, 3, 3.0);
            let b1 = GaussianKernel::identity(2).unwrap();
            let b2 = GaussianKernel::new(rot(0.7) * 2.0).unwrap();
            let a = DMatrix::from_row_slice(
                2,
                2,
                &[
                    rng.gen_range(0.5..1.5),
                    rng.gen_range(-0.4..0.4),
                    rng.gen_range(-0.4..0.4),
                    rng.gen_range(0.5..1.5),
                ],
            );
            let lhs = conditional_gap(&x, &b1, &b2, &SmoothMethod::Quadrature).unwrap();
            let rhs = conditional_gap(
                &x.transformed(&a).unwrap(),
                &b1.left_mul(&a).unwrap(),
                &b2.left_mul(&a).unwrap(),
                &SmoothMethod::Quadrature,
            )
            .unwrap();
            assert!(
                (lhs.value - rhs.value).abs() < lhs.error + rhs.error + 1e-5,
                "{} vs {}",
                lhs.value,
                rhs.value
            );
        }
    }

    #[test]
    fn rotating_the_kernel_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let x = random_cloud(&mut rng, 2, 3, 4.0);
        let b = GaussianKernel::identity(2).unwrap();
        for theta in [0.3, 1.1, 2.9] {
            // B * O: right multiplication by an orthogonal matrix
            let bo = GaussianKernel::new(b.matrix() * rot(theta)).unwrap();
            let h = smoothed_entropy(&x, &b, &SmoothMethod::Quadrature).unwrap();
            let ho = smoothed_entropy(&x, &bo, &SmoothMethod::Quadrature).unwrap();
            assert!(
                (h.value - ho.value).abs() < h.error + ho.error + 1e-6,
                "theta {}: {} vs {}",
                theta,
                h.value,
                ho.value
            );
        }
    }

    #[test]
    fn subadditivity_of_smoothed_entropy() {
        // H(X + Y; B) <= H(X; B) + H(Y; B)
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..3 {
            let x = random_cloud(&mut rng, 1, 3, 2.0);
            let y = random_cloud(&mut rng, 1, 2, 2.0);
            let b = GaussianKernel::identity(1).unwrap();
            let hxy =
                smoothed_entropy(&x.independent_sum(&y).unwrap(), &b, &SmoothMethod::Quadrature)
                    .unwrap();
            let hx = smoothed_entropy(&x, &b, &SmoothMethod::Quadrature).unwrap();
            let hy = smoothed_entropy(&y, &b, &SmoothMethod::Quadrature).unwrap();
            assert!(
                hxy.value <= hx.value + hy.value + hxy.error + hx.error + hy.error + 1e-6,
                "{} vs {} + {}",
                hxy.value,
                hx.value,
                hy.value
            );
        }
    }

    #[test]
    fn convolution_increases_conditional_entropy() {
        // H(X + Y; B^2 | B^1) >= H(X; B^2 | B^1) for a contraction B
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let bmat = rot(0.8) * 0.8;
        let b1 = GaussianKernel::new(bmat.clone()).unwrap();
        let b2 = GaussianKernel::new(&bmat * &bmat).unwrap();
        for _ in 0..2 {
            let x = random_cloud(&mut rng, 2, 3, 2.0);
            let y = random_cloud(&mut rng, 2, 2, 2.0);
            let lhs = conditional_gap(
                &x.independent_sum(&y).unwrap(),
                &b2,
                &b1,
                &SmoothMethod::Quadrature,
            )
            .unwrap();
            let rhs = conditional_gap(&x, &b2, &b1, &SmoothMethod::Quadrature).unwrap();
            assert!(
                lhs.value >= rhs.value - lhs.error - rhs.error - 1e-5,
                "{} vs {}",
                lhs.value,
                rhs.value
            );
        }
    }

    #[test]
    fn kernel_validation() {
        assert!(GaussianKernel::new(DMatrix::from_element(1, 1, 0.0)).is_err());
        assert!(GaussianKernel::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.5, 1.0])).is_err());
        assert!(GaussianKernel::new(DMatrix::identity(3, 3)).is_err());
        let b = GaussianKernel::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5])).unwrap();
        assert!((b.det() - 1.0).abs() < 1e-15);
        assert!((b.gaussian_entropy() - LN_2PE).abs() < 1e-12);
    }

    #[test]
    fn cloud_validation() {
        assert!(PointCloud::line(&[0.0], &[rat(1, 2)]).is_err());
        assert!(PointCloud::line(&[0.0, 1.0], &[rat(1, 2), rat(1, 3)]).is_err());
        assert!(PointCloud::new(1, vec![(0.0, 1.0)], vec![rat(1, 1)]).is_err());
        assert!(PointCloud::new(3, vec![(0.0, 0.0)], vec![rat(1, 1)]).is_err());
    }
}
