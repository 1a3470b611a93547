//! Uniform sampling with replacement, the symmetric-sampling candidate
//! enumerator, and the sample-size formulas.
//!
//! Symmetric sampling takes a sample S and a center o, forms the reflected
//! set -S = {2o - s}, and emits the mean point of every non-empty subset of
//! S and -S together. The enumeration always contains each s_i, each
//! reflection 2o - s_i, and o itself (the mean of a point and its mirror).

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{PointSet, Vector};
use crate::rng::RngStream;
use crate::scalar::{ceil_count, Scalar};

/// Hard cap on the symmetric-sampling enumeration: 2^(2r) - 1 candidates.
pub const MAX_SYMMETRIC_R: usize = 12;

/// A sample drawn with replacement, remembering source indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<F> {
    pub points: Vec<Vector<F>>,
    pub source_indices: Vec<usize>,
}

impl<F: Scalar> Sample<F> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// All non-empty subset means of S and -S, with the generating bitmasks.
/// Bit i selects s_i; bit r+i selects the reflection 2o - s_i.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet<F> {
    pub points: Vec<Vector<F>>,
    pub subset_masks: Vec<u64>,
}

impl<F: Scalar> CandidateSet<F> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// How random draws are keyed: by point index (default) or by point content,
/// which makes downstream results invariant under input permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RngKeying {
    #[default]
    Index,
    Content,
}

/// `r` independent uniform draws from `points`, with replacement.
pub fn uniform_sample<F: Scalar>(
    points: &PointSet<F>,
    r: usize,
    stream: &RngStream,
) -> Result<Sample<F>> {
    if r < 1 {
        return Err(Error::param("sample size must be >= 1"));
    }
    let mut rng = stream.rng();
    let n = points.n();
    let mut out_points = Vec::with_capacity(r);
    let mut source_indices = Vec::with_capacity(r);
    for _ in 0..r {
        let idx = rng.gen_range(0..n);
        source_indices.push(idx);
        out_points.push(points.point(idx).clone());
    }
    Ok(Sample {
        points: out_points,
        source_indices,
    })
}

fn point_hash<F: Scalar>(p: &Vector<F>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for c in p.coords() {
        let bits = c.as_f64().to_bits();
        h ^= bits;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Uniform draws keyed on point values: draw t picks the point minimizing a
/// per-draw hash of its coordinates, so permuting the input only permutes the
/// reported indices. Identical points tie toward the lower index.
pub fn uniform_sample_content<F: Scalar>(
    points: &PointSet<F>,
    r: usize,
    stream: &RngStream,
) -> Result<Sample<F>> {
    if r < 1 {
        return Err(Error::param("sample size must be >= 1"));
    }
    let mut out_points = Vec::with_capacity(r);
    let mut source_indices = Vec::with_capacity(r);
    for draw in 0..r {
        let mut best_idx = 0usize;
        let mut best_key = u64::MAX;
        for (idx, p) in points.iter().enumerate() {
            let key = stream.child(draw as u64).value_at(point_hash(p));
            if key < best_key {
                best_key = key;
                best_idx = idx;
            }
        }
        source_indices.push(best_idx);
        out_points.push(points.point(best_idx).clone());
    }
    Ok(Sample {
        points: out_points,
        source_indices,
    })
}

pub fn uniform_sample_with<F: Scalar>(
    points: &PointSet<F>,
    r: usize,
    stream: &RngStream,
    keying: RngKeying,
) -> Result<Sample<F>> {
    match keying {
        RngKeying::Index => uniform_sample(points, r, stream),
        RngKeying::Content => uniform_sample_content(points, r, stream),
    }
}

/// Symmetric-sampling enumeration: the mean of every non-empty subset of
/// S and its reflection through `o`. Exactly 2^(2r) - 1 candidates; the
/// empty subset has no mean and is excluded.
pub fn symmetric_sampling<F: Scalar>(sample: &[Vector<F>], o: &Vector<F>) -> Result<CandidateSet<F>> {
    let r = sample.len();
    if r == 0 {
        return Err(Error::param("sample must be non-empty"));
    }
    if r > MAX_SYMMETRIC_R {
        return Err(Error::ResourceCap(format!(
            "symmetric sampling over r = {r} would enumerate 2^{} subsets",
            2 * r
        )));
    }
    let d = o.dim();
    for s in sample {
        if s.dim() != d {
            return Err(Error::dim(d, s.dim()));
        }
    }
    let reflected: Vec<Vector<F>> = sample.iter().map(|s| s.reflect_through(o)).collect();
    let total = (1u64 << (2 * r)) - 1;
    let mut points = Vec::with_capacity(total as usize);
    let mut subset_masks = Vec::with_capacity(total as usize);
    for mask in 1..=total {
        let mut acc = Vector::zeros(d);
        for i in 0..r {
            if mask >> i & 1 == 1 {
                acc.axpy(F::one(), &sample[i]);
            }
            if mask >> (r + i) & 1 == 1 {
                acc.axpy(F::one(), &reflected[i]);
            }
        }
        let count = mask.count_ones();
        points.push(acc.scale(F::one() / F::of(count as f64)));
        subset_masks.push(mask);
    }
    Ok(CandidateSet {
        points,
        subset_masks,
    })
}

/// Coordinate-wise mean of a point set.
pub fn mean<F: Scalar>(points: &PointSet<F>) -> Vector<F> {
    points.mean()
}

/// Which argument the single-flat sample-size formula feeds to the log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleLogArg {
    /// ln(j / eps), the headline-theorem form.
    JOverEps,
    /// ln(j^2 / eps), the recursive-projection text form (pipeline default).
    #[default]
    JSquaredOverEps,
}

/// Single-flat sample size: ceil((4 j^2 / (gamma eps)) * ln(j / eps)),
/// clamped to at least 1. Errors when eps >= j (non-positive logarithm).
pub fn sample_size_single(j: usize, gamma: f64, eps: f64) -> Result<usize> {
    sample_size_single_with(j, gamma, eps, SampleLogArg::JOverEps)
}

/// As [`sample_size_single`] with an explicit choice of log argument.
pub fn sample_size_single_with(
    j: usize,
    gamma: f64,
    eps: f64,
    log_arg: SampleLogArg,
) -> Result<usize> {
    if j < 1 {
        return Err(Error::param("j must be >= 1"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::param("gamma must lie in (0, 1]"));
    }
    if !(eps > 0.0) {
        return Err(Error::param("eps must be positive"));
    }
    let arg = match log_arg {
        SampleLogArg::JOverEps => j as f64 / eps,
        SampleLogArg::JSquaredOverEps => (j * j) as f64 / eps,
    };
    if arg <= 1.0 {
        return Err(Error::param(format!(
            "non-positive logarithm: sample-size log argument {arg} <= 1"
        )));
    }
    let r = (4.0 * (j * j) as f64 / (gamma * eps)) * arg.ln();
    Ok(ceil_count(r).max(1))
}

/// Clustering sample sizes: t = ceil((8 j^2/(gamma eps)) ln(k j^2/eps)) and
/// r = ceil((2 k t / gamma) ln(2 k t)), both clamped to at least 1. Errors on
/// negative logarithm arguments; an argument of exactly 1 clamps instead.
pub fn sample_size_clustering(k: usize, j: usize, gamma: f64, eps: f64) -> Result<(usize, usize)> {
    if k < 1 || j < 1 {
        return Err(Error::param("k and j must be >= 1"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::param("gamma must lie in (0, 1]"));
    }
    if !(eps > 0.0) {
        return Err(Error::param("eps must be positive"));
    }
    let t_arg = (k * j * j) as f64 / eps;
    if t_arg < 1.0 {
        return Err(Error::param(format!(
            "negative logarithm: k j^2 / eps = {t_arg} < 1"
        )));
    }
    let t = ceil_count(8.0 * (j * j) as f64 / (gamma * eps) * t_arg.ln()).max(1);
    let r_arg = 2.0 * (k * t) as f64;
    let r = ceil_count(2.0 * (k * t) as f64 / gamma * r_arg.ln()).max(1);
    Ok((t, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::close;

    fn pset(rows: &[&[f64]]) -> PointSet<f64> {
        PointSet::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn sample_from_singleton_returns_it() {
        let p = pset(&[&[2.0, 3.0]]);
        let s = uniform_sample(&p, 1, &RngStream::new(1)).unwrap();
        assert_eq!(s.source_indices, vec![0]);
        assert_eq!(s.points[0], p.point(0).clone());
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let p = pset(&[&[0.0], &[1.0], &[2.0], &[3.0]]);
        let a = uniform_sample(&p, 16, &RngStream::new(9)).unwrap();
        let b = uniform_sample(&p, 16, &RngStream::new(9)).unwrap();
        assert_eq!(a, b);
        assert!(uniform_sample(&p, 0, &RngStream::new(9)).is_err());
    }

    #[test]
    fn sampling_frequencies_are_uniform() {
        // 1e5 draws over 8 points: each count within 3 binomial sigma
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let p = PointSet::from_rows(rows).unwrap();
        let draws = 100_000usize;
        let s = uniform_sample(&p, draws, &RngStream::new(5)).unwrap();
        let mut counts = [0usize; 8];
        for &i in &s.source_indices {
            counts[i] += 1;
        }
        let expect = draws as f64 / 8.0;
        let sigma = (draws as f64 * (1.0 / 8.0) * (7.0 / 8.0)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - expect).abs() <= 3.0 * sigma,
                "point {i}: count {c} vs {expect} +- {sigma}"
            );
        }
    }

    #[test]
    fn content_keyed_sampling_ignores_order() {
        let p = pset(&[&[0.0, 1.0], &[5.0, 2.0], &[3.0, -1.0]]);
        let q = pset(&[&[3.0, -1.0], &[0.0, 1.0], &[5.0, 2.0]]);
        let s = RngStream::new(31);
        let a = uniform_sample_content(&p, 10, &s).unwrap();
        let b = uniform_sample_content(&q, 10, &s).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn symmetric_sampling_of_one_point() {
        let o = Vector::zeros(2);
        let s = vec![Vector::new(vec![1.0, 0.0]).unwrap()];
        let cands = symmetric_sampling(&s, &o).unwrap();
        assert_eq!(cands.len(), 3);
        let got: Vec<Vec<f64>> = cands.points.iter().map(|p| p.coords().to_vec()).collect();
        assert!(got.contains(&vec![1.0, 0.0]));
        assert!(got.contains(&vec![-1.0, 0.0]));
        assert!(got.contains(&vec![0.0, 0.0]));
    }

    #[test]
    fn symmetric_sampling_centered_on_the_point_collapses() {
        let s = vec![Vector::new(vec![2.0, -1.0]).unwrap()];
        let cands = symmetric_sampling(&s, &s[0]).unwrap();
        for p in &cands.points {
            assert!((p - &s[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn candidates_match_independent_subset_enumeration() {
        let o = Vector::new(vec![0.5, 0.5]).unwrap();
        let s = vec![
            Vector::new(vec![1.0, 2.0]).unwrap(),
            Vector::new(vec![-1.0, 0.25]).unwrap(),
        ];
        let cands = symmetric_sampling(&s, &o).unwrap();
        assert_eq!(cands.len(), 15);
        // independent enumeration: build the 4-element pool and average by
        // explicit index lists
        let pool = [
            s[0].clone(),
            s[1].clone(),
            s[0].reflect_through(&o),
            s[1].reflect_through(&o),
        ];
        for (mask, point) in cands.subset_masks.iter().zip(&cands.points) {
            let mut acc = Vector::zeros(2);
            let mut cnt = 0.0;
            for (slot, p) in pool.iter().enumerate() {
                if mask >> slot & 1 == 1 {
                    acc.axpy(1.0, p);
                    cnt += 1.0;
                }
            }
            let want = acc.scale(1.0 / cnt);
            assert!((&want - point).norm() < 1e-12);
        }
    }

    #[test]
    fn candidate_set_is_closed_under_reflection() {
        let o = Vector::new(vec![0.3, -0.7, 1.1]).unwrap();
        let p = pset(&[&[1.0, 2.0, 3.0], &[0.0, -1.0, 0.5], &[4.0, 0.0, -2.0]]);
        let sample = uniform_sample(&p, 3, &RngStream::new(13)).unwrap();
        let cands = symmetric_sampling(&sample.points, &o).unwrap();
        assert_eq!(cands.len(), (1 << 6) - 1);
        let r = sample.len();
        for (mask, point) in cands.subset_masks.iter().zip(&cands.points) {
            // swap the low and high halves of the mask to reflect the subset
            let low = mask & ((1 << r) - 1);
            let high = mask >> r;
            let reflected_mask = (low << r) | high;
            let idx = cands
                .subset_masks
                .iter()
                .position(|&m| m == reflected_mask)
                .unwrap();
            let mirrored = point.reflect_through(&o);
            assert!((&mirrored - &cands.points[idx]).norm() < 1e-12);
        }
    }

    #[test]
    fn symmetric_sampling_respects_the_cap() {
        let o = Vector::zeros(1);
        let s: Vec<Vector<f64>> = (0..MAX_SYMMETRIC_R + 1)
            .map(|i| Vector::new(vec![i as f64]).unwrap())
            .collect();
        assert!(matches!(
            symmetric_sampling(&s, &o),
            Err(Error::ResourceCap(_))
        ));
    }

    #[test]
    fn mean_hand_values() {
        let p = pset(&[&[0.0, 0.0], &[2.0, 0.0]]);
        assert_eq!(mean(&p), Vector::new(vec![1.0, 0.0]).unwrap());
        let single = pset(&[&[3.5, -1.0]]);
        assert_eq!(mean(&single), single.point(0).clone());
    }

    #[test]
    fn mean_matches_compensated_summation() {
        let s = RngStream::new(999);
        let mut rng = s.rng();
        let rows: Vec<Vec<f64>> = (0..500)
            .map(|_| vec![rng.gen::<f64>() * 1e6, rng.gen::<f64>() * 1e-6])
            .collect();
        let p = PointSet::from_rows(rows.clone()).unwrap();
        let m = mean(&p);
        // Kahan-compensated oracle
        for dim in 0..2 {
            let mut sum = 0.0f64;
            let mut comp = 0.0f64;
            for row in &rows {
                let y = row[dim] - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            let want = sum / rows.len() as f64;
            assert!(close(m.coord(dim), want));
        }
    }

    #[test]
    fn single_sample_size_formula() {
        // (4 * 1 / 0.25) * ln 2 = 11.09.. -> 12
        assert_eq!(sample_size_single(1, 0.5, 0.5).unwrap(), 12);
        // (4 * 4 / 1) * ln 2 = 11.09.. -> 12
        assert_eq!(sample_size_single(2, 1.0, 1.0).unwrap(), 12);
        // eps >= j is a non-positive logarithm
        assert!(sample_size_single(1, 0.5, 1.0).is_err());
        assert!(sample_size_single(2, 0.5, 2.5).is_err());
    }

    #[test]
    fn single_sample_size_is_monotone() {
        let base = sample_size_single(2, 0.5, 0.5).unwrap();
        assert!(sample_size_single(2, 0.8, 0.5).unwrap() <= base);
        assert!(sample_size_single(2, 0.5, 0.8).unwrap() <= base);
    }

    #[test]
    fn clustering_sample_sizes() {
        // boundary: ln(1) = 0 clamps t to 1; then r = ceil(2 ln 2) = 2
        let (t, r) = sample_size_clustering(1, 1, 1.0, 1.0).unwrap();
        assert_eq!(t, 1);
        assert_eq!(r, 2);

        // k=2, j=1, gamma=0.5, eps=0.5:
        // t = ceil(32 * ln 4) = 45, r = ceil(360 * ln 180) = 1870
        let (t, r) = sample_size_clustering(2, 1, 0.5, 0.5).unwrap();
        assert_eq!(t, 45);
        assert_eq!(r, 1870);

        // r grows with k
        let (_, r3) = sample_size_clustering(3, 1, 0.5, 0.5).unwrap();
        assert!(r3 > r);

        // kj^2/eps < 1 is a negative logarithm
        assert!(sample_size_clustering(1, 1, 1.0, 2.0).is_err());
    }
}
