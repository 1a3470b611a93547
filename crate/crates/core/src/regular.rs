//! Regular (bounded coefficient-of-variation) fitting.
//!
//! The coefficient of variation of data projected along a direction is the
//! ratio of its tau-norm deviation to its mean absolute deviation. When the
//! CV along every direction of the fitting flat is bounded by a factor
//! omega, a sample of size (omega^2 - 1) (j/eps)^2 suffices and the fit
//! covers all points: no trimming.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fit::{fit_single_flat, FitConfig, FitResult};
use crate::geometry::{Flat, PointSet, Vector};
use crate::rng::RngStream;
use crate::scalar::{ceil_count, Scalar};

/// Estimated regular factor: the largest CV seen over sampled directions.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularStats<F> {
    pub omega: F,
    pub directions_tested: usize,
    pub per_direction_cv: Vec<F>,
}

/// Coefficient of variation with exponent tau:
/// (mean |x - mu|^tau)^(1/tau) / mean |x - mu|.
/// Errors on constant data (zero denominator) and on fewer than two values.
pub fn coefficient_of_variation<F: Scalar>(xs: &[F], tau: u32) -> Result<F> {
    if xs.len() < 2 {
        return Err(Error::param("need at least two values"));
    }
    if tau < 1 {
        return Err(Error::param("tau must be >= 1"));
    }
    let n = F::of(xs.len() as f64);
    let mut mu = F::zero();
    for &x in xs {
        mu = mu + x;
    }
    mu = mu / n;
    let mut num_acc = F::zero();
    let mut den_acc = F::zero();
    for &x in xs {
        let dev = (x - mu).abs();
        num_acc = num_acc + dev.powi(tau as i32);
        den_acc = den_acc + dev;
    }
    let den = den_acc / n;
    if den == F::zero() {
        return Err(Error::DegenerateDirection);
    }
    Ok((num_acc / n).powf(F::one() / F::of(tau as f64)) / den)
}

/// Estimate the regular factor of `points` with respect to `flat`: the
/// maximum CV of the projections <p - mean, v> over `n_directions` uniform
/// unit directions v within the flat's span. Directions whose projections
/// are constant are skipped; it is an error if every direction degenerates.
///
/// Direction draws are prefix-stable in `n_directions`: testing more
/// directions never lowers the estimate for a fixed stream.
pub fn regular_factor<F: Scalar>(
    points: &PointSet<F>,
    flat: &Flat<F>,
    n_directions: usize,
    stream: &RngStream,
    tau: u32,
) -> Result<RegularStats<F>> {
    if n_directions < 1 {
        return Err(Error::param("need at least one direction"));
    }
    if flat.dim() < 1 {
        return Err(Error::param("flat must have dimension >= 1"));
    }
    if flat.ambient_dim() != points.dim() {
        return Err(Error::dim(points.dim(), flat.ambient_dim()));
    }
    let o = points.mean();
    let mut per_direction_cv = Vec::with_capacity(n_directions);
    for i in 0..n_directions {
        let mut rng = stream.child(i as u64).rng();
        // uniform unit direction within the flat's span
        let mut dir = Vector::zeros(points.dim());
        for b in flat.basis() {
            let g: f64 = rng.sample(StandardNormal);
            dir.axpy(F::of(g), b);
        }
        let dir = match dir.normalized() {
            Ok(d) => d,
            Err(_) => continue,
        };
        let xs: Vec<F> = points
            .iter()
            .map(|p| (p - &o).dot(&dir))
            .collect::<Result<_>>()?;
        match coefficient_of_variation(&xs, tau) {
            Ok(cv) => per_direction_cv.push(cv),
            Err(Error::DegenerateDirection) => continue,
            Err(e) => return Err(e),
        }
    }
    if per_direction_cv.is_empty() {
        return Err(Error::DegenerateDirection);
    }
    let omega = per_direction_cv
        .iter()
        .fold(F::zero(), |a, &b| a.max(b));
    Ok(RegularStats {
        omega,
        directions_tested: n_directions,
        per_direction_cv,
    })
}

/// Regular-mode sample size: ceil((omega^2 - 1) (j/eps)^2), at least 1.
pub fn regular_sample_size<F: Scalar>(omega: F, eps: F, j: usize) -> Result<usize> {
    if !(eps > F::zero()) {
        return Err(Error::param("eps must be positive"));
    }
    if j < 1 {
        return Err(Error::param("j must be >= 1"));
    }
    if omega < F::one() {
        return Err(Error::param("regular factor omega must be >= 1"));
    }
    let jf = F::of(j as f64);
    let m = (omega * omega - F::one()) * (jf / eps) * (jf / eps);
    Ok(ceil_count(m).max(1))
}

/// Configuration for the regular fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularConfig<F> {
    /// Known regular factor; `None` estimates it from the tau = 2 optimal
    /// flat over `n_directions` sampled directions.
    pub omega: Option<F>,
    pub n_directions: usize,
    pub fit: FitConfig<F>,
}

impl<F: Scalar> Default for RegularConfig<F> {
    fn default() -> Self {
        RegularConfig {
            omega: None,
            n_directions: 64,
            fit: FitConfig::default(),
        }
    }
}

const OMEGA_ESTIMATE_LABEL: u64 = u64::MAX - 2;

/// Regular fit: identical pipeline to the trimmed single-flat fit, but with
/// the bounded-CV sample size and no trimming. The result's inliers are all
/// points.
pub fn fit_regular<F: Scalar>(
    points: &PointSet<F>,
    j: usize,
    eps: F,
    tau: u32,
    stream: &RngStream,
    cfg: &RegularConfig<F>,
) -> Result<(FitResult<F>, F)> {
    let omega = match cfg.omega {
        Some(w) => w,
        None => {
            let reference = crate::fit::optimal_flat_tau2(points, j, None)?;
            regular_factor(
                points,
                &reference,
                cfg.n_directions,
                &stream.child(OMEGA_ESTIMATE_LABEL),
                tau,
            )?
            .omega
        }
    };
    let m = regular_sample_size(omega, eps, j)?;
    let mut fit_cfg = cfg.fit.clone();
    fit_cfg.r_override = Some(m);
    let result = fit_single_flat(points, j, F::zero(), eps, tau, stream, &fit_cfg)?;
    Ok((result, omega))
}
