//! Numeric verification: planted-instance generators, a brute-force oracle
//! for tiny clustering instances, and Monte-Carlo verifiers for each
//! geometric lemma the fitting pipeline relies on.
//!
//! Deterministic lemmas must hold on every random instance; probabilistic
//! statements are checked against their stated success probability minus a
//! 0.02 Monte-Carlo slack.

mod lemmas;

use rand::Rng;
use rand_distr::{Distribution as RandDistribution, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::anchored_flat_tau2;
use crate::geometry::{pow_tau, Flat, PointSet, Vector};
use crate::linalg::{gram_schmidt, orthonormal_complement};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Noise model for planted instances. Erlang uses shape 2, centered and
/// scaled to the requested standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distribution {
    #[default]
    Gaussian,
    Erlang,
}

impl Distribution {
    pub fn as_str(&self) -> &'static str {
        match self {
            Distribution::Gaussian => "gaussian",
            Distribution::Erlang => "erlang",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Distribution::Gaussian),
            "erlang" => Ok(Distribution::Erlang),
            other => Err(Error::param(format!("unknown distribution: {other}"))),
        }
    }
}

/// Everything needed to regenerate an instance bit-identically.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorEcho {
    pub d: usize,
    pub j: usize,
    pub k: usize,
    pub n: usize,
    pub noise_sigma: f64,
    pub outlier_fraction: f64,
    pub distribution: Distribution,
    pub stream: RngStream,
}

/// A synthetic clustering instance with known ground truth.
#[derive(Debug, Clone)]
pub struct PlantedInstance<F> {
    pub points: PointSet<F>,
    pub true_flats: Vec<Flat<F>>,
    /// `None` marks a planted outlier.
    pub true_assignment: Vec<Option<usize>>,
    pub noise_sigma: F,
    pub outlier_fraction: F,
    pub echo: GeneratorEcho,
}

fn draw_noise(rng: &mut impl Rng, dist: Distribution, sigma: f64) -> f64 {
    match dist {
        Distribution::Gaussian => {
            let g: f64 = rng.sample(StandardNormal);
            g * sigma
        }
        Distribution::Erlang => {
            // shape 2: mean 2 theta, variance 2 theta^2
            let theta = sigma / 2f64.sqrt();
            if theta == 0.0 {
                return 0.0;
            }
            let gamma = Gamma::new(2.0, theta).expect("valid gamma parameters");
            gamma.sample(rng) - 2.0 * theta
        }
    }
}

pub(crate) fn random_unit_basis<F: Scalar>(
    d: usize,
    j: usize,
    stream: &RngStream,
) -> Vec<Vector<F>> {
    if j == 0 {
        return Vec::new();
    }
    for attempt in 0..8 {
        let mut rng = stream.child(attempt).rng();
        let raw: Vec<Vector<F>> = (0..j)
            .map(|_| {
                Vector::from_raw(
                    (0..d)
                        .map(|_| F::of(rng.sample::<f64, _>(StandardNormal)))
                        .collect(),
                )
            })
            .collect();
        if let Ok(basis) = gram_schmidt(&raw) {
            return basis;
        }
    }
    unreachable!("gaussian spans of j <= d vectors are full rank")
}

/// Generate `n` points around `k` explicitly given j-flats: points are
/// assigned round-robin, placed at a Gaussian in-flat spread plus orthogonal
/// noise; the trailing `round(outlier_fraction * n)` points are uniform in a
/// box ten times the inlier extent.
pub fn gen_planted_with_flats<F: Scalar>(
    true_flats: Vec<Flat<F>>,
    n: usize,
    noise_sigma: F,
    outlier_fraction: F,
    distribution: Distribution,
    stream: &RngStream,
) -> Result<PlantedInstance<F>> {
    let k = true_flats.len();
    if k == 0 {
        return Err(Error::param("need at least one flat"));
    }
    let d = true_flats[0].ambient_dim();
    let j = true_flats[0].dim();
    if n < k {
        return Err(Error::param("need at least k points"));
    }
    let of = outlier_fraction.as_f64();
    if !(0.0..1.0).contains(&of) {
        return Err(Error::param("outlier fraction must lie in [0, 1)"));
    }
    let sigma = noise_sigma.as_f64();
    if sigma < 0.0 {
        return Err(Error::param("noise sigma must be non-negative"));
    }
    let n_out = (of * n as f64).round() as usize;
    let n_in = n - n_out;

    let complements: Vec<Vec<Vector<F>>> = true_flats
        .iter()
        .map(|f| orthonormal_complement(f.basis(), d))
        .collect();

    let mut points = Vec::with_capacity(n);
    let mut assignment = Vec::with_capacity(n);
    for i in 0..n_in {
        let which = i % k;
        let flat = &true_flats[which];
        let mut rng = stream.child(i as u64).rng();
        let mut p = flat.anchor().clone();
        for b in flat.basis() {
            let c: f64 = rng.sample::<f64, _>(StandardNormal);
            p.axpy(F::of(2.0 * c), b);
        }
        for u in &complements[which] {
            p.axpy(F::of(draw_noise(&mut rng, distribution, sigma)), u);
        }
        points.push(p);
        assignment.push(Some(which));
    }

    // bounding box of the inliers, grown tenfold about its center
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in &points {
        for (a, &c) in lo.iter_mut().zip(p.coords()) {
            *a = a.min(c.as_f64());
        }
        for (b, &c) in hi.iter_mut().zip(p.coords()) {
            *b = b.max(c.as_f64());
        }
    }
    for i in 0..n_out {
        let mut rng = stream.child((n_in + i) as u64).rng();
        let coords: Vec<F> = (0..d)
            .map(|axis| {
                let center = 0.5 * (lo[axis] + hi[axis]);
                let half = (0.5 * (hi[axis] - lo[axis])).max(1.0) * 10.0;
                F::of(center + (rng.gen::<f64>() * 2.0 - 1.0) * half)
            })
            .collect();
        points.push(Vector::new(coords)?);
        assignment.push(None);
    }

    Ok(PlantedInstance {
        points: PointSet::new(points)?,
        true_flats,
        true_assignment: assignment,
        noise_sigma,
        outlier_fraction,
        echo: GeneratorEcho {
            d,
            j,
            k,
            n,
            noise_sigma: sigma,
            outlier_fraction: of,
            distribution,
            stream: *stream,
        },
    })
}

/// Generate `k` random j-flats in R^d and a planted instance around them.
pub fn gen_planted<F: Scalar>(
    d: usize,
    j: usize,
    k: usize,
    n: usize,
    noise_sigma: F,
    outlier_fraction: F,
    distribution: Distribution,
    stream: &RngStream,
) -> Result<PlantedInstance<F>> {
    if d < 1 || j > d || k < 1 {
        return Err(Error::param("need d >= 1, j <= d, k >= 1"));
    }
    let flats: Vec<Flat<F>> = (0..k)
        .map(|i| {
            let fs = stream.child(u64::MAX - 10 - i as u64);
            let basis = random_unit_basis(d, j, &fs.child(0));
            let mut rng = fs.child(1).rng();
            let anchor = Vector::new(
                (0..d)
                    .map(|_| F::of((rng.gen::<f64>() * 2.0 - 1.0) * 5.0))
                    .collect(),
            )?;
            Flat::new(anchor, basis)
        })
        .collect::<Result<_>>()?;
    gen_planted_with_flats(flats, n, noise_sigma, outlier_fraction, distribution, stream)
}

/// Hard cap for the brute-force oracle.
pub const BRUTE_FORCE_MAX_N: usize = 10;

/// Exact oracle for tiny instances: enumerate every partition of the points
/// into at most k groups; each group is fitted by the tau = 2 eigenflat
/// through its mean (for other tau, by the best span of a j-subset of the
/// group through its mean). Returns the best flats and the full (untrimmed)
/// objective.
pub fn brute_force_clustering<F: Scalar>(
    points: &PointSet<F>,
    k: usize,
    j: usize,
    tau: u32,
) -> Result<(Vec<Flat<F>>, F)> {
    let n = points.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::ResourceCap(format!(
            "brute force capped at n = {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    if k < 1 || j > points.dim() || tau < 1 {
        return Err(Error::param("need k >= 1, j <= d, tau >= 1"));
    }

    let mut best: Option<(Vec<Flat<F>>, F)> = None;
    let total = (k as u64).pow(n as u32);
    for code in 0..total {
        let mut labels = vec![0usize; n];
        let mut rem = code;
        for l in labels.iter_mut() {
            *l = (rem % k as u64) as usize;
            rem /= k as u64;
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            groups[l].push(i);
        }
        let mut flats = Vec::new();
        let mut cost = F::zero();
        for group in groups.iter().filter(|g| !g.is_empty()) {
            let members: Vec<Vector<F>> = group.iter().map(|&i| points.point(i).clone()).collect();
            let (flat, group_cost) = fit_group(&members, j, tau);
            cost = cost + group_cost;
            flats.push(flat);
        }
        let objective = cost / F::of(n as f64);
        let replace = match &best {
            None => true,
            Some((_, cur)) => objective < *cur,
        };
        if replace {
            best = Some((flats, objective));
        }
    }
    Ok(best.expect("at least one partition"))
}

/// Best j-flat for one group through its mean; sum of tau-powers.
fn fit_group<F: Scalar>(members: &[Vector<F>], j: usize, tau: u32) -> (Flat<F>, F) {
    let d = members[0].dim();
    let mut mean = Vector::zeros(d);
    for p in members {
        mean.axpy(F::one(), p);
    }
    let mean = mean.scale(F::one() / F::of(members.len() as f64));

    let group_cost = |flat: &Flat<F>| {
        members
            .iter()
            .map(|p| pow_tau(flat.distance_sq(p).expect("dims agree"), tau))
            .fold(F::zero(), |a, b| a + b)
    };

    if tau == 2 {
        let flat = anchored_flat_tau2(members, mean, j);
        let cost = group_cost(&flat);
        return (flat, cost);
    }

    // general tau: flats spanned by j-subsets of the centered group,
    // padded to dimension j when the group is small
    let m = members.len();
    let diffs: Vec<Vector<F>> = members.iter().map(|p| p - &mean).collect();
    let subset_size = j.min(m);
    let mut best: Option<(Flat<F>, F)> = None;
    let mut subset: Vec<usize> = (0..subset_size).collect();
    loop {
        let span: Vec<Vector<F>> = subset.iter().map(|&i| diffs[i].clone()).collect();
        let mut basis = crate::linalg::gram_schmidt_greedy(&span);
        if basis.len() < j {
            let rest = orthonormal_complement(&basis, d);
            basis.extend(rest.into_iter().take(j - basis.len()));
        }
        basis.truncate(j);
        if let Ok(flat) = Flat::new(mean.clone(), basis) {
            let cost = group_cost(&flat);
            let replace = match &best {
                None => true,
                Some((_, cur)) => cost < *cur,
            };
            if replace {
                best = Some((flat, cost));
            }
        }
        if !next_combination(&mut subset, m) {
            break;
        }
    }
    best.expect("at least one subset evaluated")
}

/// Advance `subset` to the next lexicographic combination of its length from
/// `0..m`; false when exhausted.
fn next_combination(subset: &mut [usize], m: usize) -> bool {
    let s = subset.len();
    let mut i = s;
    while i > 0 {
        i -= 1;
        if subset[i] < m - (s - i) {
            subset[i] += 1;
            for w in i + 1..s {
                subset[w] = subset[w - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Outcome of a lemma verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictReport {
    pub lemma: String,
    pub trials: usize,
    pub failures: usize,
    /// Deterministic lemmas: the smallest slack observed (negative means a
    /// violation). Probabilistic lemmas: empirical success rate minus the
    /// required rate.
    pub worst_margin: f64,
    pub pass: bool,
}

/// Every lemma id known to [`verify_lemma`].
pub const ALL_LEMMAS: &[&str] = &[
    "hyperbox",
    "slab-partition",
    "delta-rotation",
    "ltau-delta-rotation",
    "translation",
    "power-mean",
    "select",
    "mean-dist",
    "cv-bound",
    "claim-1",
    "theorem-1",
];

/// Run the named lemma's verifier for `trials` randomized instances.
pub fn verify_lemma(lemma_id: &str, trials: usize, stream: &RngStream) -> Result<VerdictReport> {
    if trials < 1 {
        return Err(Error::param("need at least one trial"));
    }
    match lemma_id {
        "hyperbox" => Ok(lemmas::hyperbox(trials, stream)),
        "slab-partition" => Ok(lemmas::slab_partition_witness(trials, stream)),
        "delta-rotation" => Ok(lemmas::delta_rotation(trials, stream, &[2])),
        "ltau-delta-rotation" => Ok(lemmas::delta_rotation_named(
            trials,
            stream,
            &[1, 3, 4, 7],
            "ltau-delta-rotation",
        )),
        "translation" => Ok(lemmas::translation(trials, stream)),
        "power-mean" => Ok(lemmas::power_mean(trials, stream)),
        "select" => Ok(lemmas::select(trials, stream)),
        "mean-dist" => Ok(lemmas::mean_dist(trials, stream)),
        "cv-bound" => Ok(lemmas::cv_bound(trials, stream)),
        "claim-1" => Ok(lemmas::claim_one(trials, stream)),
        "theorem-1" => Ok(lemmas::theorem_one(trials, stream)),
        other => Err(Error::UnknownLemma(other.to_string())),
    }
}

/// Map-reduce helper: run `trial` over `0..trials` in parallel, collecting
/// (failure, margin) pairs deterministically.
pub(crate) fn run_trials<T>(trials: usize, trial: T) -> (usize, f64)
where
    T: Fn(usize) -> (bool, f64) + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let (failed, margin) = trial(i);
            (usize::from(failed), margin)
        })
        .reduce(
            || (0usize, f64::INFINITY),
            |a, b| (a.0 + b.0, a.1.min(b.1)),
        )
}

#[cfg(test)]
mod tests;
