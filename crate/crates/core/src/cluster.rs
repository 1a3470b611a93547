//! Full (k,j)-projective clustering: k rotation trees, combination
//! enumeration with global outlier trimming, grid refinement, and a pluggable
//! dimension-reduction stage.
//!
//! The pipeline builds one rotation tree per cluster, enumerates one
//! root-to-leaf flat from each tree, and scores the combination by the
//! trimmed objective over the whole point set (the ceil(gamma n) largest
//! point-to-nearest-flat distances are dropped as outliers). A second pass
//! rebuilds the trees with grid-point siblings inside a ball of radius
//! 5 sqrt(j) r L^(1/tau) around every candidate, which can only improve the
//! enumerated objective because the original candidates remain.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{
    center_and_tree, collect_path_evals, trimmed_mean, CenterMode, FitConfig, GridAugment,
    PathEval, RotationTree,
};
use crate::geometry::{pow_tau, Flat, PointSet, Vector};
use crate::linalg::gram_schmidt;
use crate::rng::RngStream;
use crate::sampling::{sample_size_clustering, RngKeying, SampleLogArg};
use crate::scalar::{ceil_count, Scalar};

/// Grid refinement knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig<F> {
    pub enabled: bool,
    /// Grid points per axis inside the refinement ball.
    pub per_axis_resolution: usize,
    /// Multiplies the refinement-ball radius.
    pub radius_scale: F,
}

impl<F: Scalar> Default for GridConfig<F> {
    fn default() -> Self {
        GridConfig {
            enabled: true,
            per_axis_resolution: 3,
            radius_scale: F::one(),
        }
    }
}

/// Dimension-reduction stage run before clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    #[default]
    Identity,
    /// Seeded random orthonormal projection onto `target_dim` coordinates,
    /// scaled by sqrt(d / d') so pairwise distances are preserved in
    /// expectation.
    RandomProjection { target_dim: usize },
}

/// Lifts reduced-space results back to the original space.
#[derive(Debug, Clone)]
pub enum BackMap<F> {
    Identity,
    Projection {
        /// Orthonormal rows of the projection, each of the original dimension.
        rows: Vec<Vector<F>>,
        scale: F,
    },
}

impl<F: Scalar> BackMap<F> {
    pub fn lift_point(&self, q: &Vector<F>) -> Result<Vector<F>> {
        match self {
            BackMap::Identity => Ok(q.clone()),
            BackMap::Projection { rows, scale } => {
                if q.dim() != rows.len() {
                    return Err(Error::dim(rows.len(), q.dim()));
                }
                let mut out = Vector::zeros(rows[0].dim());
                for (row, &c) in rows.iter().zip(q.coords()) {
                    out.axpy(c / *scale, row);
                }
                Ok(out)
            }
        }
    }

    /// Lift a basis direction without the inverse scaling (directions are
    /// renormalized, not measured).
    fn lift_direction(&self, v: &Vector<F>) -> Result<Vector<F>> {
        match self {
            BackMap::Identity => Ok(v.clone()),
            BackMap::Projection { rows, .. } => {
                let mut out = Vector::zeros(rows[0].dim());
                for (row, &c) in rows.iter().zip(v.coords()) {
                    out.axpy(c, row);
                }
                Ok(out)
            }
        }
    }

    pub fn lift_flat(&self, flat: &Flat<F>) -> Result<Flat<F>> {
        match self {
            BackMap::Identity => Ok(flat.clone()),
            BackMap::Projection { .. } => {
                let anchor = self.lift_point(flat.anchor())?;
                let basis = flat
                    .basis()
                    .iter()
                    .map(|b| self.lift_direction(b))
                    .collect::<Result<Vec<_>>>()?;
                if basis.is_empty() {
                    return Flat::new(anchor, basis);
                }
                let basis = gram_schmidt(&basis)?;
                Flat::new(anchor, basis)
            }
        }
    }

    pub fn project_point(&self, p: &Vector<F>) -> Result<Vector<F>> {
        match self {
            BackMap::Identity => Ok(p.clone()),
            BackMap::Projection { rows, scale } => {
                let coords = rows
                    .iter()
                    .map(|r| Ok(r.dot(p)? * *scale))
                    .collect::<Result<Vec<F>>>()?;
                Ok(Vector::from_raw(coords))
            }
        }
    }
}

/// Apply the reduction stage. Identity returns the input unchanged; random
/// projection applies a seeded uniformly random orthonormal map.
pub fn reduce_dimension<F: Scalar>(
    points: &PointSet<F>,
    mode: &Reduction,
    stream: &RngStream,
) -> Result<(PointSet<F>, BackMap<F>)> {
    match *mode {
        Reduction::Identity => Ok((points.clone(), BackMap::Identity)),
        Reduction::RandomProjection { target_dim } => {
            let d = points.dim();
            if target_dim > d {
                return Err(Error::param(format!(
                    "target dimension {target_dim} exceeds input dimension {d}"
                )));
            }
            if target_dim < 1 {
                return Err(Error::param("target dimension must be >= 1"));
            }
            let rows = random_orthonormal_rows(target_dim, d, stream)?;
            let scale = (F::of(d as f64) / F::of(target_dim as f64)).sqrt();
            let back = BackMap::Projection { rows, scale };
            let reduced = points
                .iter()
                .map(|p| back.project_point(p))
                .collect::<Result<Vec<_>>>()?;
            Ok((PointSet::new(reduced)?, back))
        }
    }
}

fn random_orthonormal_rows<F: Scalar>(
    k: usize,
    d: usize,
    stream: &RngStream,
) -> Result<Vec<Vector<F>>> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    for attempt in 0..8 {
        let mut rng = stream.child(attempt).rng();
        let raw: Vec<Vector<F>> = (0..k)
            .map(|_| {
                Vector::from_raw(
                    (0..d)
                        .map(|_| F::of(rng.sample::<f64, _>(StandardNormal)))
                        .collect(),
                )
            })
            .collect();
        if let Ok(rows) = gram_schmidt(&raw) {
            return Ok(rows);
        }
    }
    Err(Error::RankDeficient)
}

/// Axis-aligned grid spanning the cube inscribed in the ball of radius `r_b`
/// around `center`, filtered to the ball. `resolution` points per axis; the
/// center itself appears when the resolution is odd.
pub fn grid_candidates<F: Scalar>(
    center: &Vector<F>,
    r_b: F,
    cfg: &GridConfig<F>,
    ambient_dim: usize,
    cap: usize,
) -> Result<Vec<Vector<F>>> {
    if !(r_b > F::zero()) {
        return Err(Error::param("grid ball radius must be positive"));
    }
    if cfg.per_axis_resolution < 1 {
        return Err(Error::param("grid resolution must be >= 1"));
    }
    if center.dim() != ambient_dim {
        return Err(Error::dim(ambient_dim, center.dim()));
    }
    let res = cfg.per_axis_resolution;
    let mut total: u128 = 1;
    for _ in 0..ambient_dim {
        total = total.saturating_mul(res as u128);
        if total > cap as u128 {
            return Err(Error::ResourceCap(format!(
                "grid of {res}^{ambient_dim} points exceeds cap {cap}"
            )));
        }
    }
    let half = r_b / F::of(ambient_dim as f64).sqrt();
    let axis_offsets: Vec<F> = if res == 1 {
        vec![F::zero()]
    } else {
        (0..res)
            .map(|i| {
                -half + F::of(2.0) * half * F::of(i as f64) / F::of((res - 1) as f64)
            })
            .collect()
    };
    let units: Vec<Vector<F>> = (0..ambient_dim)
        .map(|axis| Vector::unit(ambient_dim, axis))
        .collect();
    let mut out = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; ambient_dim];
    loop {
        let mut offset_nsq = F::zero();
        let mut point = center.clone();
        for (axis, &i) in idx.iter().enumerate() {
            let off = axis_offsets[i];
            offset_nsq = offset_nsq + off * off;
            point.axpy(off, &units[axis]);
        }
        if offset_nsq.sqrt() <= r_b * (F::one() + F::REL_TOL) {
            out.push(point);
        }
        // odometer increment
        let mut carry = true;
        for slot in idx.iter_mut() {
            if *slot + 1 < res {
                *slot += 1;
                carry = false;
                break;
            }
            *slot = 0;
        }
        if carry {
            break;
        }
    }
    Ok(out)
}

/// Full clustering configuration. `seed` drives every random draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig<F> {
    pub k: usize,
    pub j: usize,
    pub tau: u32,
    pub eps: F,
    pub gamma: F,
    pub seed: u64,
    /// Per-node sample size; `None` uses the clustering sample-size formula
    /// (astronomical for honest parameters; desk-scale runs override).
    pub r_override: Option<usize>,
    pub grid: GridConfig<F>,
    pub reduction: Reduction,
    pub center_samples: Option<usize>,
    pub center_mode: CenterMode,
    pub restarts: usize,
    pub keying: RngKeying,
    pub max_paths: usize,
    pub max_combinations: u64,
    pub max_grid_candidates: usize,
}

impl<F: Scalar> Default for ClusterConfig<F> {
    fn default() -> Self {
        ClusterConfig {
            k: 1,
            j: 1,
            tau: 2,
            eps: F::of(0.25),
            gamma: F::of(0.1),
            seed: 0,
            r_override: None,
            grid: GridConfig::default(),
            reduction: Reduction::Identity,
            center_samples: None,
            center_mode: CenterMode::default(),
            restarts: 1,
            keying: RngKeying::default(),
            max_paths: 1_000_000,
            max_combinations: 10_000_000,
            max_grid_candidates: 100_000,
        }
    }
}

impl<F: Scalar> ClusterConfig<F> {
    fn fit_config(&self) -> FitConfig<F> {
        FitConfig {
            r_override: self.r_override,
            center_samples: self.center_samples,
            center_mode: self.center_mode,
            log_arg: SampleLogArg::default(),
            max_paths: self.max_paths,
            dedup_tol: F::of(1e-12),
            restarts: 1,
            keying: self.keying,
        }
    }
}

/// Clustering output: k flats, the per-point assignment (None marks an
/// outlier), the trimmed objective on the original points, and the
/// enumeration objectives before (`step4_objective`) and after
/// (`step6_objective`) grid refinement.
#[derive(Debug, Clone)]
pub struct ClusteringResult<F> {
    pub flats: Vec<Flat<F>>,
    pub assignment: Vec<Option<usize>>,
    pub outlier_indices: Vec<usize>,
    pub objective: F,
    pub step4_objective: F,
    pub step6_objective: F,
    pub config: ClusterConfig<F>,
}

/// Assign each point to its nearest flat, trim the ceil(gamma n) largest
/// minima as outliers (capped at n-1; ties at the threshold keep the lower
/// index), and average the tau-powers over the survivors.
pub fn assign_and_trim<F: Scalar>(
    points: &PointSet<F>,
    flats: &[Flat<F>],
    tau: u32,
    gamma: F,
) -> Result<(Vec<Option<usize>>, Vec<usize>, F)> {
    if flats.is_empty() {
        return Err(Error::param("need at least one flat"));
    }
    if tau < 1 {
        return Err(Error::param("tau must be >= 1"));
    }
    if gamma < F::zero() || gamma >= F::one() {
        return Err(Error::param("gamma must lie in [0, 1)"));
    }
    let n = points.n();
    let mut nearest = Vec::with_capacity(n);
    let mut costs = Vec::with_capacity(n);
    for p in points.iter() {
        let mut best_idx = 0usize;
        let mut best_cost = pow_tau(flats[0].distance_sq(p)?, tau);
        for (l, f) in flats.iter().enumerate().skip(1) {
            let c = pow_tau(f.distance_sq(p)?, tau);
            if c < best_cost {
                best_cost = c;
                best_idx = l;
            }
        }
        nearest.push(best_idx);
        costs.push(best_cost);
    }
    let out_count = ceil_count(gamma * F::of(n as f64)).min(n - 1);
    let keep = n - out_count;
    let (objective, inliers) = trimmed_mean(&costs, keep);
    let mut is_inlier = vec![false; n];
    for &i in &inliers {
        is_inlier[i] = true;
    }
    let assignment: Vec<Option<usize>> = (0..n)
        .map(|i| if is_inlier[i] { Some(nearest[i]) } else { None })
        .collect();
    let outliers: Vec<usize> = (0..n).filter(|&i| !is_inlier[i]).collect();
    Ok((assignment, outliers, objective))
}

struct ComboBest<F> {
    objective: F,
    combo: u64,
}

/// Enumerate one path per tree, lexicographically, and return the best
/// combination under the trimmed objective.
fn best_combination<F: Scalar>(
    evals: &[Vec<PathEval<F>>],
    n: usize,
    keep: usize,
    max_combinations: u64,
) -> Result<ComboBest<F>> {
    let mut total: u128 = 1;
    for e in evals {
        if e.is_empty() {
            return Err(Error::RankDeficient);
        }
        total = total.saturating_mul(e.len() as u128);
    }
    if total > max_combinations as u128 {
        return Err(Error::ResourceCap(format!(
            "{total} flat combinations exceed max_combinations = {max_combinations}"
        )));
    }
    let total = total as u64;
    let k = evals.len();
    let radices: Vec<u64> = evals.iter().map(|e| e.len() as u64).collect();

    let best = (0..total)
        .into_par_iter()
        .fold(
            || None,
            |acc: Option<ComboBest<F>>, combo| {
                // decode mixed-radix, first tree most significant
                let mut rem = combo;
                let mut picks = vec![0usize; k];
                for i in (0..k).rev() {
                    picks[i] = (rem % radices[i]) as usize;
                    rem /= radices[i];
                }
                let mut minv: Vec<F> = evals[0][picks[0]].costs.clone();
                for (tree, &pick) in picks.iter().enumerate().skip(1) {
                    for (m, &c) in minv.iter_mut().zip(&evals[tree][pick].costs) {
                        if c < *m {
                            *m = c;
                        }
                    }
                }
                debug_assert_eq!(minv.len(), n);
                let (objective, _) = trimmed_mean(&minv, keep);
                let cand = ComboBest { objective, combo };
                Some(match acc {
                    None => cand,
                    Some(cur) => {
                        if cand.objective < cur.objective
                            || (cand.objective == cur.objective && cand.combo < cur.combo)
                        {
                            cand
                        } else {
                            cur
                        }
                    }
                })
            },
        )
        .reduce(
            || None,
            |a, b| match (a, b) {
                (None, x) => x,
                (x, None) => x,
                (Some(x), Some(y)) => Some(
                    if y.objective < x.objective
                        || (y.objective == x.objective && y.combo < x.combo)
                    {
                        y
                    } else {
                        x
                    },
                ),
            },
        );
    best.ok_or(Error::RankDeficient)
}

fn combo_flats<F: Scalar>(evals: &[Vec<PathEval<F>>], combo: u64) -> Vec<Flat<F>> {
    let k = evals.len();
    let radices: Vec<u64> = evals.iter().map(|e| e.len() as u64).collect();
    let mut rem = combo;
    let mut picks = vec![0usize; k];
    for i in (0..k).rev() {
        picks[i] = (rem % radices[i]) as usize;
        rem /= radices[i];
    }
    picks
        .iter()
        .enumerate()
        .map(|(tree, &pick)| evals[tree][pick].flat.clone())
        .collect()
}

/// Run the full clustering pipeline with the stream derived from
/// `config.seed`.
pub fn run_clustering<F: Scalar>(
    points: &PointSet<F>,
    config: &ClusterConfig<F>,
) -> Result<ClusteringResult<F>> {
    run_clustering_with_stream(points, config, &RngStream::new(config.seed))
}

const REDUCE_LABEL: u64 = u64::MAX - 1;

/// Run the full clustering pipeline with an explicit stream.
pub fn run_clustering_with_stream<F: Scalar>(
    points: &PointSet<F>,
    config: &ClusterConfig<F>,
    stream: &RngStream,
) -> Result<ClusteringResult<F>> {
    let n = points.n();
    if config.k < 1 {
        return Err(Error::param("k must be >= 1"));
    }
    if n < config.k {
        return Err(Error::param("need at least k points"));
    }
    if config.j < 1 || config.j > points.dim() {
        return Err(Error::param("j must lie in 1..=d"));
    }
    if config.tau < 1 {
        return Err(Error::param("tau must be >= 1"));
    }
    if config.gamma < F::zero() || config.gamma >= F::one() {
        return Err(Error::param("gamma must lie in [0, 1)"));
    }

    let (reduced, back) = reduce_dimension(points, &config.reduction, &stream.child(REDUCE_LABEL))?;
    let r = match config.r_override {
        Some(r) if r >= 1 => r,
        Some(_) => return Err(Error::param("sample size override must be >= 1")),
        None => {
            if config.gamma <= F::zero() {
                return Err(Error::param(
                    "gamma = 0 requires an explicit sample size override",
                ));
            }
            sample_size_clustering(
                config.k,
                config.j,
                config.gamma.as_f64(),
                config.eps.as_f64(),
            )?
            .1
        }
    };
    let fit_cfg = config.fit_config();
    let out_count = ceil_count(config.gamma * F::of(n as f64)).min(n - 1);
    let keep = n - out_count;

    let mut best: Option<(Vec<Flat<F>>, F, F)> = None; // flats, L4, L6
    let mut last_err = None;
    for rho in 0..config.restarts.max(1) {
        let s_rho = stream.child(rho as u64);
        let attempt = || -> Result<(Vec<Flat<F>>, F, F)> {
            let trees: Vec<RotationTree<F>> = (0..config.k)
                .map(|i| center_and_tree(&reduced, config.j, r, &s_rho.child(i as u64), &fit_cfg, None))
                .collect::<Result<_>>()?;
            let evals: Vec<Vec<PathEval<F>>> = trees
                .iter()
                .map(|t| collect_path_evals(t, &reduced, config.tau))
                .collect();
            let step4 = best_combination(&evals, n, keep, config.max_combinations)?;
            let l4 = step4.objective;

            if config.grid.enabled && l4 > F::zero() {
                let r_b = F::of(5.0)
                    * F::of(config.j as f64).sqrt()
                    * F::of(r as f64)
                    * l4.powf(F::one() / F::of(config.tau as f64))
                    * config.grid.radius_scale;
                let aug = GridAugment {
                    r_b,
                    grid: config.grid.clone(),
                    max_candidates: config.max_grid_candidates,
                };
                let trees6: Vec<RotationTree<F>> = (0..config.k)
                    .map(|i| {
                        center_and_tree(
                            &reduced,
                            config.j,
                            r,
                            &s_rho.child(i as u64),
                            &fit_cfg,
                            Some(&aug),
                        )
                    })
                    .collect::<Result<_>>()?;
                let evals6: Vec<Vec<PathEval<F>>> = trees6
                    .iter()
                    .map(|t| collect_path_evals(t, &reduced, config.tau))
                    .collect();
                let step6 = best_combination(&evals6, n, keep, config.max_combinations)?;
                Ok((combo_flats(&evals6, step6.combo), l4, step6.objective))
            } else {
                Ok((combo_flats(&evals, step4.combo), l4, l4))
            }
        };
        match attempt() {
            Ok((flats, l4, l6)) => {
                let replace = match &best {
                    None => true,
                    Some((_, _, cur)) => l6 < *cur,
                };
                if replace {
                    best = Some((flats, l4, l6));
                }
            }
            Err(e @ Error::ResourceCap(_)) => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    let (flats_reduced, l4, l6) = best.ok_or_else(|| last_err.unwrap_or(Error::RankDeficient))?;
    let flats: Vec<Flat<F>> = flats_reduced
        .iter()
        .map(|f| back.lift_flat(f))
        .collect::<Result<_>>()?;
    let (assignment, outlier_indices, objective) =
        assign_and_trim(points, &flats, config.tau, config.gamma)?;
    Ok(ClusteringResult {
        flats,
        assignment,
        outlier_indices,
        objective,
        step4_objective: l4,
        step6_objective: l6,
        config: config.clone(),
    })
}
