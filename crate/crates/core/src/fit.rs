//! Single j-flat fitting by recursive projection.
//!
//! A rotation tree of height j is grown from a center `o`: at each node the
//! points are projected onto the node's subspace, a sample is drawn, and the
//! symmetric-sampling enumeration yields one child per candidate mean point.
//! A child's subspace is the parent's subspace restricted to be perpendicular
//! to the direction from the center to the candidate, so every root-to-leaf
//! path collects j directions that span a candidate flat through `o`. The
//! best path under the trimmed objective is the fit.

use rayon::prelude::*;

use crate::cluster::{grid_candidates, GridConfig};
use crate::error::{Error, Result};
use crate::geometry::{pow_tau, Flat, PointSet, Vector};
use crate::linalg::{gram_schmidt, jacobi_eigh, orthonormal_complement, scatter_matrix};
use crate::rng::RngStream;
use crate::sampling::{
    sample_size_single_with, symmetric_sampling, uniform_sample_with, RngKeying, SampleLogArg,
};
use crate::scalar::{ceil_count, Scalar};

/// Where the symmetric-sampling center sits while the tree grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CenterMode {
    /// Keep the input center `o` at every level (proof-consistent; default).
    #[default]
    InputCenter,
    /// Re-center on the mean of each node's sample (the literal per-node
    /// re-assignment in the algorithm text).
    SampleMean,
}

/// Knobs for tree construction and path evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig<F> {
    /// Per-node sample size; `None` derives it from the sample-size formula.
    pub r_override: Option<usize>,
    /// Size of the fresh sample whose mean becomes the center `o`;
    /// `None` uses the per-node sample size.
    pub center_samples: Option<usize>,
    pub center_mode: CenterMode,
    /// Log argument used when deriving the sample size from the formula.
    pub log_arg: SampleLogArg,
    /// Hard cap on root-to-leaf paths.
    pub max_paths: usize,
    /// Sibling candidates closer than this (relative) are deduplicated.
    pub dedup_tol: F,
    /// Independent repetitions; the best trimmed objective wins.
    pub restarts: usize,
    pub keying: RngKeying,
}

impl<F: Scalar> Default for FitConfig<F> {
    fn default() -> Self {
        FitConfig {
            r_override: None,
            center_samples: None,
            center_mode: CenterMode::default(),
            log_arg: SampleLogArg::default(),
            max_paths: 1_000_000,
            dedup_tol: F::of(1e-12),
            restarts: 1,
            keying: RngKeying::default(),
        }
    }
}

/// Grid augmentation for tree rebuilding (clustering step 5): every
/// candidate gains grid-point siblings inside a ball of radius `r_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAugment<F> {
    pub r_b: F,
    pub grid: GridConfig<F>,
    pub max_candidates: usize,
}

/// Node of the rotation tree: the candidate point `t_v`, the unit direction
/// from the level's center toward it, and the children grown beneath it. The
/// root carries no point. A node at depth `l` implicitly owns the subspace of
/// dimension `d - l` through `o` perpendicular to the directions on its path;
/// [`RotationTree::subspace_basis`] materializes it on demand.
#[derive(Debug, Clone)]
pub struct RotationNode<F> {
    pub point: Option<Vector<F>>,
    pub direction: Option<Vector<F>>,
    pub depth: usize,
    pub children: Vec<RotationNode<F>>,
}

/// Output of tree construction.
#[derive(Debug, Clone)]
pub struct RotationTree<F> {
    pub root: RotationNode<F>,
    pub center: Vector<F>,
    pub sample_size: usize,
    pub flat_dim: usize,
    pub center_mode: CenterMode,
}

impl<F: Scalar> RotationTree<F> {
    /// Number of root-to-leaf paths.
    pub fn leaf_count(&self) -> usize {
        fn count<F>(node: &RotationNode<F>) -> usize {
            if node.children.is_empty() {
                1
            } else {
                node.children.iter().map(count).sum()
            }
        }
        if self.root.children.is_empty() {
            0
        } else {
            count(&self.root)
        }
    }

    /// Orthonormal basis of the subspace owned by the node addressed by
    /// `path` (child indices from the root): the orthogonal complement of the
    /// directions along the path.
    pub fn subspace_basis(&self, path: &[usize]) -> Result<Vec<Vector<F>>> {
        let mut node = &self.root;
        let mut dirs: Vec<Vector<F>> = Vec::with_capacity(path.len());
        for &idx in path {
            node = node
                .children
                .get(idx)
                .ok_or_else(|| Error::param("path leaves the tree"))?;
            dirs.push(
                node.direction
                    .clone()
                    .expect("non-root nodes carry a direction"),
            );
        }
        Ok(orthonormal_complement(&dirs, self.center.dim()))
    }
}

/// Result of a single-flat fit.
#[derive(Debug, Clone)]
pub struct FitResult<F> {
    pub flat: Flat<F>,
    pub inlier_indices: Vec<usize>,
    pub trimmed_objective: F,
    /// The j candidate points along the winning root-to-leaf path.
    pub path: Vec<Vector<F>>,
}

/// Grow a rotation tree of height `j` over `points` from center `o`.
pub fn build_tree<F: Scalar>(
    points: &PointSet<F>,
    o: &Vector<F>,
    j: usize,
    r: usize,
    stream: &RngStream,
    cfg: &FitConfig<F>,
) -> Result<RotationTree<F>> {
    build_tree_with_grid(points, o, j, r, stream, cfg, None)
}

/// As [`build_tree`], optionally adding grid-point siblings around every
/// candidate (clustering step 5). The grid lives inside the node's subspace.
pub fn build_tree_with_grid<F: Scalar>(
    points: &PointSet<F>,
    o: &Vector<F>,
    j: usize,
    r: usize,
    stream: &RngStream,
    cfg: &FitConfig<F>,
    grid: Option<&GridAugment<F>>,
) -> Result<RotationTree<F>> {
    let d = points.dim();
    if o.dim() != d {
        return Err(Error::dim(d, o.dim()));
    }
    if j < 1 || j > d {
        return Err(Error::param(format!("j = {j} outside 1..=d (d = {d})")));
    }
    if r < 1 {
        return Err(Error::param("sample size must be >= 1"));
    }
    // residuals relative to o; every node works in this frame
    let ys: Vec<Vector<F>> = points.iter().map(|p| p - o).collect();
    let scale = ys
        .iter()
        .map(|y| y.norm())
        .fold(F::one(), |a, b| a.max(b));

    let mut ctx = GrowContext {
        o,
        j,
        r,
        cfg,
        grid,
        scale,
        leaves: 0,
    };
    let mut root = RotationNode {
        point: None,
        direction: None,
        depth: 0,
        children: Vec::new(),
    };
    grow(&mut ctx, &mut root, ys, Vec::new(), stream)?;
    Ok(RotationTree {
        root,
        center: o.clone(),
        sample_size: r,
        flat_dim: j,
        center_mode: cfg.center_mode,
    })
}

struct GrowContext<'a, F: Scalar> {
    o: &'a Vector<F>,
    j: usize,
    r: usize,
    cfg: &'a FitConfig<F>,
    grid: Option<&'a GridAugment<F>>,
    scale: F,
    leaves: usize,
}

fn grow<F: Scalar>(
    ctx: &mut GrowContext<'_, F>,
    node: &mut RotationNode<F>,
    ys: Vec<Vector<F>>,
    used_dirs: Vec<Vector<F>>,
    stream: &RngStream,
) -> Result<()> {
    if node.depth == ctx.j {
        ctx.leaves += 1;
        if ctx.leaves > ctx.cfg.max_paths {
            return Err(Error::ResourceCap(format!(
                "rotation tree exceeds max_paths = {}",
                ctx.cfg.max_paths
            )));
        }
        return Ok(());
    }
    let d = ctx.o.dim();
    let sample_set = PointSet::new(ys.clone()).expect("projected set is non-empty");
    let sample = uniform_sample_with(
        &sample_set,
        ctx.r,
        &stream.child(0),
        ctx.cfg.keying,
    )?;
    let center = match ctx.cfg.center_mode {
        CenterMode::InputCenter => Vector::zeros(d),
        CenterMode::SampleMean => {
            let mut acc = Vector::zeros(d);
            for p in &sample.points {
                acc.axpy(F::one(), p);
            }
            acc.scale(F::one() / F::of(sample.len() as f64))
        }
    };
    let candidates = symmetric_sampling(&sample.points, &center)?;

    // expand with grid siblings when requested
    let mut raw: Vec<Vector<F>> = Vec::with_capacity(candidates.len());
    for c in candidates.points {
        raw.push(c);
    }
    if let Some(aug) = ctx.grid {
        let m = d - node.depth;
        let sub_basis = orthonormal_complement(&used_dirs, d);
        debug_assert_eq!(sub_basis.len(), m);
        let count = raw.len();
        for i in 0..count {
            let coords = Vector::from_raw(
                sub_basis
                    .iter()
                    .map(|b| raw[i].dot(b))
                    .collect::<Result<Vec<F>>>()?,
            );
            for g in grid_candidates(&coords, aug.r_b, &aug.grid, m, aug.max_candidates)? {
                let mut emb = Vector::zeros(d);
                for (b, &c) in sub_basis.iter().zip(g.coords()) {
                    emb.axpy(c, b);
                }
                raw.push(emb);
            }
        }
    }

    let skip_tol = F::of(1e-12) * ctx.scale.max(F::one());
    let dedup_tol = ctx.cfg.dedup_tol * ctx.scale.max(F::one());
    let mut accepted: Vec<Vector<F>> = Vec::new();
    for t in raw {
        let dir_raw = &t - &center;
        // a candidate coinciding with the rotation center has no direction
        if dir_raw.norm() <= skip_tol || t.norm() <= skip_tol {
            continue;
        }
        if accepted
            .iter()
            .any(|prev| (prev - &t).norm() <= dedup_tol)
        {
            continue;
        }
        accepted.push(t);
    }

    for (child_idx, t) in accepted.into_iter().enumerate() {
        let dir = (&t - &center).normalized()?;
        let mut child_ys: Vec<Vector<F>> = ys
            .iter()
            .map(|y| {
                let c = y.dot(&dir).expect("dimensions agree");
                let mut w = y.clone();
                w.axpy(-c, &dir);
                w
            })
            .collect();
        // keep the residuals exactly inside the child subspace
        for w in child_ys.iter_mut() {
            for u in &used_dirs {
                let c = w.dot(u).expect("dimensions agree");
                w.axpy(-c, u);
            }
        }
        let mut child = RotationNode {
            point: Some(ctx.o + &t),
            direction: Some(dir.clone()),
            depth: node.depth + 1,
            children: Vec::new(),
        };
        let mut child_dirs = used_dirs.clone();
        child_dirs.push(dir);
        grow(
            ctx,
            &mut child,
            child_ys,
            child_dirs,
            &stream.child(1 + child_idx as u64),
        )?;
        node.children.push(child);
    }
    Ok(())
}

/// The flat through `o` spanned by the path's candidate points.
/// Rejects rank-deficient paths.
pub fn flat_from_path<F: Scalar>(path: &[Vector<F>], o: &Vector<F>) -> Result<Flat<F>> {
    if path.is_empty() {
        return Err(Error::param("path must contain at least one point"));
    }
    let span: Vec<Vector<F>> = path.iter().map(|t| t - o).collect();
    Flat::from_span(o.clone(), &span)
}

/// Trimmed mean of `costs` over its `keep` smallest entries (ties broken
/// toward lower index). Returns the mean and the kept indices in ascending
/// index order.
pub(crate) fn trimmed_mean<F: Scalar>(costs: &[F], keep: usize) -> (F, Vec<usize>) {
    let n = costs.len();
    let keep = keep.clamp(1, n);
    let mut idx: Vec<usize> = (0..n).collect();
    if keep < n {
        idx.select_nth_unstable_by(keep - 1, |&a, &b| {
            costs[a]
                .partial_cmp(&costs[b])
                .expect("costs are finite")
                .then(a.cmp(&b))
        });
        idx.truncate(keep);
    }
    idx.sort_unstable();
    let mut sum = F::zero();
    for &i in &idx {
        sum = sum + costs[i];
    }
    (sum / F::of(keep as f64), idx)
}

/// Per-point tau-power costs of a flat over pre-centered residuals
/// (`rel[i]` is `p_i - o`; the flat must pass through `o`). Computed by the
/// same residual-vector reduction as `Flat::distance_sq`, so enumeration
/// objectives agree bit-for-bit with the final assignment pass.
pub(crate) fn path_costs<F: Scalar>(flat: &Flat<F>, rel: &[Vector<F>], tau: u32) -> Vec<F> {
    rel.iter()
        .map(|y| {
            let mut residual = y.clone();
            for b in flat.basis() {
                let c = residual.dot(b).expect("dimensions agree");
                residual.axpy(-c, b);
            }
            pow_tau(residual.norm_sq(), tau)
        })
        .collect()
}

struct PathBest<F> {
    objective: F,
    key: Vec<u32>,
    flat: Flat<F>,
}

fn better<F: Scalar>(a: Option<PathBest<F>>, b: Option<PathBest<F>>) -> Option<PathBest<F>> {
    match (a, b) {
        (None, x) => x,
        (x, None) => x,
        (Some(x), Some(y)) => {
            let ord = x
                .objective
                .partial_cmp(&y.objective)
                .expect("objectives are finite")
                .then_with(|| x.key.cmp(&y.key));
            if ord == std::cmp::Ordering::Greater {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

fn dfs_best<F: Scalar>(
    node: &RotationNode<F>,
    o: &Vector<F>,
    rel: &[Vector<F>],
    tau: u32,
    keep: usize,
    tpoints: &mut Vec<Vector<F>>,
    key: &mut Vec<u32>,
    j: usize,
) -> Option<PathBest<F>> {
    if node.depth == j {
        let flat = flat_from_path(tpoints, o).ok()?;
        let costs = path_costs(&flat, rel, tau);
        let (objective, _) = trimmed_mean(&costs, keep);
        return Some(PathBest {
            objective,
            key: key.clone(),
            flat,
        });
    }
    let mut best = None;
    for (i, child) in node.children.iter().enumerate() {
        tpoints.push(child.point.clone().expect("child carries a point"));
        key.push(i as u32);
        let sub = dfs_best(child, o, rel, tau, keep, tpoints, key, j);
        best = better(best, sub);
        key.pop();
        tpoints.pop();
    }
    best
}

/// Evaluate every root-to-leaf path and return the flat minimizing the
/// trimmed objective (mean of the ceil((1-gamma) n) smallest tau-power
/// distances). Ties break toward the first path in traversal order.
pub fn best_path<F: Scalar>(
    tree: &RotationTree<F>,
    points: &PointSet<F>,
    tau: u32,
    gamma: F,
) -> Result<FitResult<F>> {
    if tau < 1 {
        return Err(Error::param("tau must be >= 1"));
    }
    if gamma < F::zero() || gamma >= F::one() {
        return Err(Error::param("gamma must lie in [0, 1)"));
    }
    let n = points.n();
    let keep = ceil_count((F::one() - gamma) * F::of(n as f64)).clamp(1, n);
    let o = &tree.center;
    let rel: Vec<Vector<F>> = points.iter().map(|p| p - o).collect();

    let best = tree
        .root
        .children
        .par_iter()
        .enumerate()
        .map(|(i, child)| {
            let mut tpoints = vec![child.point.clone().expect("child carries a point")];
            let mut key = vec![i as u32];
            dfs_best(
                child,
                o,
                &rel,
                tau,
                keep,
                &mut tpoints,
                &mut key,
                tree.flat_dim,
            )
        })
        .reduce(|| None, better);

    let best = best.ok_or(Error::RankDeficient)?;
    let costs = path_costs(&best.flat, &rel, tau);
    let (objective, inlier_indices) = trimmed_mean(&costs, keep);
    // reconstruct the winning path's points from its key
    let mut path = Vec::with_capacity(tree.flat_dim);
    let mut node = &tree.root;
    for &i in &best.key {
        node = &node.children[i as usize];
        path.push(node.point.clone().expect("child carries a point"));
    }
    Ok(FitResult {
        flat: best.flat,
        inlier_indices,
        trimmed_objective: objective,
        path,
    })
}

/// One evaluated root-to-leaf path; used by the clustering combination
/// enumeration, which needs every tree's full cost columns at once.
#[derive(Debug, Clone)]
pub(crate) struct PathEval<F> {
    pub key: Vec<u32>,
    pub flat: Flat<F>,
    pub costs: Vec<F>,
}

pub(crate) fn collect_path_evals<F: Scalar>(
    tree: &RotationTree<F>,
    points: &PointSet<F>,
    tau: u32,
) -> Vec<PathEval<F>> {
    let o = &tree.center;
    let rel: Vec<Vector<F>> = points.iter().map(|p| p - o).collect();

    fn dfs<F: Scalar>(
        node: &RotationNode<F>,
        o: &Vector<F>,
        rel: &[Vector<F>],
        tau: u32,
        j: usize,
        tpoints: &mut Vec<Vector<F>>,
        key: &mut Vec<u32>,
        out: &mut Vec<PathEval<F>>,
    ) {
        if node.depth == j {
            if let Ok(flat) = flat_from_path(tpoints, o) {
                let costs = path_costs(&flat, rel, tau);
                out.push(PathEval {
                    key: key.clone(),
                    flat,
                    costs,
                });
            }
            return;
        }
        for (i, child) in node.children.iter().enumerate() {
            tpoints.push(child.point.clone().expect("child carries a point"));
            key.push(i as u32);
            dfs(child, o, rel, tau, j, tpoints, key, out);
            key.pop();
            tpoints.pop();
        }
    }

    let mut per_child: Vec<Vec<PathEval<F>>> = tree
        .root
        .children
        .par_iter()
        .enumerate()
        .map(|(i, child)| {
            let mut out = Vec::new();
            let mut tpoints = vec![child.point.clone().expect("child carries a point")];
            let mut key = vec![i as u32];
            dfs(
                child,
                o,
                &rel,
                tau,
                tree.flat_dim,
                &mut tpoints,
                &mut key,
                &mut out,
            );
            out
        })
        .collect();
    per_child.drain(..).flatten().collect()
}

/// Exact tau = 2 single-flat optimum through `through` (or the mean when
/// absent): the span of the top-j eigendirections of the anchored scatter
/// matrix.
pub fn optimal_flat_tau2<F: Scalar>(
    points: &PointSet<F>,
    j: usize,
    through: Option<&Vector<F>>,
) -> Result<Flat<F>> {
    if points.n() < j {
        return Err(Error::param(format!(
            "need at least j = {j} points, got {}",
            points.n()
        )));
    }
    if j > points.dim() {
        return Err(Error::param("j exceeds the ambient dimension"));
    }
    let anchor = match through {
        Some(o) => {
            if o.dim() != points.dim() {
                return Err(Error::dim(points.dim(), o.dim()));
            }
            o.clone()
        }
        None => points.mean(),
    };
    Ok(anchored_flat_tau2(points.points(), anchor, j))
}

/// Top-j eigenflat through `anchor`; no preconditions, pads freely from the
/// full eigenbasis (used by the brute-force oracle on tiny groups).
pub(crate) fn anchored_flat_tau2<F: Scalar>(
    points: &[Vector<F>],
    anchor: Vector<F>,
    j: usize,
) -> Flat<F> {
    if j == 0 {
        return Flat::new(anchor, Vec::new()).expect("point flat is valid");
    }
    let m = scatter_matrix(points, &anchor);
    let (_, vectors) = jacobi_eigh(&m);
    let basis: Vec<Vector<F>> = vectors.into_iter().take(j).collect();
    // eigenvectors are orthonormal to machine precision; polish once
    let basis = gram_schmidt(&basis).expect("eigenbasis has full rank");
    Flat::new(anchor, basis).expect("eigenbasis is orthonormal")
}

/// Fit a single j-flat: draw a center sample, grow the rotation tree, pick
/// the best path. `restarts` independent repetitions keep the best trimmed
/// objective.
pub fn fit_single_flat<F: Scalar>(
    points: &PointSet<F>,
    j: usize,
    gamma: F,
    eps: F,
    tau: u32,
    stream: &RngStream,
    cfg: &FitConfig<F>,
) -> Result<FitResult<F>> {
    let r = resolve_sample_size(j, gamma, eps, cfg)?;
    let restarts = cfg.restarts.max(1);
    let mut best: Option<(FitResult<F>, usize)> = None;
    let mut last_err = None;
    for rho in 0..restarts {
        let tree_stream = stream.child(rho as u64).child(0);
        match fit_one_tree(points, j, r, tau, gamma, &tree_stream, cfg) {
            Ok((result, _tree)) => {
                let replace = match &best {
                    None => true,
                    Some((cur, _)) => result.trimmed_objective < cur.trimmed_objective,
                };
                if replace {
                    best = Some((result, rho));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((result, _)) => Ok(result),
        None => Err(last_err.unwrap_or(Error::RankDeficient)),
    }
}

/// Resolve the per-node sample size from the override or the formula.
pub(crate) fn resolve_sample_size<F: Scalar>(
    j: usize,
    gamma: F,
    eps: F,
    cfg: &FitConfig<F>,
) -> Result<usize> {
    match cfg.r_override {
        Some(r) if r >= 1 => Ok(r),
        Some(_) => Err(Error::param("sample size override must be >= 1")),
        None => {
            if gamma <= F::zero() {
                return Err(Error::param(
                    "gamma = 0 requires an explicit sample size override",
                ));
            }
            sample_size_single_with(j, gamma.as_f64(), eps.as_f64(), cfg.log_arg)
        }
    }
}

/// Center estimation (mean of a fresh uniform sample) plus one tree build.
/// The clustering pipeline uses this verbatim, which is what makes k = 1
/// clustering reproduce the single-flat fit.
pub(crate) fn center_and_tree<F: Scalar>(
    points: &PointSet<F>,
    j: usize,
    r: usize,
    stream: &RngStream,
    cfg: &FitConfig<F>,
    grid: Option<&GridAugment<F>>,
) -> Result<RotationTree<F>> {
    let cs = cfg.center_samples.unwrap_or(r).max(1);
    let center_sample = uniform_sample_with(points, cs, &stream.child(0), cfg.keying)?;
    let mut acc = Vector::zeros(points.dim());
    for p in &center_sample.points {
        acc.axpy(F::one(), p);
    }
    let o = acc.scale(F::one() / F::of(center_sample.len() as f64));
    build_tree_with_grid(points, &o, j, r, &stream.child(1), cfg, grid)
}

pub(crate) fn fit_one_tree<F: Scalar>(
    points: &PointSet<F>,
    j: usize,
    r: usize,
    tau: u32,
    gamma: F,
    stream: &RngStream,
    cfg: &FitConfig<F>,
) -> Result<(FitResult<F>, RotationTree<F>)> {
    let tree = center_and_tree(points, j, r, stream, cfg, None)?;
    let result = best_path(&tree, points, tau, gamma)?;
    Ok((result, tree))
}
