//! Slabs, hyperboxes and slab partitions.
//!
//! A slab is the region between two parallel hyperplanes symmetric about a
//! center, determined by a vector from the center to a point on one of its
//! bounding hyperplanes. Amplifying a slab scales its halfwidth about the
//! center. A slab partition nests axis-aligned slabs, trimming a fixed
//! fraction of extreme coordinates per axis.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{Flat, PointSet, Vector};

/// Region between two hyperplanes perpendicular to `direction`, at distance
/// `halfwidth` on both sides of `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct Slab<F> {
    center: Vector<F>,
    direction: Vector<F>,
    halfwidth: F,
}

impl<F: Scalar> Slab<F> {
    /// Build from center, any non-zero direction (normalized here) and a
    /// positive halfwidth.
    pub fn new(center: Vector<F>, direction: &Vector<F>, halfwidth: F) -> Result<Self> {
        if direction.dim() != center.dim() {
            return Err(Error::dim(center.dim(), direction.dim()));
        }
        if !(halfwidth > F::zero()) {
            return Err(Error::param("slab halfwidth must be positive"));
        }
        Ok(Slab {
            center,
            direction: direction.normalized()?,
            halfwidth,
        })
    }

    /// The slab determined by the vector from `o` to `s`: bounding
    /// hyperplanes through `s` and its reflection, perpendicular to o->s.
    pub fn determined_by(o: &Vector<F>, s: &Vector<F>) -> Result<Self> {
        let dir = s - o;
        let halfwidth = dir.norm();
        Slab::new(o.clone(), &dir, halfwidth)
    }

    pub fn center(&self) -> &Vector<F> {
        &self.center
    }

    pub fn direction(&self) -> &Vector<F> {
        &self.direction
    }

    pub fn halfwidth(&self) -> F {
        self.halfwidth
    }

    /// Membership test: |<p - center, direction>| <= halfwidth + 1e-12.
    pub fn contains(&self, p: &Vector<F>) -> Result<bool> {
        if p.dim() != self.center.dim() {
            return Err(Error::dim(self.center.dim(), p.dim()));
        }
        let c = (p - &self.center).dot(&self.direction)?.abs();
        Ok(c <= self.halfwidth + F::ABS_TOL)
    }

    /// Smallest amplification factor whose slab contains every point of `q`.
    pub fn minimal_amplification_points(&self, q: &PointSet<F>) -> Result<F> {
        if q.dim() != self.center.dim() {
            return Err(Error::dim(self.center.dim(), q.dim()));
        }
        let mut worst = F::zero();
        for p in q.iter() {
            let c = (p - &self.center).dot(&self.direction)?.abs();
            worst = worst.max(c);
        }
        Ok(worst / self.halfwidth)
    }

    /// Smallest amplification factor whose slab contains the hyperbox,
    /// in closed form: the extreme corner projection is the box-center offset
    /// plus the sum of per-axis half-extents times |<axis, direction>|.
    pub fn minimal_amplification_hyperbox(&self, h: &Hyperbox<F>) -> Result<F> {
        if h.center.dim() != self.center.dim() {
            return Err(Error::dim(self.center.dim(), h.center.dim()));
        }
        let base = (&h.center - &self.center).dot(&self.direction)?.abs();
        let mut extent = F::zero();
        for (axis, &len) in h.axes.iter().zip(&h.side_lengths) {
            extent = extent + (len / F::of(2.0)) * axis.dot(&self.direction)?.abs();
        }
        Ok((base + extent) / self.halfwidth)
    }
}

/// Axis-aligned box in the frame of its own orthonormal `axes`: spans
/// center +- side_length/2 along each axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperbox<F> {
    center: Vector<F>,
    axes: Vec<Vector<F>>,
    side_lengths: Vec<F>,
}

impl<F: Scalar> Hyperbox<F> {
    pub fn new(center: Vector<F>, axes: Vec<Vector<F>>, side_lengths: Vec<F>) -> Result<Self> {
        if axes.len() != side_lengths.len() {
            return Err(Error::param("one side length per axis required"));
        }
        for (i, a) in axes.iter().enumerate() {
            if a.dim() != center.dim() {
                return Err(Error::dim(center.dim(), a.dim()));
            }
            if (a.norm() - F::one()).abs() > F::ORTHO_TOL {
                return Err(Error::param(format!("axis {i} is not unit length")));
            }
            for other in axes.iter().take(i) {
                if a.dot(other)?.abs() > F::ORTHO_TOL {
                    return Err(Error::param("axes are not orthogonal"));
                }
            }
        }
        if side_lengths.iter().any(|&s| !(s > F::zero())) {
            return Err(Error::param("side lengths must be positive"));
        }
        Ok(Hyperbox {
            center,
            axes,
            side_lengths,
        })
    }

    /// Box centered at the origin of R^j with the standard axes.
    pub fn axis_aligned(side_lengths: Vec<F>) -> Result<Self> {
        let j = side_lengths.len();
        let axes = (0..j).map(|i| Vector::unit(j, i)).collect();
        Hyperbox::new(Vector::zeros(j), axes, side_lengths)
    }

    pub fn center(&self) -> &Vector<F> {
        &self.center
    }

    pub fn axes(&self) -> &[Vector<F>] {
        &self.axes
    }

    pub fn side_lengths(&self) -> &[F] {
        &self.side_lengths
    }

    pub fn facet_count_dims(&self) -> usize {
        self.axes.len()
    }

    /// All 2^j corners.
    pub fn corners(&self) -> Vec<Vector<F>> {
        let j = self.axes.len();
        let mut out = Vec::with_capacity(1 << j);
        for mask in 0u64..(1u64 << j) {
            let mut c = self.center.clone();
            for l in 0..j {
                let sign = if mask >> l & 1 == 1 { F::one() } else { -F::one() };
                c.axpy(sign * self.side_lengths[l] / F::of(2.0), &self.axes[l]);
            }
            out.push(c);
        }
        out
    }

    /// Checks that `p` lies on one of the two facets perpendicular to axis
    /// `l` (within 1e-9 of the facet plane and inside the other extents).
    pub fn on_facet(&self, p: &Vector<F>, l: usize) -> Result<bool> {
        if p.dim() != self.center.dim() {
            return Err(Error::dim(self.center.dim(), p.dim()));
        }
        let scale = self
            .side_lengths
            .iter()
            .fold(F::one(), |a, &b| a.max(b));
        let tol = F::of(1e-9) * scale;
        let rel = p - &self.center;
        for (w, axis) in self.axes.iter().enumerate() {
            let c = rel.dot(axis)?;
            let half = self.side_lengths[w] / F::of(2.0);
            if w == l {
                if (c.abs() - half).abs() > tol {
                    return Ok(false);
                }
            } else if c.abs() > half + tol {
                return Ok(false);
            }
        }
        // component outside the axes' span also breaks facet membership
        let mut residual = rel;
        for axis in &self.axes {
            let c = residual.dot(axis)?;
            residual.axpy(-c, axis);
        }
        Ok(residual.norm() <= tol)
    }
}

/// Among `j` witness points, one per non-parallel facet, select the one whose
/// determined slab needs the least amplification to contain the whole box.
/// The hyperbox lemma guarantees the winning factor is at most sqrt(j).
///
/// Returns `(witness index, amplification factor)`.
pub fn hyperbox_witness<F: Scalar>(h: &Hyperbox<F>, rho: &[Vector<F>]) -> Result<(usize, F)> {
    let j = h.facet_count_dims();
    if rho.len() != j {
        return Err(Error::param(format!("need {j} facet points, got {}", rho.len())));
    }
    for (l, p) in rho.iter().enumerate() {
        if !h.on_facet(p, l)? {
            return Err(Error::NotOnFacet);
        }
    }
    let mut best: Option<(usize, F)> = None;
    for (l, p) in rho.iter().enumerate() {
        let slab = Slab::determined_by(h.center(), p)?;
        let lambda = slab.minimal_amplification_hyperbox(h)?;
        match best {
            Some((_, cur)) if lambda >= cur => {}
            _ => best = Some((l, lambda)),
        }
    }
    Ok(best.expect("j >= 1 facets"))
}

/// Nested axis-aligned slab regions Pi_l = Pi_{l-1} and R_l over a point set
/// expressed in a flat's basis coordinates. Level `l` trims the
/// gamma/j^2-fraction of remaining points with the largest absolute l-th
/// coordinate; the slab halfwidth is the largest absolute coordinate among
/// the survivors.
#[derive(Debug, Clone)]
pub struct SlabPartition<F> {
    slabs: Vec<Slab<F>>,
    region_counts: Vec<usize>,
    /// Index (into the input set) of the retained point whose l-th coordinate
    /// attains the slab halfwidth; one per level.
    witness_indices: Vec<usize>,
    /// Input indices surviving all j trims (the innermost region Pi_j).
    retained_indices: Vec<usize>,
}

impl<F: Scalar> SlabPartition<F> {
    /// Build over j-dimensional coordinates (the flat's own frame).
    pub fn build(coords: &PointSet<F>, gamma: F) -> Result<Self> {
        if !(gamma > F::zero() && gamma <= F::one()) {
            return Err(Error::param("gamma must lie in (0, 1]"));
        }
        let j = coords.dim();
        if j == 0 {
            return Err(Error::param("slab partition needs dimension >= 1"));
        }
        let keep_fraction = F::one() - gamma / F::of((j * j) as f64);
        let diameter = coords
            .iter()
            .map(|p| p.norm())
            .fold(F::zero(), |a, b| a.max(b))
            * F::of(2.0);

        let mut retained: Vec<usize> = (0..coords.n()).collect();
        let mut slabs = Vec::with_capacity(j);
        let mut region_counts = vec![coords.n()];
        let mut witness_indices = Vec::with_capacity(j);

        for axis in 0..j {
            let mut order: Vec<usize> = retained.clone();
            order.sort_by(|&a, &b| {
                let ka = coords.point(a).coord(axis).abs();
                let kb = coords.point(b).coord(axis).abs();
                ka.partial_cmp(&kb)
                    .expect("coordinates are finite")
                    .then(a.cmp(&b))
            });
            let keep = crate::scalar::ceil_count(keep_fraction * F::of(order.len() as f64))
                .clamp(1, order.len());
            order.truncate(keep);
            let witness = *order.last().expect("at least one point retained");
            let mut halfwidth = coords.point(witness).coord(axis).abs();
            if halfwidth == F::zero() {
                // all survivors sit at zero along this axis
                halfwidth = F::of(1e-12) * diameter.max(F::one());
            }
            slabs.push(Slab::new(
                Vector::zeros(j),
                &Vector::unit(j, axis),
                halfwidth,
            )?);
            witness_indices.push(witness);
            order.sort_unstable();
            retained = order;
            region_counts.push(retained.len());
        }

        Ok(SlabPartition {
            slabs,
            region_counts,
            witness_indices,
            retained_indices: retained,
        })
    }

    pub fn slabs(&self) -> &[Slab<F>] {
        &self.slabs
    }

    pub fn region_counts(&self) -> &[usize] {
        &self.region_counts
    }

    pub fn witness_indices(&self) -> &[usize] {
        &self.witness_indices
    }

    pub fn retained_indices(&self) -> &[usize] {
        &self.retained_indices
    }

    /// The innermost region as a hyperbox (intersection of all j slabs).
    pub fn inner_box(&self) -> Hyperbox<F> {
        let sides = self
            .slabs
            .iter()
            .map(|s| s.halfwidth() * F::of(2.0))
            .collect();
        Hyperbox::axis_aligned(sides).expect("halfwidths are positive")
    }
}

/// Slab partition of `points` in the coordinate frame of `flat` (points are
/// projected first).
pub fn slab_partition<F: Scalar>(
    points: &PointSet<F>,
    flat: &Flat<F>,
    gamma: F,
) -> Result<SlabPartition<F>> {
    let coords = points
        .iter()
        .map(|p| flat.coordinates(p))
        .collect::<Result<Vec<_>>>()?;
    SlabPartition::build(&PointSet::new(coords)?, gamma)
}
