//! Affine flats, projections, distances and rotations.
//!
//! A `Flat` is an affine subspace given by an anchor point and an orthonormal
//! basis of spanning directions. Rotating a flat about one of its points `o`
//! toward an external point `u` replaces the in-flat direction toward the
//! projection of `u` with the direction of `u` itself, pivoting about the
//! face of the flat perpendicular to that direction.

mod slab;

pub use slab::{hyperbox_witness, slab_partition, Hyperbox, Slab, SlabPartition};

use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::linalg::gram_schmidt;
use crate::scalar::Scalar;

/// A point or direction in R^d. Coordinates are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector<F> {
    coords: Vec<F>,
}

impl<F: Scalar> Vector<F> {
    pub fn new(coords: Vec<F>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Vector { coords })
    }

    /// Construct without the finiteness check; for internal arithmetic whose
    /// inputs are already validated.
    pub(crate) fn from_raw(coords: Vec<F>) -> Self {
        Vector { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Vector {
            coords: vec![F::zero(); dim],
        }
    }

    /// Standard basis vector e_axis.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut coords = vec![F::zero(); dim];
        coords[axis] = F::one();
        Vector { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, i: usize) -> F {
        self.coords[i]
    }

    pub fn coords(&self) -> &[F] {
        &self.coords
    }

    pub fn dot(&self, other: &Self) -> Result<F> {
        if self.dim() != other.dim() {
            return Err(Error::dim(self.dim(), other.dim()));
        }
        let mut acc = F::zero();
        for (a, b) in self.coords.iter().zip(&other.coords) {
            acc = acc + *a * *b;
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> F {
        let mut acc = F::zero();
        for a in &self.coords {
            acc = acc + *a * *a;
        }
        acc
    }

    pub fn norm(&self) -> F {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, c: F) -> Self {
        Vector {
            coords: self.coords.iter().map(|&x| x * c).collect(),
        }
    }

    pub(crate) fn scale_in_place(&mut self, c: F) {
        for x in self.coords.iter_mut() {
            *x = *x * c;
        }
    }

    /// self += c * other
    pub(crate) fn axpy(&mut self, c: F, other: &Self) {
        debug_assert_eq!(self.dim(), other.dim());
        for (x, y) in self.coords.iter_mut().zip(&other.coords) {
            *x = *x + c * *y;
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == F::zero() {
            return Err(Error::param("cannot normalize the zero vector"));
        }
        Ok(self.scale(F::one() / n))
    }

    pub fn distance(&self, other: &Self) -> Result<F> {
        Ok((self - other).norm())
    }

    /// Reflection of `self` through `center`: 2*center - self.
    pub fn reflect_through(&self, center: &Self) -> Self {
        let mut out = center.scale(F::of(2.0));
        out.axpy(-F::one(), self);
        out
    }
}

impl<F: Scalar> Add for &Vector<F> {
    type Output = Vector<F>;
    fn add(self, rhs: Self) -> Vector<F> {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl<F: Scalar> Sub for &Vector<F> {
    type Output = Vector<F>;
    fn sub(self, rhs: Self) -> Vector<F> {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

/// A non-empty set of points of uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<F> {
    points: Vec<Vector<F>>,
    dim: usize,
}

impl<F: Scalar> PointSet<F> {
    pub fn new(points: Vec<Vector<F>>) -> Result<Self> {
        let dim = match points.first() {
            Some(p) => p.dim(),
            None => return Err(Error::EmptyPointSet),
        };
        for p in &points {
            if p.dim() != dim {
                return Err(Error::dim(dim, p.dim()));
            }
        }
        Ok(PointSet { points, dim })
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self> {
        let points = rows
            .into_iter()
            .map(Vector::new)
            .collect::<Result<Vec<_>>>()?;
        PointSet::new(points)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &Vector<F> {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vector<F>] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vector<F>> {
        self.points.iter()
    }

    /// Coordinate-wise mean.
    pub fn mean(&self) -> Vector<F> {
        let mut acc = Vector::zeros(self.dim);
        for p in &self.points {
            acc.axpy(F::one(), p);
        }
        acc.scale(F::one() / F::of(self.n() as f64))
    }
}

/// A j-dimensional affine flat: anchor point plus an orthonormal basis.
/// `j = 0` (a single point) is allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Flat<F> {
    anchor: Vector<F>,
    basis: Vec<Vector<F>>,
}

impl<F: Scalar> Flat<F> {
    /// Build from an anchor and an already-orthonormal basis; validates the
    /// orthonormality invariant against `ORTHO_TOL`.
    pub fn new(anchor: Vector<F>, basis: Vec<Vector<F>>) -> Result<Self> {
        let d = anchor.dim();
        if basis.len() > d {
            return Err(Error::param(format!(
                "flat dimension {} exceeds ambient dimension {d}",
                basis.len()
            )));
        }
        for (i, b) in basis.iter().enumerate() {
            if b.dim() != d {
                return Err(Error::dim(d, b.dim()));
            }
            if (b.norm() - F::one()).abs() > F::ORTHO_TOL {
                return Err(Error::param(format!("basis vector {i} is not unit length")));
            }
            for other in basis.iter().take(i) {
                if b.dot(other)?.abs() > F::ORTHO_TOL {
                    return Err(Error::param("basis vectors are not orthogonal"));
                }
            }
        }
        Ok(Flat { anchor, basis })
    }

    /// Build from arbitrary spanning vectors, orthonormalizing them.
    /// Rejects rank-deficient spans.
    pub fn from_span(anchor: Vector<F>, span: &[Vector<F>]) -> Result<Self> {
        for s in span {
            if s.dim() != anchor.dim() {
                return Err(Error::dim(anchor.dim(), s.dim()));
            }
        }
        let basis = gram_schmidt(span)?;
        Ok(Flat { anchor, basis })
    }

    /// The full ambient space through `anchor`.
    pub fn full_space(anchor: Vector<F>) -> Self {
        let d = anchor.dim();
        let basis = (0..d).map(|i| Vector::unit(d, i)).collect();
        Flat { anchor, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.anchor.dim()
    }

    pub fn anchor(&self) -> &Vector<F> {
        &self.anchor
    }

    pub fn basis(&self) -> &[Vector<F>] {
        &self.basis
    }

    /// Orthogonal projection of `p` onto the flat.
    pub fn project(&self, p: &Vector<F>) -> Result<Vector<F>> {
        if p.dim() != self.ambient_dim() {
            return Err(Error::dim(self.ambient_dim(), p.dim()));
        }
        let rel = p - &self.anchor;
        let mut out = self.anchor.clone();
        for b in &self.basis {
            let c = rel.dot(b)?;
            out.axpy(c, b);
        }
        Ok(out)
    }

    /// Euclidean distance from `p` to the flat.
    pub fn distance(&self, p: &Vector<F>) -> Result<F> {
        Ok(self.distance_sq(p)?.max(F::zero()).sqrt())
    }

    /// Squared distance via the explicit residual vector. (The algebraically
    /// equivalent ||rel||^2 - sum c^2 cancels catastrophically for points
    /// near the flat.)
    pub fn distance_sq(&self, p: &Vector<F>) -> Result<F> {
        if p.dim() != self.ambient_dim() {
            return Err(Error::dim(self.ambient_dim(), p.dim()));
        }
        let mut residual = p - &self.anchor;
        for b in &self.basis {
            let c = residual.dot(b)?;
            residual.axpy(-c, b);
        }
        Ok(residual.norm_sq())
    }

    /// Whether `p` lies on the flat within the default tolerance.
    pub fn contains(&self, p: &Vector<F>) -> Result<bool> {
        let scale = p.norm().max(self.anchor.norm()).max(F::one());
        Ok(self.distance(p)? <= F::REL_TOL * scale)
    }

    /// In-basis coordinates of `p - anchor` (length `dim()`).
    pub fn coordinates(&self, p: &Vector<F>) -> Result<Vector<F>> {
        if p.dim() != self.ambient_dim() {
            return Err(Error::dim(self.ambient_dim(), p.dim()));
        }
        let rel = p - &self.anchor;
        let coords = self
            .basis
            .iter()
            .map(|b| rel.dot(b))
            .collect::<Result<Vec<F>>>()?;
        Ok(Vector::from_raw(coords))
    }

    /// The same flat re-anchored at `o`, which must lie on the flat.
    pub fn reanchored(&self, o: &Vector<F>) -> Result<Self> {
        if !self.contains(o)? {
            return Err(Error::NotOnFlat);
        }
        Ok(Flat {
            anchor: o.clone(),
            basis: self.basis.clone(),
        })
    }
}

/// `p` raised to the integer power `tau`, from its square.
/// Used so that distances enter objectives without a lossy sqrt when tau = 2.
/// Clamps tiny negative squares from cancellation to zero.
pub(crate) fn pow_tau<F: Scalar>(value_sq: F, tau: u32) -> F {
    let v = value_sq.max(F::zero());
    if tau % 2 == 0 {
        v.powi((tau / 2) as i32)
    } else {
        v.sqrt().powi(tau as i32)
    }
}

/// Average tau-th power of point-to-flat distance: (1/n) sum ||p,F||^tau.
pub fn power_objective<F: Scalar>(points: &PointSet<F>, flat: &Flat<F>, tau: u32) -> Result<F> {
    if tau < 1 {
        return Err(Error::param("tau must be >= 1"));
    }
    let mut acc = F::zero();
    for p in points.iter() {
        acc = acc + pow_tau(flat.distance_sq(p)?, tau);
    }
    Ok(acc / F::of(points.n() as f64))
}

/// Root of the tau-th-power objective: ((1/n) sum ||p,F||^tau)^(1/tau).
pub fn objective_root<F: Scalar>(points: &PointSet<F>, flat: &Flat<F>, tau: u32) -> Result<F> {
    Ok(power_objective(points, flat, tau)?.powf(F::one() / F::of(tau as f64)))
}

/// Rotation of `flat` about its point `o`, induced by the external point `u`.
///
/// Returns the rotated flat (anchored at `o`) and the rotation angle in
/// [0, pi/2]. If `u` already lies on the flat the rotation is the identity.
/// Fails with `DegenerateRotationAxis` when the projection of `u` coincides
/// with `o`, since then the in-flat direction to replace is undefined.
pub fn rotate_flat<F: Scalar>(
    flat: &Flat<F>,
    o: &Vector<F>,
    u: &Vector<F>,
) -> Result<(Flat<F>, F)> {
    if u.dim() != flat.ambient_dim() {
        return Err(Error::dim(flat.ambient_dim(), u.dim()));
    }
    if !flat.contains(o)? {
        return Err(Error::NotOnFlat);
    }
    let proj_u = flat.project(u)?;
    let in_flat = &proj_u - o;
    let out_of_flat = u - &proj_u;
    let scale = u.norm().max(o.norm()).max(F::one());
    if (u - o).norm() <= F::ABS_TOL * scale {
        return Err(Error::DegenerateRotationAxis);
    }
    if in_flat.norm() <= F::ABS_TOL * scale {
        return Err(Error::DegenerateRotationAxis);
    }
    let theta = out_of_flat.norm().atan2(in_flat.norm());
    if out_of_flat.norm() <= F::REL_TOL * scale {
        // u on the flat: identity rotation
        return Ok((flat.reanchored(o)?, F::zero()));
    }

    let dir = in_flat.normalized()?;
    // face of the flat perpendicular to dir: remove the dir component from
    // each basis vector, then orthonormalize what remains (rank j-1)
    let residuals: Vec<Vector<F>> = flat
        .basis()
        .iter()
        .map(|b| {
            let mut w = b.clone();
            let c = w.dot(&dir)?;
            w.axpy(-c, &dir);
            Ok(w)
        })
        .collect::<Result<_>>()?;
    let mut span = crate::linalg::gram_schmidt_greedy(&residuals);
    if span.len() != flat.dim() - 1 {
        return Err(Error::RankDeficient);
    }
    span.push((u - o).normalized()?);
    let rotated = Flat::from_span(o.clone(), &span)?;
    Ok((rotated, theta))
}

/// The quantities of a rotation induced by `u` about `o`:
/// `h = ((1/n) sum |<p-o, dir>|^tau)^(1/tau)` along the in-flat direction
/// `dir` toward the projection of `u`, the rotation angle `theta`, and
/// `delta = h * tan(theta)`. The induced rotation is by definition a
/// delta-rotation of the flat with respect to `points`.
pub fn delta_of_rotation<F: Scalar>(
    points: &PointSet<F>,
    flat: &Flat<F>,
    o: &Vector<F>,
    u: &Vector<F>,
    tau: u32,
) -> Result<DeltaRotation<F>> {
    if tau < 1 {
        return Err(Error::param("tau must be >= 1"));
    }
    if !flat.contains(o)? {
        return Err(Error::NotOnFlat);
    }
    let proj_u = flat.project(u)?;
    let in_flat = &proj_u - o;
    let scale = u.norm().max(o.norm()).max(F::one());
    if in_flat.norm() <= F::ABS_TOL * scale {
        return Err(Error::DegenerateRotationAxis);
    }
    let dir = in_flat.normalized()?;
    let out_norm = (u - &proj_u).norm();
    let theta = out_norm.atan2(in_flat.norm());

    let mut acc = F::zero();
    for p in points.iter() {
        let c = (p - o).dot(&dir)?.abs();
        acc = acc + pow_tau(c * c, tau);
    }
    let h = (acc / F::of(points.n() as f64)).powf(F::one() / F::of(tau as f64));
    let delta = h * theta.tan();
    Ok(DeltaRotation { delta, h, theta })
}

/// Output of [`delta_of_rotation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaRotation<F> {
    pub delta: F,
    pub h: F,
    pub theta: F,
}

/// The flat translated to pass through `o'` with the same basis.
pub fn translate_flat<F: Scalar>(flat: &Flat<F>, new_anchor: Vector<F>) -> Result<Flat<F>> {
    if new_anchor.dim() != flat.ambient_dim() {
        return Err(Error::dim(flat.ambient_dim(), new_anchor.dim()));
    }
    Ok(Flat {
        anchor: new_anchor,
        basis: flat.basis().to_vec(),
    })
}

/// Distance between a flat and its translate: the norm of the component of
/// the anchor difference orthogonal to the shared basis. Errors if the two
/// flats do not share a basis.
pub fn translation_distance<F: Scalar>(a: &Flat<F>, b: &Flat<F>) -> Result<F> {
    if a.ambient_dim() != b.ambient_dim() || a.dim() != b.dim() {
        return Err(Error::BasisMismatch);
    }
    for (x, y) in a.basis().iter().zip(b.basis()) {
        if (x - y).norm() > F::of(1e-9) {
            return Err(Error::BasisMismatch);
        }
    }
    let mut diff = b.anchor() - a.anchor();
    for v in a.basis() {
        let c = diff.dot(v)?;
        diff.axpy(-c, v);
    }
    Ok(diff.norm())
}

#[cfg(test)]
mod tests;
