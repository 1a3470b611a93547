use super::*;
use crate::rng::RngStream;
use crate::scalar::close;
use rand::Rng;

fn v(coords: &[f64]) -> Vector<f64> {
    Vector::new(coords.to_vec()).unwrap()
}

fn ps(rows: &[&[f64]]) -> PointSet<f64> {
    PointSet::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

fn x_axis(d: usize) -> Flat<f64> {
    Flat::new(Vector::zeros(d), vec![Vector::unit(d, 0)]).unwrap()
}

// ---- oracles -------------------------------------------------------------

/// Least-squares oracle: solve the normal equations B^T B c = B^T (p - o)
/// over a raw (not orthonormalized) spanning set by Gaussian elimination,
/// then return o + B c. Independent of Flat::project's arithmetic.
fn project_oracle(p: &Vector<f64>, anchor: &Vector<f64>, span: &[Vector<f64>]) -> Vector<f64> {
    let j = span.len();
    let mut a = vec![vec![0.0f64; j + 1]; j];
    let rel = p - anchor;
    for i in 0..j {
        for k in 0..j {
            a[i][k] = span[i].dot(&span[k]).unwrap();
        }
        a[i][j] = span[i].dot(&rel).unwrap();
    }
    // Gaussian elimination with partial pivoting
    for col in 0..j {
        let pivot = (col..j)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        let diag = a[col][col];
        for row in 0..j {
            if row == col {
                continue;
            }
            let f = a[row][col] / diag;
            for k in col..=j {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut out = anchor.clone();
    for i in 0..j {
        out.axpy(a[i][j] / a[i][i], &span[i]);
    }
    out
}

/// Corner-enumeration oracle for slab amplification over a hyperbox.
fn amplification_oracle(slab: &Slab<f64>, h: &Hyperbox<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for corner in h.corners() {
        let c = (&corner - slab.center()).dot(slab.direction()).unwrap().abs();
        worst = worst.max(c);
    }
    worst / slab.halfwidth()
}

fn random_vector(stream: &RngStream, d: usize, scale: f64) -> Vector<f64> {
    let mut rng = stream.rng();
    Vector::new((0..d).map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * scale).collect()).unwrap()
}

fn random_unit(stream: &RngStream, d: usize) -> Vector<f64> {
    random_vector(stream, d, 1.0).normalized().unwrap()
}

fn random_flat(stream: &RngStream, d: usize, j: usize) -> Flat<f64> {
    let span: Vec<Vector<f64>> = (0..j)
        .map(|i| random_vector(&stream.child(i as u64), d, 1.0))
        .collect();
    let anchor = random_vector(&stream.child(100), d, 2.0);
    Flat::from_span(anchor, &span).unwrap()
}

fn random_points(stream: &RngStream, n: usize, d: usize, scale: f64) -> PointSet<f64> {
    let pts = (0..n)
        .map(|i| random_vector(&stream.child(i as u64), d, scale))
        .collect();
    PointSet::new(pts).unwrap()
}

// ---- projection / distance ------------------------------------------------

#[test]
fn projects_onto_axis() {
    let f = x_axis(2);
    assert_eq!(f.project(&v(&[3.0, 4.0])).unwrap(), v(&[3.0, 0.0]));
    assert!(close(f.distance(&v(&[0.0, 5.0])).unwrap(), 5.0));
}

#[test]
fn projection_is_identity_on_the_flat() {
    let f = x_axis(3);
    let p = v(&[2.5, 0.0, 0.0]);
    assert_eq!(f.project(&p).unwrap(), p);
    assert!(close(f.distance(&p).unwrap(), 0.0));
}

#[test]
fn projection_matches_least_squares_oracle() {
    for seed in 0..20 {
        let s = RngStream::new(900 + seed);
        let span: Vec<Vector<f64>> = (0..2)
            .map(|i| random_vector(&s.child(i), 5, 1.0))
            .collect();
        let anchor = random_vector(&s.child(7), 5, 2.0);
        let flat = Flat::from_span(anchor.clone(), &span).unwrap();
        let p = random_vector(&s.child(8), 5, 3.0);
        let got = flat.project(&p).unwrap();
        let want = project_oracle(&p, &anchor, &span);
        assert!((&got - &want).norm() < 1e-9, "seed {seed}");
        // distance agrees with the oracle residual
        let d_or = (&p - &want).norm();
        assert!(close(flat.distance(&p).unwrap(), d_or));
    }
}

#[test]
fn projection_idempotent_and_pythagorean() {
    for seed in 0..30 {
        let s = RngStream::new(40 + seed);
        let flat = random_flat(&s.child(0), 4, 2);
        let p = random_vector(&s.child(1), 4, 5.0);
        let proj = flat.project(&p).unwrap();
        let twice = flat.project(&proj).unwrap();
        assert!((&proj - &twice).norm() < 1e-9);
        // residual orthogonal to every basis vector
        let res = &p - &proj;
        for b in flat.basis() {
            assert!(res.dot(b).unwrap().abs() < 1e-9);
        }
        let o = flat.anchor();
        let lhs = (&p - o).norm_sq();
        let rhs = (&p - &proj).norm_sq() + (&proj - o).norm_sq();
        assert!(close(lhs, rhs));
    }
}

#[test]
fn dimension_mismatch_is_reported() {
    let f = x_axis(2);
    assert!(matches!(
        f.project(&v(&[1.0, 2.0, 3.0])),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(matches!(
        f.distance(&v(&[1.0])),
        Err(Error::DimensionMismatch { .. })
    ));
}

// ---- power objective -------------------------------------------------------

#[test]
fn power_objective_hand_values() {
    let f = x_axis(2);
    let p1 = ps(&[&[0.0, 1.0], &[0.0, -1.0]]);
    assert!(close(power_objective(&p1, &f, 2).unwrap(), 1.0));

    let on_flat = ps(&[&[1.0, 0.0], &[-3.0, 0.0]]);
    for tau in [1, 2, 3, 7] {
        assert!(close(power_objective(&on_flat, &f, tau).unwrap(), 0.0));
    }

    // (8 + 1) / 2 = 4.5
    let p3 = ps(&[&[0.0, 2.0], &[0.0, -1.0]]);
    assert!(close(power_objective(&p3, &f, 3).unwrap(), 4.5));
}

#[test]
fn power_objective_rejects_tau_zero() {
    let f = x_axis(2);
    let p = ps(&[&[0.0, 1.0]]);
    assert!(power_objective(&p, &f, 0).is_err());
}

// ---- rotation ---------------------------------------------------------------

#[test]
fn rotates_line_by_quarter_turn() {
    let f = x_axis(2);
    let o = Vector::zeros(2);
    let (rot, theta) = rotate_flat(&f, &o, &v(&[1.0, 1.0])).unwrap();
    assert!(close(theta, std::f64::consts::FRAC_PI_4));
    assert_eq!(rot.dim(), 1);
    let b = &rot.basis()[0];
    let diag = std::f64::consts::FRAC_1_SQRT_2;
    assert!((b.coord(0) * b.coord(1)).abs() > 0.0);
    assert!(close(b.coord(0).abs(), diag) && close(b.coord(1).abs(), diag));
}

#[test]
fn rotation_is_identity_for_points_on_the_flat() {
    let f = x_axis(3);
    let o = Vector::zeros(3);
    let (rot, theta) = rotate_flat(&f, &o, &v(&[2.0, 0.0, 0.0])).unwrap();
    assert_eq!(theta, 0.0);
    assert_eq!(rot.basis(), f.basis());
}

#[test]
fn rotates_plane_about_its_perpendicular_face() {
    // xy-plane rotated toward (1,0,1): the face is the y-axis, which must
    // stay on the rotated flat; the new direction is (1,0,1)/sqrt(2).
    let f = Flat::new(
        Vector::zeros(3),
        vec![Vector::unit(3, 0), Vector::unit(3, 1)],
    )
    .unwrap();
    let o = Vector::zeros(3);
    let (rot, theta) = rotate_flat(&f, &o, &v(&[1.0, 0.0, 1.0])).unwrap();
    assert!(close(theta, std::f64::consts::FRAC_PI_4));
    assert_eq!(rot.dim(), 2);
    // y-axis points remain on the rotated flat
    assert!(close(rot.distance(&v(&[0.0, 7.0, 0.0])).unwrap(), 0.0));
    // u itself lies on the rotated flat
    assert!(close(rot.distance(&v(&[1.0, 0.0, 1.0])).unwrap(), 0.0));
    // the old x-axis does not
    assert!(rot.distance(&v(&[1.0, 0.0, 0.0])).unwrap() > 0.5);
}

#[test]
fn rotation_preserves_dimension_anchor_and_face() {
    for seed in 0..25 {
        let s = RngStream::new(7000 + seed);
        let flat = random_flat(&s.child(0), 5, 3);
        let o = flat.project(&random_vector(&s.child(1), 5, 2.0)).unwrap();
        let u = random_vector(&s.child(2), 5, 3.0);
        let proj_u = flat.project(&u).unwrap();
        if (&proj_u - &o).norm() < 1e-6 {
            continue;
        }
        let (rot, theta) = rotate_flat(&flat, &o, &u).unwrap();
        assert_eq!(rot.dim(), flat.dim());
        assert_eq!(rot.anchor(), &o);
        assert!((0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta));
        // every point of the perpendicular face stays on the rotated flat
        let dir = (&proj_u - &o).normalized().unwrap();
        for b in flat.basis() {
            let mut w = b.clone();
            let c = w.dot(&dir).unwrap();
            w.axpy(-c, &dir);
            if w.norm() < 1e-9 {
                continue;
            }
            let face_point = &o + &w;
            assert!(
                rot.distance(&face_point).unwrap() < 1e-8,
                "face not fixed at seed {seed}"
            );
        }
    }
}

#[test]
fn degenerate_rotation_axis_is_an_error() {
    let f = x_axis(2);
    let o = Vector::zeros(2);
    // u projects exactly onto o
    assert_eq!(
        rotate_flat(&f, &o, &v(&[0.0, 3.0])).unwrap_err(),
        Error::DegenerateRotationAxis
    );
    // u equals o
    assert_eq!(
        rotate_flat(&f, &o, &Vector::zeros(2)).unwrap_err(),
        Error::DegenerateRotationAxis
    );
    // o off the flat
    assert_eq!(
        rotate_flat(&f, &v(&[0.0, 1.0]), &v(&[1.0, 1.0])).unwrap_err(),
        Error::NotOnFlat
    );
}

// ---- delta rotation ----------------------------------------------------------

#[test]
fn delta_rotation_hand_case() {
    let f = x_axis(2);
    let o = Vector::zeros(2);
    let p = ps(&[&[1.0, 0.0], &[-1.0, 0.0]]);
    let d = delta_of_rotation(&p, &f, &o, &v(&[1.0, 1.0]), 2).unwrap();
    assert!(close(d.h, 1.0));
    assert!(close(d.theta, std::f64::consts::FRAC_PI_4));
    assert!(close(d.delta, 1.0));
}

#[test]
fn delta_rotation_vanishes_for_in_flat_u() {
    let f = x_axis(2);
    let o = Vector::zeros(2);
    let p = ps(&[&[1.0, 2.0], &[-1.0, 0.5]]);
    let d = delta_of_rotation(&p, &f, &o, &v(&[3.0, 0.0]), 2).unwrap();
    assert!(d.theta.abs() < 1e-12);
    assert!(d.delta.abs() < 1e-12);
}

/// Objective growth after a delta-rotation is at most delta (tau = 2 and
/// general tau), on random instances.
#[test]
fn delta_rotation_bounds_objective_growth() {
    for tau in [1u32, 2, 3, 4, 7] {
        for seed in 0..40 {
            let s = RngStream::new(3_000 + 97 * seed + tau as u64);
            let flat = random_flat(&s.child(0), 4, 2);
            let o = flat.project(&random_vector(&s.child(1), 4, 2.0)).unwrap();
            let u = random_vector(&s.child(2), 4, 3.0);
            let points = random_points(&s.child(3), 30, 4, 4.0);
            let proj_u = flat.project(&u).unwrap();
            if (&proj_u - &o).norm() < 1e-6 {
                continue;
            }
            let d = delta_of_rotation(&points, &flat, &o, &u, tau).unwrap();
            let (rot, _) = rotate_flat(&flat, &o, &u).unwrap();
            let before = objective_root(&points, &flat, tau).unwrap();
            let after = objective_root(&points, &rot, tau).unwrap();
            assert!(
                after <= (before + d.delta) * (1.0 + 1e-9) + 1e-12,
                "tau {tau} seed {seed}: {after} > {before} + {}",
                d.delta
            );
        }
    }
}

// ---- slabs ----------------------------------------------------------------

#[test]
fn slab_membership_and_amplification() {
    let s = Slab::new(Vector::zeros(2), &v(&[1.0, 0.0]), 1.0).unwrap();
    assert!(s.contains(&v(&[0.5, 7.0])).unwrap());
    assert!(!s.contains(&v(&[1.5, 0.0])).unwrap());
    let q = ps(&[&[2.0, 0.0]]);
    assert!(close(s.minimal_amplification_points(&q).unwrap(), 2.0));
}

#[test]
fn slab_rejects_nonpositive_halfwidth() {
    assert!(Slab::new(Vector::zeros(2), &v(&[1.0, 0.0]), 0.0).is_err());
    assert!(Slab::new(Vector::zeros(2), &v(&[1.0, 0.0]), -1.0).is_err());
}

#[test]
fn diagonal_slab_amplification_matches_corner_oracle() {
    // [0,1]^2 corners against the diagonal slab of halfwidth 1/sqrt(2)
    // centered at the origin: the far corner projects to sqrt(2).
    let hw = std::f64::consts::FRAC_1_SQRT_2;
    let s = Slab::new(Vector::zeros(2), &v(&[1.0, 1.0]), hw).unwrap();
    let corners = ps(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
    let lambda = s.minimal_amplification_points(&corners).unwrap();
    let mut oracle: f64 = 0.0;
    for c in corners.iter() {
        oracle = oracle.max((c - s.center()).dot(s.direction()).unwrap().abs());
    }
    oracle /= s.halfwidth();
    assert!(close(lambda, oracle));
    assert!(close(lambda, 2.0));
}

#[test]
fn hyperbox_amplification_closed_form_matches_corner_enumeration() {
    for seed in 0..40 {
        let st = RngStream::new(500 + seed);
        let j = 1 + (st.value_at(0) % 4) as usize;
        let mut rng = st.child(1).rng();
        let sides: Vec<f64> = (0..j).map(|_| 0.2 + rng.gen::<f64>() * 4.0).collect();
        let h = Hyperbox::axis_aligned(sides).unwrap();
        let dir = random_unit(&st.child(2), j);
        let slab = Slab::new(random_vector(&st.child(3), j, 0.5), &dir, 0.7).unwrap();
        let fast = slab.minimal_amplification_hyperbox(&h).unwrap();
        let slow = amplification_oracle(&slab, &h);
        assert!(close(fast, slow), "seed {seed}: {fast} vs {slow}");
    }
}

// ---- hyperbox witness ---------------------------------------------------------

#[test]
fn witness_on_square_stays_within_sqrt_j() {
    // facet-center witnesses on a 2x2 square: corner enumeration gives
    // amplification 1 for both, comfortably below sqrt(2)
    let h = Hyperbox::axis_aligned(vec![2.0, 2.0]).unwrap();
    let rho = [v(&[1.0, 0.0]), v(&[0.0, 1.0])];
    let oracle: Vec<f64> = rho
        .iter()
        .map(|p| amplification_oracle(&Slab::determined_by(h.center(), p).unwrap(), &h))
        .collect();
    assert!(close(oracle[0], 1.0) && close(oracle[1], 1.0));
    let (_, lambda) = hyperbox_witness(&h, &rho).unwrap();
    assert!(close(lambda, 1.0));
    assert!(lambda <= 2f64.sqrt() + 1e-9);
}

#[test]
fn witness_on_elongated_box() {
    let h = Hyperbox::axis_aligned(vec![4.0, 2.0]).unwrap();
    let rho = [v(&[2.0, 0.0]), v(&[0.0, 1.0])];
    let (idx, lambda) = hyperbox_witness(&h, &rho).unwrap();
    // both facet centers give amplification 1; tie broken by first index
    assert_eq!(idx, 0);
    assert!(close(lambda, 1.0));
}

#[test]
fn witness_degenerate_one_dimensional_box() {
    let h = Hyperbox::axis_aligned(vec![3.0]).unwrap();
    let (idx, lambda) = hyperbox_witness(&h, &[v(&[1.5])]).unwrap();
    assert_eq!(idx, 0);
    assert!(close(lambda, 1.0));
}

#[test]
fn witness_rejects_points_off_their_facet() {
    let h = Hyperbox::axis_aligned(vec![2.0, 2.0]).unwrap();
    let err = hyperbox_witness(&h, &[v(&[0.5, 0.0]), v(&[0.0, 1.0])]).unwrap_err();
    assert_eq!(err, Error::NotOnFacet);
}

#[test]
fn witness_bound_holds_on_random_boxes() {
    for seed in 0..200 {
        let st = RngStream::new(11_000 + seed);
        let j = 1 + (st.value_at(9) % 6) as usize;
        let mut rng = st.child(1).rng();
        let sides: Vec<f64> = (0..j).map(|_| 0.1 + rng.gen::<f64>() * 9.9).collect();
        let h = Hyperbox::axis_aligned(sides.clone()).unwrap();
        // random point on each facet l (random side, random in-facet coords)
        let rho: Vec<Vector<f64>> = (0..j)
            .map(|l| {
                let mut coords = vec![0.0; j];
                for (w, c) in coords.iter_mut().enumerate() {
                    *c = (rng.gen::<f64>() - 0.5) * sides[w];
                }
                let side = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                coords[l] = side * sides[l] / 2.0;
                v(&coords)
            })
            .collect();
        let (_, lambda) = hyperbox_witness(&h, &rho).unwrap();
        assert!(
            lambda <= (j as f64).sqrt() + 1e-9,
            "seed {seed}, j {j}: lambda {lambda}"
        );
    }
}

// ---- slab partition ------------------------------------------------------------

#[test]
fn partition_trims_the_extreme_point() {
    let coords = ps(&[&[-4.0], &[-1.0], &[0.0], &[1.0], &[3.0]]);
    let part = SlabPartition::build(&coords, 0.2).unwrap();
    assert_eq!(part.region_counts(), &[5, 4]);
    assert!(close(part.slabs()[0].halfwidth(), 3.0));
    assert_eq!(part.retained_indices(), &[1, 2, 3, 4]);
}

#[test]
fn tiny_trim_fraction_keeps_everything() {
    let coords = ps(&[&[-4.0], &[-1.0], &[0.0], &[1.0], &[3.0]]);
    // 0.04 * 5 = 0.2 < 1, so ceil keeps all five
    let part = SlabPartition::build(&coords, 0.04).unwrap();
    assert_eq!(part.region_counts(), &[5, 5]);
    assert!(close(part.slabs()[0].halfwidth(), 4.0));
}

#[test]
fn partition_counts_match_sort_oracle_in_2d() {
    let s = RngStream::new(77);
    let coords = random_points(&s, 64, 2, 5.0);
    let gamma = 0.4;
    let part = SlabPartition::build(&coords, gamma).unwrap();

    // oracle: direct sort-and-trim per level
    let mut kept: Vec<usize> = (0..coords.n()).collect();
    let mut counts = vec![kept.len()];
    for axis in 0..2 {
        let mut order = kept.clone();
        order.sort_by(|&a, &b| {
            coords
                .point(a)
                .coord(axis)
                .abs()
                .partial_cmp(&coords.point(b).coord(axis).abs())
                .unwrap()
                .then(a.cmp(&b))
        });
        let keep = ((1.0 - gamma / 4.0) * order.len() as f64).ceil() as usize;
        order.truncate(keep);
        let hw: f64 = order
            .iter()
            .map(|&i| coords.point(i).coord(axis).abs())
            .fold(0.0, f64::max);
        assert!(close(part.slabs()[axis].halfwidth(), hw));
        order.sort_unstable();
        kept = order;
        counts.push(kept.len());
    }
    assert_eq!(part.region_counts(), &counts[..]);
    assert_eq!(part.retained_indices(), &kept[..]);
    // counts non-increasing
    assert!(counts.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn partition_substitutes_zero_halfwidth() {
    // all mass at zero along axis 0
    let coords = ps(&[&[0.0, 1.0], &[0.0, -2.0], &[0.0, 0.5]]);
    let part = SlabPartition::build(&coords, 0.5).unwrap();
    let hw = part.slabs()[0].halfwidth();
    assert!(hw > 0.0 && hw < 1e-10);
}

/// Slab-partition witness: with boundary points taken from the partition
/// construction, some witness slab contains the inner box after
/// amplification by at most sqrt(j).
#[test]
fn partition_witness_bound_holds() {
    for seed in 0..60 {
        let st = RngStream::new(21_000 + seed);
        let j = 1 + (st.value_at(3) % 3) as usize;
        let coords = random_points(&st.child(0), 80, j, 3.0);
        let part = SlabPartition::build(&coords, 0.6).unwrap();
        let boxed = part.inner_box();
        let lambda_min = part
            .witness_indices()
            .iter()
            .map(|&i| {
                let slab = Slab::determined_by(&Vector::zeros(j), coords.point(i)).unwrap();
                slab.minimal_amplification_hyperbox(&boxed).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(
            lambda_min <= (j as f64).sqrt() + 1e-9,
            "seed {seed}, j {j}: {lambda_min}"
        );
    }
}

// ---- translation -----------------------------------------------------------

#[test]
fn translation_within_the_flat_has_zero_distance() {
    let f = x_axis(2);
    let g = translate_flat(&f, v(&[5.0, 0.0])).unwrap();
    assert!(close(translation_distance(&f, &g).unwrap(), 0.0));
}

#[test]
fn translation_off_the_flat_measures_the_offset() {
    let f = x_axis(2);
    let g = translate_flat(&f, v(&[0.0, 3.0])).unwrap();
    assert!(close(translation_distance(&f, &g).unwrap(), 3.0));
}

#[test]
fn translation_distance_requires_equal_bases() {
    let f = x_axis(2);
    let g = Flat::new(Vector::zeros(2), vec![Vector::unit(2, 1)]).unwrap();
    assert_eq!(translation_distance(&f, &g).unwrap_err(), Error::BasisMismatch);
}

#[test]
fn translation_inequality_holds_on_random_instances() {
    for seed in 0..40 {
        let s = RngStream::new(60_000 + seed);
        let flat = random_flat(&s.child(0), 4, 2);
        let shifted = translate_flat(&flat, random_vector(&s.child(1), 4, 4.0)).unwrap();
        let points = random_points(&s.child(2), 25, 4, 3.0);
        let dist = translation_distance(&flat, &shifted).unwrap();
        let before = power_objective(&points, &flat, 2).unwrap().sqrt();
        let after = power_objective(&points, &shifted, 2).unwrap().sqrt();
        assert!(after <= (before + dist) * (1.0 + 1e-9) + 1e-12, "seed {seed}");
    }
}

// ---- power mean inequality ----------------------------------------------------

#[test]
fn power_mean_inequality_on_grid() {
    let grid: [f64; 7] = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
    for tau in 1..=8i32 {
        for &x in &grid {
            for &y in &grid {
                for &alpha in &grid {
                    let lhs = (x + alpha * y).powi(tau);
                    let rhs = (1.0 + alpha).powi(tau - 1) * x.powi(tau)
                        + alpha * (1.0 + alpha).powi(tau - 1) * y.powi(tau);
                    assert!(
                        lhs <= rhs * (1.0 + 1e-9),
                        "tau {tau} x {x} y {y} alpha {alpha}"
                    );
                }
            }
        }
    }
}

#[test]
fn power_mean_inequality_is_tight_at_alpha_zero() {
    for tau in 1..=8i32 {
        let (x, y) = (1.7f64, 0.4f64);
        let lhs: f64 = (x + 0.0 * y).powi(tau);
        let rhs = x.powi(tau);
        assert!(close(lhs, rhs));
    }
}

// ---- f32 instantiation smoke test ---------------------------------------------

#[test]
fn geometry_works_in_f32() {
    let f: Flat<f32> = Flat::new(
        Vector::zeros(2),
        vec![Vector::new(vec![1.0f32, 0.0]).unwrap()],
    )
    .unwrap();
    let p = Vector::new(vec![3.0f32, 4.0]).unwrap();
    assert!((f.distance(&p).unwrap() - 4.0).abs() < 1e-5);
    let ps32 = PointSet::new(vec![p]).unwrap();
    assert!((power_objective(&ps32, &f, 2).unwrap() - 16.0).abs() < 1e-3);
}
