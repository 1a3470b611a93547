use super::*;
use crate::fit::optimal_flat_tau2;
use crate::scalar::close;
use rand::Rng;

fn v(coords: &[f64]) -> Vector<f64> {
    Vector::new(coords.to_vec()).unwrap()
}

// ---- planted generator ------------------------------------------------------

#[test]
fn noiseless_points_sit_on_their_flats() {
    let inst = gen_planted::<f64>(4, 2, 2, 50, 0.0, 0.0, Distribution::Gaussian, &RngStream::new(1))
        .unwrap();
    for (i, a) in inst.true_assignment.iter().enumerate() {
        let which = a.expect("no outliers requested");
        let d = inst.true_flats[which].distance(inst.points.point(i)).unwrap();
        assert!(d < 1e-12, "point {i}: {d}");
    }
}

#[test]
fn outlier_count_is_exact() {
    let inst = gen_planted::<f64>(3, 1, 1, 100, 0.1, 0.1, Distribution::Gaussian, &RngStream::new(2))
        .unwrap();
    let outliers = inst.true_assignment.iter().filter(|a| a.is_none()).count();
    assert_eq!(outliers, 10);
}

#[test]
fn echo_regenerates_identical_points() {
    let inst = gen_planted::<f64>(3, 1, 2, 40, 0.2, 0.1, Distribution::Erlang, &RngStream::new(3))
        .unwrap();
    let again = gen_planted::<f64>(
        inst.echo.d,
        inst.echo.j,
        inst.echo.k,
        inst.echo.n,
        inst.echo.noise_sigma,
        inst.echo.outlier_fraction,
        inst.echo.distribution,
        &inst.echo.stream,
    )
    .unwrap();
    assert_eq!(inst.points, again.points);
    assert_eq!(inst.true_assignment, again.true_assignment);
}

#[test]
fn residual_variance_matches_sigma() {
    // orthogonal noise has d - j independent components of variance sigma^2
    let sigma = 0.3f64;
    for dist in [Distribution::Gaussian, Distribution::Erlang] {
        let inst = gen_planted::<f64>(5, 2, 1, 10_000, sigma, 0.0, dist, &RngStream::new(4)).unwrap();
        let flat = &inst.true_flats[0];
        let mean_sq: f64 = inst
            .points
            .iter()
            .map(|p| flat.distance_sq(p).unwrap())
            .sum::<f64>()
            / inst.points.n() as f64;
        let want = sigma * sigma * 3.0;
        assert!(
            (mean_sq - want).abs() / want < 0.1,
            "{dist:?}: {mean_sq} vs {want}"
        );
    }
}

// ---- brute force oracle -------------------------------------------------------

#[test]
fn recovers_two_disjoint_lines() {
    let rows = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![2.0, 0.0],
        vec![0.0, 5.0],
        vec![1.0, 6.0],
        vec![2.0, 7.0],
    ];
    let p = PointSet::from_rows(rows).unwrap();
    let (flats, obj) = brute_force_clustering(&p, 2, 1, 2).unwrap();
    assert_eq!(flats.len(), 2);
    assert!(obj < 1e-18, "objective {obj}");
}

#[test]
fn k1_brute_force_equals_the_eigenflat() {
    let s = RngStream::new(5);
    let mut rng = s.rng();
    let rows: Vec<Vec<f64>> = (0..8)
        .map(|_| vec![rng.gen::<f64>() * 2.0, rng.gen::<f64>() * 2.0, rng.gen::<f64>()])
        .collect();
    let p = PointSet::from_rows(rows).unwrap();
    let (_, obj) = brute_force_clustering(&p, 1, 1, 2).unwrap();
    let f = optimal_flat_tau2(&p, 1, None).unwrap();
    let want = crate::geometry::power_objective(&p, &f, 2).unwrap();
    assert!(close(obj, want));
}

/// Independent partition enumerator: recursive restricted-growth strings
/// instead of the implementation's assignment-code loop.
fn partitions_rec(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(labels: &mut Vec<usize>, used: usize, n: usize, k: usize, out: &mut Vec<Vec<usize>>) {
        if labels.len() == n {
            out.push(labels.clone());
            return;
        }
        for l in 0..=used.min(k - 1) {
            labels.push(l);
            let next_used = if l == used { used + 1 } else { used };
            go(labels, next_used, n, k, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), 0, n, k, &mut out);
    out
}

#[test]
fn brute_force_matches_independent_enumeration() {
    let s = RngStream::new(6);
    let mut rng = s.rng();
    let rows: Vec<Vec<f64>> = (0..6)
        .map(|_| vec![rng.gen::<f64>() * 3.0, rng.gen::<f64>() * 3.0])
        .collect();
    let p = PointSet::from_rows(rows.clone()).unwrap();
    let (_, got) = brute_force_clustering(&p, 2, 1, 2).unwrap();

    let mut oracle = f64::INFINITY;
    for labels in partitions_rec(6, 2) {
        let mut cost = 0.0;
        for group_label in 0..2 {
            let members: Vec<Vector<f64>> = labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == group_label)
                .map(|(i, _)| v(&rows[i]))
                .collect();
            if members.is_empty() {
                continue;
            }
            let group = PointSet::new(members.clone()).unwrap();
            let flat = if members.len() >= 2 {
                optimal_flat_tau2(&group, 1, None).unwrap()
            } else {
                Flat::new(group.mean(), vec![Vector::unit(2, 0)]).unwrap()
            };
            cost += members
                .iter()
                .map(|p| flat.distance_sq(p).unwrap())
                .sum::<f64>();
        }
        oracle = oracle.min(cost / 6.0);
    }
    assert!(close(got, oracle), "{got} vs {oracle}");
}

#[test]
fn brute_force_enforces_its_cap() {
    let rows: Vec<Vec<f64>> = (0..11).map(|i| vec![i as f64, 0.0]).collect();
    let p = PointSet::from_rows(rows).unwrap();
    assert!(matches!(
        brute_force_clustering(&p, 2, 1, 2),
        Err(Error::ResourceCap(_))
    ));
}

#[test]
fn brute_force_general_tau_runs() {
    let rows = vec![
        vec![0.0, 0.1],
        vec![1.0, -0.1],
        vec![2.0, 0.05],
        vec![5.0, 4.0],
        vec![5.2, 5.0],
    ];
    let p = PointSet::from_rows(rows).unwrap();
    let (flats, obj): (_, f64) = brute_force_clustering(&p, 2, 1, 3).unwrap();
    assert!(!flats.is_empty());
    assert!(obj.is_finite() && obj >= 0.0);
}

// ---- lemma verifiers ----------------------------------------------------------

#[test]
fn unknown_lemma_is_an_error() {
    assert_eq!(
        verify_lemma("no-such-lemma", 10, &RngStream::new(1)).unwrap_err(),
        Error::UnknownLemma("no-such-lemma".into())
    );
}

#[test]
fn reports_are_reproducible() {
    let a = verify_lemma("hyperbox", 100, &RngStream::new(9)).unwrap();
    let b = verify_lemma("hyperbox", 100, &RngStream::new(9)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn deterministic_lemmas_pass_small_runs() {
    for id in [
        "hyperbox",
        "slab-partition",
        "delta-rotation",
        "ltau-delta-rotation",
        "translation",
        "power-mean",
    ] {
        let report = verify_lemma(id, 300, &RngStream::new(77)).unwrap();
        assert!(report.pass, "{id}: {report:?}");
        assert_eq!(report.failures, 0, "{id}");
        assert!(report.worst_margin >= 0.0, "{id}: {report:?}");
    }
}

#[test]
fn probabilistic_lemmas_pass_small_runs() {
    for id in ["select", "mean-dist", "cv-bound", "claim-1", "theorem-1"] {
        let report = verify_lemma(id, 400, &RngStream::new(78)).unwrap();
        assert!(report.pass, "{id}: {report:?}");
    }
}
