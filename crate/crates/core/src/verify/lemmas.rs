//! One verifier per lemma. Deterministic statements demand zero failures;
//! probabilistic statements are scored against their stated success
//! probability minus a 0.02 Monte-Carlo slack.

use rand::Rng;
use rand_distr::{Distribution as RandDistribution, Gamma, StandardNormal};

use crate::geometry::{
    hyperbox_witness, objective_root, rotate_flat, delta_of_rotation, power_objective,
    translate_flat, translation_distance, Flat, Hyperbox, PointSet, Slab, SlabPartition, Vector,
};
use crate::rng::RngStream;
use crate::sampling;
use crate::verify::{random_unit_basis, run_trials, VerdictReport};

const REL: f64 = 1e-9;

fn report(lemma: &str, trials: usize, failures: usize, worst_margin: f64) -> VerdictReport {
    VerdictReport {
        lemma: lemma.to_string(),
        trials,
        failures,
        worst_margin,
        pass: failures == 0,
    }
}

fn report_probabilistic(
    lemma: &str,
    trials: usize,
    failures: usize,
    required_success: f64,
) -> VerdictReport {
    let success = 1.0 - failures as f64 / trials as f64;
    let margin = success - (required_success - 0.02);
    VerdictReport {
        lemma: lemma.to_string(),
        trials,
        failures,
        worst_margin: margin,
        pass: margin >= 0.0,
    }
}

fn uniform_in(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + rng.gen::<f64>() * (hi - lo)
}

fn gaussian_points(stream: &RngStream, n: usize, d: usize, spread: f64) -> PointSet<f64> {
    let mut rng = stream.rng();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..d)
                .map(|_| rng.sample::<f64, _>(StandardNormal) * spread)
                .collect()
        })
        .collect();
    PointSet::from_rows(rows).expect("non-empty gaussian cloud")
}

fn random_flat(stream: &RngStream, d: usize, j: usize) -> Flat<f64> {
    let basis = random_unit_basis(d, j, &stream.child(0));
    let mut rng = stream.child(1).rng();
    let anchor = Vector::new((0..d).map(|_| uniform_in(&mut rng, -2.0, 2.0)).collect())
        .expect("finite coordinates");
    Flat::new(anchor, basis).expect("orthonormal basis")
}

/// A point on the flat: anchor plus a random in-span combination.
fn point_on_flat(flat: &Flat<f64>, stream: &RngStream) -> Vector<f64> {
    let mut rng = stream.rng();
    let mut p = flat.anchor().clone();
    for b in flat.basis() {
        p.axpy(uniform_in(&mut rng, -2.0, 2.0), b);
    }
    p
}

/// Hyperbox lemma: among one witness point per facet, some witness slab
/// contains the box after amplification by at most sqrt(j).
pub(super) fn hyperbox(trials: usize, stream: &RngStream) -> VerdictReport {
    let (failures, worst) = run_trials(trials, |i| {
        let s = stream.child(i as u64);
        let j = 1 + (s.value_at(0) % 6) as usize;
        let mut rng = s.child(1).rng();
        let sides: Vec<f64> = (0..j).map(|_| uniform_in(&mut rng, 0.1, 10.0)).collect();
        let axes = random_unit_basis::<f64>(j, j, &s.child(2));
        let center =
            Vector::new((0..j).map(|_| uniform_in(&mut rng, -3.0, 3.0)).collect()).unwrap();
        let h = Hyperbox::new(center.clone(), axes.clone(), sides.clone()).unwrap();
        let rho: Vec<Vector<f64>> = (0..j)
            .map(|l| {
                let mut p = center.clone();
                for (w, axis) in axes.iter().enumerate() {
                    let c = if w == l {
                        let side = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                        side * sides[w] / 2.0
                    } else {
                        uniform_in(&mut rng, -0.5, 0.5) * sides[w]
                    };
                    p.axpy(c, axis);
                }
                p
            })
            .collect();
        let (_, lambda) = hyperbox_witness(&h, &rho).expect("witnesses on facets");
        let bound = (j as f64).sqrt();
        let margin = bound * (1.0 + REL) - lambda;
        (margin < 0.0, margin)
    });
    report("hyperbox", trials, failures, worst)
}

/// Slab-partition witness: the boundary points produced by the partition
/// contain a witness whose slab covers the inner box within sqrt(j).
pub(super) fn slab_partition_witness(trials: usize, stream: &RngStream) -> VerdictReport {
    let (failures, worst) = run_trials(trials, |i| {
        let s = stream.child(i as u64);
        let j = 1 + (s.value_at(0) % 4) as usize;
        let mut rng = s.child(1).rng();
        let gamma = uniform_in(&mut rng, 0.1, 0.9);
        let coords = gaussian_points(&s.child(2), 60, j, 2.0);
        let part = SlabPartition::build(&coords, gamma).expect("valid partition");
        let boxed = part.inner_box();
        let origin = Vector::zeros(j);
        let lambda_min = part
            .witness_indices()
            .iter()
            .map(|&w| {
                Slab::determined_by(&origin, coords.point(w))
                    .expect("witness off the origin")
                    .minimal_amplification_hyperbox(&boxed)
                    .expect("dimensions agree")
            })
            .fold(f64::INFINITY, f64::min);
        let bound = (j as f64).sqrt();
        let margin = bound * (1.0 + REL) - lambda_min;
        (margin < 0.0, margin)
    });
    report("slab-partition", trials, failures, worst)
}

/// Delta-rotation growth bound, for the given tau exponents:
/// objective_root after the rotation is at most before + delta.
pub(super) fn delta_rotation(trials: usize, stream: &RngStream, taus: &[u32]) -> VerdictReport {
    delta_rotation_named(trials, stream, taus, "delta-rotation")
}

pub(super) fn delta_rotation_named(
    trials: usize,
    stream: &RngStream,
    taus: &[u32],
    name: &str,
) -> VerdictReport {
    let (failures, worst) = run_trials(trials, |i| {
        let s = stream.child(i as u64);
        let tau = taus[i % taus.len()];
        let d = 2 + (s.value_at(0) % 4) as usize;
        let j = 1 + (s.value_at(1) % (d as u64 - 1)) as usize;
        let flat = random_flat(&s.child(2), d, j);
        let o = point_on_flat(&flat, &s.child(3));
        let points = gaussian_points(&s.child(4), 40, d, 2.5);
        // find a non-degenerate inducing point
        let mut chosen = None;
        for attempt in 0..8 {
            let mut rng = s.child(5 + attempt).rng();
            let u =
                Vector::new((0..d).map(|_| uniform_in(&mut rng, -3.0, 3.0)).collect()).unwrap();
            let proj = flat.project(&u).expect("dims agree");
            if (&proj - &o).norm() > 1e-6 && (&u - &proj).norm() > 1e-9 {
                chosen = Some(u);
                break;
            }
        }
        let Some(u) = chosen else {
            return (false, f64::INFINITY);
        };
        let dr = delta_of_rotation(&points, &flat, &o, &u, tau).expect("non-degenerate");
        let (rotated, _) = rotate_flat(&flat, &o, &u).expect("non-degenerate");
        let before = objective_root(&points, &flat, tau).unwrap();
        let after = objective_root(&points, &rotated, tau).unwrap();
        let bound = (before + dr.delta) * (1.0 + REL) + 1e-12;
        let margin = bound - after;
        (margin < 0.0, margin)
    });
    report(name, trials, failures, worst)
}

/// Translation bound: rms distance grows by at most the flat-to-flat
/// distance.
pub(super) fn translation(trials: usize, stream: &RngStream) -> VerdictReport {
    let (failures, worst) = run_trials(trials, |i| {
        let s = stream.child(i as u64);
        let d = 2 + (s.value_at(0) % 4) as usize;
        let j = 1 + (s.value_at(1) % (d as u64 - 1)) as usize;
        let flat = random_flat(&s.child(2), d, j);
        let mut rng = s.child(3).rng();
        let target =
            Vector::new((0..d).map(|_| uniform_in(&mut rng, -4.0, 4.0)).collect()).unwrap();
        let moved = translate_flat(&flat, target).expect("same dimension");
        let points = gaussian_points(&s.child(4), 30, d, 2.0);
        let dist = translation_distance(&flat, &moved).expect("same basis");
        let before = power_objective(&points, &flat, 2).unwrap().sqrt();
        let after = power_objective(&points, &moved, 2).unwrap().sqrt();
        let bound = (before + dist) * (1.0 + REL) + 1e-12;
        let margin = bound - after;
        (margin < 0.0, margin)
    });
    report("translation", trials, failures, worst)
}

/// Power-mean inequality over random positive x, y, alpha and tau in 1..=8.
pub(super) fn power_mean(trials: usize, stream: &RngStream) -> VerdictReport {
    let (failures, worst) = run_trials(trials, |i| {
        let s = stream.child(i as u64);
        let mut rng = s.rng();
        let tau = 1 + (s.value_at(0) % 8) as i32;
        let x = uniform_in(&mut rng, 0.01, 10.0);
        let y = uniform_in(&mut rng, 0.01, 10.0);
        let alpha = uniform_in(&mut rng, 0.01, 10.0);
        let lhs = (x + alpha * y).powi(tau);
        let rhs =
            (1.0 + alpha).powi(tau - 1) * x.powi(tau) + alpha * (1.0 + alpha).powi(tau - 1) * y.powi(tau);
        let margin = (rhs * (1.0 + REL) - lhs) / rhs.max(1.0);
        (margin < 0.0, margin)
    });
    report("power-mean", trials, failures, worst)
}

/// Subset-hitting sample size: drawing ceil((t/ln(1+alpha)) ln(t/eta))
/// elements yields at least t hits from an alpha-fraction subset with
/// probability at least 1 - eta.
pub(super) fn select(trials: usize, stream: &RngStream) -> VerdictReport {
    let configs: &[(f64, usize, f64)] = &[(0.2, 3, 0.1), (0.4, 2, 0.15), (0.1, 1, 0.2)];
    let n = 500usize;
    let mut total_failures = 0usize;
    let mut worst = f64::INFINITY;
    let mut pass = true;
    for (ci, &(alpha, t, eta)) in configs.iter().enumerate() {
        let sub = stream.child(ci as u64);
        let cutoff = (alpha * n as f64).round() as usize;
        let z = ((t as f64 / (1.0 + alpha).ln()) * (t as f64 / eta).ln()).ceil() as usize;
        let (failures, _) = run_trials(trials, |i| {
            let mut rng = sub.child(i as u64).rng();
            let mut hits = 0usize;
            for _ in 0..z {
                if rng.gen_range(0..n) < cutoff {
                    hits += 1;
                }
            }
            (hits < t, 0.0)
        });
        total_failures += failures;
        let success = 1.0 - failures as f64 / trials as f64;
        let margin = success - (1.0 - eta - 0.02);
        worst = worst.min(margin);
        pass &= margin >= 0.0;
    }
    VerdictReport {
        lemma: "select".to_string(),
        trials: trials * configs.len(),
        failures: total_failures,
        worst_margin: worst,
        pass,
    }
}

/// Sample-mean concentration: a with-replacement sample of size m has its
/// mean within (1/(eta m)) Var0(S) of the set mean, squared, with
/// probability at least 1 - eta.
pub(super) fn mean_dist(trials: usize, stream: &RngStream) -> VerdictReport {
    let eta = 0.1f64;
    let m = 10usize;
    let required = 1.0 - eta;
    let (failures, _) = run_trials(trials, |i| {
        let s = stream.child(i as u64);
        // mixture cloud for variety
        let base = gaussian_points(&s.child(0), 200, 3, 1.5);
        let mut rows: Vec<Vec<f64>> = base.iter().map(|p| p.coords().to_vec()).collect();
        let mut rng = s.child(1).rng();
        for row in rows.iter_mut().take(60) {
            for c in row.iter_mut() {
                *c += 4.0;
            }
        }
        let _ = &mut rng;
        let set = PointSet::from_rows(rows).unwrap();
        let x_s = set.mean();
        let var0 = set
            .iter()
            .map(|p| (p - &x_s).norm_sq())
            .sum::<f64>()
            / set.n() as f64;
        let sample = sampling::uniform_sample(&set, m, &s.child(2)).unwrap();
        let mut acc = Vector::zeros(3);
        for p in &sample.points {
            acc.axpy(1.0, p);
        }
        let x_t = acc.scale(1.0 / m as f64);
        let ok = (&x_s - &x_t).norm_sq() < var0 / (eta * m as f64);
        (!ok, 0.0)
    });
    report_probabilistic("mean-dist", trials, failures, required)
}

/// Bounded-CV sample lower bound (tau = 2 and the L_tau variants at
/// tau in {1, 3}): the sampled mean absolute deviation stays above
/// (1 - eta sqrt((omega^2-1)/m)) h / omega with probability 1 - 1/eta^2.
pub(super) fn cv_bound(trials: usize, stream: &RngStream) -> VerdictReport {
    let eta = 2.0f64;
    let m = 25usize;
    let n = 400usize;
    let required = 1.0 - 1.0 / (eta * eta);
    let configs: &[(u32, bool)] = &[(2, false), (1, true), (3, true)];
    let mut total_failures = 0usize;
    let mut worst = f64::INFINITY;
    let mut pass = true;
    for (ci, &(tau, erlang)) in configs.iter().enumerate() {
        let sub = stream.child(ci as u64);
        let (failures, _) = run_trials(trials, |i| {
            let mut rng = sub.child(i as u64).rng();
            let xs: Vec<f64> = (0..n)
                .map(|_| {
                    if erlang {
                        let gamma = Gamma::new(2.0, 1.0).unwrap();
                        gamma.sample(&mut rng)
                    } else {
                        rng.sample::<f64, _>(StandardNormal)
                    }
                })
                .collect();
            let mu = xs.iter().sum::<f64>() / n as f64;
            let abs_dev = xs.iter().map(|x| (x - mu).abs()).sum::<f64>() / n as f64;
            // signed tau-th moment root (zero for tau = 1 by centering)
            let h = {
                let mom = xs.iter().map(|x| (x - mu).powi(tau as i32)).sum::<f64>() / n as f64;
                if tau == 1 {
                    mom
                } else if tau == 2 {
                    mom.sqrt()
                } else {
                    mom.signum() * mom.abs().powf(1.0 / tau as f64)
                }
            };
            let omega = {
                let num = (xs.iter().map(|x| (x - mu).abs().powi(tau as i32)).sum::<f64>()
                    / n as f64)
                    .powf(1.0 / tau as f64);
                num / abs_dev
            };
            let mut sample_dev = 0.0;
            for _ in 0..m {
                let idx = rng.gen_range(0..n);
                sample_dev += (xs[idx] - mu).abs();
            }
            sample_dev /= m as f64;
            let factor = 1.0 - eta * ((omega * omega - 1.0).max(0.0) / m as f64).sqrt();
            let ok = sample_dev >= factor * h / omega - 1e-12;
            (!ok, 0.0)
        });
        total_failures += failures;
        let success = 1.0 - failures as f64 / trials as f64;
        let margin = success - (required - 0.02);
        worst = worst.min(margin);
        pass &= margin >= 0.0;
    }
    VerdictReport {
        lemma: "cv-bound".to_string(),
        trials: trials * configs.len(),
        failures: total_failures,
        worst_margin: worst,
        pass,
    }
}

/// Claim 1: the selected witness mean sits within 5 delta of its projection
/// onto the flat, with probability (1 - eps)^2. The B-sets are rebuilt per
/// the construction: sample, region membership, reflection, positive
/// coordinate filter.
pub(super) fn claim_one(trials: usize, stream: &RngStream) -> VerdictReport {
    let eps = 0.25f64;
    let gamma = 0.5f64;
    let j = 2usize;
    let d = 4usize;
    let n = 600usize;
    let required = (1.0 - eps) * (1.0 - eps);
    let r = sampling::sample_size_single(j, gamma, eps).expect("valid parameters");

    let (failures, _) = run_trials(trials, |i| {
        let s = stream.child(i as u64);
        let flat = random_flat(&s.child(0), d, j);
        let o = point_on_flat(&flat, &s.child(1));
        // cloud offset from the flat so delta > 0
        let mut points = gaussian_points(&s.child(2), n, d, 2.0);
        {
            let mut rng = s.child(3).rng();
            let shift: Vec<f64> = (0..d).map(|_| uniform_in(&mut rng, -1.0, 1.0)).collect();
            let rows: Vec<Vec<f64>> = points
                .iter()
                .map(|p| {
                    p.coords()
                        .iter()
                        .zip(&shift)
                        .map(|(&c, &sh)| c + sh)
                        .collect()
                })
                .collect();
            points = PointSet::from_rows(rows).unwrap();
        }
        let delta = power_objective(&points, &flat, 2).unwrap().sqrt();

        // coordinates of every point in the flat's frame, relative to o
        let frame = flat.reanchored(&o).expect("o on flat");
        let coords: Vec<Vector<f64>> = points
            .iter()
            .map(|p| frame.coordinates(p).unwrap())
            .collect();
        let part = SlabPartition::build(
            &PointSet::new(coords.clone()).unwrap(),
            gamma,
        )
        .expect("valid partition");

        let sample = sampling::uniform_sample(&points, r, &s.child(4)).unwrap();

        // B_l: sampled points inside region Pi_{l-1}, reflected through o
        // when their l-th frame coordinate is negative
        let mut rho: Vec<Vector<f64>> = Vec::with_capacity(j);
        for l in 0..j {
            let mut acc = Vector::zeros(d);
            let mut count = 0usize;
            for &src in &sample.source_indices {
                let c = &coords[src];
                let inside = (0..l).all(|w| {
                    c.coord(w).abs() <= part.slabs()[w].halfwidth() + 1e-12
                });
                if !inside {
                    continue;
                }
                if c.coord(l) >= 0.0 {
                    acc.axpy(1.0, points.point(src));
                } else {
                    acc.axpy(1.0, &points.point(src).reflect_through(&o));
                }
                count += 1;
            }
            if count == 0 {
                return (true, 0.0);
            }
            rho.push(acc.scale(1.0 / count as f64));
        }

        // witness selection in the flat frame, as in the slab-partition step
        let rho_coords: Vec<Vector<f64>> = rho.iter().map(|p| frame.coordinates(p).unwrap()).collect();
        let halfwidths: Vec<f64> = (0..j)
            .map(|l| rho_coords[l].coord(l).abs().max(1e-12))
            .collect();
        let boxed = Hyperbox::axis_aligned(halfwidths.iter().map(|&h| 2.0 * h).collect())
            .expect("positive sides");
        let origin = Vector::zeros(j);
        let mut l0 = 0usize;
        let mut best = f64::INFINITY;
        for (l, rc) in rho_coords.iter().enumerate() {
            if rc.norm() < 1e-12 {
                continue;
            }
            let lambda = Slab::determined_by(&origin, rc)
                .unwrap()
                .minimal_amplification_hyperbox(&boxed)
                .unwrap();
            if lambda < best {
                best = lambda;
                l0 = l;
            }
        }

        let proj = flat.project(&rho[l0]).unwrap();
        let ok = (&rho[l0] - &proj).norm() <= 5.0 * delta * (1.0 + REL) + 1e-12;
        (!ok, 0.0)
    });
    report_probabilistic("claim-1", trials, failures, required)
}

/// Existential form of the symmetric-sampling theorem: some candidate
/// induces a rotation whose trimmed squared objective stays within
/// (1 + 5 sqrt(j) r)^2 of the original flat's full objective.
pub(super) fn theorem_one(trials: usize, stream: &RngStream) -> VerdictReport {
    let eps = 0.25f64;
    let gamma = 0.4f64;
    let r = 3usize;
    let required = (1.0 - eps).powi(4);

    let (failures, _) = run_trials(trials, |i| {
        let s = stream.child(i as u64);
        let d = 3 + (s.value_at(0) % 2) as usize;
        let j = 1 + (s.value_at(1) % 2) as usize;
        let flat = random_flat(&s.child(2), d, j);
        let o = point_on_flat(&flat, &s.child(3));
        let points = gaussian_points(&s.child(4), 200, d, 2.0);
        let n = points.n();

        let sample = sampling::uniform_sample(&points, r, &s.child(5)).unwrap();
        let cands = sampling::symmetric_sampling(&sample.points, &o).unwrap();

        let total_before: f64 = points
            .iter()
            .map(|p| flat.distance_sq(p).unwrap())
            .sum();
        let keep = crate::scalar::ceil_count((1.0 - gamma / j as f64) * n as f64).min(n);
        let factor = (1.0 + 5.0 * (j as f64).sqrt() * r as f64).powi(2);
        let bound = factor * total_before;

        let mut exists = false;
        for cand in &cands.points {
            let Ok((rotated, _)) = rotate_flat(&flat, &o, cand) else {
                continue;
            };
            let mut dists: Vec<f64> = points
                .iter()
                .map(|p| rotated.distance_sq(p).unwrap())
                .collect();
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let trimmed: f64 = dists[..keep].iter().sum();
            if trimmed <= bound * (1.0 + REL) + 1e-12 {
                exists = true;
                break;
            }
        }
        (!exists, 0.0)
    });
    report_probabilistic("theorem-1", trials, failures, required)
}
