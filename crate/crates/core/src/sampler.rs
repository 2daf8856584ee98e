//! Seeded uniform sampling from convex domains and Monte-Carlo estimation of
//! the distance statistics `E_x`, `S_x`, `R_x = E_x + 2 S_x`.
//!
//! Sampling is deterministic given `(domain, n, seed)` and embarrassingly
//! parallel: the sample is produced in fixed-size chunks, each driven by its
//! own counter-derived stream of the seeded generator, and chunks are merged
//! in index order. Parallel and serial runs therefore agree bit-for-bit.
//!
//! Flat domains are sampled by rejection from the tight axis-aligned
//! bounding box, except polytopes in dimension >= 6 which use hit-and-run
//! (burn-in 1000, thinning 10, started at the interior witness). Spherical
//! domains are sampled by rejection from the bounding cap, with the radial
//! coordinate drawn against the exact `sin^(n-1)` area element.

use crate::domains::{random_point_in_cap, random_tangent_direction, ConvexDomain, Shape};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Chunk size of the deterministic parallel sampler.
const CHUNK: usize = 4096;
/// Hit-and-run defaults.
const HIT_AND_RUN_BURN_IN: usize = 1000;
const HIT_AND_RUN_THINNING: usize = 10;
/// Dimension at which polytope sampling switches to hit-and-run.
const HIT_AND_RUN_DIM: usize = 6;
/// Rejection sampling aborts below this acceptance rate.
const MIN_ACCEPTANCE: f64 = 1e-6;

/// Monte-Carlo distance statistics of a uniform sample seen from a base
/// point `x`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleStats {
    /// Base point the distances are measured from.
    pub x: Point,
    pub n_samples: usize,
    /// Sample mean of `d(X, x)`.
    #[serde(rename = "E_x")]
    pub e_x: f64,
    /// Sample standard deviation of `d(X, x)`.
    #[serde(rename = "S_x")]
    pub s_x: f64,
    /// `E_x + 2 S_x`, the localization radius.
    #[serde(rename = "R_x")]
    pub r_x: f64,
    /// CLT standard error of `E_x`.
    #[serde(rename = "se_E")]
    pub se_e: f64,
    /// Normal-theory standard error of `S_x`.
    #[serde(rename = "se_S")]
    pub se_s: f64,
}

/// Draws `n` points uniformly from `k`, deterministically in `(k, n, seed)`.
pub fn sample_uniform(k: &ConvexDomain, n: usize, seed: u64) -> Result<Vec<Point>> {
    if n < 1 {
        return Err(Error::InvalidParameter("sample size must be >= 1".into()));
    }
    let n_chunks = n.div_ceil(CHUNK);
    let chunks: Vec<Result<Vec<Point>>> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let len = if ci + 1 == n_chunks && n % CHUNK != 0 {
                n % CHUNK
            } else {
                CHUNK
            };
            sample_chunk(k, len, seed, ci as u64)
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

fn sample_chunk(k: &ConvexDomain, len: usize, seed: u64, stream: u64) -> Result<Vec<Point>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let use_hit_and_run = k.space().is_flat()
        && k.space().dim() >= HIT_AND_RUN_DIM
        && matches!(k.shape(), Shape::Polytope(_));
    if use_hit_and_run {
        Ok(hit_and_run_chunk(k, len, &mut rng))
    } else if k.space().is_flat() {
        rejection_chunk_flat(k, len, &mut rng)
    } else {
        rejection_chunk_sphere(k, len, &mut rng)
    }
}

fn rejection_chunk_flat(k: &ConvexDomain, len: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Point>> {
    let (lo, hi) = k.bounding_box().expect("flat domains carry a bounding box");
    let mut out = Vec::with_capacity(len);
    let mut tries: u64 = 0;
    let mut coords = vec![0.0; lo.len()];
    while out.len() < len {
        tries += 1;
        for ((c, l), h) in coords.iter_mut().zip(lo).zip(hi) {
            *c = rng.random_range(*l..*h);
        }
        let p = Point::from_coords(coords.clone());
        if k.margin_unchecked(&p) >= 0.0 {
            out.push(p);
        }
        if tries % 1_000_000 == 0 && (out.len() as f64) < MIN_ACCEPTANCE * tries as f64 {
            return Err(Error::LowAcceptance { limit: MIN_ACCEPTANCE });
        }
    }
    Ok(out)
}

fn rejection_chunk_sphere(
    k: &ConvexDomain,
    len: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Point>> {
    let (center, radius) = k.bounding_ball();
    let space = k.space();
    let mut out = Vec::with_capacity(len);
    let mut tries: u64 = 0;
    while out.len() < len {
        tries += 1;
        let p = random_point_in_cap(space, center, radius, rng);
        if k.margin_unchecked(&p) >= 0.0 {
            out.push(p);
        }
        if tries % 1_000_000 == 0 && (out.len() as f64) < MIN_ACCEPTANCE * tries as f64 {
            return Err(Error::LowAcceptance { limit: MIN_ACCEPTANCE });
        }
    }
    Ok(out)
}

fn hit_and_run_chunk(k: &ConvexDomain, len: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let space = k.space();
    let mut current = k.interior_witness().clone();
    let mut step = |p: &Point, rng: &mut ChaCha8Rng| -> Point {
        let dir = random_tangent_direction(space, p, rng);
        let neg: Vec<f64> = dir.iter().map(|c| -c).collect();
        let t_fwd = k.exit_time_unchecked(p, &dir);
        let t_bwd = k.exit_time_unchecked(p, &neg);
        let t = rng.random_range(-t_bwd..t_fwd);
        Point::from_coords(linalg::add_scaled(p.coords(), &dir, t))
    };
    for _ in 0..HIT_AND_RUN_BURN_IN {
        current = step(&current, rng);
    }
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        for _ in 0..HIT_AND_RUN_THINNING {
            current = step(&current, rng);
        }
        out.push(current.clone());
    }
    out
}

impl SampleStats {
    /// Statistics of a batch of distances from `x`; needs `n >= 2`.
    pub fn from_distances(x: Point, dists: &[f64]) -> Result<SampleStats> {
        let n = dists.len();
        if n < 2 {
            return Err(Error::InvalidParameter(
                "distance statistics need at least 2 samples".into(),
            ));
        }
        let nf = n as f64;
        let mean = dists.iter().sum::<f64>() / nf;
        let var = dists.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (nf - 1.0);
        let sd = var.max(0.0).sqrt();
        Ok(SampleStats {
            x,
            n_samples: n,
            e_x: mean,
            s_x: sd,
            r_x: mean + 2.0 * sd,
            se_e: sd / nf.sqrt(),
            se_s: sd / (2.0 * (nf - 1.0)).sqrt(),
        })
    }
}

/// Distance statistics of a uniform sample of `k` seen from `x` (which need
/// not lie in `k`).
pub fn distance_stats(k: &ConvexDomain, x: &Point, n: usize, seed: u64) -> Result<SampleStats> {
    k.space().check_point(x)?;
    if n < 2 {
        return Err(Error::InvalidParameter(
            "distance statistics need at least 2 samples".into(),
        ));
    }
    let pts = sample_uniform(k, n, seed)?;
    let dists: Vec<f64> = pts
        .iter()
        .map(|p| k.space().distance_unchecked(x, p))
        .collect();
    SampleStats::from_distances(x.clone(), &dists)
}

/// Picks the candidate base point minimizing `E_x * S_x`.
///
/// All candidates are scored against the same sample (common random
/// numbers). Candidates whose objectives differ by less than three combined
/// standard errors are treated as tied - the estimator cannot distinguish
/// them - and ties fall back to lower `E_x` under the same rule, then to
/// list order.
pub fn choose_basepoint(
    k: &ConvexDomain,
    candidates: &[Point],
    n: usize,
    seed: u64,
) -> Result<(Point, SampleStats)> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("empty candidate list".into()));
    }
    let pts = sample_uniform(k, n.max(2), seed)?;
    let mut incumbent: Option<SampleStats> = None;
    let mut incumbent_idx = 0usize;
    for (i, cand) in candidates.iter().enumerate() {
        k.space().check_point(cand)?;
        let dists: Vec<f64> = pts
            .iter()
            .map(|p| k.space().distance_unchecked(cand, p))
            .collect();
        let stats = SampleStats::from_distances(cand.clone(), &dists)?;
        match &incumbent {
            None => {
                incumbent = Some(stats);
                incumbent_idx = i;
            }
            Some(best) => {
                if challenger_wins(&stats, best) {
                    incumbent = Some(stats);
                    incumbent_idx = i;
                }
            }
        }
    }
    let _ = incumbent_idx;
    Ok((candidates[incumbent_idx].clone(), incumbent.unwrap()))
}

fn objective_se(s: &SampleStats) -> f64 {
    ((s.s_x * s.se_e).powi(2) + (s.e_x * s.se_s).powi(2)).sqrt()
}

fn challenger_wins(challenger: &SampleStats, incumbent: &SampleStats) -> bool {
    let (oc, oi) = (challenger.e_x * challenger.s_x, incumbent.e_x * incumbent.s_x);
    let tol = 3.0 * (objective_se(challenger).powi(2) + objective_se(incumbent).powi(2)).sqrt();
    if oc < oi - tol {
        return true;
    }
    if oc > oi + tol {
        return false;
    }
    // objectives tied at estimator resolution: compare means the same way
    let tol_e = 3.0 * (challenger.se_e.powi(2) + incumbent.se_e.powi(2)).sqrt();
    challenger.e_x < incumbent.e_x - tol_e
}

/// Diagnostic concentration estimate over the half-space (flat) or
/// hemisphere-style (sphere) cut family only.
///
/// Scans `cut_resolution` directions; for each, the cut is placed at the
/// empirical median of the projections (measure 1/2 up to 1/n) and the
/// estimate is the empirical mass farther than `r0` from the cut half. The
/// distance used is the ambient distance to the half-space, which never
/// exceeds the in-domain distance, so the returned value is a lower bound on
/// the concentration parameter of this family.
pub fn halfspace_concentration(
    k: &ConvexDomain,
    r0: f64,
    n: usize,
    seed: u64,
    cut_resolution: usize,
) -> Result<f64> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::InvalidParameter(format!("r0 = {r0}")));
    }
    if cut_resolution == 0 {
        return Err(Error::InvalidParameter("cut_resolution must be >= 1".into()));
    }
    let pts = sample_uniform(k, n.max(2), seed)?;
    let space = k.space();
    let ambient = space.ambient_dim();

    let mut dir_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc07_d19);
    let directions: Vec<Vec<f64>> = if ambient == 2 {
        (0..cut_resolution)
            .map(|i| {
                let ang = 2.0 * std::f64::consts::PI * i as f64 / cut_resolution as f64;
                vec![ang.cos(), ang.sin()]
            })
            .collect()
    } else if ambient == 3 {
        fibonacci_directions(cut_resolution)
    } else {
        (0..cut_resolution)
            .map(|_| loop {
                let g: Vec<f64> = (0..ambient)
                    .map(|_| dir_rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect();
                if let Some(u) = linalg::normalized(&g) {
                    break u;
                }
            })
            .collect()
    };

    let worst = directions
        .par_iter()
        .map(|u| {
            let mut s: Vec<f64> = pts.iter().map(|p| linalg::dot(p.coords(), u)).collect();
            let mid = s.len() / 2;
            s.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
            let c = s[mid];
            let far = if space.is_flat() {
                s.iter().filter(|&&v| v - c >= r0).count()
            } else {
                // latitude relative to u: distance to the cut region is the
                // sphere radius times the latitude difference
                let r = space.radius();
                let lat_c = (c / r).clamp(-1.0, 1.0).asin();
                s.iter()
                    .filter(|&&v| {
                        let lat = (v / r).clamp(-1.0, 1.0).asin();
                        r * (lat - lat_c) >= r0
                    })
                    .count()
            };
            far as f64 / s.len() as f64
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    Ok(worst.min(0.5))
}

/// Quasi-uniform directions on the 2-sphere (spherical Fibonacci spiral).
pub(crate) fn fibonacci_directions(n: usize) -> Vec<Vec<f64>> {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    (0..n.max(1))
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n.max(1) as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
            vec![rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ModelSpace;

    fn unit_square() -> ConvexDomain {
        let sp = ModelSpace::euclidean(2).unwrap();
        ConvexDomain::axis_box(sp, &[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    fn unit_disc() -> ConvexDomain {
        let sp = ModelSpace::euclidean(2).unwrap();
        let c = sp.point(vec![0.0, 0.0]).unwrap();
        ConvexDomain::ball(sp, c, 1.0).unwrap()
    }

    #[test]
    fn samples_live_in_the_domain() {
        let k = unit_square();
        for p in sample_uniform(&k, 500, 1).unwrap() {
            assert!(k.contains(&p).unwrap());
        }
        let sp = ModelSpace::sphere(2, 1.0).unwrap();
        let pole = sp.point(vec![0.0, 0.0, 1.0]).unwrap();
        let cap = ConvexDomain::ball(sp, pole, 0.7).unwrap();
        for p in sample_uniform(&cap, 500, 1).unwrap() {
            assert!(cap.contains(&p).unwrap());
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let k = unit_disc();
        let a = sample_uniform(&k, 2 * CHUNK + 17, 42).unwrap();
        let b = sample_uniform(&k, 2 * CHUNK + 17, 42).unwrap();
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.coords(), q.coords());
        }
        let c = sample_uniform(&k, 100, 43).unwrap();
        assert_ne!(a[0].coords(), c[0].coords());
    }

    #[test]
    fn square_sample_mean_is_centered() {
        let k = unit_square();
        let n = 100_000;
        let pts = sample_uniform(&k, n, 0).unwrap();
        let se = (1.0f64 / 12.0).sqrt() / (n as f64).sqrt();
        for axis in 0..2 {
            let mean = pts.iter().map(|p| p.coords()[axis]).sum::<f64>() / n as f64;
            assert!((mean - 0.5).abs() < 3.0 * se, "axis {axis}: mean {mean}");
        }
    }

    #[test]
    fn disc_stats_match_quadrature() {
        // E|X| = 2/3, S = sqrt(1/2 - 4/9) = sqrt(1/18)
        let k = unit_disc();
        let x = k.space().point(vec![0.0, 0.0]).unwrap();
        let st = distance_stats(&k, &x, 100_000, 0).unwrap();
        assert!((st.e_x - 2.0 / 3.0).abs() < 3.0 * st.se_e, "E = {}", st.e_x);
        let s_exact = (1.0f64 / 18.0).sqrt();
        assert!((st.s_x - s_exact).abs() < 3.0 * st.se_s, "S = {}", st.s_x);
        assert_eq!(st.r_x, st.e_x + 2.0 * st.s_x);
    }

    #[test]
    fn thin_box_stats_match_1d_law() {
        // [0, 10] x [0, 1e-3] from the left edge midpoint: distances are
        // essentially uniform on [0, 10]
        let sp = ModelSpace::euclidean(2).unwrap();
        let k = ConvexDomain::axis_box(sp, &[0.0, 0.0], &[10.0, 1e-3]).unwrap();
        let x = sp.point(vec![0.0, 5e-4]).unwrap();
        let st = distance_stats(&k, &x, 100_000, 0).unwrap();
        assert!((st.e_x - 5.0).abs() < 3.0 * st.se_e, "E = {}", st.e_x);
        let s_exact = 10.0 / 12.0f64.sqrt();
        assert!((st.s_x - s_exact).abs() < 3.0 * st.se_s, "S = {}", st.s_x);
    }

    #[test]
    fn wide_cap_mean_angle_matches_quadrature() {
        // cap of radius ~pi/2 on the unit sphere: mean angle from the pole is
        // int t sin t / int sin t = 1 over [0, pi/2]
        let sp = ModelSpace::sphere(2, 1.0).unwrap();
        let pole = sp.point(vec![0.0, 0.0, 1.0]).unwrap();
        let radius = std::f64::consts::FRAC_PI_2 * 0.9999;
        let k = ConvexDomain::ball(sp, pole.clone(), radius).unwrap();
        let st = distance_stats(&k, &pole, 100_000, 0).unwrap();
        let exact = {
            // closed forms: int_0^a t sin t = sin a - a cos a; int_0^a sin t = 1 - cos a
            let a = radius;
            (a.sin() - a * a.cos()) / (1.0 - a.cos())
        };
        assert!(
            (st.e_x - exact).abs() < 3.0 * st.se_e,
            "E = {}, exact = {exact}",
            st.e_x
        );
    }

    #[test]
    fn hit_and_run_hypercube_6d() {
        let sp = ModelSpace::euclidean(6).unwrap();
        let k = ConvexDomain::axis_box(sp, &[0.0; 6], &[1.0; 6]).unwrap();
        let n = 20_000;
        let pts = sample_uniform(&k, n, 0).unwrap();
        for p in pts.iter().take(100) {
            assert!(k.contains(p).unwrap());
        }
        // thinned chains decorrelate enough for a loose 5-sigma check
        let se = (1.0f64 / 12.0).sqrt() / (n as f64).sqrt();
        for axis in 0..6 {
            let mean = pts.iter().map(|p| p.coords()[axis]).sum::<f64>() / n as f64;
            assert!((mean - 0.5).abs() < 5.0 * se, "axis {axis}: mean {mean}");
        }
    }

    #[test]
    fn choose_basepoint_prefers_center_over_boundary() {
        let k = unit_disc();
        let sp = *k.space();
        let center = sp.point(vec![0.0, 0.0]).unwrap();
        let boundary = sp.point(vec![0.95, 0.0]).unwrap();
        let (best, _) =
            choose_basepoint(&k, &[boundary, center.clone()], 50_000, 0).unwrap();
        assert_eq!(best.coords(), center.coords());
    }

    #[test]
    fn choose_basepoint_single_candidate() {
        let k = unit_disc();
        let sp = *k.space();
        let c = sp.point(vec![0.2, 0.1]).unwrap();
        let (best, stats) = choose_basepoint(&k, &[c.clone()], 1000, 0).unwrap();
        assert_eq!(best.coords(), c.coords());
        assert_eq!(stats.n_samples, 1000);
    }

    #[test]
    fn choose_basepoint_tie_goes_to_first() {
        let k = unit_square();
        let sp = *k.space();
        let a = sp.point(vec![0.25, 0.25]).unwrap();
        let b = sp.point(vec![0.75, 0.75]).unwrap();
        let (best, _) = choose_basepoint(&k, &[a.clone(), b], 100_000, 0).unwrap();
        assert_eq!(best.coords(), a.coords());
    }

    #[test]
    fn concentration_of_elongated_box() {
        // [0,1] x [0,10] at r0 = 2.5: the long-axis median cut leaves mass
        // about 1/2 - r0/10 = 1/4 beyond the r0-neighborhood
        let sp = ModelSpace::euclidean(2).unwrap();
        let k = ConvexDomain::axis_box(sp, &[0.0, 0.0], &[1.0, 10.0]).unwrap();
        let n = 100_000;
        let lam = halfspace_concentration(&k, 2.5, n, 0, 64).unwrap();
        let se = (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((lam - 0.25).abs() < 4.0 * se, "lambda0 = {lam}");
    }

    #[test]
    fn concentration_zero_beyond_diameter() {
        let k = unit_disc();
        assert_eq!(halfspace_concentration(&k, 2.0, 20_000, 0, 32).unwrap(), 0.0);
        let sp = ModelSpace::euclidean(2).unwrap();
        let box_k = ConvexDomain::axis_box(sp, &[0.0, 0.0], &[1.0, 10.0]).unwrap();
        assert_eq!(
            halfspace_concentration(&box_k, 10.5, 20_000, 0, 32).unwrap(),
            0.0
        );
    }

    #[test]
    fn stats_ratio_regression_guard() {
        // S_x / E_x <= 1 on the bundled suite, witnessed from each domain's
        // interior witness
        let sp = ModelSpace::euclidean(2).unwrap();
        let domains = vec![
            unit_square(),
            unit_disc(),
            ConvexDomain::axis_box(sp, &[0.0, 0.0], &[1.0, 10.0]).unwrap(),
            ConvexDomain::axis_box(sp, &[0.0, 0.0], &[1.0, 1e-3]).unwrap(),
        ];
        for k in &domains {
            let st = distance_stats(k, k.interior_witness(), 20_000, 7).unwrap();
            assert!(st.s_x / st.e_x <= 1.0, "ratio = {}", st.s_x / st.e_x);
        }
    }
}
