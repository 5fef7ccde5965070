//! Brute-force Monte Carlo validation of the analytic reachability regions.
//!
//! Paths are sampled over the full admissible family (all turn radii
//! `a >= abar`, all lengths up to `v t`, both turn directions) and their
//! endpoints are computed by raw turn-center arithmetic — rotating the start
//! point about the turn center and extending the straight leg along the exit
//! heading — never through the closed-form frontier expressions. Agreement
//! between sampled endpoints and the analytic membership predicates is
//! therefore evidence, not tautology.

use crate::geom::Vec2;
use crate::kinematics::{polar_of, wrap, PursuerParams};
use crate::reachability::{
    c_frontier_radius, cs_circle_first_reachable_ratio, min_turn_circles, CsBoundary,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Which path family a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    C,
    Cs,
}

/// One sampled admissible path and its endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub kind: PathKind,
    /// Turn radius (`f64::INFINITY` for the straight-dash case).
    pub turn_radius: f64,
    /// Signed turn angle (positive = counterclockwise).
    pub turn_angle: f64,
    /// Total path length, in `(0, v t]`.
    pub path_length: f64,
    pub endpoint: Vec2,
}

/// Endpoint of a pure arc: start at the origin heading +x, turn through the
/// signed angle `phi` at radius `a`. Computed by rotating the start point
/// about the turn center.
pub fn arc_endpoint(a: f64, phi: f64) -> Vec2 {
    if phi == 0.0 {
        return Vec2::ZERO;
    }
    let s = phi.signum();
    let center = Vec2::new(0.0, s * a);
    center + (Vec2::ZERO - center).rotate(phi)
}

/// Endpoint of an arc of signed angle `phi` at radius `a` followed by a
/// straight leg that brings the total length to `path_length`.
pub fn cs_path_endpoint(a: f64, phi: f64, path_length: f64) -> Vec2 {
    let leg = path_length - a * phi.abs();
    arc_endpoint(a, phi) + leg * Vec2::unit(phi)
}

const STRAIGHT_CASE_PROB: f64 = 0.05;
const MIN_RADIUS_CASE_PROB: f64 = 0.05;
const FULL_LENGTH_CASE_PROB: f64 = 0.5;
const RADIUS_SPAN: f64 = 1000.0;

fn log_uniform_radius<R: Rng>(rng: &mut R, abar: f64) -> f64 {
    abar * RADIUS_SPAN.powf(rng.gen::<f64>())
}

/// Sample `n` admissible constant-turn paths. Turn radii are log-uniform on
/// `[abar, 1000 abar]` with a 5% straight-dash case, lengths uniform on
/// `(0, v t]`, both turn directions. Deterministic for a fixed seed.
pub fn sample_c_paths(params: &PursuerParams, n: usize, seed: u64) -> Vec<PathSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vt = params.range();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let length = vt * (1.0 - rng.gen::<f64>());
        if rng.gen::<f64>() < STRAIGHT_CASE_PROB {
            out.push(PathSample {
                kind: PathKind::C,
                turn_radius: f64::INFINITY,
                turn_angle: 0.0,
                path_length: length,
                endpoint: Vec2::new(length, 0.0),
            });
            continue;
        }
        let a = log_uniform_radius(&mut rng, params.abar());
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let phi = sign * length / a;
        out.push(PathSample {
            kind: PathKind::C,
            turn_radius: a,
            turn_angle: phi,
            path_length: length,
            endpoint: arc_endpoint(a, phi),
        });
    }
    out
}

/// Sample `n` admissible turn-straight paths: radius log-uniform on
/// `[abar, 1000 abar]` with a 5% minimum-radius case (the extremal class
/// that attains the boundary, mirroring the straight-dash case of the
/// constant-turn sampler), length up to `v t` with a 50% full-length case,
/// turn angle uniform subject to `a |phi| <= length`. Deterministic for a
/// fixed seed.
pub fn sample_cs_paths(params: &PursuerParams, n: usize, seed: u64) -> Vec<PathSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vt = params.range();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let a = if rng.gen::<f64>() < MIN_RADIUS_CASE_PROB {
            params.abar()
        } else {
            log_uniform_radius(&mut rng, params.abar())
        };
        let length = if rng.gen::<f64>() < FULL_LENGTH_CASE_PROB {
            vt
        } else {
            vt * (1.0 - rng.gen::<f64>())
        };
        let phi_max = length / a;
        let phi = phi_max * (2.0 * rng.gen::<f64>() - 1.0);
        out.push(PathSample {
            kind: PathKind::Cs,
            turn_radius: a,
            turn_angle: phi,
            path_length: length,
            endpoint: cs_path_endpoint(a, phi, length),
        });
    }
    out
}

/// Outcome of validating sampled endpoints against the analytic region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub kind: PathKind,
    pub samples: usize,
    pub seed: u64,
    /// Endpoints outside the analytic region by more than `1e-9 * v t`.
    pub violations: usize,
    /// Largest distance any endpoint lies outside the region.
    pub max_exterior_distance: f64,
    /// Fraction of the 64 bearing bins in which some endpoint reaches
    /// within 2% of the analytic boundary radius at its own bearing.
    pub coverage_fraction: f64,
    /// Worst per-bin relative gap between the boundary radius and the best
    /// sampled endpoint, over bins that received samples.
    pub max_tightness_gap: f64,
    pub params: PursuerParams,
}

const TIGHTNESS_BINS: usize = 64;
const TIGHTNESS_TARGET: f64 = 0.98;

/// Sample `n` paths of the given kind and check every endpoint against the
/// corresponding membership predicate, plus a per-bearing-bin tightness
/// statistic measuring how closely the samples attain the boundary.
pub fn validate_region(
    params: &PursuerParams,
    kind: PathKind,
    n: usize,
    seed: u64,
) -> ValidationReport {
    let vt = params.range();
    let tol = 1e-9 * vt;
    let cap = params.capture_radius();
    let samples = match kind {
        PathKind::C => sample_c_paths(params, n, seed),
        PathKind::Cs => sample_cs_paths(params, n, seed),
    };
    let cs_boundary = match kind {
        PathKind::Cs => Some(CsBoundary::new(*params)),
        PathKind::C => None,
    };
    let holes_excluded = match kind {
        PathKind::C => true,
        PathKind::Cs => params.max_turn_angle() < cs_circle_first_reachable_ratio(),
    };
    let (upper, lower) = min_turn_circles(params);

    let mut violations = 0usize;
    let mut max_exterior: f64 = 0.0;
    let mut best_ratio = vec![f64::NEG_INFINITY; TIGHTNESS_BINS];

    for s in &samples {
        let (r_p, lam) = polar_of(s.endpoint, Vec2::ZERO);
        let r_b = match &cs_boundary {
            Some(b) => b.radius(lam),
            None => c_frontier_radius(params, lam),
        };
        let mut radial_excess = r_p - (r_b + cap);
        if radial_excess > tol && r_p > 0.0 {
            // Near a domain corner the radius drops discontinuously with
            // bearing; probe a slightly rotated bearing before declaring
            // the endpoint exterior.
            let slack = (tol / r_p).min(0.1);
            let r_probe = match &cs_boundary {
                Some(b) => b.radius(wrap(lam - slack)).max(b.radius(wrap(lam + slack))),
                None => c_frontier_radius(params, wrap(lam - slack))
                    .max(c_frontier_radius(params, wrap(lam + slack))),
            };
            radial_excess = r_p - (r_b.max(r_probe) + cap);
        }
        let mut exterior = radial_excess.max(0.0);
        if holes_excluded {
            for c in [upper, lower] {
                let penetration = c.radius - s.endpoint.distance(c.center);
                if penetration > exterior {
                    exterior = penetration;
                }
            }
        }
        if exterior > tol {
            violations += 1;
        }
        if exterior > max_exterior {
            max_exterior = exterior;
        }

        if r_b > 1e-9 * vt {
            let bin = (((lam + std::f64::consts::PI) / (2.0 * std::f64::consts::PI)
                * TIGHTNESS_BINS as f64) as usize)
                .min(TIGHTNESS_BINS - 1);
            let ratio = r_p / r_b;
            if ratio > best_ratio[bin] {
                best_ratio[bin] = ratio;
            }
        }
    }

    let populated: Vec<f64> = best_ratio
        .iter()
        .copied()
        .filter(|r| r.is_finite())
        .collect();
    let covered = populated.iter().filter(|&&r| r >= TIGHTNESS_TARGET).count();
    let max_tightness_gap = populated
        .iter()
        .fold(0.0f64, |acc, &r| acc.max(1.0 - r.min(1.0)));

    ValidationReport {
        kind,
        samples: n,
        seed,
        violations,
        max_exterior_distance: max_exterior,
        coverage_fraction: covered as f64 / TIGHTNESS_BINS as f64,
        max_tightness_gap,
        params: *params,
    }
}
