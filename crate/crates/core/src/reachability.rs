//! Analytic reachability frontiers and membership predicates for a
//! turn-constrained, range-limited vehicle.
//!
//! Two path families are covered. A C-path is a single constant-radius turn
//! held for the whole flight; its frontier is the cochleoid
//! `r(lambda) = v t sin(lambda) / lambda`. A CS-path is a minimum-radius turn
//! followed by a straight run; its frontier is the turn-straight locus
//!
//! ```text
//! x(theta) = abar sin(theta) + (v t - abar theta) cos(theta)
//! y(theta) = abar (1 - cos(theta)) + (v t - abar theta) sin(theta)
//! ```
//!
//! swept over `0 <= theta <= v t / abar` and mirrored about the x axis. The
//! vehicle starts at the origin heading along +x.
//!
//! Converting the CS boundary to a polar radius requires inverting the
//! bearing-of-endpoint map. Along the locus `F'(theta)` is perpendicular to
//! the heading with magnitude equal to the remaining straight leg, which
//! gives `sign(d bearing / d theta) = sign((vt - abar theta) + abar
//! sin(theta))`. The bearing is therefore strictly increasing whenever
//! `vt <= pi abar`, and the law-of-cosines inversion has a single root. For
//! larger ranges the locus folds back in bearing (and eventually crosses
//! itself once `vt > (1 + 3 pi / 2) abar`), so the boundary radius is taken
//! as the radially maximal envelope over all branches, found by dense
//! sampling in `theta` plus local refinement.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::kinematics::{polar_of, wrap, PursuerParams};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `vt / abar` above which the CS locus crosses itself (`1 + 3 pi / 2`).
pub fn cs_self_intersection_ratio() -> f64 {
    1.0 + 1.5 * PI
}

/// `vt / abar` at which the interiors of the minimum-turn circles first
/// become reachable by CS paths (`-1 + sqrt(3) + 5 pi / 3`).
pub fn cs_circle_first_reachable_ratio() -> f64 {
    -1.0 + 3f64.sqrt() + 5.0 * PI / 3.0
}

/// `vt / abar` at which the circle interiors are entirely reachable
/// (`1 + sqrt(3) + 5 pi / 3`).
pub fn cs_circle_fully_reachable_ratio() -> f64 {
    1.0 + 3f64.sqrt() + 5.0 * PI / 3.0
}

/// A circle with positive radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

/// Which reachability boundary a [`Frontier`] samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontierKind {
    C,
    Cs,
    HolonomicDisk,
}

/// One sampled boundary vertex together with its governing parameter value
/// (turn angle `theta` for parametric sweeps, bearing `lambda` for polar
/// sweeps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierVertex {
    pub param: f64,
    pub x: f64,
    pub y: f64,
}

impl FrontierVertex {
    pub fn point(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Ordered polyline sampling of a reachability boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    pub kind: FrontierKind,
    pub vertices: Vec<FrontierVertex>,
    pub params: PursuerParams,
}

/// Result of inverting a bearing to the CS turn angle via the law of
/// cosines. `of` is the chord from the start to the endpoint (the boundary
/// radius), `gf` the straight leg and `og` the chord across the arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsInversion {
    pub theta: f64,
    pub of: f64,
    pub gf: f64,
    pub og: f64,
    pub iterations: usize,
    pub residual: f64,
}

const SINC_SERIES_THRESHOLD: f64 = 1e-4;
const INVERSION_RESIDUAL_TOL: f64 = 1e-10;
const INVERSION_MAX_ITER: usize = 200;
const ENVELOPE_SAMPLES: usize = 4096;

/// `sin(x)/x` with a series fallback near zero to avoid cancellation.
fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_THRESHOLD {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `(1 - cos(x))/x` with a series fallback near zero.
fn one_minus_cos_over(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_THRESHOLD {
        let x2 = x * x;
        x / 2.0 - x * x2 / 24.0
    } else {
        (1.0 - x.cos()) / x
    }
}

fn check_turn_angle(params: &PursuerParams, theta: f64) -> Result<()> {
    let max = params.max_turn_angle();
    if !theta.is_finite() || theta.abs() > max * (1.0 + 1e-12) {
        return Err(Error::TurnAngleOutOfRange { theta, max });
    }
    Ok(())
}

/// Endpoint of the full-length constant-turn path with turn angle `theta`
/// (turn radius `v t / theta`, straight dash in the limit `theta -> 0`).
pub fn c_frontier_point(params: &PursuerParams, theta: f64) -> Result<Vec2> {
    check_turn_angle(params, theta)?;
    let range = params.range();
    Ok(Vec2::new(
        range * sinc(theta),
        range * one_minus_cos_over(theta),
    ))
}

/// Polar radius of the C-path boundary at bearing `lambda`. Bearings beyond
/// the admissible domain `|lambda| <= min(vt / (2 abar), pi)` return 0: no
/// single-turn path can end there, so the region is empty along that ray.
/// The capture radius is not included; callers add it where relevant.
pub fn c_frontier_radius(params: &PursuerParams, lambda: f64) -> f64 {
    let dom = c_bearing_domain(params);
    if lambda.abs() > dom {
        return 0.0;
    }
    params.range() * sinc(lambda)
}

/// Admissible bearing half-width for the C boundary.
fn c_bearing_domain(params: &PursuerParams) -> f64 {
    (params.max_turn_angle() / 2.0).min(PI)
}

/// Upper-half CS locus point (`theta >= 0`).
fn cs_point_upper(params: &PursuerParams, theta: f64) -> Vec2 {
    let abar = params.abar();
    let leg = params.range() - abar * theta;
    let (s, c) = theta.sin_cos();
    Vec2::new(abar * s + leg * c, abar * (1.0 - c) + leg * s)
}

/// Endpoint of the full-length turn-straight path with signed turn angle
/// `theta` at the minimum turn radius.
pub fn cs_frontier_point(params: &PursuerParams, theta: f64) -> Result<Vec2> {
    check_turn_angle(params, theta)?;
    let mut p = cs_point_upper(params, theta.abs());
    if theta < 0.0 {
        p.y = -p.y;
    }
    Ok(p)
}

/// The two minimum-turn circles tangent to the initial pose, centered at
/// `(0, +-abar)` (vehicle at the origin heading +x).
pub fn min_turn_circles(params: &PursuerParams) -> (Circle, Circle) {
    let abar = params.abar();
    (
        Circle {
            center: Vec2::new(0.0, abar),
            radius: abar,
        },
        Circle {
            center: Vec2::new(0.0, -abar),
            radius: abar,
        },
    )
}

/// Law-of-cosines residual `G(theta) = theta - lambda - acos(...)` from the
/// triangle with sides `OF` (start to endpoint), `GF` (straight leg) and
/// `OG` (chord across the arc). Roots of `G` give the turn angle whose
/// endpoint lies at bearing `lambda`.
///
/// The acos argument `(OF^2 + GF^2 - OG^2) / (2 OF GF)` saturates at 1 as
/// the triangle degenerates (small bearings, vanishing leg), where acos
/// loses ~7 digits; the identical angle at `F` is evaluated here as
/// `atan2(|FO x FG|, FO . FG)`, which is accurate at both ends.
fn inversion_residual(params: &PursuerParams, lambda: f64, theta: f64) -> f64 {
    let f = cs_point_upper(params, theta);
    let leg = params.range() - params.abar() * theta;
    let fo = -f;
    let fg = (-leg) * Vec2::unit(theta); // G - F
    let angle = fo.cross(fg).abs().atan2(fo.dot(fg));
    theta - lambda - angle
}

/// Invert a bearing to the CS turn angle: solves
/// `theta = lambda + acos((OF^2 + GF^2 - OG^2) / (2 OF GF))` by bracketing
/// the first sign change of the residual on `[|lambda|, |lambda| + pi]`
/// (clipped to the admissible turn range) and bisecting. Negative bearings
/// use the x-axis mirror. The smallest root is returned, which is the
/// outer-boundary branch when the locus folds back in bearing.
pub fn cs_invert_bearing(params: &PursuerParams, lambda: f64) -> Result<CsInversion> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite("cs_invert_bearing"));
    }
    let theta_max = params.max_turn_angle();
    let la = lambda.abs();
    let lambda_max = cs_max_bearing(params);
    if la > lambda_max + 1e-9 {
        return Err(Error::UnreachableBearing {
            lambda,
            max: lambda_max,
        });
    }

    let finish = |theta: f64, iterations: usize, residual: f64| {
        let of = cs_point_upper(params, theta).norm();
        let gf = params.range() - params.abar() * theta;
        let og = 2.0 * params.abar() * (theta / 2.0).sin();
        CsInversion {
            theta: if lambda < 0.0 { -theta } else { theta },
            of,
            gf,
            og,
            iterations,
            residual,
        }
    };

    // Straight dash and circle-end extremes, where the triangle degenerates.
    if la < 1e-14 {
        return Ok(finish(0.0, 0, 0.0));
    }
    if la >= lambda_max - 1e-11 {
        return Ok(finish(theta_max, 0, 0.0));
    }

    let g = |theta: f64| inversion_residual(params, la, theta);

    // Residual at the lower bracket end is -acos(..) <= 0; find the first
    // grid cell where it turns positive, then bisect inside it. The upper
    // end stops just short of the full turn angle, where the straight leg
    // vanishes and the cosine argument becomes 0/0.
    let hi = (la + PI).min(theta_max * (1.0 - 1e-12));
    let lo = la;
    let g_lo = g(lo);
    if g_lo.abs() <= INVERSION_RESIDUAL_TOL {
        return Ok(finish(lo, 0, g_lo));
    }
    const SCAN: usize = 512;
    let mut a = lo;
    let mut ga = g_lo;
    let mut bracket = None;
    for i in 1..=SCAN {
        let b = lo + (hi - lo) * (i as f64) / (SCAN as f64);
        let gb = g(b);
        if ga <= 0.0 && gb >= 0.0 {
            bracket = Some((a, b));
            break;
        }
        a = b;
        ga = gb;
    }
    let (mut a, mut b) = bracket.ok_or(Error::RootFindFailed {
        lambda,
        iterations: SCAN,
        residual: ga,
    })?;

    // The residual flattens as the straight leg vanishes (the bearing map
    // stalls near the full turn angle), so the interval must shrink below
    // the turn-angle tolerance as well as meeting the residual tolerance.
    let mut iterations = SCAN.min(64);
    let mut mid = 0.5 * (a + b);
    let mut gm = g(mid);
    while iterations < INVERSION_MAX_ITER {
        mid = 0.5 * (a + b);
        gm = g(mid);
        iterations += 1;
        if (b - a) <= 1e-12 * theta_max.max(1.0) && gm.abs() <= INVERSION_RESIDUAL_TOL {
            break;
        }
        if (b - a) <= f64::EPSILON * theta_max {
            break;
        }
        if gm <= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    if gm.abs() > INVERSION_RESIDUAL_TOL {
        return Err(Error::RootFindFailed {
            lambda,
            iterations,
            residual: gm,
        });
    }
    Ok(finish(mid, iterations, gm))
}

/// Maximum attainable CS bearing. While the bearing sweep is monotone
/// (`vt <= pi abar`) this is the bearing of the circle-end point,
/// `theta_max / 2`. Beyond that the sweep peaks where
/// `theta - sin(theta) = vt / abar`, and once `vt >= (1 + 3 pi / 2) abar`
/// the boundary covers the full circle of bearings.
fn cs_max_bearing(params: &PursuerParams) -> f64 {
    let ratio = params.max_turn_angle();
    if ratio <= PI {
        return ratio / 2.0;
    }
    if ratio >= cs_self_intersection_ratio() {
        return PI;
    }
    // Solve theta - sin(theta) = ratio on [pi, 2 pi] (monotone), then take
    // the bearing there.
    let mut a = PI;
    let mut b = 2.0 * PI;
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if m - m.sin() < ratio {
            a = m;
        } else {
            b = m;
        }
    }
    let p = cs_point_upper(params, 0.5 * (a + b));
    wrap(p.y.atan2(p.x))
}

/// Cached polar view of the CS boundary. In the monotone-bearing regime the
/// radius comes from the law-of-cosines inversion; otherwise a dense
/// parameter table over the first winding plus local refinement yields the
/// radially maximal envelope.
#[derive(Debug, Clone)]
pub struct CsBoundary {
    params: PursuerParams,
    lambda_max: f64,
    env: Option<EnvelopeTable>,
}

#[derive(Debug, Clone)]
struct EnvelopeTable {
    thetas: Vec<f64>,
    bearings: Vec<f64>,
    radii: Vec<f64>,
}

impl CsBoundary {
    pub fn new(params: PursuerParams) -> Self {
        let ratio = params.max_turn_angle();
        let env = if ratio > PI {
            // Sampling past two windings is never needed: a branch at
            // theta + 2 pi reaches the same bearing with at least
            // (2 pi - 4) abar less radius than the branch one winding below.
            let theta_hi = ratio.min(4.0 * PI);
            let n = ENVELOPE_SAMPLES;
            let mut thetas = Vec::with_capacity(n);
            let mut bearings = Vec::with_capacity(n);
            let mut radii = Vec::with_capacity(n);
            for i in 0..n {
                let theta = theta_hi * (i as f64) / ((n - 1) as f64);
                let p = cs_point_upper(&params, theta);
                let (r, b) = polar_of(p, Vec2::ZERO);
                thetas.push(theta);
                bearings.push(b);
                radii.push(r);
            }
            Some(EnvelopeTable {
                thetas,
                bearings,
                radii,
            })
        } else {
            None
        };
        CsBoundary {
            params,
            lambda_max: cs_max_bearing(&params),
            env,
        }
    }

    pub fn params(&self) -> &PursuerParams {
        &self.params
    }

    /// Largest attainable |bearing| (pi when the boundary is a closed loop
    /// around the origin).
    pub fn max_bearing(&self) -> f64 {
        self.lambda_max
    }

    /// Boundary radius at `lambda`, without the capture radius. Unattainable
    /// bearings give 0. Errors only if the root-finder fails to converge.
    pub fn radius_checked(&self, lambda: f64) -> Result<f64> {
        match &self.env {
            None => {
                let la = lambda.abs();
                if la > self.lambda_max {
                    return Ok(0.0);
                }
                Ok(cs_invert_bearing(&self.params, la)?.of)
            }
            Some(table) => Ok(self.envelope_radius(table, wrap(lambda))),
        }
    }

    /// Total version of [`Self::radius_checked`] (root-finder failures map
    /// to 0, which cannot occur on the bracketed residual in practice).
    pub fn radius(&self, lambda: f64) -> f64 {
        self.radius_checked(lambda).unwrap_or(0.0)
    }

    /// Max radius over every locus branch whose bearing equals the target.
    fn envelope_radius(&self, table: &EnvelopeTable, lambda: f64) -> f64 {
        let la = lambda.abs();
        let mut best: f64 = 0.0;
        // The lower half-locus is the mirror image, so branches at bearing
        // -la on the upper half cover bearing +la on the lower half.
        let mut targets = [la, -la];
        let n_targets = if la == 0.0 || la == PI { 1 } else { 2 };
        for target in targets.iter_mut().take(n_targets) {
            let t = *target;
            let mut prev = wrap(table.bearings[0] - t);
            if prev.abs() < 1e-14 {
                best = best.max(table.radii[0]);
            }
            for i in 1..table.thetas.len() {
                let d = wrap(table.bearings[i] - t);
                if d.abs() < 1e-14 {
                    best = best.max(table.radii[i]);
                } else if prev * d < 0.0 && prev.abs() + d.abs() < PI {
                    let r = self.refine_crossing(table.thetas[i - 1], table.thetas[i], t);
                    best = best.max(r);
                }
                prev = d;
            }
        }
        best
    }

    /// Bisect the crossing of the bearing sweep through `target` inside one
    /// table cell and return the radius there.
    fn refine_crossing(&self, mut a: f64, mut b: f64, target: f64) -> f64 {
        let h = |theta: f64| {
            let p = cs_point_upper(&self.params, theta);
            wrap(p.y.atan2(p.x) - target)
        };
        let mut ha = h(a);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            let hm = h(m);
            if (hm > 0.0) == (ha > 0.0) {
                a = m;
                ha = hm;
            } else {
                b = m;
            }
        }
        cs_point_upper(&self.params, 0.5 * (a + b)).norm()
    }

    /// Membership test with an absolute Euclidean tolerance. `tol` loosens
    /// both the radial comparison and the angular domain edge so that points
    /// within `tol` of the region never fail on rounding.
    pub fn contains_with_tol(&self, p: Vec2, tol: f64) -> bool {
        let (r_p, lam) = polar_of(p, Vec2::ZERO);
        let cap = self.params.capture_radius();

        let mut r_b = self.radius(lam);
        if tol > 0.0 && r_p > 0.0 {
            // Near a boundary corner (domain edge or bearing fold) the
            // radius can drop discontinuously; probing a slightly rotated
            // bearing recovers the neighboring branch.
            let slack = (tol / r_p).min(0.1);
            r_b = r_b
                .max(self.radius(wrap(lam - slack)))
                .max(self.radius(wrap(lam + slack)));
        }
        if r_p > r_b + cap + tol {
            return false;
        }

        // Minimum-turn circle interiors: unreachable until the range is long
        // enough for a CS path to hook back inside.
        let ratio = self.params.max_turn_angle();
        if ratio < cs_circle_first_reachable_ratio() {
            let (upper, lower) = min_turn_circles(&self.params);
            for c in [upper, lower] {
                if p.distance(c.center) < c.radius - tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Polar radius of the CS boundary at bearing `lambda` (capture radius not
/// included). Where several locus branches share a bearing the radially
/// maximal one is returned.
pub fn cs_frontier_radius(params: &PursuerParams, lambda: f64) -> f64 {
    CsBoundary::new(*params).radius(lambda)
}

/// True iff `p` is inside or on the C-path reachability region: radially
/// within the cochleoid (inflated by the capture radius) and not strictly
/// inside either minimum-turn circle.
pub fn contains_c(params: &PursuerParams, p: Vec2) -> bool {
    contains_c_with_tol(params, p, 0.0)
}

/// [`contains_c`] with an absolute Euclidean tolerance (used by the
/// sampling oracle so boundary points never fail on rounding).
pub fn contains_c_with_tol(params: &PursuerParams, p: Vec2, tol: f64) -> bool {
    let (r_p, lam) = polar_of(p, Vec2::ZERO);
    let dom = c_bearing_domain(params);
    let slack = if r_p > 0.0 { (tol / r_p).min(0.1) } else { 0.0 };
    if lam.abs() > dom + slack {
        return r_p <= tol;
    }
    let r_b = params.range() * sinc(lam.abs().min(dom)) + params.capture_radius();
    if r_p > r_b + tol {
        return false;
    }
    let (upper, lower) = min_turn_circles(params);
    for c in [upper, lower] {
        if p.distance(c.center) < c.radius - tol {
            return false;
        }
    }
    true
}

/// True iff `p` is inside or on the CS-path reachability region.
pub fn contains_cs(params: &PursuerParams, p: Vec2) -> bool {
    CsBoundary::new(*params).contains_with_tol(p, 0.0)
}

/// Sample a reachability boundary as an ordered polyline.
///
/// C boundaries sweep the turn angle (trimmed to one winding for long
/// ranges), CS boundaries sweep the turn angle while the polar map is
/// one-to-one and otherwise sweep the bearing of the radial envelope, and
/// the holonomic disk sweeps the bearing directly. A positive capture
/// radius inflates every vertex radially.
pub fn sample_frontier(params: &PursuerParams, kind: FrontierKind, n: usize) -> Result<Frontier> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "frontier sampling needs n >= 8, got {n}"
        )));
    }
    let range = params.range();
    let mut vertices = Vec::with_capacity(n);
    match kind {
        FrontierKind::C => {
            let theta_c = params.max_turn_angle().min(2.0 * PI);
            for i in 0..n {
                let theta = -theta_c + 2.0 * theta_c * (i as f64) / ((n - 1) as f64);
                let p = c_frontier_point(params, theta)?;
                vertices.push(FrontierVertex {
                    param: theta,
                    x: p.x,
                    y: p.y,
                });
            }
        }
        FrontierKind::Cs => {
            let boundary = CsBoundary::new(*params);
            if boundary.env.is_none() {
                let theta_c = params.max_turn_angle();
                for i in 0..n {
                    let theta = -theta_c + 2.0 * theta_c * (i as f64) / ((n - 1) as f64);
                    let p = cs_frontier_point(params, theta)?;
                    vertices.push(FrontierVertex {
                        param: theta,
                        x: p.x,
                        y: p.y,
                    });
                }
            } else if boundary.max_bearing() >= PI {
                // Closed loop: midpoint bearing grid over (-pi, pi].
                for i in 0..n {
                    let lam = -PI + 2.0 * PI * (i as f64 + 0.5) / (n as f64);
                    let r = boundary.radius(lam);
                    vertices.push(FrontierVertex {
                        param: lam,
                        x: r * lam.cos(),
                        y: r * lam.sin(),
                    });
                }
            } else {
                let cov = boundary.max_bearing();
                for i in 0..n {
                    let lam = -cov + 2.0 * cov * (i as f64) / ((n - 1) as f64);
                    let r = boundary.radius(lam);
                    vertices.push(FrontierVertex {
                        param: lam,
                        x: r * lam.cos(),
                        y: r * lam.sin(),
                    });
                }
            }
        }
        FrontierKind::HolonomicDisk => {
            for i in 0..n {
                let lam = -PI + 2.0 * PI * (i as f64 + 0.5) / (n as f64);
                vertices.push(FrontierVertex {
                    param: lam,
                    x: range * lam.cos(),
                    y: range * lam.sin(),
                });
            }
        }
    }
    let cap = params.capture_radius();
    if cap > 0.0 {
        for v in &mut vertices {
            let r = v.x.hypot(v.y);
            if r > 0.0 {
                let scale = (r + cap) / r;
                v.x *= scale;
                v.y *= scale;
            }
        }
    }
    Ok(Frontier {
        kind,
        vertices,
        params: *params,
    })
}
