//! Minimum-time navigation around an engagement zone.
//!
//! The vehicle moves with single-integrator kinematics at constant speed
//! `mu * v`, controlling only its heading, and must travel from a start to a
//! goal without entering the pursuer's engagement zone:
//!
//! ```text
//! min t_f   s.t.  xdot = mu v cos(psi),  ydot = mu v sin(psi),
//!                 x(0) = start, x(t_f) = goal,  margin(x, psi) >= 0
//! ```
//!
//! Transcription is direct on a uniform ("even") time grid: the decision
//! vector is the final time plus the heading at every node, states follow
//! by trapezoidal quadrature of the dynamics, the goal condition becomes an
//! equality constraint and the margin is enforced at every node and every
//! interval midpoint. The resulting nonlinear program is solved with an
//! augmented-Lagrangian outer loop around an L-BFGS inner minimizer using
//! central finite differences (step `1e-7`, scaled). Headings are kept
//! unwrapped in the decision vector so the optimizer never sees a branch
//! cut.
//!
//! A geometric baseline is provided by [`nominal_path`]: the shortest route
//! that circumnavigates the disk of radius `R` about the pursuer.

use crate::engagement::{EzModel, MarginEvaluator};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::kinematics::{wrap, Pose, PursuerParams, TargetState};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Avoidance model for a planning run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanModel {
    /// Geometric circumnavigation of the radius-`R` disk (no optimization).
    Nominal,
    Bez,
    Cbez,
    Csbez,
}

impl PlanModel {
    pub fn ez_model(self) -> Option<EzModel> {
        match self {
            PlanModel::Nominal => None,
            PlanModel::Bez => Some(EzModel::Bez),
            PlanModel::Cbez => Some(EzModel::Cbez),
            PlanModel::Csbez => Some(EzModel::Csbez),
        }
    }
}

/// A navigation problem: waypoints, the pursuer's pose and envelope, and the
/// avoidance model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanProblem {
    pub start: Vec2,
    pub goal: Vec2,
    pub pursuer: Pose,
    /// Speed ratio `v_T / v_P`; the vehicle's speed is `mu * v`.
    pub mu: f64,
    pub params: PursuerParams,
    pub model: PlanModel,
}

impl PlanProblem {
    fn speed(&self) -> f64 {
        self.mu * self.params.v()
    }
}

/// Solver options. `n_nodes` is the transcription grid size; `restarts`
/// counts the built-in circumnavigation initial guesses (one per side).
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub n_nodes: usize,
    pub kkt_tol: f64,
    pub eq_tol: f64,
    pub margin_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub restarts: usize,
    /// Extra warm starts (e.g. the solution of a related model).
    pub extra_inits: Vec<InitialGuess>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            n_nodes: 100,
            kkt_tol: 1e-6,
            eq_tol: 1e-9,
            margin_tol: 1e-8,
            max_outer: 22,
            max_inner: 220,
            restarts: 2,
            extra_inits: Vec::new(),
        }
    }
}

/// A starting point for the solver: final time plus unwrapped headings at
/// every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialGuess {
    pub t_f: f64,
    pub headings: Vec<f64>,
}

/// Discrete trajectory on a uniform time grid. Headings are continuous
/// (unwrapped) so interpolation across nodes is safe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vec2>,
    pub headings: Vec<f64>,
    pub t_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub kkt_residual: f64,
    pub restarts: usize,
}

/// Planner output: the trajectory, whether it satisfies every constraint,
/// and the densely checked minimum margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub trajectory: Trajectory,
    pub feasible: bool,
    pub min_margin: f64,
    pub stats: SolverStats,
}

/// One row of a model comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: PlanModel,
    pub t_f: Option<f64>,
    pub percent_improvement: Option<f64>,
    pub feasible: bool,
    pub error: Option<String>,
}

/// Travel times for the nominal, BEZ and CBEZ strategies on one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

/// The default demonstration scenario shipped with the tool: pursuer at the
/// origin facing -x with `v = 1`, `abar = 1/4`, `t = pi/2` (so `R = pi/2`),
/// a target at 90% of the pursuer's speed, and waypoints on the x axis far
/// enough out that every strategy starts and ends outside the zone.
pub fn default_scenario() -> PlanProblem {
    PlanProblem {
        start: Vec2::new(-4.0, 0.0),
        goal: Vec2::new(4.0, 0.0),
        pursuer: Pose::new(0.0, 0.0, PI).expect("constant pose"),
        mu: 0.9,
        params: PursuerParams::new(1.0, 0.25, PI / 2.0).expect("constant params"),
        model: PlanModel::Cbez,
    }
}

// ---------------------------------------------------------------------------
// Nominal circumnavigation baseline
// ---------------------------------------------------------------------------

struct TangentRoute {
    length: f64,
    /// Segments as (point, heading, length) stations for sampling.
    t1: Vec2,
    t2: Vec2,
    phi1: f64,
    arc_delta: f64,
    dir: f64,
}

fn route_around(center: Vec2, radius: f64, start: Vec2, goal: Vec2, side: f64) -> TangentRoute {
    let ds = start.distance(center);
    let de = goal.distance(center);
    let a_s = (start - center).y.atan2((start - center).x);
    let a_e = (goal - center).y.atan2((goal - center).x);
    let beta_s = (radius / ds).clamp(-1.0, 1.0).acos();
    let beta_e = (radius / de).clamp(-1.0, 1.0).acos();
    let phi1 = a_s + side * beta_s;
    let phi2 = a_e - side * beta_e;
    let t1 = center + radius * Vec2::unit(phi1);
    let t2 = center + radius * Vec2::unit(phi2);
    let arc_delta = (side * (phi2 - phi1)).rem_euclid(2.0 * PI);
    let length = (ds * ds - radius * radius).max(0.0).sqrt()
        + (de * de - radius * radius).max(0.0).sqrt()
        + radius * arc_delta;
    TangentRoute {
        length,
        t1,
        t2,
        phi1,
        arc_delta,
        dir: side,
    }
}

fn segment_clears_disk(center: Vec2, radius: f64, a: Vec2, b: Vec2) -> bool {
    let d = b - a;
    let len2 = d.norm_squared();
    let t = if len2 > 0.0 {
        ((center - a).dot(d) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + t * d).distance(center) >= radius
}

/// Sample a tangent-arc-tangent route at `n` equal arc-length stations,
/// returning positions and unwrapped headings.
fn sample_route(
    route: &TangentRoute,
    center: Vec2,
    radius: f64,
    start: Vec2,
    goal: Vec2,
    n: usize,
) -> (Vec<Vec2>, Vec<f64>) {
    let l1 = start.distance(route.t1);
    let l2 = radius * route.arc_delta;
    let l3 = route.t2.distance(goal);
    let total = route.length;
    let h1 = if l1 > 0.0 {
        (route.t1 - start).y.atan2((route.t1 - start).x)
    } else {
        route.phi1 + route.dir * PI / 2.0
    };
    let h3 = if l3 > 0.0 {
        (goal - route.t2).y.atan2((goal - route.t2).x)
    } else {
        route.phi1 + route.dir * (route.arc_delta + PI / 2.0)
    };
    let mut positions = Vec::with_capacity(n);
    let mut headings = Vec::with_capacity(n);
    for i in 0..n {
        let s = total * (i as f64) / ((n - 1) as f64);
        let (p, h) = if s <= l1 && l1 > 0.0 {
            (start + (s / l1) * (route.t1 - start), h1)
        } else if s <= l1 + l2 && l2 > 0.0 {
            let phi = route.phi1 + route.dir * (s - l1) / radius;
            (
                center + radius * Vec2::unit(phi),
                phi + route.dir * PI / 2.0,
            )
        } else if l3 > 0.0 {
            let frac = ((s - l1 - l2) / l3).clamp(0.0, 1.0);
            (route.t2 + frac * (goal - route.t2), h3)
        } else {
            (goal, h3)
        };
        positions.push(p);
        headings.push(h);
    }
    // Unwrap so consecutive headings never jump by 2 pi.
    for i in 1..n {
        headings[i] = headings[i - 1] + wrap(headings[i] - headings[i - 1]);
    }
    (positions, headings)
}

const NOMINAL_NODES: usize = 100;

/// Shortest route from start to goal that stays outside the open disk of
/// radius `R` about the pursuer: straight if the segment clears the disk,
/// otherwise tangent-arc-tangent around the shorter side. The reported
/// margin is measured against that disk.
pub fn nominal_path(problem: &PlanProblem) -> Result<PlanResult> {
    let center = problem.pursuer.position();
    let radius = problem.params.range();
    let speed = problem.speed();
    if speed <= 0.0 {
        return Err(Error::InvalidParameter(
            "nominal path requires mu > 0".into(),
        ));
    }
    for (name, p) in [("start", problem.start), ("goal", problem.goal)] {
        if p.distance(center) < radius * (1.0 - 1e-12) {
            return Err(Error::InfeasibleBaseline(format!(
                "{name} lies strictly inside the avoidance disk"
            )));
        }
    }

    let n = NOMINAL_NODES;
    let (positions, headings, length) =
        if segment_clears_disk(center, radius, problem.start, problem.goal) {
            let length = problem.start.distance(problem.goal);
            let h = if length > 0.0 {
                let d = problem.goal - problem.start;
                d.y.atan2(d.x)
            } else {
                0.0
            };
            let positions = (0..n)
                .map(|i| {
                    problem.start
                        + (i as f64 / (n - 1) as f64) * (problem.goal - problem.start)
                })
                .collect::<Vec<_>>();
            (positions, vec![h; n], length)
        } else {
            let upper = route_around(center, radius, problem.start, problem.goal, -1.0);
            let lower = route_around(center, radius, problem.start, problem.goal, 1.0);
            let route = if upper.length <= lower.length {
                upper
            } else {
                lower
            };
            let (positions, headings) =
                sample_route(&route, center, radius, problem.start, problem.goal, n);
            (positions, headings, route.length)
        };

    let t_f = length / speed;
    let times = (0..n)
        .map(|i| t_f * (i as f64) / ((n - 1) as f64))
        .collect();
    let trajectory = Trajectory {
        times,
        positions,
        headings,
        t_f,
    };
    // The baseline's own constraint is the disk itself.
    let min_margin = trajectory
        .positions
        .iter()
        .map(|p| p.distance(center) - radius)
        .fold(f64::INFINITY, f64::min);
    Ok(PlanResult {
        trajectory,
        feasible: min_margin >= -1e-9 * radius.max(1.0),
        min_margin,
        stats: SolverStats {
            iterations: 0,
            kkt_residual: 0.0,
            restarts: 0,
        },
    })
}

// ---------------------------------------------------------------------------
// Direct transcription and augmented-Lagrangian solve
// ---------------------------------------------------------------------------

struct Transcription<'a> {
    problem: &'a PlanProblem,
    evaluator: MarginEvaluator,
    n: usize,
}

impl<'a> Transcription<'a> {
    fn new(problem: &'a PlanProblem, ez: EzModel, n: usize) -> Self {
        Transcription {
            problem,
            evaluator: MarginEvaluator::new(ez, problem.params),
            n,
        }
    }

    /// Margin bias compensating the sagitta between constraint stations:
    /// the margin is only enforced every half-interval, so a path grazing a
    /// boundary of curvature up to ~1.5/R can dip `kappa (ds)^2 / 8` below
    /// zero in between. Shrinks as h^2 with grid refinement.
    fn station_bias(&self, t_f: f64) -> f64 {
        let ds = 0.5 * t_f / (self.n as f64 - 1.0) * self.problem.speed();
        let kappa = 1.5 / self.problem.params.range();
        kappa * ds * ds / 8.0
    }

    fn n_constraints(&self) -> usize {
        2 * self.n - 1
    }

    fn rollout(&self, t_f: f64, headings: &[f64], positions: &mut Vec<Vec2>) {
        positions.clear();
        let n = self.n;
        let h = t_f / (n as f64 - 1.0);
        let speed = self.problem.speed();
        let mut p = self.problem.start;
        positions.push(p);
        for k in 0..n - 1 {
            let a = Vec2::unit(headings[k]);
            let b = Vec2::unit(headings[k + 1]);
            p += (0.5 * h * speed) * (a + b);
            positions.push(p);
        }
    }

    fn margin_at(&self, pos: Vec2, heading: f64) -> f64 {
        self.evaluator
            .margin_value(&self.problem.pursuer, pos, heading, self.problem.mu)
            .unwrap_or(-1e6)
    }

    /// Margins at every node and every interval midpoint.
    fn margins(&self, headings: &[f64], positions: &[Vec2], out: &mut Vec<f64>) {
        out.clear();
        for k in 0..self.n {
            out.push(self.margin_at(positions[k], headings[k]));
        }
        for k in 0..self.n - 1 {
            let mid = 0.5 * (positions[k] + positions[k + 1]);
            let heading = 0.5 * (headings[k] + headings[k + 1]);
            out.push(self.margin_at(mid, heading));
        }
    }
}

#[derive(Clone)]
struct Multipliers {
    eq: [f64; 2],
    ineq: Vec<f64>,
    penalty: f64,
}

struct AlEval {
    value: f64,
    goal_error: Vec2,
    /// Minimum of `margin - station_bias` (the enforced constraint).
    min_biased: f64,
}

fn al_evaluate(
    tr: &Transcription,
    z: &[f64],
    m: &Multipliers,
    t_floor: f64,
    positions: &mut Vec<Vec2>,
    margins: &mut Vec<f64>,
) -> AlEval {
    let t_f = z[0];
    let headings = &z[1..];
    tr.rollout(t_f, headings, positions);
    tr.margins(headings, positions, margins);
    let bias = tr.station_bias(t_f);

    let goal_error = *positions.last().unwrap() - tr.problem.goal;
    let mut value = t_f;
    if t_f < t_floor {
        let d = t_floor - t_f;
        value += 1e4 * d * d;
    }
    for (i, c) in [goal_error.x, goal_error.y].into_iter().enumerate() {
        value += m.eq[i] * c + 0.5 * m.penalty * c * c;
    }
    let mut min_biased = f64::INFINITY;
    for (j, &raw) in margins.iter().enumerate() {
        let g = raw - bias;
        min_biased = min_biased.min(g);
        // PHR augmented Lagrangian term for g >= 0.
        let u = m.ineq[j] - m.penalty * g;
        if u > 0.0 {
            value += (u * u - m.ineq[j] * m.ineq[j]) / (2.0 * m.penalty);
        } else {
            value += -m.ineq[j] * m.ineq[j] / (2.0 * m.penalty);
        }
    }
    AlEval {
        value: if value.is_finite() { value } else { f64::INFINITY },
        goal_error,
        min_biased,
    }
}

/// Plain Lagrangian `t_f + lam_eq . c_eq - sum lam_j (margin_j - bias)`,
/// used only to measure the true first-order (KKT) residual once the
/// violations are small; the augmented gradient is dominated by the penalty
/// there and says nothing about stationarity.
fn plain_lagrangian(
    tr: &Transcription,
    z: &[f64],
    m: &Multipliers,
    t_floor: f64,
    positions: &mut Vec<Vec2>,
    margins: &mut Vec<f64>,
) -> f64 {
    let t_f = z[0];
    let headings = &z[1..];
    tr.rollout(t_f, headings, positions);
    tr.margins(headings, positions, margins);
    let bias = tr.station_bias(t_f);
    let goal_error = *positions.last().unwrap() - tr.problem.goal;
    let mut value = t_f;
    if t_f < t_floor {
        let d = t_floor - t_f;
        value += 1e4 * d * d;
    }
    value += m.eq[0] * goal_error.x + m.eq[1] * goal_error.y;
    for (j, &raw) in margins.iter().enumerate() {
        value -= m.ineq[j] * (raw - bias);
    }
    value
}

fn kkt_residual(
    tr: &Transcription,
    z: &mut Vec<f64>,
    m: &Multipliers,
    t_floor: f64,
    positions: &mut Vec<Vec2>,
    margins: &mut Vec<f64>,
) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..z.len() {
        let zi = z[i];
        // Wider step than the optimizer's: this is a measurement, and the
        // Lagrangian value is large enough that 1e-7 sits at the roundoff
        // noise floor.
        let h = 3e-6 * (1.0 + zi.abs());
        z[i] = zi + h;
        let f_plus = plain_lagrangian(tr, z, m, t_floor, positions, margins);
        z[i] = zi - h;
        let f_minus = plain_lagrangian(tr, z, m, t_floor, positions, margins);
        z[i] = zi;
        worst = worst.max(((f_plus - f_minus) / (2.0 * h)).abs());
    }
    worst
}

/// Central finite-difference gradient of the augmented Lagrangian,
/// step `1e-7` scaled by the variable magnitude.
fn al_gradient(
    tr: &Transcription,
    z: &mut Vec<f64>,
    m: &Multipliers,
    t_floor: f64,
    grad: &mut Vec<f64>,
    positions: &mut Vec<Vec2>,
    margins: &mut Vec<f64>,
) {
    grad.clear();
    for i in 0..z.len() {
        let zi = z[i];
        let h = 1e-7 * (1.0 + zi.abs());
        z[i] = zi + h;
        let f_plus = al_evaluate(tr, z, m, t_floor, positions, margins).value;
        z[i] = zi - h;
        let f_minus = al_evaluate(tr, z, m, t_floor, positions, margins).value;
        z[i] = zi;
        grad.push((f_plus - f_minus) / (2.0 * h));
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
}

/// L-BFGS with backtracking Armijo line search. Returns
/// (iterations used, final gradient inf-norm).
fn lbfgs_minimize(
    tr: &Transcription,
    z: &mut Vec<f64>,
    m: &Multipliers,
    t_floor: f64,
    max_iter: usize,
    gtol: f64,
) -> (usize, f64) {
    const MEMORY: usize = 10;
    let dim = z.len();
    let mut positions = Vec::with_capacity(tr.n);
    let mut margins = Vec::with_capacity(tr.n_constraints());
    let mut grad = Vec::with_capacity(dim);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();

    let mut f = al_evaluate(tr, z, m, t_floor, &mut positions, &mut margins).value;
    al_gradient(tr, z, m, t_floor, &mut grad, &mut positions, &mut margins);
    let mut gnorm = inf_norm(&grad);

    let mut iter = 0;
    while iter < max_iter && gnorm > gtol {
        iter += 1;
        // Two-loop recursion.
        let mut d: Vec<f64> = grad.iter().map(|g| -g).collect();
        let k = s_hist.len();
        let mut alphas = vec![0.0; k];
        for i in (0..k).rev() {
            let alpha = rho_hist[i]
                * s_hist[i]
                    .iter()
                    .zip(d.iter())
                    .map(|(s, d)| s * d)
                    .sum::<f64>();
            alphas[i] = alpha;
            for (dj, yj) in d.iter_mut().zip(y_hist[i].iter()) {
                *dj -= alpha * yj;
            }
        }
        if k > 0 {
            let sy: f64 = s_hist[k - 1]
                .iter()
                .zip(y_hist[k - 1].iter())
                .map(|(s, y)| s * y)
                .sum();
            let yy: f64 = y_hist[k - 1].iter().map(|y| y * y).sum();
            if yy > 0.0 {
                let scale = sy / yy;
                for dj in d.iter_mut() {
                    *dj *= scale;
                }
            }
        }
        for i in 0..k {
            let beta = rho_hist[i]
                * y_hist[i]
                    .iter()
                    .zip(d.iter())
                    .map(|(y, d)| y * d)
                    .sum::<f64>();
            for (dj, sj) in d.iter_mut().zip(s_hist[i].iter()) {
                *dj += (alphas[i] - beta) * sj;
            }
        }
        let mut slope: f64 = grad.iter().zip(d.iter()).map(|(g, d)| g * d).sum();
        if !slope.is_finite() || slope >= 0.0 {
            d = grad.iter().map(|g| -g).collect();
            slope = -grad.iter().map(|g| g * g).sum::<f64>();
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        // Backtracking Armijo search.
        let mut step = 1.0;
        let z0 = z.clone();
        let mut success = false;
        for _ in 0..40 {
            for i in 0..dim {
                z[i] = z0[i] + step * d[i];
            }
            let f_new = al_evaluate(tr, z, m, t_floor, &mut positions, &mut margins).value;
            if f_new <= f + 1e-4 * step * slope {
                f = f_new;
                success = true;
                break;
            }
            step *= 0.5;
        }
        if !success {
            z.copy_from_slice(&z0);
            break;
        }

        let grad_old = grad.clone();
        al_gradient(tr, z, m, t_floor, &mut grad, &mut positions, &mut margins);
        gnorm = inf_norm(&grad);

        let s: Vec<f64> = z.iter().zip(z0.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad
            .iter()
            .zip(grad_old.iter())
            .map(|(a, b)| a - b)
            .collect();
        let sy: f64 = s.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        let yy: f64 = y.iter().map(|a| a * a).sum();
        if sy > 1e-10 * ss.sqrt() * yy.sqrt() && sy.is_finite() {
            s_hist.push(s);
            y_hist.push(y);
            rho_hist.push(1.0 / sy);
            if s_hist.len() > MEMORY {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
        }
    }
    (iter, gnorm)
}

struct Candidate {
    z: Vec<f64>,
    goal_error: f64,
    min_node_margin: f64,
    iterations: usize,
    kkt: f64,
}

fn solve_from(
    tr: &Transcription,
    init: &InitialGuess,
    opts: &SolveOptions,
    t_floor: f64,
) -> Candidate {
    let n = tr.n;
    let mut z = Vec::with_capacity(n + 1);
    z.push(init.t_f.max(t_floor));
    z.extend_from_slice(&init.headings);

    let mut multipliers = Multipliers {
        eq: [0.0; 2],
        ineq: vec![0.0; tr.n_constraints()],
        penalty: 10.0,
    };
    let mut positions = Vec::with_capacity(n);
    let mut margins = Vec::with_capacity(tr.n_constraints());

    let mut total_iters = 0;
    let mut kkt = f64::INFINITY;
    let mut prev_violation = f64::INFINITY;
    let mut polish_rounds = 0;
    for outer in 0..opts.max_outer {
        // Floor set by central-difference noise on the augmented value.
        let gtol = (1e-3 * 0.25f64.powi(outer as i32)).max(1e-7);
        let (iters, _gnorm) =
            lbfgs_minimize(tr, &mut z, &multipliers, t_floor, opts.max_inner, gtol);
        total_iters += iters;

        let eval = al_evaluate(tr, &z, &multipliers, t_floor, &mut positions, &mut margins);
        let eq_violation = eval.goal_error.x.abs().max(eval.goal_error.y.abs());
        let ineq_violation = (-eval.min_biased).max(0.0);
        let violation = eq_violation.max(ineq_violation);

        if eq_violation <= opts.eq_tol && ineq_violation <= opts.margin_tol {
            kkt = kkt_residual(tr, &mut z, &multipliers, t_floor, &mut positions, &mut margins);
            polish_rounds += 1;
            // A few extra multiplier rounds sharpen stationarity; past that
            // the FD noise floor has been reached. Relaxing the penalty as
            // the multipliers settle removes the mu * c lag from the
            // Lagrangian gradient.
            if kkt <= opts.kkt_tol || polish_rounds >= 6 {
                break;
            }
            multipliers.penalty = (multipliers.penalty / 4.0).max(1e3);
        }

        // First-order multiplier updates.
        let bias = tr.station_bias(z[0]);
        multipliers.eq[0] += multipliers.penalty * eval.goal_error.x;
        multipliers.eq[1] += multipliers.penalty * eval.goal_error.y;
        for (lam, &raw) in multipliers.ineq.iter_mut().zip(margins.iter()) {
            *lam = (*lam - multipliers.penalty * (raw - bias)).max(0.0).min(1e9);
        }
        // Grow the penalty only while the violation is both meaningfully
        // large and not contracting; past that point the multiplier updates
        // do the work and a stiffer penalty only amplifies FD noise.
        if violation > 10.0 * opts.eq_tol && violation > 0.25 * prev_violation {
            multipliers.penalty = (multipliers.penalty * 8.0).min(1e7);
        }
        prev_violation = violation;
    }
    if !kkt.is_finite() {
        kkt = kkt_residual(tr, &mut z, &multipliers, t_floor, &mut positions, &mut margins);
    }

    let eval = al_evaluate(tr, &z, &multipliers, t_floor, &mut positions, &mut margins);
    Candidate {
        z,
        goal_error: eval.goal_error.norm(),
        min_node_margin: eval.min_biased,
        iterations: total_iters,
        kkt,
    }
}

fn straight_guess(problem: &PlanProblem, n: usize) -> InitialGuess {
    let d = problem.goal - problem.start;
    let heading = if d.norm() > 0.0 { d.y.atan2(d.x) } else { 0.0 };
    InitialGuess {
        t_f: d.norm() / problem.speed(),
        headings: vec![heading; n],
    }
}

fn circumnavigation_guesses(problem: &PlanProblem, n: usize) -> Vec<InitialGuess> {
    let center = problem.pursuer.position();
    let radius = problem.params.range();
    let mut out = Vec::new();
    if problem.start.distance(center) <= radius || problem.goal.distance(center) <= radius {
        return out;
    }
    for side in [-1.0, 1.0] {
        let route = route_around(center, radius, problem.start, problem.goal, side);
        let (_, headings) = sample_route(&route, center, radius, problem.start, problem.goal, n);
        out.push(InitialGuess {
            t_f: route.length / problem.speed(),
            headings,
        });
    }
    out
}

fn build_trajectory(tr: &Transcription, z: &[f64]) -> Trajectory {
    let t_f = z[0];
    let headings = z[1..].to_vec();
    let mut positions = Vec::with_capacity(tr.n);
    tr.rollout(t_f, &headings, &mut positions);
    let times = (0..tr.n)
        .map(|i| t_f * (i as f64) / ((tr.n - 1) as f64))
        .collect();
    Trajectory {
        times,
        positions,
        headings,
        t_f,
    }
}

/// Solve the minimum-time avoidance problem by direct transcription and an
/// augmented-Lagrangian method, multi-starting from the straight line and
/// from the circumnavigation route on each side of the zone. Returns the
/// best feasible candidate; if none converges the best attempt is returned
/// with `feasible == false`.
pub fn solve(problem: &PlanProblem, options: &SolveOptions) -> Result<PlanResult> {
    let ez = problem.model.ez_model().ok_or_else(|| {
        Error::InvalidArgument("solve() needs an EZ model; use nominal_path for the baseline".into())
    })?;
    if options.n_nodes < 4 {
        return Err(Error::InvalidArgument("n_nodes must be >= 4".into()));
    }
    if problem.mu <= 0.0 {
        return Err(Error::InvalidParameter("planning requires mu > 0".into()));
    }
    let n = options.n_nodes;
    let tr = Transcription::new(problem, ez, n);

    // If no heading keeps an endpoint outside the zone, the strict problem
    // has no feasible point at all.
    for (name, point) in [("start", problem.start), ("goal", problem.goal)] {
        let best = (0..64)
            .map(|i| {
                let psi = -PI + 2.0 * PI * (i as f64) / 64.0;
                tr.margin_at(point, psi)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if best < 0.0 {
            let guess = straight_guess(problem, n);
            let mut z = vec![guess.t_f.max(1e-6)];
            z.extend_from_slice(&guess.headings);
            let trajectory = build_trajectory(&tr, &z);
            let mut result = PlanResult {
                trajectory,
                feasible: false,
                min_margin: f64::NEG_INFINITY,
                stats: SolverStats {
                    iterations: 0,
                    kkt_residual: f64::INFINITY,
                    restarts: 0,
                },
            };
            result.min_margin = dense_check(&result, problem);
            let _ = name;
            return Ok(result);
        }
    }

    let straight_time = problem.start.distance(problem.goal) / problem.speed();
    let t_floor = (0.25 * straight_time).max(1e-9);

    let mut inits = vec![straight_guess(problem, n)];
    inits.extend(
        circumnavigation_guesses(problem, n)
            .into_iter()
            .take(options.restarts),
    );
    for extra in &options.extra_inits {
        if extra.headings.len() == n && extra.t_f.is_finite() {
            inits.push(extra.clone());
        }
    }

    let mut best: Option<(Candidate, bool, f64)> = None; // (candidate, feasible, t_f)
    let starts = inits.len();
    for init in &inits {
        let cand = solve_from(&tr, init, options, t_floor);
        let t_f = cand.z[0];
        let converged = cand.goal_error <= 5e-9 && cand.min_node_margin >= -1e-8;
        let better = match &best {
            None => true,
            Some((b, b_feasible, b_t)) => match (converged, b_feasible) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => t_f < *b_t,
                (false, false) => cand.goal_error < b.goal_error,
            },
        };
        if better {
            best = Some((cand, converged, t_f));
        }
    }
    let (cand, converged, _) = best.expect("at least one initial guess");

    let trajectory = build_trajectory(&tr, &cand.z);
    let mut result = PlanResult {
        trajectory,
        feasible: false,
        min_margin: f64::NEG_INFINITY,
        stats: SolverStats {
            iterations: cand.iterations,
            kkt_residual: cand.kkt,
            restarts: starts,
        },
    };
    result.min_margin = dense_check(&result, problem);
    // Certify: converged transcription plus a dense margin check at 10x
    // node resolution.
    let r = problem.params.range();
    result.feasible = converged && result.min_margin >= -1e-4 * r;
    Ok(result)
}

/// Minimum margin over a 10x-refined linear interpolation of the
/// trajectory. For the nominal model the margin is distance to the
/// radius-`R` disk; otherwise it is the engagement-zone margin.
pub fn dense_check(result: &PlanResult, problem: &PlanProblem) -> f64 {
    let traj = &result.trajectory;
    let n = traj.positions.len();
    if n < 2 {
        return match problem.model.ez_model() {
            None => traj
                .positions
                .first()
                .map(|p| p.distance(problem.pursuer.position()) - problem.params.range())
                .unwrap_or(f64::INFINITY),
            Some(ez) => {
                let ev = MarginEvaluator::new(ez, problem.params);
                traj.positions
                    .first()
                    .map(|p| eval_margin(&ev, problem, *p, traj.headings[0]))
                    .unwrap_or(f64::INFINITY)
            }
        };
    }
    let evaluator = problem
        .model
        .ez_model()
        .map(|ez| MarginEvaluator::new(ez, problem.params));
    let mut min_margin = f64::INFINITY;
    for k in 0..n - 1 {
        for j in 0..10 {
            let f = j as f64 / 10.0;
            let pos = traj.positions[k] + f * (traj.positions[k + 1] - traj.positions[k]);
            let heading = traj.headings[k] + f * (traj.headings[k + 1] - traj.headings[k]);
            let m = match &evaluator {
                Some(ev) => eval_margin(ev, problem, pos, heading),
                None => pos.distance(problem.pursuer.position()) - problem.params.range(),
            };
            min_margin = min_margin.min(m);
        }
    }
    let last = *traj.positions.last().unwrap();
    let m = match &evaluator {
        Some(ev) => eval_margin(ev, problem, last, *traj.headings.last().unwrap()),
        None => last.distance(problem.pursuer.position()) - problem.params.range(),
    };
    min_margin.min(m)
}

fn eval_margin(ev: &MarginEvaluator, problem: &PlanProblem, pos: Vec2, heading: f64) -> f64 {
    let target = TargetState {
        x: pos.x,
        y: pos.y,
        heading: wrap(heading),
        mu: problem.mu,
    };
    ev.eval(&problem.pursuer, &target)
        .map(|e| e.margin)
        .unwrap_or(-1e6)
}

/// Run the nominal, BEZ and CBEZ strategies on identical endpoints and
/// report travel times with percent improvement over the nominal. The CBEZ
/// solve is additionally warm-started from the BEZ solution, which makes
/// the dominance `t_CBEZ <= t_BEZ` robust to local minima.
pub fn compare(problem_base: &PlanProblem) -> ComparisonReport {
    compare_with_options(problem_base, &SolveOptions::default())
}

/// [`compare`] with explicit solver options.
pub fn compare_with_options(problem_base: &PlanProblem, options: &SolveOptions) -> ComparisonReport {
    let mut rows = Vec::new();

    let nominal_problem = PlanProblem {
        model: PlanModel::Nominal,
        ..*problem_base
    };
    let nominal = nominal_path(&nominal_problem);
    let t_nominal = nominal.as_ref().ok().map(|r| r.trajectory.t_f);
    rows.push(match &nominal {
        Ok(r) => ComparisonRow {
            model: PlanModel::Nominal,
            t_f: Some(r.trajectory.t_f),
            percent_improvement: Some(0.0),
            feasible: r.feasible,
            error: None,
        },
        Err(e) => ComparisonRow {
            model: PlanModel::Nominal,
            t_f: None,
            percent_improvement: None,
            feasible: false,
            error: Some(e.to_string()),
        },
    });

    let percent = |t: f64| t_nominal.map(|tn| (tn - t) / tn * 100.0);

    let bez_problem = PlanProblem {
        model: PlanModel::Bez,
        ..*problem_base
    };
    let bez = solve(&bez_problem, options);
    rows.push(row_from(&bez, PlanModel::Bez, &percent));

    let mut cbez_options = options.clone();
    if let Ok(r) = &bez {
        if r.feasible {
            cbez_options.extra_inits.push(InitialGuess {
                t_f: r.trajectory.t_f,
                headings: r.trajectory.headings.clone(),
            });
        }
    }
    let cbez_problem = PlanProblem {
        model: PlanModel::Cbez,
        ..*problem_base
    };
    let cbez = solve(&cbez_problem, &cbez_options);
    rows.push(row_from(&cbez, PlanModel::Cbez, &percent));

    ComparisonReport { rows }
}

fn row_from(
    result: &Result<PlanResult>,
    model: PlanModel,
    percent: &impl Fn(f64) -> Option<f64>,
) -> ComparisonRow {
    match result {
        Ok(r) if r.feasible => ComparisonRow {
            model,
            t_f: Some(r.trajectory.t_f),
            percent_improvement: percent(r.trajectory.t_f),
            feasible: true,
            error: None,
        },
        Ok(r) => ComparisonRow {
            model,
            t_f: Some(r.trajectory.t_f),
            percent_improvement: None,
            feasible: false,
            error: Some("no feasible solution found".into()),
        },
        Err(e) => ComparisonRow {
            model,
            t_f: None,
            percent_improvement: None,
            feasible: false,
            error: Some(e.to_string()),
        },
    }
}
