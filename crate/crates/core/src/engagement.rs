//! Engagement zones and signed avoidance margins.
//!
//! An engagement zone is the pursuer's reachability region translated a
//! distance `mu * R` opposite the target's heading (the head start the
//! target's own motion grants the pursuer) and rotated by the pursuer's
//! heading. Three models are supported: the holonomic disk (BEZ), the
//! turn-only region (CBEZ) and the turn-straight region (CSBEZ).
//!
//! Margins are measured from the shifted center `P'`: with `d'` the distance
//! from `P'` to the target and `r` the boundary radius at the target's
//! bearing (taken relative to the pursuer's heading), the signed margin is
//! `d' - r`. Non-negative means the target is outside or on the zone.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::kinematics::{polar_of, wrap, Pose, PursuerParams, TargetState};
use crate::reachability::{
    c_frontier_radius, sample_frontier, CsBoundary, Frontier, FrontierKind,
};
use serde::{Deserialize, Serialize};

/// Engagement-zone model selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EzModel {
    /// Holonomic pursuer: shifted disk of radius `R`.
    Bez,
    /// Turn-only pursuer (single constant turn).
    Cbez,
    /// Turn-straight pursuer (minimum-radius turn, then straight).
    Csbez,
}

impl EzModel {
    pub fn frontier_kind(self) -> FrontierKind {
        match self {
            EzModel::Bez => FrontierKind::HolonomicDisk,
            EzModel::Cbez => FrontierKind::C,
            EzModel::Csbez => FrontierKind::Cs,
        }
    }
}

/// A pursuer/target pair with the pursuer's kinematic envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngagementState {
    pub pursuer: Pose,
    pub target: TargetState,
    pub params: PursuerParams,
}

impl EngagementState {
    pub fn new(pursuer: Pose, target: TargetState, params: PursuerParams) -> Result<Self> {
        if !(pursuer.position().is_finite()
            && pursuer.heading.is_finite()
            && target.position().is_finite()
            && target.heading.is_finite()
            && target.mu.is_finite())
        {
            return Err(Error::NonFinite("EngagementState"));
        }
        Ok(EngagementState {
            pursuer,
            target,
            params,
        })
    }
}

/// Signed margin evaluation with its diagnostic intermediates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintEval {
    /// `d_prime - boundary_radius`; >= 0 means outside or on the zone.
    pub margin: f64,
    /// Distance from the shifted center `P'` to the target.
    pub d_prime: f64,
    /// Polar bearing of the target about `P'`.
    pub lambda_prime: f64,
    /// `lambda_prime - psi_P` wrapped to `(-pi, pi]`.
    pub effective_bearing: f64,
    /// Boundary radius at the effective bearing (capture radius included).
    pub boundary_radius: f64,
    pub model: EzModel,
}

/// Shifted zone center `P' = P - mu R (cos psi_T, sin psi_T)`.
pub fn ez_center(state: &EngagementState) -> Vec2 {
    let shift = state.target.mu * state.params.range();
    state.pursuer.position() - shift * Vec2::unit(state.target.heading)
}

/// Reusable margin evaluator. Constructing one caches the CS boundary
/// inversion table, which matters when a planner evaluates margins many
/// thousands of times against fixed pursuer parameters.
#[derive(Debug, Clone)]
pub struct MarginEvaluator {
    model: EzModel,
    params: PursuerParams,
    cs: Option<CsBoundary>,
}

impl MarginEvaluator {
    pub fn new(model: EzModel, params: PursuerParams) -> Self {
        let cs = match model {
            EzModel::Csbez => Some(CsBoundary::new(params)),
            _ => None,
        };
        MarginEvaluator { model, params, cs }
    }

    pub fn model(&self) -> EzModel {
        self.model
    }

    pub fn eval(&self, pursuer: &Pose, target: &TargetState) -> Result<ConstraintEval> {
        if !(pursuer.position().is_finite()
            && pursuer.heading.is_finite()
            && target.position().is_finite()
            && target.heading.is_finite())
        {
            return Err(Error::NonFinite("margin evaluation"));
        }
        let state = EngagementState {
            pursuer: *pursuer,
            target: *target,
            params: self.params,
        };
        let center = ez_center(&state);
        let (d_prime, lambda_prime) = polar_of(target.position(), center);
        let effective_bearing = wrap(lambda_prime - pursuer.heading);
        let boundary_radius = self.boundary_radius(effective_bearing)?;
        Ok(ConstraintEval {
            margin: d_prime - boundary_radius,
            d_prime,
            lambda_prime,
            effective_bearing,
            boundary_radius,
            model: self.model,
        })
    }

    fn boundary_radius(&self, effective_bearing: f64) -> Result<f64> {
        Ok(match self.model {
            EzModel::Bez => self.params.range(),
            EzModel::Cbez => c_frontier_radius(&self.params, effective_bearing),
            EzModel::Csbez => self
                .cs
                .as_ref()
                .expect("CSBEZ evaluator carries a boundary")
                .radius_checked(effective_bearing)?,
        } + self.params.capture_radius())
    }

    /// Margin alone, for tight inner loops. Same arithmetic as [`Self::eval`]
    /// without the diagnostic record or finiteness checks; non-finite inputs
    /// yield a non-finite margin.
    pub fn margin_value(&self, pursuer: &Pose, pos: Vec2, heading: f64, mu: f64) -> Result<f64> {
        let center =
            pursuer.position() - (mu * self.params.range()) * Vec2::unit(heading);
        let (d_prime, lambda_prime) = polar_of(pos, center);
        let effective_bearing = wrap(lambda_prime - pursuer.heading);
        Ok(d_prime - self.boundary_radius(effective_bearing)?)
    }
}

/// Margin against the holonomic-disk zone (constant boundary radius `R`).
pub fn bez_margin(state: &EngagementState) -> Result<ConstraintEval> {
    MarginEvaluator::new(EzModel::Bez, state.params).eval(&state.pursuer, &state.target)
}

/// Margin against the turn-only zone.
pub fn cbez_margin(state: &EngagementState) -> Result<ConstraintEval> {
    MarginEvaluator::new(EzModel::Cbez, state.params).eval(&state.pursuer, &state.target)
}

/// Margin against the turn-straight zone. Root-finder failures in the
/// boundary inversion propagate with diagnostics.
pub fn csbez_margin(state: &EngagementState) -> Result<ConstraintEval> {
    MarginEvaluator::new(EzModel::Csbez, state.params).eval(&state.pursuer, &state.target)
}

/// Margin for an arbitrary model.
pub fn margin(model: EzModel, state: &EngagementState) -> Result<ConstraintEval> {
    MarginEvaluator::new(model, state.params).eval(&state.pursuer, &state.target)
}

/// Boundary polyline of the engagement zone in world coordinates: the
/// origin-frame frontier rotated by the pursuer heading about the pursuer
/// position and translated to the shifted center.
pub fn ez_boundary_polyline(
    state: &EngagementState,
    model: EzModel,
    n: usize,
) -> Result<Frontier> {
    let base = sample_frontier(&state.params, model.frontier_kind(), n)?;
    let center = ez_center(state);
    let psi = state.pursuer.heading;
    let vertices = base
        .vertices
        .into_iter()
        .map(|v| {
            let p = center + v.point().rotate(psi);
            crate::reachability::FrontierVertex {
                param: v.param,
                x: p.x,
                y: p.y,
            }
        })
        .collect();
    Ok(Frontier {
        kind: base.kind,
        vertices,
        params: base.params,
    })
}
