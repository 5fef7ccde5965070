//! Run configuration: defaults, config-file loading and flag merging.
//!
//! Precedence is defaults < config file < command-line flags. The merged
//! effective configuration is echoed into every JSON output so a result
//! file always records exactly what produced it.

use anyhow::{Context, Result};
use ezone_core::planner::{PlanModel, PlanProblem};
use ezone_core::{EngagementState, Pose, PursuerParams, TargetState, Vec2};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Effective run configuration. Field names mirror the command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub v: f64,
    pub abar: f64,
    pub t: f64,
    pub capture_radius: f64,
    pub pursuer_x: f64,
    pub pursuer_y: f64,
    pub pursuer_heading: f64,
    pub mu: f64,
    pub target_heading: f64,
    pub target_x: f64,
    pub target_y: f64,
    pub start: [f64; 2],
    pub goal: [f64; 2],
    pub model: PlanModel,
    pub nodes: usize,
    pub seed: u64,
    pub samples: usize,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        let problem = ezone_core::planner::default_scenario();
        RunConfig {
            v: problem.params.v(),
            abar: problem.params.abar(),
            t: problem.params.t(),
            capture_radius: problem.params.capture_radius(),
            pursuer_x: problem.pursuer.x,
            pursuer_y: problem.pursuer.y,
            pursuer_heading: problem.pursuer.heading,
            mu: problem.mu,
            target_heading: 0.0,
            target_x: problem.start.x,
            target_y: problem.start.y,
            start: [problem.start.x, problem.start.y],
            goal: [problem.goal.x, problem.goal.y],
            model: problem.model,
            nodes: 100,
            seed: 0,
            samples: 100_000,
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing config file {}", path.display()))
    }

    pub fn params(&self) -> Result<PursuerParams> {
        Ok(PursuerParams::new(self.v, self.abar, self.t)?
            .with_capture_radius(self.capture_radius)?)
    }

    pub fn pursuer(&self) -> Result<Pose> {
        Ok(Pose::new(self.pursuer_x, self.pursuer_y, self.pursuer_heading)?)
    }

    pub fn target(&self) -> Result<TargetState> {
        Ok(TargetState::new(
            self.target_x,
            self.target_y,
            self.target_heading,
            self.mu,
        )?)
    }

    pub fn engagement_state(&self) -> Result<EngagementState> {
        Ok(EngagementState::new(
            self.pursuer()?,
            self.target()?,
            self.params()?,
        )?)
    }

    pub fn plan_problem(&self) -> Result<PlanProblem> {
        Ok(PlanProblem {
            start: Vec2::new(self.start[0], self.start[1]),
            goal: Vec2::new(self.goal[0], self.goal[1]),
            pursuer: self.pursuer()?,
            mu: self.mu,
            params: self.params()?,
            model: self.model,
        })
    }
}
