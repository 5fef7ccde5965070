//! Reachability regions and engagement zones for a turn-constrained,
//! range-limited pursuer.
//!
//! The crate provides:
//!
//! - analytic boundary curves and membership predicates for the reachable
//!   set of a constant-speed vehicle that either holds one turn for its
//!   whole flight (C-paths) or turns at minimum radius then runs straight
//!   (CS-paths) — [`reachability`];
//! - engagement zones: the reachable set translated opposite the target's
//!   heading by `mu * R` and rotated with the pursuer, together with signed
//!   avoidance margins for the disk (BEZ), turn-only (CBEZ) and
//!   turn-straight (CSBEZ) models — [`engagement`];
//! - a brute-force Monte Carlo path sampler that independently validates
//!   the analytic boundaries — [`oracle`];
//! - a minimum-time planner that steers a slower vehicle between waypoints
//!   while staying outside a chosen engagement zone — [`planner`].

pub mod engagement;
pub mod error;
pub mod geom;
pub mod kinematics;
pub mod oracle;
pub mod planner;
pub mod reachability;

pub use engagement::{ConstraintEval, EngagementState, EzModel, MarginEvaluator};
pub use error::{Error, Result};
pub use geom::Vec2;
pub use kinematics::{polar_of, wrap_angle, Pose, PursuerParams, TargetState};
pub use reachability::{Circle, CsBoundary, CsInversion, Frontier, FrontierKind, FrontierVertex};
