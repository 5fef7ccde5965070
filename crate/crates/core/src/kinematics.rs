//! Scalar and vector kinematic primitives: angle wrapping, polar conversion,
//! pursuer parameters, poses and target states.
//!
//! All angles in this crate are wrapped to the half-open interval `(-pi, pi]`.
//! Keeping one convention everywhere avoids double-counting the branch cut
//! when bearings are compared or differenced.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Wrap a finite angle to `(-pi, pi]` modulo 2*pi.
///
/// `-pi` maps to `+pi` (the interval is half-open at the bottom).
pub fn wrap_angle(a: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::NonFinite("wrap_angle"));
    }
    Ok(wrap(a))
}

/// Infallible wrap for internal use on values already known to be finite.
pub(crate) fn wrap(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = a.rem_euclid(two_pi); // [0, 2*pi)
    if r > PI {
        r - two_pi
    } else {
        r
    }
}

/// Polar decomposition of `p` about `origin`: `(r, lambda)` with `r >= 0` and
/// `lambda` in `(-pi, pi]`. The degenerate case `r == 0` returns bearing 0.
pub fn polar_of(p: Vec2, origin: Vec2) -> (f64, f64) {
    let d = p - origin;
    let r = d.norm();
    if r == 0.0 {
        return (0.0, 0.0);
    }
    (r, wrap(d.y.atan2(d.x)))
}

/// Kinematic envelope of the pursuer: constant speed `v`, minimum turn radius
/// `abar`, flight time `t` and an optional capture radius. The maximum
/// effective range is `range() = v * t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPursuerParams", into = "RawPursuerParams")]
pub struct PursuerParams {
    v: f64,
    abar: f64,
    t: f64,
    capture_radius: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPursuerParams {
    v: f64,
    abar: f64,
    t: f64,
    #[serde(default)]
    capture_radius: f64,
}

impl TryFrom<RawPursuerParams> for PursuerParams {
    type Error = Error;
    fn try_from(raw: RawPursuerParams) -> Result<Self> {
        PursuerParams::new(raw.v, raw.abar, raw.t)?.with_capture_radius(raw.capture_radius)
    }
}

impl From<PursuerParams> for RawPursuerParams {
    fn from(p: PursuerParams) -> Self {
        RawPursuerParams {
            v: p.v,
            abar: p.abar,
            t: p.t,
            capture_radius: p.capture_radius,
        }
    }
}

impl PursuerParams {
    /// Build parameters with zero capture radius. All of `v`, `abar`, `t`
    /// must be finite and strictly positive.
    pub fn new(v: f64, abar: f64, t: f64) -> Result<Self> {
        if !(v.is_finite() && abar.is_finite() && t.is_finite()) {
            return Err(Error::NonFinite("PursuerParams"));
        }
        if v <= 0.0 {
            return Err(Error::InvalidParameter(format!("speed v must be > 0, got {v}")));
        }
        if abar <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "minimum turn radius abar must be > 0, got {abar}"
            )));
        }
        if t <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "flight time t must be > 0, got {t}"
            )));
        }
        Ok(PursuerParams {
            v,
            abar,
            t,
            capture_radius: 0.0,
        })
    }

    /// Replace the capture radius (must be finite and non-negative).
    pub fn with_capture_radius(mut self, capture_radius: f64) -> Result<Self> {
        if !capture_radius.is_finite() {
            return Err(Error::NonFinite("capture_radius"));
        }
        if capture_radius < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "capture radius must be >= 0, got {capture_radius}"
            )));
        }
        self.capture_radius = capture_radius;
        Ok(self)
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn abar(&self) -> f64 {
        self.abar
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn capture_radius(&self) -> f64 {
        self.capture_radius
    }

    /// Maximum effective range `R = v * t`.
    pub fn range(&self) -> f64 {
        self.v * self.t
    }

    /// Maximum turn angle `v * t / abar` a path of full length can sweep at
    /// the minimum turn radius.
    pub fn max_turn_angle(&self) -> f64 {
        self.range() / self.abar
    }
}

/// Position plus heading. The heading is wrapped to `(-pi, pi]` on
/// construction; code that mutates the field directly is responsible for
/// keeping it wrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NonFinite("Pose position"));
        }
        Ok(Pose {
            x,
            y,
            heading: wrap_angle(heading)?,
        })
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Target (evader) state: position, heading and speed ratio `mu = v_T / v_P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub mu: f64,
}

impl TargetState {
    pub fn new(x: f64, y: f64, heading: f64, mu: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && mu.is_finite()) {
            return Err(Error::NonFinite("TargetState"));
        }
        if mu < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "speed ratio mu must be >= 0, got {mu}"
            )));
        }
        Ok(TargetState {
            x,
            y,
            heading: wrap_angle(heading)?,
            mu,
        })
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}
