//! Radial comparison functions, their differential inequalities, viscosity
//! touching tests and the degenerate linearized problem.

mod linearized;
mod residual;
mod touch;

pub use linearized::{linearized_decay, power_profile_residual, solve_linearized, LinearizedProblem};
pub use residual::{
    calibration_slope_check, certify_w_sub, log_samples, residual_u, residual_w, residual_w_on, CalibrationReport,
    ResidualTable, WCertificate, A_MAX,
};
pub use touch::{touch_test, ContactReport, Side};

use crate::apcore::Params;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    /// `c0 d^alpha + mu d^(2-alpha)`.
    UPlus,
    /// `c0 d^alpha + (mu/2) d^(2-alpha) - d^sigma`, the supersolution mirror of `UStrict`.
    UMinus,
    /// `c0 d^alpha + (mu/2) d^(2-alpha) + d^sigma`.
    UStrict,
    /// `d + mu d^(3-2 alpha)` in the `w` variable.
    WTouch,
    /// `d + mu eps (d^(1-s) + A d^beta)` in the `w` variable.
    WSub,
}

impl BarrierKind {
    pub fn is_w(self) -> bool {
        matches!(self, BarrierKind::WTouch | BarrierKind::WSub)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Positive inside the ball, zero outside.
    InsidePositive,
    /// Zero inside the ball, positive outside.
    OutsidePositive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialBarrier {
    pub kind: BarrierKind,
    pub center: Vec<f64>,
    pub r: f64,
    pub orientation: Orientation,
    pub mu: f64,
    pub sigma: f64,
    pub beta: f64,
    pub a: f64,
    pub eps: f64,
}

/// Midpoint of `(2-alpha, min(4-3 alpha, 1+alpha))`. Above `1+alpha` the
/// `d^sigma` term no longer dominates the curvature term of order `d^(alpha-1)`.
pub fn default_sigma(p: &Params) -> f64 {
    let a = p.alpha;
    0.5 * ((2.0 - a) + (4.0 - 3.0 * a).min(1.0 + a))
}

/// Midpoint of `(1-s, min(1-2s, 2)]`.
pub fn default_beta(p: &Params) -> f64 {
    0.5 * ((1.0 - p.s) + (1.0 - 2.0 * p.s).min(2.0))
}

impl RadialBarrier {
    /// Barrier with default exponents, `A = 1` and `eps = 0`.
    pub fn new(p: &Params, kind: BarrierKind, center: &[f64], r: f64, orientation: Orientation, mu: f64) -> Self {
        RadialBarrier {
            kind,
            center: center.to_vec(),
            r,
            orientation,
            mu,
            sigma: default_sigma(p),
            beta: default_beta(p),
            a: 1.0,
            eps: 0.0,
        }
    }

    /// The `w` subsolution on the ball of radius `1/(mu eps)` centred at
    /// `(1/(mu eps)) e_n`, tangent to `{x_n = 0}` at the origin.
    pub fn w_sub(p: &Params, ndim: usize, mu: f64, eps: f64, a: f64) -> Self {
        let r = 1.0 / (mu * eps);
        let mut center = vec![0.0; ndim];
        center[ndim - 1] = r;
        RadialBarrier { a, eps, ..Self::new(p, BarrierKind::WSub, &center, r, Orientation::InsidePositive, mu) }
    }

    pub fn validate(&self, p: &Params) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return domain("barrier radius must be positive and finite");
        }
        if self.center.is_empty() || self.center.len() > 2 {
            return domain("barrier center must have one or two coordinates");
        }
        let a = p.alpha;
        if matches!(self.kind, BarrierKind::UStrict | BarrierKind::UMinus)
            && !(self.sigma > 2.0 - a && self.sigma < 4.0 - 3.0 * a)
        {
            return domain(format!("sigma = {} outside ({}, {})", self.sigma, 2.0 - a, 4.0 - 3.0 * a));
        }
        if self.kind == BarrierKind::WSub {
            let hi = (1.0 - 2.0 * p.s).min(2.0);
            if !(self.beta > 1.0 - p.s && self.beta <= hi) {
                return domain(format!("beta = {} outside ({}, {}]", self.beta, 1.0 - p.s, hi));
            }
            if !(self.eps > 0.0) {
                return domain("eps must be positive");
            }
        }
        Ok(())
    }

    /// Distance to the sphere on the positive side, zero elsewhere.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let rho = crate::fbanalysis::dist2(x, &self.center).sqrt();
        match self.orientation {
            Orientation::InsidePositive => (self.r - rho).max(0.0),
            Orientation::OutsidePositive => (rho - self.r).max(0.0),
        }
    }

    /// Value and first two derivatives in `d`, for `d > 0`.
    pub fn profile(&self, p: &Params, d: f64) -> [f64; 3] {
        let a = p.alpha;
        let mut acc = [0.0; 3];
        let mut add = |c: f64, e: f64| {
            if c != 0.0 {
                let t = c * d.powf(e - 2.0);
                acc[0] += t * d * d;
                acc[1] += e * t * d;
                acc[2] += e * (e - 1.0) * t;
            }
        };
        match self.kind {
            BarrierKind::UPlus => {
                add(p.c0, a);
                add(self.mu, 2.0 - a);
            }
            BarrierKind::UStrict | BarrierKind::UMinus => {
                add(p.c0, a);
                add(0.5 * self.mu, 2.0 - a);
                add(if self.kind == BarrierKind::UStrict { 1.0 } else { -1.0 }, self.sigma);
            }
            BarrierKind::WTouch => {
                add(1.0, 1.0);
                add(self.mu, 3.0 - 2.0 * a);
            }
            BarrierKind::WSub => {
                add(1.0, 1.0);
                add(self.mu * self.eps, 1.0 - p.s);
                add(self.mu * self.eps * self.a, self.beta);
            }
        }
        acc
    }

    /// Coefficient `k(d)` with `Delta phi = phi'' + k(d) phi'` for radial `phi(d)`.
    pub(crate) fn curvature(&self, n: usize, d: f64) -> f64 {
        let m = (n as f64) - 1.0;
        match self.orientation {
            Orientation::InsidePositive => -m / (self.r - d),
            Orientation::OutsidePositive => m / (self.r + d),
        }
    }
}

/// The barrier at `x`; zero off the positive side.
pub fn barrier_value(b: &RadialBarrier, p: &Params, x: &[f64]) -> f64 {
    let d = b.distance(x);
    if d > 0.0 {
        b.profile(p, d)[0]
    } else {
        0.0
    }
}
