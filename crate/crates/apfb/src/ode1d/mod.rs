//! One-dimensional, angular and radial profiles.
//!
//! The 1D problem `u'' = -u^-(gamma+1)`, `u(0) = 0` is integrated in the
//! log-time variables `U = u t^-alpha`, `V = u' t^(1-alpha)` where it becomes
//! autonomous with the homogeneous solution as fixed point `(c0, alpha c0)`.

mod dopri;

use crate::apcore::Params;
use crate::error::{domain, Error, Result};
use crate::{fit, quad};
use dopri::{integrate, Outcome, Tol};

const TOL: Tol = Tol { rtol: 1e-13, atol: 1e-15 };
const SAMPLES_PER_DECADE: f64 = 50.0;

/// Samples of a 1D profile with its conserved quantity `u'^2 - (2/gamma) u^-gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct ODETrajectory {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub mu: f64,
    /// Where `u` returns to zero when `mu < 0` truncates the profile.
    pub vanishing_point: Option<f64>,
}

impl ODETrajectory {
    /// Pointwise value of the first integral at sample `k`.
    pub fn mu_at(&self, gamma: f64, k: usize) -> f64 {
        self.du[k] * self.du[k] - (2.0 / gamma) * self.u[k].powf(-gamma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionFit {
    pub c0_hat: f64,
    /// Coefficient of `t^(2-alpha)`; proportional to `mu`.
    pub c1_hat: f64,
    /// Log-log slope of what remains after both terms; NaN if the remainder
    /// is at rounding level.
    pub sigma_hat: f64,
    pub window: (f64, f64),
    pub sigma_window: (f64, f64),
    /// RMS of the relative misfit of the coefficient fit.
    pub residual_rms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularProfile {
    pub theta: Vec<f64>,
    pub f: Vec<f64>,
    /// Derivative of `g = (f/c0)^(1/alpha)`, kept for interpolation.
    pub dg: Vec<f64>,
    pub a: f64,
    pub mu: f64,
    alpha: f64,
    c0: f64,
}

impl AngularProfile {
    /// Cubic Hermite interpolation in `g`, mapped back to `f`.
    pub fn eval(&self, theta: f64) -> f64 {
        if theta <= 0.0 || theta >= self.a {
            return 0.0;
        }
        let n = self.theta.len();
        let g = |i: usize| (self.f[i] / self.c0).powf(1.0 / self.alpha);
        // g is linear to leading order at both ends
        let k = match self.theta.partition_point(|&x| x <= theta) {
            0 => return self.c0 * (g(0) * theta / self.theta[0]).powf(self.alpha),
            i if i >= n => {
                let gl = g(n - 1) * (self.a - theta) / (self.a - self.theta[n - 1]);
                return self.c0 * gl.powf(self.alpha);
            }
            i => i - 1,
        };
        let (t0, t1) = (self.theta[k], self.theta[k + 1]);
        let (g0, g1) = (g(k), g(k + 1));
        let (d0, d1) = (self.dg[k], self.dg[k + 1]);
        let hh = t1 - t0;
        let s = (theta - t0) / hh;
        let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
        let h10 = s.powi(3) - 2.0 * s * s + s;
        let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
        let h11 = s.powi(3) - s * s;
        let gv = h00 * g0 + h10 * hh * d0 + h01 * g1 + h11 * hh * d1;
        self.c0 * gv.max(0.0).powf(self.alpha)
    }
}

/// Radially symmetric positive solution on `B_R` vanishing on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    /// Center value found by shooting.
    pub m: f64,
    pub radius: f64,
    /// Vanishing radius of the final shot.
    pub r_star: f64,
}

/// `G(s) = int_0^s (mu + (2/gamma) r^-gamma)^-1/2 dr`, the inverse of the 1D profile.
pub fn g_quadrature(p: &Params, mu: f64, s_val: f64) -> Result<f64> {
    if !(s_val >= 0.0) {
        return domain(format!("G needs s >= 0, got {s_val}"));
    }
    if s_val == 0.0 {
        return Ok(0.0);
    }
    let g = p.gamma;
    let k = (2.0 / g) * s_val.powf(-g);
    if mu + k <= 0.0 {
        return Err(Error::NegativeIntegrand { r: (-g * mu / 2.0).powf(-1.0 / g) });
    }
    if mu == 0.0 {
        return Ok((g / 2.0).sqrt() * p.alpha * s_val.powf(1.0 / p.alpha));
    }
    // r = s z^alpha turns the integrand into s alpha (mu z^(gamma alpha) + k)^-1/2
    let ga = g * p.alpha;
    let f = |z: f64| (mu * z.powf(ga) + k).powf(-0.5);
    let scale = s_val * p.alpha;
    // absolute 1e-13 on G, or 1e-14 relative when G is large
    let tol = (1e-13 / scale).max(1e-14 * k.powf(-0.5));
    let (v, _) = quad::adaptive(f, 0.0, 1.0, tol);
    Ok(scale * v)
}

fn log_time_rhs(p: Params) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    move |_tau, y| [y[1] - p.alpha * y[0], -y[0].powf(-(p.gamma + 1.0)) + (1.0 - p.alpha) * y[1]]
}

/// Solves the 1D problem with first integral `mu` on `(0, t_end]`.
pub fn integrate_profile(p: &Params, mu: f64, t_end: f64) -> Result<ODETrajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return domain(format!("t_end must be positive, got {t_end}"));
    }
    let first = integrate_seeded(p, mu, t_end, 0.0)?;
    if mu == 0.0 {
        return Ok(first);
    }
    // refine the seed with the fitted second coefficient
    let c1_est = fit_expansion(&first, p).map(|f| f.c1_hat / mu).unwrap_or(0.0);
    integrate_seeded(p, mu, t_end, c1_est)
}

fn integrate_seeded(p: &Params, mu: f64, t_end: f64, c1_est: f64) -> Result<ODETrajectory> {
    let t0 = 1e-6 * t_end;
    let u0 = p.c0 * t0.powf(p.alpha) + mu * c1_est * t0.powf(2.0 - p.alpha);
    // the seed time is exact for the seed value, whatever c1_est is
    let t_seed = g_quadrature(p, mu, u0)?;
    let du0 = (mu + (2.0 / p.gamma) * u0.powf(-p.gamma)).sqrt();
    let mut y = [u0 * t_seed.powf(-p.alpha), du0 * t_seed.powf(1.0 - p.alpha)];

    let decades = (t_end / t0).log10();
    let n = (SAMPLES_PER_DECADE * decades).ceil() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| t0 * (t_end / t0).powf(k as f64 / n as f64)).collect();
    grid.retain(|&t| t > t_seed * (1.0 + 1e-12));
    let mut out = ODETrajectory { t: vec![t_seed], u: vec![u0], du: vec![du0], mu, vanishing_point: None };

    let rhs = log_time_rhs(*p);
    let u_stop = 1e-7 * p.c0;
    let mut tau = t_seed.ln();
    let mut h = 1e-3;
    for &t in &grid {
        let target = t.ln();
        match integrate(&rhs, tau, y, target, &mut h, TOL, |s| s[0] > u_stop) {
            Outcome::Done(yn) => {
                tau = target;
                y = yn;
                out.t.push(t);
                out.u.push(y[0] * t.powf(p.alpha));
                out.du.push(y[1] * t.powf(p.alpha - 1.0));
            }
            Outcome::Blocked(tb, yb) => {
                let tt = tb.exp();
                let u = yb[0] * tt.powf(p.alpha);
                // near a simple zero u ~ c0 (t_v - t)^alpha
                out.vanishing_point = Some(tt + (u / p.c0).powf(1.0 / p.alpha));
                break;
            }
        }
    }
    Ok(out)
}

/// Fits `u = c0 t^alpha + c1 t^(2-alpha) + ...` near `t = 0`.
///
/// The coefficients come from a quadratic fit of `u t^-alpha` in
/// `x = t^(2-2alpha)` over `[10, 1000] t_first`; the remainder exponent from a
/// log-log regression one decade higher, where the remainder is well above
/// rounding level.
pub fn fit_expansion(traj: &ODETrajectory, p: &Params) -> Result<ExpansionFit> {
    let t_first = *traj.t.first().ok_or_else(|| Error::IllConditioned("empty trajectory".into()))?;
    let window = (10.0 * t_first, 1e3 * t_first);
    let sigma_window = (1e2 * t_first, 1e4 * t_first);
    let t_last = *traj.t.last().unwrap();
    if t_last < sigma_window.1 * (1.0 - 1e-9) {
        return Err(Error::IllConditioned(format!(
            "trajectory spans {:.1} decades; the fit needs at least 4 above the seed",
            (t_last / t_first).log10()
        )));
    }
    let pick = |w: (f64, f64)| -> Vec<usize> { (0..traj.t.len()).filter(|&k| traj.t[k] >= w.0 && traj.t[k] <= w.1).collect() };
    let idx = pick(window);
    if idx.len() < 10 {
        return Err(Error::IllConditioned("fewer than 10 samples in the fit window; sample more densely".into()));
    }
    let x: Vec<f64> = idx.iter().map(|&k| traj.t[k].powf(2.0 - 2.0 * p.alpha)).collect();
    let y: Vec<f64> = idx.iter().map(|&k| traj.u[k] * traj.t[k].powf(-p.alpha)).collect();
    let (coef, rms) = fit::polyfit(&x, &y, 2).ok_or_else(|| Error::IllConditioned("singular normal equations; widen the window".into()))?;
    let (c0_hat, c1_hat) = (coef[0], coef[1]);

    let sidx = pick(sigma_window);
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    let mut umax = 0.0f64;
    for &k in &sidx {
        let t = traj.t[k];
        let r = traj.u[k] - c0_hat * t.powf(p.alpha) - c1_hat * t.powf(2.0 - p.alpha);
        umax = umax.max(traj.u[k]);
        lx.push(t.ln());
        ly.push(r.abs());
    }
    let floor = 1e-12 * umax;
    let sigma_hat = if ly.iter().all(|&r| r > floor) {
        let logs: Vec<f64> = ly.iter().map(|r| r.ln()).collect();
        fit::linear_fit(&lx, &logs).map(|(s, _)| s).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    Ok(ExpansionFit { c0_hat, c1_hat, sigma_hat, window, sigma_window, residual_rms: rms })
}

/// Solution of `f'' + alpha^2 f = -f^-(gamma+1)` on its positivity interval
/// `(0, a)` with angular first integral `mu = (f'^2 + alpha^2 f^2)/2 - W(f)`.
///
/// Integrated as `g = (f/c0)^(1/alpha)`, which satisfies
/// `g g'' = (1-alpha)(g'^2 - 1) - alpha g^2` and equals `sin` when `mu = 0`.
pub fn angular_profile(p: &Params, mu: f64) -> AngularProfile {
    let a = p.alpha;
    let kk = 2.0 * mu / (p.c0 * p.c0 * a * a);
    let slope2 = |g: f64| 1.0 - g * g + kk * g.powf(2.0 - 2.0 * a);
    // seed: theta(g0) from the first integral
    let g0 = 1e-6;
    let theta0 = quad::gauss8(0.0, g0, |x| slope2(x).powf(-0.5));
    let rhs = move |_t: f64, y: &[f64; 2]| [y[1], ((1.0 - a) * (y[1] * y[1] - 1.0) - a * y[0] * y[0]) / y[0]];
    let mut y = [g0, slope2(g0).max(0.0).sqrt()];
    let dtheta = std::f64::consts::PI / 2000.0;
    // the g equation is 0/0 at g = 0, so stop as far out as the seed
    let g_stop = g0;
    let mut out = AngularProfile { theta: vec![theta0], f: vec![p.to_u(g0)], dg: vec![y[1]], a: f64::NAN, mu, alpha: a, c0: p.c0 };
    let mut t = theta0;
    let mut h = 1e-4;
    let mut k = 1usize;
    while t < 10.0 * std::f64::consts::PI {
        let target = (k as f64 * dtheta).max(t + 1e-3 * dtheta);
        k = (target / dtheta).floor() as usize + 1;
        match integrate(&rhs, t, y, target, &mut h, TOL, |s| s[0] > g_stop) {
            Outcome::Done(yn) => {
                t = target;
                y = yn;
                out.theta.push(t);
                out.f.push(p.to_u(y[0]));
                out.dg.push(y[1]);
            }
            Outcome::Blocked(tb, yb) => {
                // a - theta = g/|g'| + O(g^(3-2 alpha))
                out.a = if yb[1] < 0.0 { tb + yb[0] / -yb[1] } else { tb };
                break;
            }
        }
    }
    out
}

/// Shooting on the center value for the radial problem on `B_R` in `n` dimensions.
pub fn radial_profile(p: &Params, n: usize, radius: f64) -> Result<RadialProfile> {
    if !(n == 1 || n == 2) {
        return domain(format!("radial profiles are for n in {{1, 2}}, got {n}"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return domain(format!("radius must be positive, got {radius}"));
    }
    let shot = |m: f64| shoot(p, n, m, radius, None).map(|s| s.r_star);
    let r1 = shot(1.0)?;
    let guess = (radius / r1).powf(p.alpha);
    let (mut lo, mut hi) = (0.9 * guess, 1.1 * guess);
    let mut expand = 0;
    while shot(lo)? > radius || shot(hi)? < radius {
        expand += 1;
        if expand > 60 {
            return Err(Error::Bracket { lo, hi });
        }
        lo *= 0.5;
        hi *= 2.0;
    }
    let mut best = (f64::INFINITY, guess);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        let r = shot(m)?;
        if (r - radius).abs() < best.0 {
            best = ((r - radius).abs(), m);
        }
        if r > radius {
            hi = m;
        } else {
            lo = m;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
    }
    if best.0 > 1e-10 * radius {
        return Err(Error::Bracket { lo, hi });
    }
    let samples: Vec<f64> = (1..1000).map(|k| radius * k as f64 / 1000.0).collect();
    shoot(p, n, best.1, radius, Some(&samples))
}

fn shoot(p: &Params, n: usize, m: f64, radius: f64, samples: Option<&[f64]>) -> Result<RadialProfile> {
    let a = p.alpha;
    let nm1 = (n - 1) as f64;
    let rhs = move |r: f64, y: &[f64; 2]| [y[1], (1.0 - a) * (y[1] * y[1] - 1.0) / y[0] - nm1 / r * y[1]];
    let r0 = 1e-6 * radius;
    let phi0 = m - m.powf(-(p.gamma + 1.0)) * r0 * r0 / (2.0 * n as f64);
    let dphi0 = -m.powf(-(p.gamma + 1.0)) * r0 / n as f64;
    if phi0 <= 0.0 {
        return domain(format!("center value {m} too small for the series seed"));
    }
    let w0 = p.to_w(phi0);
    let dw0 = (1.0 / a) * (phi0 / p.c0).powf(1.0 / a - 1.0) * dphi0 / p.c0;
    let w_stop = 1e-10 * w0;
    let mut y = [w0, dw0];
    let mut out = RadialProfile { r: vec![0.0], phi: vec![m], dphi: vec![0.0], m, radius, r_star: f64::NAN };
    let mut r = r0;
    let mut h = 1e-3 * radius;
    let far = [100.0 * radius];
    let targets = samples.unwrap_or(&far);
    for &target in targets.iter().chain(far.iter()) {
        if target <= r {
            continue;
        }
        match integrate(&rhs, r, y, target, &mut h, TOL, |s| s[0] > w_stop) {
            Outcome::Done(yn) => {
                r = target;
                y = yn;
                if target < far[0] {
                    out.r.push(r);
                    out.phi.push(p.to_u(y[0]));
                    out.dphi.push(a * p.c0 * y[0].powf(a - 1.0) * y[1]);
                }
            }
            Outcome::Blocked(rb, yb) => {
                out.r_star = if yb[1] < 0.0 { rb + yb[0] / -yb[1] } else { rb };
                return Ok(out);
            }
        }
    }
    domain(format!("profile with center value {m} does not vanish within {} radii", far[0] / radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apcore::make_params;

    #[test]
    fn g_closed_form() {
        let p = make_params(1.0).unwrap();
        assert!((g_quadrature(&p, 0.0, 1.0).unwrap() - 0.5f64.sqrt() * 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(g_quadrature(&p, 0.3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn g_with_mu_matches_direct_quadrature() {
        // independent oracle: integrate the original integrand after r = s v^2,
        // which removes the r^(gamma/2) endpoint behaviour differently
        for &(gamma, mu, s) in &[(1.0, 0.3, 0.8), (0.5, -0.2, 0.5), (1.5, 1.0, 2.0)] {
            let p = make_params(gamma).unwrap();
            let direct = quad::adaptive(
                |v: f64| {
                    let r = s * v * v;
                    if r == 0.0 {
                        return 0.0;
                    }
                    2.0 * s * v * (mu + (2.0 / gamma) * r.powf(-gamma)).powf(-0.5)
                },
                0.0,
                1.0,
                1e-14,
            )
            .0;
            let g = g_quadrature(&p, mu, s).unwrap();
            assert!((g - direct).abs() < 1e-11, "{gamma} {mu} {s}: {g} vs {direct}");
        }
    }

    #[test]
    fn g_rejects_negative_integrand() {
        let p = make_params(1.0).unwrap();
        match g_quadrature(&p, -2.0, 2.0) {
            Err(Error::NegativeIntegrand { r }) => assert!((r - 1.0).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
    }
}
