use super::{BarrierKind, Orientation, RadialBarrier};
use crate::apcore::Params;
use crate::error::{domain, Result};

/// Largest `A` tried by [`certify_w_sub`].
pub const A_MAX: f64 = 1_048_576.0;

/// Residuals on a set of distances, with the minimum refined between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualTable {
    pub d: Vec<f64>,
    pub residual: Vec<f64>,
    pub min: f64,
    pub argmin: f64,
    /// End of the initial run of positive residuals, refined by bisection;
    /// `None` when the first sample is not positive.
    pub d0: Option<f64>,
}

impl ResidualTable {
    pub fn all_positive(&self) -> bool {
        self.min > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WCertificate {
    /// Smallest power of two that certifies positivity.
    pub a: Option<f64>,
    pub tried: Vec<f64>,
    pub table: ResidualTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub d: Vec<f64>,
    /// `phi'^2/2 - phi^-gamma/gamma`.
    pub margin: Vec<f64>,
    /// End of the initial run where the margin is nonnegative.
    pub holds_up_to: Option<f64>,
    /// Largest `|margin| / (phi^-gamma/gamma)`.
    pub max_rel_defect: f64,
}

/// `count` points log-spaced on `[lo, hi]`, endpoints included.
pub fn log_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let m = (count.max(2) - 1) as f64;
    (0..count.max(2)).map(|k| if k as f64 == m { hi } else { (a + (b - a) * k as f64 / m).exp() }).collect()
}

fn check_samples(b: &RadialBarrier, d: &[f64]) -> Result<()> {
    if d.is_empty() || d.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return domain("distance samples must be positive");
    }
    if d.windows(2).any(|w| w[1] <= w[0]) {
        return domain("distance samples must be increasing");
    }
    if b.orientation == Orientation::InsidePositive && d[d.len() - 1] >= b.r {
        return domain("distance samples must stay inside the ball");
    }
    Ok(())
}

fn table(d: &[f64], f: impl Fn(f64) -> f64) -> ResidualTable {
    let residual: Vec<f64> = d.iter().map(|&x| f(x)).collect();
    let k = (0..d.len()).min_by(|&i, &j| residual[i].total_cmp(&residual[j])).unwrap();
    let (mut min, mut argmin) = (residual[k], d[k]);
    if k > 0 && k + 1 < d.len() {
        let (x, v) = golden_min(&f, d[k - 1], d[k + 1]);
        if v < min {
            (min, argmin) = (v, x);
        }
    }
    let d0 = match residual.iter().position(|&r| r <= 0.0) {
        None => Some(d[d.len() - 1]),
        Some(0) => None,
        Some(i) => Some(last_positive(&f, d[i - 1], d[i])),
    };
    ResidualTable { d: d.to_vec(), residual, min, argmin, d0 }
}

/// Golden-section minimum of `f` on `[a, b]` in the log variable.
fn golden_min(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let g = |t: f64| f(t.exp());
    let (mut a, mut b) = (a.ln(), b.ln());
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut e) = (b - r * (b - a), a + r * (b - a));
    let (mut fc, mut fe) = (g(c), g(e));
    for _ in 0..80 {
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + r * (b - a);
            fe = g(e);
        }
    }
    if fc < fe {
        (c.exp(), fc)
    } else {
        (e.exp(), fe)
    }
}

/// Bisection for the sign change of `f` with `f(lo) > 0 >= f(hi)`.
fn last_positive(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

/// `phi'' + k(d) phi' + phi^-(gamma+1)`, positive where the barrier is a
/// strict subsolution of the interior equation. `k` is the radial curvature
/// coefficient in dimension `n`.
pub fn residual_u(b: &RadialBarrier, p: &Params, n: usize, d: &[f64]) -> Result<ResidualTable> {
    if b.kind.is_w() {
        return domain("residual_u needs a barrier in the u variable");
    }
    b.validate(p)?;
    if n == 0 {
        return domain("dimension must be at least one");
    }
    check_samples(b, d)?;
    Ok(table(d, |x| {
        let [v, d1, d2] = b.profile(p, x);
        d2 + b.curvature(n, x) * d1 + v.powf(-(p.gamma + 1.0))
    }))
}

/// `Delta Psi - (1-alpha)(|grad Psi|^2 - 1)/Psi` on `(1e-6, 2)` with `10^4`
/// samples.
pub fn residual_w(b: &RadialBarrier, p: &Params) -> Result<ResidualTable> {
    residual_w_on(b, p, &log_samples(1e-6, 2.0, 10_000))
}

pub fn residual_w_on(b: &RadialBarrier, p: &Params, d: &[f64]) -> Result<ResidualTable> {
    if !b.kind.is_w() {
        return domain("residual_w needs a barrier in the w variable");
    }
    b.validate(p)?;
    check_samples(b, d)?;
    let n = b.center.len();
    Ok(table(d, |x| {
        let [v, d1, d2] = b.profile(p, x);
        d2 + b.curvature(n, x) * d1 - (1.0 - p.alpha) * (d1 * d1 - 1.0) / v
    }))
}

/// Doubles `A` from 1 until the `w` residual is positive on all samples.
pub fn certify_w_sub(b: &RadialBarrier, p: &Params) -> Result<WCertificate> {
    if b.kind != BarrierKind::WSub {
        return domain("certification applies to the w subsolution");
    }
    let mut tried = Vec::new();
    let mut a = 1.0;
    loop {
        let t = residual_w(&RadialBarrier { a, ..b.clone() }, p)?;
        tried.push(a);
        if t.all_positive() {
            return Ok(WCertificate { a: Some(a), tried, table: t });
        }
        if a >= A_MAX {
            return Ok(WCertificate { a: None, tried, table: t });
        }
        a *= 2.0;
    }
}

/// Pointwise check of `phi'^2/2 >= phi^-gamma / gamma`.
pub fn calibration_slope_check(b: &RadialBarrier, p: &Params, d: &[f64]) -> Result<CalibrationReport> {
    if b.kind.is_w() {
        return domain("the calibration inequality is stated for u barriers");
    }
    b.validate(p)?;
    check_samples(b, d)?;
    let f = |x: f64| {
        let [v, d1, _] = b.profile(p, x);
        let pot = v.powf(-p.gamma) / p.gamma;
        (0.5 * d1 * d1 - pot, pot)
    };
    let vals: Vec<(f64, f64)> = d.iter().map(|&x| f(x)).collect();
    let margin: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let max_rel_defect = vals.iter().fold(0.0f64, |m, v| m.max(v.0.abs() / v.1));
    let holds_up_to = match margin.iter().position(|&m| m < 0.0) {
        None => Some(d[d.len() - 1]),
        Some(0) => None,
        Some(i) => Some(last_positive(&|x| f(x).0 + f64::MIN_POSITIVE, d[i - 1], d[i])),
    };
    Ok(CalibrationReport { d: d.to_vec(), margin, holds_up_to, max_rel_defect })
}
