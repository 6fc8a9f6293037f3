use super::WSampler;
use crate::apcore::{Params, ScalarField};
use crate::error::{domain, Result};
use crate::par;

/// Lattice points per axis of the comparison window.
const WINDOW_SAMPLES: usize = 81;
const ANGLES: usize = 720;

/// Convergence of `u_lambda(x) = lambda^-alpha u(center + lambda x)` on the
/// ball of radius `window` about the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub lambdas: Vec<f64>,
    pub window: f64,
    /// Whether the requested window had to shrink to stay inside the box.
    pub window_shrunk: bool,
    /// Sup distance between consecutive rescalings.
    pub successive: Vec<f64>,
    /// Sup distance to the closest rotated half-plane solution `c0 (x.nu)_+^alpha`.
    pub cone_distance: Vec<f64>,
    pub cone_normal: Vec<Vec<f64>>,
}

pub fn blowup_diag(p: &Params, u: &ScalarField, center: &[f64], lambdas: &[f64]) -> Result<BlowupReport> {
    blowup_diag_in(p, u, center, lambdas, 1.0)
}

/// Rescalings are evaluated through the interpolant of `w`, so a flat
/// interface between nodes is reproduced exactly instead of being smeared
/// over a cell.
pub fn blowup_diag_in(p: &Params, u: &ScalarField, center: &[f64], lambdas: &[f64], window: f64) -> Result<BlowupReport> {
    let g = &u.grid;
    let nd = g.ndim();
    if center.len() != nd || !g.contains(center) {
        return domain("blow-up center must be a point of the field box");
    }
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
        return domain("blow-up factors must lie in (0, 1]");
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return domain("blow-up factors must be strictly decreasing");
    }
    if !(window > 0.0) {
        return domain("window radius must be positive");
    }
    let (lo, hi) = (g.lo(), g.hi());
    let room = (0..nd).map(|a| (center[a] - lo[a]).min(hi[a] - center[a])).fold(f64::INFINITY, f64::min);
    let reach = room / lambdas[0];
    let (window, window_shrunk) = if window > reach { (reach, true) } else { (window, false) };
    if !(window > 0.0) {
        return domain("blow-up center lies on the box boundary");
    }

    let samples = lattice(nd, window);
    let ws = WSampler::new(p, u);
    let fields: Vec<Vec<f64>> = lambdas
        .iter()
        .map(|&l| {
            let scale = l.powf(-p.alpha);
            par::map(samples.len(), |k| {
                let y: Vec<f64> = samples[k].iter().zip(center).map(|(x, c)| c + l * x).collect();
                scale * ws.eval(&y).unwrap_or(0.0)
            })
        })
        .collect();
    let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let successive = fields.windows(2).map(|f| sup(&f[0], &f[1])).collect();
    let (cone_distance, cone_normal) = fields.iter().map(|f| best_cone(p, &samples, f)).unzip();
    Ok(BlowupReport { lambdas: lambdas.to_vec(), window, window_shrunk, successive, cone_distance, cone_normal })
}

fn lattice(nd: usize, r: f64) -> Vec<Vec<f64>> {
    let m = WINDOW_SAMPLES;
    let t = |k: usize| r * (2.0 * k as f64 / (m - 1) as f64 - 1.0);
    if nd == 1 {
        return (0..m).map(|k| vec![t(k)]).collect();
    }
    let mut out = Vec::new();
    for a in 0..m {
        for b in 0..m {
            let x = vec![t(a), t(b)];
            if x[0] * x[0] + x[1] * x[1] <= r * r * (1.0 + 1e-12) {
                out.push(x);
            }
        }
    }
    out
}

fn cone_distance(p: &Params, samples: &[Vec<f64>], f: &[f64], nu: &[f64]) -> f64 {
    samples.iter().zip(f).fold(0.0f64, |m, (x, &v)| {
        let s: f64 = x.iter().zip(nu).map(|(a, b)| a * b).sum();
        m.max((v - p.c0 * s.max(0.0).powf(p.alpha)).abs())
    })
}

fn best_cone(p: &Params, samples: &[Vec<f64>], f: &[f64]) -> (f64, Vec<f64>) {
    if samples[0].len() == 1 {
        return [vec![1.0], vec![-1.0]]
            .into_iter()
            .map(|nu| (cone_distance(p, samples, f, &nu), nu))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap();
    }
    let at = |t: f64| cone_distance(p, samples, f, &[t.cos(), t.sin()]);
    let step = std::f64::consts::TAU / ANGLES as f64;
    let scores = par::map(ANGLES, |k| at(k as f64 * step));
    let k = (0..ANGLES).min_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
    // golden section on the neighbouring bracket
    let (mut a, mut b) = ((k as f64 - 1.0) * step, (k as f64 + 1.0) * step);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
    let (mut fc, mut fd) = (at(c), at(d));
    for _ in 0..40 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = at(d);
        }
    }
    let (t, best) = if fc < fd { (c, fc) } else { (d, fd) };
    let (t, best) = if scores[k] < best { (k as f64 * step, scores[k]) } else { (t, best) };
    (best, vec![t.cos(), t.sin()])
}
