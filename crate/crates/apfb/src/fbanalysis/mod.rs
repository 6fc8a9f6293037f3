//! Free boundary extraction and radius-indexed diagnostics.

mod blowup;
mod growth;

pub use blowup::{blowup_diag, blowup_diag_in, BlowupReport};
pub(crate) use growth::sphere;
pub use growth::{distance_growth, growth_fit, weiss_curve, weiss_curve_with, BoundaryWeight, GrowthFit, WeissCurve, SPHERE_SAMPLES};

use crate::apcore::{w_with_ghosts, Params, ScalarField};
use crate::error::{Error, Result};

/// Discrete free boundary of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeBoundary {
    /// Lower-left node of every cell whose corners have both phases.
    pub cells: Vec<usize>,
    /// Interface points on grid edges.
    pub points: Vec<Vec<f64>>,
    /// Unit normals at `points`, pointing into the positive set.
    pub normals: Vec<Vec<f64>>,
    pub h: f64,
    pub ndim: usize,
}

impl FreeBoundary {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(number of cells) h^(n-1)`, a crude surface measure.
    pub fn cell_measure(&self) -> f64 {
        self.cells.len() as f64 * self.h.powi(self.ndim as i32 - 1)
    }

    /// The interface point closest to `x`.
    pub fn nearest(&self, x: &[f64]) -> Option<&[f64]> {
        self.points
            .iter()
            .min_by(|a, b| dist2(a, x).total_cmp(&dist2(b, x)))
            .map(|v| v.as_slice())
    }

    /// Distance from `x` to the nearest interface point; infinite if empty.
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.points.iter().map(|q| dist2(q, x)).fold(f64::INFINITY, f64::min).sqrt()
    }
}

/// Evaluates `u` through the piecewise-linear interpolant of `w` with ghost
/// values, the representation the energy quadrature uses. Exact on flat and
/// homogeneous profiles, where bilinear interpolation of `u` is only O(h^2)
/// away from the interface and O(h^alpha) at it.
pub(crate) struct WSampler<'a> {
    p: &'a Params,
    w: ScalarField,
}

impl<'a> WSampler<'a> {
    pub(crate) fn new(p: &'a Params, u: &ScalarField) -> Self {
        WSampler { p, w: u.with_values(w_with_ghosts(p, u)) }
    }

    pub(crate) fn eval(&self, x: &[f64]) -> Option<f64> {
        self.w.interpolate(x).map(|w| self.p.to_u(w))
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cells with a phase change, interface points on sign-changing edges, and
/// normals. Crossings are placed where the piecewise-linear `w` with
/// extrapolated ghost values vanishes.
pub fn extract_fb(p: &Params, u: &ScalarField) -> FreeBoundary {
    let g = &u.grid;
    let nd = g.ndim();
    let on = |i: usize| u.values[i] > 0.0;
    let w = w_with_ghosts(p, u);
    let mut fb = FreeBoundary { cells: Vec::new(), points: Vec::new(), normals: Vec::new(), h: g.h, ndim: nd };

    if nd == 1 {
        for i in 0..g.dims[0] - 1 {
            if on(i) == on(i + 1) {
                continue;
            }
            fb.cells.push(i);
            let (a, b, dir) = if on(i) { (i, i + 1, 1.0) } else { (i + 1, i, -1.0) };
            let t = crossing(w[a], w[b]);
            let xa = g.coords(a)[0];
            fb.points.push(vec![xa + dir * t * g.h]);
            fb.normals.push(vec![-dir]);
        }
        return fb;
    }

    let (n0, n1) = (g.dims[0], g.dims[1]);
    for i in 0..n0 - 1 {
        for j in 0..n1 - 1 {
            let c = [g.flat(i, j), g.flat(i + 1, j), g.flat(i, j + 1), g.flat(i + 1, j + 1)];
            let k = c.iter().filter(|&&q| on(q)).count();
            if k > 0 && k < 4 {
                fb.cells.push(c[0]);
            }
        }
    }
    let smooth = smoothed_indicator(u);
    let grad = |idx: usize| -> [f64; 2] {
        let [i, j] = g.multi(idx);
        let d = |lo: usize, hi: usize, span: usize| (smooth[hi] - smooth[lo]) / (span as f64 * g.h);
        let (im, ip) = (i.saturating_sub(1), (i + 1).min(n0 - 1));
        let (jm, jp) = (j.saturating_sub(1), (j + 1).min(n1 - 1));
        [d(g.flat(im, j), g.flat(ip, j), ip - im), d(g.flat(i, jm), g.flat(i, jp), jp - jm)]
    };
    for i in 0..n0 {
        for j in 0..n1 {
            let a = g.flat(i, j);
            for (axis, ok) in [(0, i + 1 < n0), (1, j + 1 < n1)] {
                if !ok {
                    continue;
                }
                let b = if axis == 0 { g.flat(i + 1, j) } else { g.flat(i, j + 1) };
                if on(a) == on(b) {
                    continue;
                }
                let (pos, zero) = if on(a) { (a, b) } else { (b, a) };
                let t = crossing(w[pos], w[zero]);
                let (xp, xz) = (g.coords(pos), g.coords(zero));
                let x = [xp[0] + t * (xz[0] - xp[0]), xp[1] + t * (xz[1] - xp[1])];
                let (gp, gz) = (grad(pos), grad(zero));
                let mut nrm = [gp[0] + t * (gz[0] - gp[0]), gp[1] + t * (gz[1] - gp[1])];
                let len = nrm[0].hypot(nrm[1]);
                if len > 0.0 {
                    nrm = [nrm[0] / len, nrm[1] / len];
                } else {
                    // fall back to the edge direction, towards the positive node
                    nrm = [0.0, 0.0];
                    nrm[axis] = if pos == a { -1.0 } else { 1.0 };
                }
                fb.points.push(x.to_vec());
                fb.normals.push(nrm.to_vec());
            }
        }
    }
    fb
}

/// Fraction of the way from the positive node to the zero node where the
/// linear `w` vanishes; the zero node itself when its ghost value is zero.
fn crossing(w_pos: f64, w_zero: f64) -> f64 {
    if w_zero < 0.0 {
        w_pos / (w_pos - w_zero)
    } else {
        1.0
    }
}

/// 3x3 box average of the positivity indicator, truncated at the box.
fn smoothed_indicator(u: &ScalarField) -> Vec<f64> {
    let g = &u.grid;
    let (n0, n1) = (g.dims[0] as isize, g.dims[1] as isize);
    (0..u.values.len())
        .map(|idx| {
            let [i, j] = g.multi(idx);
            let (mut s, mut n) = (0.0, 0.0);
            for di in -1..=1isize {
                for dj in -1..=1isize {
                    let (a, b) = (i as isize + di, j as isize + dj);
                    if a >= 0 && b >= 0 && a < n0 && b < n1 {
                        n += 1.0;
                        if u.values[(a * n1 + b) as usize] > 0.0 {
                            s += 1.0;
                        }
                    }
                }
            }
            s / n
        })
        .collect()
}

/// Least-squares line through the interface points in a ball, with the
/// half-width of the thinnest slab of that normal containing them, over `r`.
/// The normal is oriented to agree with the mean point normal.
pub fn flatness(fb: &FreeBoundary, center: &[f64], r: f64) -> Result<(Vec<f64>, f64)> {
    let inside: Vec<usize> = (0..fb.points.len()).filter(|&k| dist2(&fb.points[k], center) <= r * r).collect();
    if fb.ndim != 2 {
        return Err(Error::Domain("flatness needs a two-dimensional free boundary".into()));
    }
    if inside.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, found: inside.len() });
    }
    let m = inside.len() as f64;
    let mean = [0, 1].map(|a| inside.iter().map(|&k| fb.points[k][a]).sum::<f64>() / m);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &k in &inside {
        let (dx, dy) = (fb.points[k][0] - mean[0], fb.points[k][1] - mean[1]);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // eigenvector of the smaller eigenvalue of [[sxx, sxy], [sxy, syy]]
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut nu = [-theta.sin(), theta.cos()];
    let avg = [0, 1].map(|a| inside.iter().map(|&k| fb.normals[k][a]).sum::<f64>());
    if nu[0] * avg[0] + nu[1] * avg[1] < 0.0 {
        nu = [-nu[0], -nu[1]];
    }
    let proj: Vec<f64> = inside.iter().map(|&k| (fb.points[k][0] - mean[0]) * nu[0] + (fb.points[k][1] - mean[1]) * nu[1]).collect();
    let lo = proj.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((nu.to_vec(), 0.5 * (hi - lo) / r))
}

/// Largest `|u_i^2 - u_j^2| / h` over grid edges inside the central half of
/// the box (the box shrunk by one half about its midpoint).
pub fn lipschitz_u2(u: &ScalarField) -> f64 {
    let g = &u.grid;
    let nd = g.ndim();
    let lo = g.lo();
    let hi = g.hi();
    let inner = |idx: usize| {
        let x = g.coords(idx);
        (0..nd).all(|a| {
            let (c, half) = (0.5 * (lo[a] + hi[a]), 0.25 * (hi[a] - lo[a]));
            (x[a] - c).abs() <= half + 1e-12
        })
    };
    let v = &u.values;
    let mut best = 0.0f64;
    for idx in 0..v.len() {
        if !inner(idx) {
            continue;
        }
        let m = g.multi(idx);
        for axis in 0..nd {
            if m[axis] + 1 >= g.dims[axis] {
                continue;
            }
            let j = if nd == 1 || axis == 1 { idx + 1 } else { idx + g.dims[1] };
            if inner(j) {
                best = best.max((v[idx] * v[idx] - v[j] * v[j]).abs() / g.h);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apcore::{make_params, Grid};

    #[test]
    fn crossing_is_linear_root() {
        assert_eq!(crossing(1.0, -1.0), 0.5);
        assert_eq!(crossing(0.3, 0.0), 1.0);
    }

    #[test]
    fn one_dimensional_boundary() {
        let p = make_params(1.0).unwrap();
        let g = Grid::covering(&[-1.0], &[1.0], 0.125).unwrap();
        let u = ScalarField::from_fn(g, |x| p.c0 * (x[0] - 0.3).max(0.0).powf(p.alpha));
        let fb = extract_fb(&p, &u);
        assert_eq!(fb.points.len(), 1);
        assert!((fb.points[0][0] - 0.3).abs() < 1e-12, "{:?}", fb.points);
        assert_eq!(fb.normals[0], vec![1.0]);
        assert!(flatness(&fb, &[0.3], 0.5).is_err());
    }

    #[test]
    fn smoothed_indicator_of_constant_phase() {
        let g = Grid::covering(&[0.0, 0.0], &[1.0, 1.0], 0.25).unwrap();
        let u = ScalarField::from_fn(g, |_| 1.0);
        assert!(smoothed_indicator(&u).iter().all(|&s| s == 1.0));
    }
}
