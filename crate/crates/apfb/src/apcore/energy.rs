use super::field::{Region, ScalarField};
use super::params::Params;
use crate::error::Result;
use crate::par;
use crate::quad::{self, Vtx};

/// Split of `J(u, region)` into its two terms plus the per-cell totals.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBreakdown {
    pub dirichlet_part: f64,
    pub potential_part: f64,
    pub total: f64,
    pub density: Vec<f64>,
}

/// How `J` is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Piecewise-linear interpolation of `w = (u/c0)^(1/alpha)` on cells
    /// (intervals, or four triangles per square) with exact integration of
    /// the resulting power laws. Exact on flat and homogeneous profiles.
    #[default]
    PowerLaw,
    /// Cell midpoint rule with forward-difference gradients; the potential
    /// counts iff the cell's midpoint value is positive.
    Midpoint,
}

/// Samples per axis used to estimate covered fractions in the midpoint rule.
const FRACTION_SAMPLES: usize = 33;
/// Subdivision depth for triangles cut by a circle.
const BALL_DEPTH: u32 = 3;

pub fn energy(p: &Params, u: &ScalarField, region: Option<&Region>) -> Result<EnergyBreakdown> {
    energy_with(p, u, region, Quadrature::PowerLaw)
}

pub fn energy_with(p: &Params, u: &ScalarField, region: Option<&Region>, quad: Quadrature) -> Result<EnergyBreakdown> {
    let region = region.unwrap_or(&Region::Whole);
    region.check_inside(&u.grid)?;
    let cells = match quad {
        Quadrature::PowerLaw => {
            let k = 0.5 * p.c0 * p.c0 * p.alpha * p.alpha;
            cell_integrals(p, u, region)
                .into_iter()
                .map(|c| [k * c.grad2_i, k * c.i])
                .collect::<Vec<_>>()
        }
        Quadrature::Midpoint => midpoint_cells(p, u, region),
    };
    let dir: Vec<f64> = cells.iter().map(|c| c[0]).collect();
    let pot: Vec<f64> = cells.iter().map(|c| c[1]).collect();
    let dirichlet_part = par::sum(&dir);
    let potential_part = par::sum(&pot);
    Ok(EnergyBreakdown {
        dirichlet_part,
        potential_part,
        total: dirichlet_part + potential_part,
        density: cells.iter().map(|c| c[0] + c[1]).collect(),
    })
}

/// Per-cell integrals of `(w^+)^p` weighted by `|grad w|^2`, `1` and `|grad w|`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CellSums {
    pub grad2_i: f64,
    pub i: f64,
    pub grad_i: f64,
}

impl CellSums {
    fn add(&mut self, grad2: f64, i: f64) {
        self.grad2_i += grad2 * i;
        self.i += i;
        self.grad_i += grad2.sqrt() * i;
    }
}

/// `w` at positive nodes; at zero nodes next to the positive set, a nonpositive
/// ghost value linearly extrapolated from the positive side, so that the
/// piecewise-linear interpolant places the interface between nodes.
pub fn w_with_ghosts(p: &Params, u: &ScalarField) -> Vec<f64> {
    let g = &u.grid;
    let w: Vec<f64> = u.values.iter().map(|&v| p.to_w(v)).collect();
    let dirs: &[(isize, isize)] = if g.ndim() == 1 {
        &[(1, 0), (-1, 0)]
    } else {
        &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    };
    let dims = [g.dims[0] as isize, if g.ndim() == 1 { 1 } else { g.dims[1] as isize }];
    let at = |i: isize, j: isize| -> Option<f64> {
        if i < 0 || j < 0 || i >= dims[0] || j >= dims[1] {
            None
        } else {
            Some(w[i as usize * dims[1] as usize + j as usize])
        }
    };
    par::map(w.len(), |idx| {
        if w[idx] > 0.0 {
            return w[idx];
        }
        let [i, j] = g.multi(idx);
        let (i, j) = (i as isize, j as isize);
        let mut sum = 0.0;
        let mut n = 0usize;
        for &(di, dj) in dirs {
            if let (Some(a), Some(b)) = (at(i + di, j + dj), at(i + 2 * di, j + 2 * dj)) {
                if a > 0.0 && b > 0.0 {
                    sum += 2.0 * a - b;
                    n += 1;
                }
            }
        }
        if n == 0 {
            0.0
        } else {
            (sum / n as f64).min(0.0)
        }
    })
}

/// Region test with cell classification, in the padded 2D coordinates.
enum Shape {
    Whole,
    Interval(f64, f64),
    Rect([f64; 2], [f64; 2]),
    Disk([f64; 2], f64),
}

impl Shape {
    fn from_region(r: &Region, nd: usize) -> Self {
        match r {
            Region::Whole => Shape::Whole,
            Region::Ball { center, r } if nd == 1 => Shape::Interval(center[0] - r, center[0] + r),
            Region::Box { lo, hi } if nd == 1 => Shape::Interval(lo[0], hi[0]),
            Region::Ball { center, r } => Shape::Disk([center[0], center[1]], *r),
            Region::Box { lo, hi } => Shape::Rect([lo[0], lo[1]], [hi[0], hi[1]]),
        }
    }
}

/// 0 = outside, 1 = inside, 2 = cut.
fn classify_rect(shape: &Shape, lo: [f64; 2], hi: [f64; 2]) -> u8 {
    match shape {
        Shape::Whole => 1,
        Shape::Interval(a, b) => {
            if lo[0] >= *a && hi[0] <= *b {
                1
            } else if hi[0] <= *a || lo[0] >= *b {
                0
            } else {
                2
            }
        }
        Shape::Rect(a, b) => {
            if lo[0] >= a[0] && lo[1] >= a[1] && hi[0] <= b[0] && hi[1] <= b[1] {
                1
            } else if hi[0] <= a[0] || hi[1] <= a[1] || lo[0] >= b[0] || lo[1] >= b[1] {
                0
            } else {
                2
            }
        }
        Shape::Disk(c, r) => {
            let far = |k: usize| (lo[k] - c[k]).abs().max((hi[k] - c[k]).abs());
            let near = |k: usize| (lo[k] - c[k]).max(0.0).max(c[k] - hi[k]);
            let (f0, f1, n0, n1) = (far(0), far(1), near(0), near(1));
            if f0 * f0 + f1 * f1 <= r * r {
                1
            } else if n0 * n0 + n1 * n1 >= r * r {
                0
            } else {
                2
            }
        }
    }
}

pub(crate) fn cell_integrals(p: &Params, u: &ScalarField, region: &Region) -> Vec<CellSums> {
    let g = &u.grid;
    let pw = p.w_power();
    let w = w_with_ghosts(p, u);
    let shape = Shape::from_region(region, g.ndim());
    let h = g.h;
    if g.ndim() == 1 {
        let n = g.dims[0] - 1;
        return par::map(n, |i| {
            let mut c = CellSums::default();
            let (wl, wr) = (w[i], w[i + 1]);
            if wl.max(wr) <= 0.0 {
                return c;
            }
            let x0 = g.origin[0] + i as f64 * h;
            let (mut a, mut b) = (x0, x0 + h);
            if let Shape::Interval(lo, hi) = shape {
                a = a.max(lo);
                b = b.min(hi);
                if b <= a {
                    return c;
                }
            }
            let slope = (wr - wl) / h;
            let wa = wl + slope * (a - x0);
            let wb = wl + slope * (b - x0);
            c.add(slope * slope, quad::interval_power(b - a, wa, wb, pw));
            c
        });
    }
    let (n0, n1) = (g.dims[0] - 1, g.dims[1] - 1);
    let row = g.dims[1];
    par::map(n0 * n1, |cell| {
        let (i, j) = (cell / n1, cell % n1);
        let mut c = CellSums::default();
        let k00 = i * row + j;
        let cw = [w[k00], w[k00 + row], w[k00 + row + 1], w[k00 + 1]];
        if cw.iter().all(|&v| v <= 0.0) {
            return c;
        }
        let x = g.origin[0] + i as f64 * h;
        let y = g.origin[1] + j as f64 * h;
        let lo = [x, y];
        let hi = [x + h, y + h];
        let kind = classify_rect(&shape, lo, hi);
        if kind == 0 {
            return c;
        }
        let wc = 0.25 * (cw[0] + cw[1] + cw[2] + cw[3]);
        let corners: [Vtx; 4] = [[x, y, cw[0]], [x + h, y, cw[1]], [x + h, y + h, cw[2]], [x, y + h, cw[3]]];
        let center: Vtx = [x + 0.5 * h, y + 0.5 * h, wc];
        for k in 0..4 {
            let t = [corners[k], corners[(k + 1) % 4], center];
            let grad2 = tri_grad2(&t);
            let i_t = if kind == 1 {
                quad::triangle_power(0.25 * h * h, [t[0][2], t[1][2], t[2][2]], pw)
            } else {
                tri_in_shape(&t, &shape, pw, BALL_DEPTH)
            };
            c.add(grad2, i_t);
        }
        c
    })
}

fn tri_grad2(t: &[Vtx; 3]) -> f64 {
    let (e1x, e1y, d1) = (t[1][0] - t[0][0], t[1][1] - t[0][1], t[1][2] - t[0][2]);
    let (e2x, e2y, d2) = (t[2][0] - t[0][0], t[2][1] - t[0][1], t[2][2] - t[0][2]);
    let det = e1x * e2y - e1y * e2x;
    let gx = (d1 * e2y - d2 * e1y) / det;
    let gy = (e1x * d2 - e2x * d1) / det;
    gx * gx + gy * gy
}

fn tri_in_shape(t: &[Vtx; 3], shape: &Shape, pw: f64, depth: u32) -> f64 {
    match shape {
        Shape::Whole | Shape::Interval(..) => quad::polygon_power(t, pw),
        Shape::Rect(a, b) => {
            let mut poly = t.to_vec();
            poly = quad::clip(&poly, |v| v[0] - a[0]);
            poly = quad::clip(&poly, |v| b[0] - v[0]);
            poly = quad::clip(&poly, |v| v[1] - a[1]);
            poly = quad::clip(&poly, |v| b[1] - v[1]);
            quad::polygon_power(&poly, pw)
        }
        Shape::Disk(c, r) => tri_in_disk(t, *c, *r, pw, depth),
    }
}

fn tri_in_disk(t: &[Vtx; 3], c: [f64; 2], r: f64, pw: f64, depth: u32) -> f64 {
    let sd = |v: &Vtx| r - ((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2)).sqrt();
    let s = [sd(&t[0]), sd(&t[1]), sd(&t[2])];
    if s.iter().all(|&v| v >= 0.0) {
        return quad::polygon_power(t, pw);
    }
    if point_triangle_distance(c, t) >= r {
        return 0.0;
    }
    if depth == 0 {
        // chord approximation of the circle inside a tiny triangle
        let clipped = clip_by_values(t, s);
        return quad::polygon_power(&clipped, pw);
    }
    let mid = |a: &Vtx, b: &Vtx| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])];
    let (m01, m12, m20) = (mid(&t[0], &t[1]), mid(&t[1], &t[2]), mid(&t[2], &t[0]));
    tri_in_disk(&[t[0], m01, m20], c, r, pw, depth - 1)
        + tri_in_disk(&[m01, t[1], m12], c, r, pw, depth - 1)
        + tri_in_disk(&[m20, m12, t[2]], c, r, pw, depth - 1)
        + tri_in_disk(&[m01, m12, m20], c, r, pw, depth - 1)
}

fn clip_by_values(t: &[Vtx; 3], s: [f64; 3]) -> Vec<Vtx> {
    let mut out = Vec::with_capacity(4);
    for k in 0..3 {
        let (a, b) = (t[k], t[(k + 1) % 3]);
        let (fa, fb) = (s[k], s[(k + 1) % 3]);
        if fa >= 0.0 {
            out.push(a);
        }
        if (fa >= 0.0) != (fb >= 0.0) {
            let q = fa / (fa - fb);
            out.push([a[0] + q * (b[0] - a[0]), a[1] + q * (b[1] - a[1]), a[2] + q * (b[2] - a[2])]);
        }
    }
    out
}

fn point_triangle_distance(pt: [f64; 2], t: &[Vtx; 3]) -> f64 {
    let cross = |a: &Vtx, b: &Vtx| (b[0] - a[0]) * (pt[1] - a[1]) - (b[1] - a[1]) * (pt[0] - a[0]);
    let (c0, c1, c2) = (cross(&t[0], &t[1]), cross(&t[1], &t[2]), cross(&t[2], &t[0]));
    if (c0 >= 0.0 && c1 >= 0.0 && c2 >= 0.0) || (c0 <= 0.0 && c1 <= 0.0 && c2 <= 0.0) {
        return 0.0;
    }
    let seg = |a: &Vtx, b: &Vtx| {
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let l2 = dx * dx + dy * dy;
        let q = (((pt[0] - a[0]) * dx + (pt[1] - a[1]) * dy) / l2).clamp(0.0, 1.0);
        ((a[0] + q * dx - pt[0]).powi(2) + (a[1] + q * dy - pt[1]).powi(2)).sqrt()
    };
    seg(&t[0], &t[1]).min(seg(&t[1], &t[2])).min(seg(&t[2], &t[0]))
}

fn midpoint_cells(p: &Params, u: &ScalarField, region: &Region) -> Vec<[f64; 2]> {
    let g = &u.grid;
    let h = g.h;
    let shape = Shape::from_region(region, g.ndim());
    let v = &u.values;
    let fraction = |lo: [f64; 2], hi: [f64; 2], nd: usize| -> f64 {
        match classify_rect(&shape, lo, hi) {
            0 => 0.0,
            1 => 1.0,
            _ => {
                let m = FRACTION_SAMPLES;
                let mut hits = 0usize;
                let ny = if nd == 1 { 1 } else { m };
                for a in 0..m {
                    for b in 0..ny {
                        let x = lo[0] + (a as f64 + 0.5) / m as f64 * h;
                        let y = lo[1] + (b as f64 + 0.5) / m as f64 * h;
                        let pt = [x, y];
                        if region.contains(&pt[..nd]) {
                            hits += 1;
                        }
                    }
                }
                hits as f64 / (m * ny) as f64
            }
        }
    };
    if g.ndim() == 1 {
        return par::map(g.dims[0] - 1, |i| {
            let x = g.origin[0] + i as f64 * h;
            let f = fraction([x, 0.0], [x + h, 0.0], 1);
            if f == 0.0 {
                return [0.0, 0.0];
            }
            let d = (v[i + 1] - v[i]) / h;
            let mid = 0.5 * (v[i] + v[i + 1]);
            [f * 0.5 * d * d * h, f * p.potential(mid) * h]
        });
    }
    let (n0, n1) = (g.dims[0] - 1, g.dims[1] - 1);
    let row = g.dims[1];
    par::map(n0 * n1, |cell| {
        let (i, j) = (cell / n1, cell % n1);
        let x = g.origin[0] + i as f64 * h;
        let y = g.origin[1] + j as f64 * h;
        let f = fraction([x, y], [x + h, y + h], 2);
        if f == 0.0 {
            return [0.0, 0.0];
        }
        let k = i * row + j;
        let (a, b, c, d) = (v[k], v[k + row], v[k + row + 1], v[k + 1]);
        let gx2 = 0.5 * ((b - a).powi(2) + (c - d).powi(2));
        let gy2 = 0.5 * ((d - a).powi(2) + (c - b).powi(2));
        let mid = 0.25 * (a + b + c + d);
        [f * 0.5 * (gx2 + gy2), f * p.potential(mid) * h * h]
    })
}
