use crate::apcore::{Grid, ScalarField};
use crate::error::{domain, Error, Result};
use crate::fbanalysis::GrowthFit;
use crate::fit::linear_fit;
use crate::par;

/// `Delta phi + s phi_n / x_n = 0` on `[-L, L] x [0, H]` with Dirichlet data
/// on the top and lateral sides and the regularity condition at `x_n = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedProblem {
    pub s: f64,
    pub l: f64,
    pub height: f64,
    pub grid: Grid,
    /// Boundary data sampled on every node; only top and lateral nodes are read.
    pub data: Vec<f64>,
    /// Stopping tolerance on the largest nodal correction, relative to
    /// `max(1, max |data|)`.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl LinearizedProblem {
    pub fn new(s: f64, l: f64, height: f64, h: f64, data: impl Fn(&[f64]) -> f64) -> Result<Self> {
        if !(s > -1.0 && s < 0.0) {
            return domain(format!("degeneracy exponent s = {s} outside (-1, 0)"));
        }
        if !(l > 0.0 && height > 0.0) {
            return domain("rectangle sides must be positive");
        }
        let grid = Grid::covering(&[-l, 0.0], &[l, height], h)?;
        if grid.dims[0] < 3 || grid.dims[1] < 3 {
            return domain("need at least three nodes per axis");
        }
        let data = (0..grid.len()).map(|i| data(&grid.point(i))).collect();
        Ok(LinearizedProblem { s, l, height, grid, data, tol: 1e-12, max_sweeps: 100_000 })
    }

    /// Weights `(w1, w2)` with `phi(x', 0) = w1 phi(x', h) + w2 phi(x', 2h)`,
    /// exact on constants and on `x_n^(1-s)`.
    pub fn bottom_weights(&self) -> (f64, f64) {
        let q = 2f64.powf(1.0 - self.s);
        (q / (q - 1.0), -1.0 / (q - 1.0))
    }
}

/// Stencil of node `(i, j)`, `j >= 1`: lateral, down and up coefficients
/// after eliminating the bottom row, and the diagonal.
fn stencil(s: f64, w: (f64, f64), j: usize) -> (f64, f64, f64) {
    let jf = j as f64;
    let up = 1.0 + s / (2.0 * jf);
    let dn = 1.0 - s / (2.0 * jf);
    if j == 1 {
        // phi_{i,0} is replaced by w1 phi_{i,1} + w2 phi_{i,2}
        (0.0, up + dn * w.1, -4.0 + dn * w.0)
    } else {
        (dn, up, -4.0)
    }
}

/// Red-black SOR. Nodes of one colour only read the other colour, so each
/// half-sweep is order independent and the result does not depend on the
/// thread count.
pub fn solve_linearized(lp: &LinearizedProblem) -> Result<ScalarField> {
    let g = &lp.grid;
    let (nx, ny) = (g.dims[0], g.dims[1]);
    let w = lp.bottom_weights();
    let s = lp.s;
    let scale = lp.data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let free = |i: usize, j: usize| i > 0 && i + 1 < nx && j > 0 && j + 1 < ny;

    let mut phi = lp.data.clone();
    for i in 1..nx - 1 {
        for j in 0..ny - 1 {
            phi[g.flat(i, j)] = 0.0;
        }
    }
    // the regularity condition doubles the effective height
    let rho = 0.5 * ((std::f64::consts::PI * g.h / (2.0 * lp.l)).cos() + (std::f64::consts::PI * g.h / (2.0 * lp.height)).cos());
    let omega = 2.0 / (1.0 + (1.0 - rho * rho).sqrt());

    let local = |phi: &[f64], i: usize, j: usize| -> (f64, f64) {
        let (dn, up, diag) = stencil(s, w, j);
        let v = |a: usize, b: usize| phi[g.flat(a, b)];
        let off = v(i - 1, j) + v(i + 1, j) + up * v(i, j + 1) + if j > 1 { dn * v(i, j - 1) } else { 0.0 };
        (off, diag)
    };
    let residual = |phi: &[f64]| -> f64 {
        par::map(nx, |i| {
            (0..ny).filter(|&j| free(i, j)).fold(0.0f64, |m, j| {
                let (off, diag) = local(phi, i, j);
                m.max(((off + diag * phi[g.flat(i, j)]) / diag).abs())
            })
        })
        .into_iter()
        .fold(0.0, f64::max)
    };

    let mut res = f64::INFINITY;
    for sweep in 0..lp.max_sweeps {
        for colour in 0..2 {
            let cols = par::map(nx, |i| {
                let mut col: Vec<f64> = (0..ny).map(|j| phi[g.flat(i, j)]).collect();
                for j in 0..ny {
                    if free(i, j) && (i + j) % 2 == colour {
                        let (off, diag) = local(&phi, i, j);
                        col[j] = (1.0 - omega) * col[j] - omega * off / diag;
                    }
                }
                col
            });
            for (i, col) in cols.into_iter().enumerate() {
                phi[g.flat(i, 0)..g.flat(i, 0) + ny].copy_from_slice(&col);
            }
        }
        if sweep % 10 == 9 {
            res = residual(&phi);
            if res <= lp.tol * scale {
                fill_bottom(&mut phi, g, w);
                let mut out = ScalarField::zeros(g.clone());
                out.values = phi;
                return Ok(out);
            }
        }
    }
    Err(Error::NoConvergence { iterations: lp.max_sweeps, residual: res })
}

fn fill_bottom(phi: &mut [f64], g: &Grid, w: (f64, f64)) {
    for i in 1..g.dims[0] - 1 {
        phi[g.flat(i, 0)] = w.0 * phi[g.flat(i, 1)] + w.1 * phi[g.flat(i, 2)];
    }
}

/// `phi'' + s phi'/x` for `phi = x^(1-s)`, each term evaluated separately.
pub fn power_profile_residual(s: f64, x: f64) -> f64 {
    let d1 = (1.0 - s) * x.powf(-s);
    let d2 = (1.0 - s) * (-s) * x.powf(-s - 1.0);
    d2 + s * d1 / x
}

/// Log-log fit of `max_{|x| <= r} |phi(x) - phi(0) - a' x'|` against `r`,
/// with `phi(0)` and `a'` read off the bottom row at the origin. The slope
/// estimates `1 + sigma`.
pub fn linearized_decay(sol: &ScalarField, radii: &[f64]) -> Result<GrowthFit> {
    let g = &sol.grid;
    if g.ndim() != 2 || g.origin[1] != 0.0 {
        return domain("expected a solution on a half rectangle");
    }
    let i0 = (-g.origin[0] / g.h).round() as usize;
    if i0 == 0 || i0 + 1 >= g.dims[0] || ((i0 as f64) * g.h + g.origin[0]).abs() > 1e-9 * g.h {
        return domain("x' = 0 must be an interior column");
    }
    let v = |i: usize, j: usize| sol.values[g.flat(i, j)];
    let phi0 = v(i0, 0);
    let slope = (v(i0 + 1, 0) - v(i0 - 1, 0)) / (2.0 * g.h);
    let maxima: Vec<f64> = radii
        .iter()
        .map(|&r| {
            (0..g.len()).fold(0.0f64, |m, k| {
                let x = g.coords(k);
                if x[0] * x[0] + x[1] * x[1] <= r * r {
                    m.max((sol.values[k] - phi0 - slope * x[0]).abs())
                } else {
                    m
                }
            })
        })
        .collect();
    let (mut lx, mut ly, mut excluded) = (Vec::new(), Vec::new(), Vec::new());
    for (&r, &m) in radii.iter().zip(&maxima) {
        if m > 0.0 {
            lx.push(r.ln());
            ly.push(m.ln());
        } else {
            excluded.push(r);
        }
    }
    let (k, b) = linear_fit(&lx, &ly).ok_or_else(|| Error::IllConditioned("too few radii with a nonzero deviation".into()))?;
    Ok(GrowthFit { radii: radii.to_vec(), maxima, slope: k, intercept: b.exp(), excluded })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bottom_weights_are_exact_on_the_kernel() {
        let lp = LinearizedProblem::new(-2.0 / 3.0, 1.0, 1.0, 0.25, |_| 0.0).unwrap();
        let (w1, w2) = lp.bottom_weights();
        assert!((w1 + w2 - 1.0).abs() < 1e-15);
        let h = 0.01f64;
        let e = 1.0 - lp.s;
        assert!((w1 * h.powf(e) + w2 * (2.0 * h).powf(e)).abs() < 1e-15);
    }

    #[test]
    fn stencil_keeps_the_sign_structure() {
        for s in [-0.9, -0.5, -0.1] {
            let lp = LinearizedProblem::new(s, 1.0, 1.0, 0.25, |_| 0.0).unwrap();
            for j in 1..5 {
                let (dn, up, diag) = stencil(s, lp.bottom_weights(), j);
                assert!(dn >= 0.0 && up >= 0.0 && diag < 0.0);
                assert!(2.0 + dn + up <= -diag + 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(LinearizedProblem::new(0.2, 1.0, 1.0, 0.25, |_| 0.0).is_err());
        assert!(LinearizedProblem::new(-1.0, 1.0, 1.0, 0.25, |_| 0.0).is_err());
    }
}
