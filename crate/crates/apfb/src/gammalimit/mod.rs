//! Rescaled energies, the total-variation lower bound and recovery fields for
//! the perimeter limit as `gamma -> 2`.

mod geometry;

pub use geometry::SetGeometry;

use crate::apcore::energy::cell_integrals;
use crate::apcore::{energy, make_params, Grid, Params, Region, ScalarField};
use crate::error::{domain, Result};
use crate::par;
use std::f64::consts::{PI, TAU};

/// `c_gamma J(u, Omega)`.
pub fn rescaled_energy(p: &Params, u: &ScalarField) -> Result<f64> {
    Ok(p.c_gamma * energy(p, u, None)?.total)
}

/// Total variation of `u^(1-gamma/2)` for the same piecewise-linear `w`
/// interpolant the energy quadrature integrates. On every triangle the
/// rescaled energy density `c_gamma (|grad u|^2/2 + W(u))` dominates
/// `|grad u^(1-gamma/2)|` pointwise, so the discrete inequality is exact.
pub fn bv_lower_bound(p: &Params, u: &ScalarField) -> Result<f64> {
    let kappa = 1.0 - 0.5 * p.gamma;
    let k = p.c0.powf(kappa) * p.alpha * kappa;
    let cells = cell_integrals(p, u, &Region::Whole);
    let g: Vec<f64> = cells.iter().map(|c| c.grad_i).collect();
    Ok(k * par::sum(&g))
}

/// Isotropic discrete total variation of the indicator of `{u > 0}`, with
/// cell gradients from averaged edge differences.
pub fn indicator_perimeter(u: &ScalarField) -> Result<f64> {
    let g = &u.grid;
    if g.ndim() != 2 {
        return domain("perimeter of an indicator needs a 2D field");
    }
    let (n0, n1) = (g.dims[0] - 1, g.dims[1] - 1);
    let chi = |i: usize, j: usize| if u.values[g.flat(i, j)] > 0.0 { 1.0f64 } else { 0.0 };
    let per_cell = par::map(n0 * n1, |c| {
        let (i, j) = (c / n1, c % n1);
        let gx = 0.5 * ((chi(i + 1, j) - chi(i, j)) + (chi(i + 1, j + 1) - chi(i, j + 1)));
        let gy = 0.5 * ((chi(i, j + 1) - chi(i, j)) + (chi(i + 1, j + 1) - chi(i + 1, j)));
        gx.hypot(gy) * g.h
    });
    Ok(par::sum(&per_cell))
}

/// Cutoff `phi` blending an approximand into the recovery field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Cutoff {
    /// `((d - delta)/delta)^alpha`, clipped to `[0, 1]`.
    #[default]
    PowerLaw,
    /// `3t^2 - 2t^3` with `t = (d - delta)/delta` clipped to `[0, 1]`.
    Smooth,
}

impl Cutoff {
    pub fn eval(self, p: &Params, delta: f64, d: f64) -> f64 {
        let t = ((d - delta) / delta).clamp(0.0, 1.0);
        match self {
            Cutoff::PowerLaw => t.powf(p.alpha),
            Cutoff::Smooth => t * t * (3.0 - 2.0 * t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryProfile {
    pub delta: f64,
    pub cutoff: Cutoff,
}

impl RecoveryProfile {
    pub fn new(delta: f64) -> Self {
        RecoveryProfile { delta, cutoff: Cutoff::default() }
    }
}

/// `w = c0 min(d, delta)^alpha` with `d` the inside distance to `dE`, plus
/// `cutoff(d) u_target` when an approximand is given. The cutoff vanishes for
/// `d <= delta` and equals one for `d >= 2 delta`.
pub fn recovery_field(p: &Params, set: &SetGeometry, prof: &RecoveryProfile, grid: &Grid, u_target: Option<&ScalarField>) -> Result<ScalarField> {
    set.validate()?;
    if grid.ndim() != 2 {
        return domain("recovery fields are planar");
    }
    if !set.inside(&grid.lo(), &grid.hi()) {
        return domain("the set must lie inside the field box");
    }
    let fs = set.feature_size();
    if !(prof.delta > 0.0 && prof.delta < fs) {
        return domain(format!("layer width {} must lie in (0, feature size {fs})", prof.delta));
    }
    if let Some(t) = u_target {
        if t.grid != *grid {
            return domain("approximand must live on the recovery grid");
        }
    }
    let delta = prof.delta;
    let values = par::map(grid.len(), |i| {
        let d = set.signed_distance(&grid.point(i));
        if d <= 0.0 {
            return 0.0;
        }
        let mut v = p.c0 * d.min(delta).powf(p.alpha);
        if let Some(t) = u_target {
            v += prof.cutoff.eval(p, delta, d) * t.values[i].max(0.0);
        }
        v
    });
    let mut out = ScalarField::zeros(grid.clone());
    out.values = values;
    out.freeze_boundary();
    Ok(out)
}

/// Closed-form energy of the disk recovery field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPrediction {
    /// `(c0 delta^alpha)^(1-gamma/2)`.
    pub layer_factor: f64,
    pub perimeter: f64,
    /// `2 pi a alpha kappa delta / (alpha kappa + 1)`, from `Per({d > s}) = 2 pi (R - s)`.
    pub curvature_correction: f64,
    /// Layer energy `a (perimeter) - curvature correction`.
    pub layer_energy: f64,
    /// `c_gamma W(c0 delta^alpha) pi (R - delta)^2` from the flat core.
    pub core_potential: f64,
}

impl DiskPrediction {
    pub fn total(&self) -> f64 {
        self.layer_energy + self.core_potential
    }
}

/// In the layer the profile satisfies `|u'|^2/2 = W(u)`, so the rescaled
/// density is exactly `|grad u^kappa|` and the coarea formula gives
/// `int_0^delta (c0^kappa s^(alpha kappa))' 2 pi (R - s) ds`.
pub fn disk_prediction(p: &Params, r: f64, delta: f64) -> DiskPrediction {
    let kappa = 1.0 - 0.5 * p.gamma;
    let ak = p.alpha * kappa;
    let top = p.c0 * delta.powf(p.alpha);
    let a = top.powf(kappa);
    let curvature_correction = TAU * a * ak * delta / (ak + 1.0);
    let layer_energy = TAU * a * r - curvature_correction;
    let core_potential = p.c_gamma * p.potential(top) * PI * (r - delta).max(0.0).powi(2);
    DiskPrediction { layer_factor: a, perimeter: TAU * r, curvature_correction, layer_energy, core_potential }
}

/// `||v - target||_{L1} + ||chi_{v>0} - chi_E||_{L1}` with trapezoid weights;
/// the target is zero when not given.
pub fn dx_to_target(v: &ScalarField, set: &SetGeometry, target: Option<&ScalarField>) -> Result<f64> {
    let g = &v.grid;
    if g.ndim() != 2 {
        return domain("expected a planar field");
    }
    if let Some(t) = target {
        if t.grid != *g {
            return domain("target must live on the same grid");
        }
    }
    let terms = par::map(g.len(), |i| {
        let [a, b] = g.multi(i);
        let edge = |k: usize, n: usize| if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
        let wt = edge(a, g.dims[0]) * edge(b, g.dims[1]) * g.h * g.h;
        let t = target.map_or(0.0, |t| t.values[i]);
        let inside = set.signed_distance(&g.point(i)) > 0.0;
        let chi = if (v.values[i] > 0.0) != inside { 1.0 } else { 0.0 };
        wt * ((v.values[i] - t).abs() + chi)
    });
    Ok(par::sum(&terms))
}

/// One row of the sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub delta: f64,
    pub h: f64,
    pub j_rescaled: f64,
    pub bv_bound: f64,
    pub perimeter: f64,
    /// `(c0 delta^alpha)^(1-gamma/2)`; zero for the empty set.
    pub layer_factor_predicted: f64,
}

pub const SWEEP_COLUMNS: [&str; 7] = ["gamma", "delta", "h", "J_rescaled", "bv_bound", "perimeter", "layer_factor_predicted"];

impl SweepRow {
    pub fn fields(&self) -> [f64; 7] {
        [self.gamma, self.delta, self.h, self.j_rescaled, self.bv_bound, self.perimeter, self.layer_factor_predicted]
    }
}

/// Recovery fields of `set` in the unit square for every `(gamma, delta)`,
/// gammas outermost.
pub fn gamma_sweep(set: &SetGeometry, gammas: &[f64], deltas: &[f64], h: f64) -> Result<Vec<SweepRow>> {
    let grid = Grid::covering(&[0.0, 0.0], &[1.0, 1.0], h)?;
    let params = gammas.iter().map(|&g| make_params(g)).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, f64)> = (0..gammas.len()).flat_map(|k| deltas.iter().map(move |&d| (k, d))).collect();
    let rows = par::map(jobs.len(), |k| {
        let (gi, delta) = jobs[k];
        let p = &params[gi];
        let u = recovery_field(p, set, &RecoveryProfile::new(delta), &grid, None)?;
        let empty = set.perimeter() == 0.0;
        Ok(SweepRow {
            gamma: p.gamma,
            delta,
            h,
            j_rescaled: rescaled_energy(p, &u)?,
            bv_bound: bv_lower_bound(p, &u)?,
            perimeter: set.perimeter(),
            layer_factor_predicted: if empty { 0.0 } else { (p.c0 * delta.powf(p.alpha)).powf(1.0 - 0.5 * p.gamma) },
        })
    });
    rows.into_iter().collect()
}
