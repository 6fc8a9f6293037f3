//! Discrete minimization over nonnegative grid fields.
//!
//! The objective is the lumped energy of [`discrete_energy`]. Phases come
//! from exact per-node minimization with an explicit zero branch, Newton on
//! the positive set finishes the smooth part, and windowed flips at the
//! free boundary move it once single-node flips stop.
//! Minimizers need not be unique; [`solve`] returns a local minimizer and
//! certifies it only against its own restarts.

mod local;
mod moves;
mod newton;

pub use local::{discrete_energy, local_node_min, sweep};

use crate::apcore::{Grid, Params, Region, ScalarField};
use crate::error::{domain, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A Dirichlet problem: the template supplies the grid and the data on its
/// masked nodes; nodes outside `region` are masked as well.
#[derive(Debug, Clone)]
pub struct Problem {
    pub params: Params,
    pub template: ScalarField,
    pub region: Region,
    pub(crate) free: Vec<usize>,
    pub(crate) red: Vec<usize>,
    pub(crate) black: Vec<usize>,
}

impl Problem {
    pub fn new(params: Params, template: ScalarField, region: Region) -> Result<Self> {
        region.check_inside(&template.grid)?;
        let mut t = template;
        let n = t.values.len();
        for i in 0..n {
            let x = t.grid.point(i);
            let outside = !region.contains(&x);
            if (t.grid.is_box_boundary(i) || outside) && !t.boundary_mask[i] {
                t.boundary_mask[i] = true;
                t.dirichlet[i] = t.values[i];
            }
            if t.boundary_mask[i] && !(t.dirichlet[i] >= 0.0 && t.dirichlet[i].is_finite()) {
                return domain(format!("Dirichlet data must be finite and >= 0, got {} at node {i}", t.dirichlet[i]));
            }
        }
        t.enforce_dirichlet();
        let free: Vec<usize> = (0..n).filter(|&i| !t.boundary_mask[i]).collect();
        let parity = |i: usize| {
            let m = t.grid.multi(i);
            (m[0] + m[1]) % 2
        };
        let red = free.iter().copied().filter(|&i| parity(i) == 0).collect();
        let black = free.iter().copied().filter(|&i| parity(i) == 1).collect();
        Ok(Problem { params, template: t, region, free, red, black })
    }

    /// Box problem with `data(x)` on the box boundary.
    pub fn with_boundary_data(params: Params, grid: Grid, data: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut t = ScalarField::zeros(grid);
        for i in 0..t.values.len() {
            if t.boundary_mask[i] {
                t.values[i] = data(&t.grid.point(i));
            }
        }
        t.freeze_boundary();
        Problem::new(params, t, Region::Whole)
    }

    pub fn free_count(&self) -> usize {
        self.free.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Zero,
    /// `M ((|x - c| - r0)^+)^alpha`, fitted to the boundary data.
    Comparator,
    /// Solve on the 2x coarser grid and interpolate; the coarsest level
    /// starts from the comparator.
    Cascade,
    /// Start from the template values.
    Given,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub sweep_tolerance: f64,
    pub max_sweeps: usize,
    pub node_tolerance: f64,
    pub init: Init,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            sweep_tolerance: 1e-12,
            max_sweeps: 20_000,
            node_tolerance: 1e-11,
            init: Init::Cascade,
            restarts: 0,
            seed: 0,
        }
    }
}

impl SolverConfig {
    fn check(&self) -> Result<()> {
        if !(self.sweep_tolerance > 0.0 && self.node_tolerance > 0.0) {
            return domain("solver tolerances must be positive");
        }
        if self.max_sweeps == 0 {
            return domain("max_sweeps must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Lumped energy before the first sweep and after each one.
    pub energy_history: Vec<f64>,
    pub flips: Vec<usize>,
    pub converged: bool,
    pub sweeps_used: usize,
    pub newton_steps: usize,
    /// Final energy of every start, the unperturbed one first.
    pub restart_energies: Vec<f64>,
}

/// Newton polish cadence while phases are still moving.
const NEWTON_EVERY: usize = 8;

pub fn solve(prob: &Problem, cfg: &SolverConfig) -> Result<(ScalarField, SolveReport)> {
    cfg.check()?;
    let base = initial_field(prob, cfg)?;
    let mut best = run_from(prob, cfg, base.clone());
    let mut energies = vec![*best.1.energy_history.last().unwrap()];
    for r in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
        let scale = base.max_value().max(prob.template.max_value());
        let mut start = base.clone();
        for &i in &prob.free {
            let v = start.values[i] * (1.0 + 0.2 * rng.gen_range(-1.0..1.0)) + 0.05 * scale * rng.gen_range(-1.0..1.0);
            start.values[i] = v.max(0.0);
        }
        let cand = run_from(prob, cfg, start);
        let e = *cand.1.energy_history.last().unwrap();
        energies.push(e);
        if e < *best.1.energy_history.last().unwrap() {
            best = cand;
        }
    }
    best.1.restart_energies = energies;
    Ok(best)
}

fn run_from(prob: &Problem, cfg: &SolverConfig, mut u: ScalarField) -> (ScalarField, SolveReport) {
    u.enforce_dirichlet();
    let mut rep = SolveReport {
        energy_history: vec![discrete_energy(prob, &u)],
        flips: vec![],
        converged: false,
        sweeps_used: 0,
        newton_steps: 0,
        restart_energies: vec![],
    };
    let mut since_newton = 0;
    while rep.sweeps_used < cfg.max_sweeps {
        let before = u.values.clone();
        let (sweep_gain, flips) = local::sweep_in_place(prob, &mut u);
        rep.sweeps_used += 1;
        since_newton += 1;
        let mut newton_gain = 0.0;
        if flips == 0 || since_newton >= NEWTON_EVERY {
            let nw = newton::newton_positive(prob, &mut u, 50, 0.01 * cfg.node_tolerance);
            newton_gain = nw.decrease;
            rep.newton_steps += nw.steps;
            since_newton = 0;
        }
        rep.energy_history.push(discrete_energy(prob, &u));
        rep.flips.push(flips);
        let change = before.iter().zip(&u.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        if flips == 0 && (sweep_gain + newton_gain < cfg.sweep_tolerance || change < cfg.node_tolerance) {
            // single-node flips are exhausted; move the free boundary
            if rep.sweeps_used >= cfg.max_sweeps {
                break;
            }
            let mut moved = moves::frontier_pass(prob, &mut u).moved;
            if moved == 0 {
                let (steps, layer) = moves::layer_move(prob, &mut u, cfg.node_tolerance);
                rep.newton_steps += steps;
                moved = layer;
            }
            if moved == 0 {
                rep.converged = true;
                break;
            }
            rep.sweeps_used += 1;
            rep.energy_history.push(discrete_energy(prob, &u));
            rep.flips.push(moved);
        }
    }
    (u, rep)
}

fn initial_field(prob: &Problem, cfg: &SolverConfig) -> Result<ScalarField> {
    let t = &prob.template;
    let mut u = t.clone();
    match cfg.init {
        Init::Given => {
            for v in u.values.iter_mut() {
                *v = v.max(0.0);
            }
        }
        Init::Zero => {
            for &i in &prob.free {
                u.values[i] = 0.0;
            }
        }
        Init::Comparator => comparator_fill(prob, &mut u),
        Init::Cascade => match coarsen(prob)? {
            Some(coarse) => {
                let (cu, _) = solve(&coarse, &SolverConfig { restarts: 0, ..cfg.clone() })?;
                for &i in &prob.free {
                    u.values[i] = cu.interpolate(&t.grid.point(i)).unwrap_or(0.0).max(0.0);
                }
            }
            None => comparator_fill(prob, &mut u),
        },
    }
    u.enforce_dirichlet();
    Ok(u)
}

/// Same box at twice the spacing, or `None` when the grid does not halve
/// or is already small.
fn coarsen(prob: &Problem) -> Result<Option<Problem>> {
    let g = &prob.template.grid;
    if g.dims.iter().any(|&n| (n - 1) % 2 != 0 || n < 17) {
        return Ok(None);
    }
    let dims: Vec<usize> = g.dims.iter().map(|&n| (n - 1) / 2 + 1).collect();
    let cg = Grid::new(dims, 2.0 * g.h, g.origin.clone())?;
    let mut ct = ScalarField::zeros(cg);
    for k in 0..ct.values.len() {
        let [i, j] = ct.grid.multi(k);
        let f = g.flat(2 * i, 2 * j);
        ct.values[k] = prob.template.values[f];
        ct.boundary_mask[k] = prob.template.boundary_mask[f] || ct.grid.is_box_boundary(k);
        ct.dirichlet[k] = if ct.boundary_mask[k] { prob.template.values[f] } else { 0.0 };
    }
    Ok(Some(Problem::new(prob.params, ct, prob.region.clone())?))
}

/// Fits `M ((|x - c| - r0)^+)^alpha` to the data on masked nodes next to free
/// nodes, with `c` the centre of the region (or of the box), and fills the
/// free nodes with it.
fn comparator_fill(prob: &Problem, u: &mut ScalarField) {
    let t = &prob.template;
    let g = &t.grid;
    let nd = g.ndim();
    let c: Vec<f64> = match &prob.region {
        Region::Ball { center, .. } => center.clone(),
        Region::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
        Region::Whole => g.lo().iter().zip(g.hi()).map(|(a, b)| 0.5 * (a + b)).collect(),
    };
    let dist = |i: usize| -> f64 {
        let x = g.coords(i);
        (0..nd).map(|a| (x[a] - c[a]).powi(2)).sum::<f64>().sqrt()
    };
    let mut is_rim = vec![false; t.values.len()];
    for &i in &prob.free {
        if let Some((nb, k)) = g.axis_neighbours(i) {
            for &j in &nb[..k] {
                if t.boundary_mask[j] {
                    is_rim[j] = true;
                }
            }
        }
    }
    let rim: Vec<(f64, f64)> = (0..t.values.len()).filter(|&i| is_rim[i]).map(|i| (dist(i), t.dirichlet[i])).collect();
    let a = prob.params.alpha;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let rmax = rim.iter().fold(0.0f64, |m, r| m.max(r.0));
    for k in 0..=256 {
        let r0 = rmax * k as f64 / 257.0;
        let basis: Vec<f64> = rim.iter().map(|&(d, _)| (d - r0).max(0.0).powf(a)).collect();
        let bb: f64 = basis.iter().map(|b| b * b).sum();
        if bb == 0.0 {
            continue;
        }
        let m = (basis.iter().zip(&rim).map(|(b, r)| b * r.1).sum::<f64>() / bb).max(0.0);
        let res: f64 = basis.iter().zip(&rim).map(|(b, r)| (m * b - r.1).powi(2)).sum();
        if res < best.0 {
            best = (res, m, r0);
        }
    }
    let (_, m, r0) = best;
    for &i in &prob.free {
        u.values[i] = m * (dist(i) - r0).max(0.0).powf(a);
    }
}
