//! Free boundary moves. A single node at the free boundary almost never
//! changes phase on its own: switching it on at the value its neighbours
//! dictate costs more potential than it saves, and switching it off costs
//! more gradient energy. What decides the boundary position is the energy
//! after the neighbours have adjusted, so each trial flips one frontier node
//! and re-solves the positive values exactly in a small window around it.
//! When no windowed flip helps, the whole frontier layer is moved at once
//! with a global re-solve; in 1D that is the only way a boundary shift can
//! reach the far end of the profile.

use super::local::positive_branch;
use super::local::discrete_energy;
use super::{newton, Problem};
use crate::apcore::ScalarField;
use crate::par;
use nalgebra::{DMatrix, DVector};

const RADIUS: usize = 3;
/// Windows whose centres differ by this much in some axis share no node and
/// no edge, so their moves commute.
const STRIDE: usize = 2 * RADIUS + 2;

pub(crate) struct PassOutcome {
    pub decrease: f64,
    pub moved: usize,
}

struct Ctx<'a> {
    prob: &'a Problem,
    u: &'a ScalarField,
    h2: f64,
    hn: f64,
    n2: f64,
}

impl Ctx<'_> {
    fn window(&self, c: usize) -> Vec<usize> {
        let g = &self.u.grid;
        let [ci, cj] = g.multi(c);
        let span = |x: usize, n: usize| x.saturating_sub(RADIUS)..(x + RADIUS + 1).min(n);
        let mut out = Vec::new();
        if g.ndim() == 1 {
            out.extend(span(ci, g.dims[0]));
        } else {
            for i in span(ci, g.dims[0]) {
                for j in span(cj, g.dims[1]) {
                    out.push(g.flat(i, j));
                }
            }
        }
        out.retain(|&k| !self.u.boundary_mask[k]);
        out
    }

    /// Energy terms that depend on the values of `win`, divided by `h^n`.
    fn local_energy(&self, win: &[usize], inside: &dyn Fn(usize) -> bool, val: &dyn Fn(usize) -> f64) -> f64 {
        let g = &self.u.grid;
        let p = &self.prob.params;
        let mut e = 0.0;
        for &i in win {
            let vi = val(i);
            if vi > 0.0 {
                e += p.potential(vi);
            }
            let (nb, k) = g.axis_neighbours(i).unwrap();
            for &j in &nb[..k] {
                let d = vi - val(j);
                // edges inside the window are visited from both ends
                let w = if inside(j) { 0.25 } else { 0.5 };
                e += w * d * d / self.h2;
            }
        }
        e
    }

    /// Tries flipping `c`; returns the new window values if that lowers the energy.
    fn trial(&self, c: usize) -> Option<(Vec<(usize, f64)>, f64)> {
        let g = &self.u.grid;
        let v = &self.u.values;
        let gamma = self.prob.params.gamma;
        let win = self.window(c);
        let mut pos = vec![usize::MAX; win.len()];
        let slot = |k: usize| win.binary_search(&k).ok();
        let inside = |k: usize| slot(k).is_some();

        let mut x: Vec<f64> = win.iter().map(|&k| v[k]).collect();
        let ci = slot(c).unwrap();
        if v[c] > 0.0 {
            x[ci] = 0.0;
        } else {
            let (nb, k) = g.axis_neighbours(c).unwrap();
            let b = nb[..k].iter().map(|&j| v[j]).sum::<f64>() / self.h2;
            if !(b > 0.0) {
                return None;
            }
            x[ci] = positive_branch(self.n2 / self.h2, b, gamma);
        }
        let unknowns: Vec<usize> = (0..win.len()).filter(|&s| x[s] > 0.0).collect();
        for (r, &s) in unknowns.iter().enumerate() {
            pos[s] = r;
        }
        let m = unknowns.len();
        let old_e = self.local_energy(&win, &inside, &|k| v[k]);
        let cur = |x: &[f64]| {
            let val = |k: usize| slot(k).map(|s| x[s]).unwrap_or(v[k]);
            self.local_energy(&win, &inside, &val)
        };
        let mut e = cur(&x);
        for _ in 0..40 {
            if m == 0 {
                break;
            }
            let mut grad = DVector::zeros(m);
            let mut hess = DMatrix::zeros(m, m);
            for (r, &s) in unknowns.iter().enumerate() {
                let i = win[s];
                let (nb, k) = g.axis_neighbours(i).unwrap();
                let mut sum = 0.0;
                for &j in &nb[..k] {
                    match slot(j) {
                        Some(t) => {
                            sum += x[t];
                            if pos[t] != usize::MAX {
                                hess[(r, pos[t])] -= 1.0 / self.h2;
                            }
                        }
                        None => sum += v[j],
                    }
                }
                grad[r] = (self.n2 * x[s] - sum) / self.h2 - x[s].powf(-(gamma + 1.0));
                hess[(r, r)] += self.n2 / self.h2 + (gamma + 1.0) * x[s].powf(-(gamma + 2.0));
            }
            let chol = hess.cholesky()?;
            let d = chol.solve(&(-&grad));
            let slope = grad.dot(&d);
            if !(slope < 0.0) {
                break;
            }
            let mut t: f64 = 1.0;
            for (r, &s) in unknowns.iter().enumerate() {
                if d[r] < 0.0 {
                    t = t.min(0.9 * x[s] / -d[r]);
                }
            }
            let base = x.clone();
            let mut ok = false;
            for _ in 0..50 {
                for (r, &s) in unknowns.iter().enumerate() {
                    x[s] = base[s] + t * d[r];
                }
                let en = cur(&x);
                if en <= e + 1e-4 * t * slope {
                    e = en;
                    ok = true;
                    break;
                }
                t *= 0.5;
            }
            if !ok {
                x = base;
                break;
            }
            if -slope * t <= 1e-15 * e.abs() {
                break;
            }
        }
        let gain = (old_e - e) * self.hn;
        let tol = 1e-13 * (old_e.abs() * self.hn).max(f64::MIN_POSITIVE);
        if gain > tol {
            Some((win.iter().copied().zip(x).collect(), gain))
        } else {
            None
        }
    }
}

/// One pass over the frontier, class by class.
pub(crate) fn frontier_pass(prob: &Problem, u: &mut ScalarField) -> PassOutcome {
    let g = u.grid.clone();
    let n = g.ndim();
    let mut out = PassOutcome { decrease: 0.0, moved: 0 };
    let classes = if n == 1 { STRIDE } else { STRIDE * STRIDE };
    for class in 0..classes {
        let in_class = |i: usize| {
            let [a, b] = g.multi(i);
            if n == 1 {
                a % STRIDE == class
            } else {
                (a % STRIDE) * STRIDE + b % STRIDE == class
            }
        };
        let frontier: Vec<usize> = prob
            .free
            .iter()
            .copied()
            .filter(|&i| in_class(i))
            .filter(|&i| {
                let (nb, k) = g.axis_neighbours(i).unwrap();
                let me = u.values[i] > 0.0;
                nb[..k].iter().any(|&j| (u.values[j] > 0.0) != me)
            })
            .collect();
        if frontier.is_empty() {
            continue;
        }
        let ctx = Ctx { prob, u, h2: g.h * g.h, hn: g.h.powi(n as i32), n2: 2.0 * n as f64 };
        let results = par::map(frontier.len(), |k| ctx.trial(frontier[k]));
        for (updates, gain) in results.into_iter().flatten() {
            for (k, val) in updates {
                u.values[k] = val;
            }
            out.decrease += gain;
            out.moved += 1;
        }
    }
    out
}

/// Grows the positive set by its outer layer, or failing that shrinks it by
/// its inner layer, re-solving all positive values. Kept only if the energy
/// drops. Returns Newton steps and the number of nodes moved.
pub(crate) fn layer_move(prob: &Problem, u: &mut ScalarField, node_tol: f64) -> (usize, usize) {
    let g = &u.grid;
    let h2 = g.h * g.h;
    let a = 2.0 * g.ndim() as f64 / h2;
    let e0 = discrete_energy(prob, u);
    let differs = |i: usize| {
        let (nb, k) = g.axis_neighbours(i).unwrap();
        nb[..k].iter().any(|&j| (u.values[j] > 0.0) != (u.values[i] > 0.0))
    };
    let front: Vec<usize> = prob.free.iter().copied().filter(|&i| differs(i)).collect();
    let (outer, inner): (Vec<usize>, Vec<usize>) = front.into_iter().partition(|&i| u.values[i] == 0.0);
    let mut steps = 0;
    for (layer, grow) in [(outer, true), (inner, false)] {
        if layer.is_empty() {
            continue;
        }
        let mut trial = u.clone();
        for &i in &layer {
            trial.values[i] = if grow {
                let (nb, k) = g.axis_neighbours(i).unwrap();
                let b = nb[..k].iter().map(|&j| u.values[j]).sum::<f64>() / h2;
                positive_branch(a, b, prob.params.gamma)
            } else {
                0.0
            };
        }
        let target = e0 - 1e-13 * e0.abs();
        let (nw, reached) = newton::newton_towards(prob, &mut trial, 50, 0.01 * node_tol, Some(target));
        steps += nw.steps;
        if reached {
            *u = trial;
            return (steps, layer.len());
        }
    }
    (steps, 0)
}
