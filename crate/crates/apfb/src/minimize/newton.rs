//! Newton's method on the current positive set. With the zero set frozen the
//! lumped energy is strictly convex in the positive values, so damped Newton
//! with a positivity-preserving Armijo search converges to its unique minimum.

use super::local::discrete_energy;
use super::Problem;
use crate::apcore::ScalarField;
use crate::par;

pub(crate) struct NewtonOutcome {
    pub decrease: f64,
    pub steps: usize,
}

struct Active {
    nodes: Vec<usize>,
    /// Neighbours inside the active set, as local indices; `usize::MAX` pads.
    nbrs: Vec<[usize; 4]>,
}

fn active_set(prob: &Problem, u: &ScalarField) -> Active {
    let g = &u.grid;
    let mut nodes: Vec<usize> = prob.free.iter().copied().filter(|&i| u.values[i] > 0.0).collect();
    nodes.sort_unstable();
    let mut local = vec![usize::MAX; u.values.len()];
    for (k, &i) in nodes.iter().enumerate() {
        local[i] = k;
    }
    let nbrs = nodes
        .iter()
        .map(|&i| {
            let (nb, cnt) = g.axis_neighbours(i).expect("free nodes are interior");
            let mut out = [usize::MAX; 4];
            for (slot, &j) in out.iter_mut().zip(&nb[..cnt]) {
                *slot = local[j];
            }
            out
        })
        .collect();
    Active { nodes, nbrs }
}

/// Gradient and Hessian diagonal of the lumped energy divided by `h^n`.
fn gradient(prob: &Problem, u: &ScalarField, act: &Active) -> (Vec<f64>, Vec<f64>) {
    let g = &u.grid;
    let n2 = 2.0 * g.ndim() as f64;
    let h2 = g.h * g.h;
    let gm = prob.params.gamma;
    let v = &u.values;
    let pairs = par::map(act.nodes.len(), |k| {
        let i = act.nodes[k];
        let (nb, cnt) = g.axis_neighbours(i).unwrap();
        let s: f64 = nb[..cnt].iter().map(|&j| v[j]).sum();
        let grad = (n2 * v[i] - s) / h2 - v[i].powf(-(gm + 1.0));
        let diag = n2 / h2 + (gm + 1.0) * v[i].powf(-(gm + 2.0));
        (grad, diag)
    });
    pairs.into_iter().unzip()
}

fn hess_apply(act: &Active, diag: &[f64], inv_h2: f64, x: &[f64]) -> Vec<f64> {
    par::map(x.len(), |k| {
        let off: f64 = act.nbrs[k].iter().filter(|&&j| j != usize::MAX).map(|&j| x[j]).sum();
        diag[k] * x[k] - inv_h2 * off
    })
}

/// Jacobi-preconditioned CG for `H d = -grad` to relative residual `rtol`.
fn pcg(act: &Active, diag: &[f64], inv_h2: f64, grad: &[f64], rtol: f64) -> Vec<f64> {
    let m = grad.len();
    let mut x = vec![0.0; m];
    let mut r: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz = par::dot(&r, &z);
    let r0 = par::dot(&r, &r).sqrt();
    if r0 == 0.0 {
        return x;
    }
    let cap = 20 * m + 100;
    for _ in 0..cap {
        let ap = hess_apply(act, diag, inv_h2, &p);
        let pap = par::dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let a = rz / pap;
        for k in 0..m {
            x[k] += a * p[k];
            r[k] -= a * ap[k];
        }
        if par::dot(&r, &r).sqrt() <= rtol * r0 {
            break;
        }
        for k in 0..m {
            z[k] = r[k] / diag[k];
        }
        let rz_new = par::dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..m {
            p[k] = z[k] + beta * p[k];
        }
    }
    x
}

pub(crate) fn newton_positive(prob: &Problem, u: &mut ScalarField, max_steps: usize, node_tol: f64) -> NewtonOutcome {
    newton_towards(prob, u, max_steps, node_tol, None).0
}

/// Newton iteration that, given a `target` energy, returns as soon as the
/// energy drops below it, or gives up once the Newton decrement shows the
/// remaining gain cannot get there. The flag says whether it got there.
pub(crate) fn newton_towards(
    prob: &Problem,
    u: &mut ScalarField,
    max_steps: usize,
    node_tol: f64,
    target: Option<f64>,
) -> (NewtonOutcome, bool) {
    let act = active_set(prob, u);
    let mut out = NewtonOutcome { decrease: 0.0, steps: 0 };
    if act.nodes.is_empty() {
        return (out, false);
    }
    let hn = u.grid.h.powi(u.ndim() as i32);
    let inv_h2 = 1.0 / (u.grid.h * u.grid.h);
    let mut e = discrete_energy(prob, u);
    let mut g0 = None;
    for _ in 0..max_steps {
        if target.is_some_and(|t| e < t) {
            return (out, true);
        }
        let (grad, diag) = gradient(prob, u, &act);
        // inexact Newton: solve loosely while far from the minimum
        let gn = par::dot(&grad, &grad).sqrt();
        let g0 = *g0.get_or_insert(gn);
        let rtol = (gn / g0).clamp(1e-11, 1e-2);
        let d = pcg(&act, &diag, inv_h2, &grad, rtol);
        let slope = hn * par::dot(&grad, &d);
        if !(slope < 0.0) {
            break;
        }
        // the remaining decrease is about -slope / 2; allow a factor of two
        if target.is_some_and(|t| e + slope > t) {
            return (out, false);
        }
        // largest step keeping every active value positive, with a margin
        let mut t: f64 = 1.0;
        for (k, &i) in act.nodes.iter().enumerate() {
            if d[k] < 0.0 {
                t = t.min(0.9 * u.values[i] / -d[k]);
            }
        }
        let base: Vec<f64> = act.nodes.iter().map(|&i| u.values[i]).collect();
        let mut accepted = false;
        for _ in 0..60 {
            for (k, &i) in act.nodes.iter().enumerate() {
                u.values[i] = base[k] + t * d[k];
            }
            let e_new = discrete_energy(prob, u);
            if e_new <= e + 1e-4 * t * slope {
                out.decrease += e - e_new;
                e = e_new;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            for (k, &i) in act.nodes.iter().enumerate() {
                u.values[i] = base[k];
            }
            break;
        }
        out.steps += 1;
        let step = d.iter().fold(0.0f64, |a, &b| a.max((t * b).abs()));
        // quadratic convergence: the decrement bounds the remaining gain
        if step <= node_tol || -slope * t <= 1e-15 * e.abs().max(1e-300) {
            break;
        }
    }
    let reached = target.is_some_and(|t| e < t);
    (out, reached)
}
