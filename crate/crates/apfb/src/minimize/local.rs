use super::Problem;
use crate::apcore::{Params, ScalarField};
use crate::error::{domain, Result};
use crate::par;

/// Minimizer of `q(v) = a v^2/2 - b v + W(v) 1_{v>0}` over `v >= 0`, `q(0) = 0`.
/// Ties go to zero.
pub fn local_node_min(a: f64, b: f64, p: &Params) -> Result<f64> {
    if !(a > 0.0) {
        return domain(format!("stencil coefficient must be positive, got {a}"));
    }
    Ok(local_min_unchecked(a, b, p))
}

#[inline]
pub(crate) fn local_min_unchecked(a: f64, b: f64, p: &Params) -> f64 {
    if !(b > 0.0) {
        return 0.0;
    }
    let v = positive_branch(a, b, p.gamma);
    if q(a, b, p.gamma, v) < 0.0 {
        v
    } else {
        0.0
    }
}

#[inline]
fn q(a: f64, b: f64, gamma: f64, v: f64) -> f64 {
    0.5 * a * v * v - b * v + v.powf(-gamma) / gamma
}

/// Root of `a v - b - v^-(gamma+1)` for `b > 0`; `q` is strictly convex on
/// `v > 0` so this is its only critical point.
pub(crate) fn positive_branch(a: f64, b: f64, gamma: f64) -> f64 {
    let dq = |v: f64| a * v - b - v.powf(-(gamma + 1.0));
    let mut lo = b / a;
    // dq(hi) >= 0: if hi = 2b/a then a hi^(gamma+2) >= 2, so hi^-(gamma+1) <= b = a hi - b;
    // otherwise a hi - b > a hi / 2 = hi^-(gamma+1)
    let mut hi = (2.0 * b / a).max((2.0 / a).powf(1.0 / (gamma + 2.0)));
    let mut v = hi;
    for _ in 0..200 {
        let f = dq(v);
        if f == 0.0 {
            return v;
        }
        if f > 0.0 {
            hi = v;
        } else {
            lo = v;
        }
        let d2 = a + (gamma + 1.0) * v.powf(-(gamma + 2.0));
        let mut next = v - f / d2;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - v).abs() <= 4.0 * f64::EPSILON * v || hi - lo <= 4.0 * f64::EPSILON * hi {
            return next;
        }
        v = next;
    }
    v
}

/// Lumped energy minimized by the solver: `sum_e w_e h^(n-2) (du)^2 / 2 +
/// sum_i w_i h^n W(u_i)` with trapezoid weights on the box faces.
pub fn discrete_energy(prob: &Problem, u: &ScalarField) -> f64 {
    let g = &u.grid;
    let p = &prob.params;
    let n = g.ndim();
    let h = g.h;
    let hn = h.powi(n as i32);
    let hk = h.powi(n as i32 - 2);
    let v = &u.values;
    par::sum_by(v.len(), |i| {
        let m = g.multi(i);
        let face = |axis: usize| m[axis] == 0 || m[axis] + 1 == g.dims[axis];
        let mut w_node = 1.0;
        for axis in 0..n {
            if face(axis) {
                w_node *= 0.5;
            }
        }
        let mut e = if v[i] > 0.0 { w_node * hn * p.potential(v[i]) } else { 0.0 };
        // forward edges only
        for axis in 0..n {
            if m[axis] + 1 >= g.dims[axis] {
                continue;
            }
            let j = if n == 1 || axis == 1 { i + 1 } else { i + g.dims[1] };
            let mut w_edge = 1.0;
            for other in 0..n {
                if other != axis && face(other) {
                    w_edge *= 0.5;
                }
            }
            let d = v[j] - v[i];
            e += w_edge * hk * 0.5 * d * d;
        }
        e
    })
}

/// One red-black pass of exact node minimization over the free nodes.
/// Returns the updated field, the lumped-energy decrease and the number of
/// nodes that changed phase.
pub fn sweep(prob: &Problem, u: &ScalarField) -> (ScalarField, f64, usize) {
    let mut out = u.clone();
    let (de, flips) = sweep_in_place(prob, &mut out);
    (out, de, flips)
}

pub(crate) fn sweep_in_place(prob: &Problem, u: &mut ScalarField) -> (f64, usize) {
    let g = &u.grid;
    let n = g.ndim();
    let h2 = g.h * g.h;
    let hn = g.h.powi(n as i32);
    let a = 2.0 * n as f64 / h2;
    let p = prob.params;
    let mut decrease = 0.0;
    let mut flips = 0;
    for color in [&prob.red, &prob.black] {
        let vals = &u.values;
        // nodes of one colour only see the other colour
        let upd: Vec<(f64, f64)> = par::map(color.len(), |k| {
            let i = color[k];
            let (nb, cnt) = g.axis_neighbours(i).expect("free nodes are interior");
            let s: f64 = nb[..cnt].iter().map(|&j| vals[j]).sum();
            let b = s / h2;
            let old = vals[i];
            let new = local_min_unchecked(a, b, &p);
            let q_of = |v: f64| if v > 0.0 { q(a, b, p.gamma, v) } else { 0.0 };
            (new, q_of(old) - q_of(new))
        });
        let gains: Vec<f64> = upd.iter().map(|x| x.1).collect();
        decrease += hn * par::sum(&gains);
        for (k, &(new, _)) in upd.iter().enumerate() {
            let i = color[k];
            if (u.values[i] > 0.0) != (new > 0.0) {
                flips += 1;
            }
            u.values[i] = new;
        }
    }
    (decrease, flips)
}
