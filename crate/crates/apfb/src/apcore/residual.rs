use super::field::ScalarField;
use super::params::Params;
use crate::par;

/// `Delta_h u + u^-(gamma+1)` at interior nodes whose stencil is entirely
/// positive; `None` marks nodes where the residual is undefined.
pub fn el_residual(p: &Params, u: &ScalarField) -> Vec<Option<f64>> {
    let g = &u.grid;
    let h2 = g.h * g.h;
    let v = &u.values;
    par::map(v.len(), |i| {
        let (nb, k) = g.axis_neighbours(i)?;
        if v[i] <= 0.0 || nb[..k].iter().any(|&j| v[j] <= 0.0) {
            return None;
        }
        let lap = nb[..k].iter().map(|&j| v[j] - v[i]).sum::<f64>() / h2;
        Some(lap + v[i].powf(-(p.gamma + 1.0)))
    })
}

/// Residual of the w-equation, `Delta_h w - (1-alpha)(|grad_h w|^2 - 1)/w`,
/// with centred gradients, on interior nodes with a positive stencil.
pub fn w_residual(p: &Params, w: &ScalarField) -> Vec<Option<f64>> {
    let g = &w.grid;
    let h = g.h;
    let v = &w.values;
    par::map(v.len(), |i| {
        let (nb, k) = g.axis_neighbours(i)?;
        if v[i] <= 0.0 || nb[..k].iter().any(|&j| v[j] <= 0.0) {
            return None;
        }
        let lap = nb[..k].iter().map(|&j| v[j] - v[i]).sum::<f64>() / (h * h);
        let mut grad2 = 0.0;
        for a in 0..k / 2 {
            let d = (v[nb[2 * a + 1]] - v[nb[2 * a]]) / (2.0 * h);
            grad2 += d * d;
        }
        Some(lap - (1.0 - p.alpha) * (grad2 - 1.0) / v[i])
    })
}

/// Largest absolute value among defined residual entries.
pub fn max_defined(r: &[Option<f64>]) -> f64 {
    r.iter().flatten().fold(0.0, |a, &b| a.max(b.abs()))
}
