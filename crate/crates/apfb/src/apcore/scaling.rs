use super::field::ScalarField;
use super::params::Params;
use crate::error::{domain, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToW,
    ToU,
}

/// Pointwise change of variables `w = c0^(-1/alpha) u^(1/alpha)` and back.
/// Dirichlet data is transformed with the values.
pub fn u_w_transform(p: &Params, u: &ScalarField, dir: Direction) -> ScalarField {
    let f = |v: f64| match dir {
        Direction::ToW => p.to_w(v),
        Direction::ToU => p.to_u(v),
    };
    let mut out = u.clone();
    out.values = par::map(u.values.len(), |i| f(u.values[i]));
    out.dirichlet = u.dirichlet.iter().map(|&v| f(v)).collect();
    out
}

/// `u_lambda(x) = lambda^-alpha u(center + lambda x)` sampled on the same grid
/// by bilinear interpolation.
pub fn blowup_rescale(p: &Params, u: &ScalarField, lambda: f64, center: &[f64]) -> Result<ScalarField> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return domain(format!("blow-up factor must lie in (0, 1], got {lambda}"));
    }
    let g = &u.grid;
    if center.len() != g.ndim() {
        return domain("center dimension does not match the field");
    }
    let nd = g.ndim();
    let map_pt = |x: &[f64]| -> Vec<f64> { x.iter().zip(center).map(|(xi, ci)| ci + lambda * xi).collect() };
    for corner in [g.lo(), g.hi()] {
        let y = map_pt(&corner);
        if !g.contains(&y) {
            return domain(format!("rescaled window reaches {y:?}, outside the field box"));
        }
    }
    let scale = lambda.powf(-p.alpha);
    let values = par::map(g.len(), |i| {
        let x = g.coords(i);
        let y = map_pt(&x[..nd]);
        scale * u.interpolate(&y).expect("window checked above")
    });
    let mut out = u.with_values(values);
    out.freeze_boundary();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apcore::field::Grid;
    use crate::apcore::params::make_params;

    fn half_plane(p: &Params, h: f64) -> ScalarField {
        let g = Grid::covering(&[-1.0, -1.0], &[1.0, 1.0], h).unwrap();
        ScalarField::from_fn(g, |x| p.c0 * x[1].max(0.0).powf(p.alpha))
    }

    #[test]
    fn transform_of_homogeneous_solution_is_flat() {
        let p = make_params(1.0).unwrap();
        let u = half_plane(&p, 0.125);
        let w = u_w_transform(&p, &u, Direction::ToW);
        for i in 0..w.values.len() {
            let x = w.grid.coords(i);
            assert!((w.values[i] - x[1].max(0.0)).abs() < 1e-14);
        }
        let back = u_w_transform(&p, &w, Direction::ToU);
        assert!(back.max_abs_diff(&u) < 1e-14);
    }

    #[test]
    fn identity_rescale() {
        let p = make_params(1.0).unwrap();
        let u = half_plane(&p, 0.125);
        let v = blowup_rescale(&p, &u, 1.0, &[0.0, 0.0]).unwrap();
        assert!(v.max_abs_diff(&u) < 1e-15);
    }

    #[test]
    fn homogeneous_field_is_invariant() {
        let p = make_params(1.0).unwrap();
        for h in [1.0 / 32.0, 1.0 / 64.0] {
            let u = half_plane(&p, h);
            let v = blowup_rescale(&p, &u, 0.3, &[0.0, 0.0]).unwrap();
            let mut far = 0.0f64;
            let mut all = 0.0f64;
            for i in 0..u.values.len() {
                let d = (u.values[i] - v.values[i]).abs();
                all = all.max(d);
                // sampled point 0.3 x at distance >= 0.1 from the interface
                if 0.3 * u.grid.coords(i)[1] >= 0.1 {
                    far = far.max(d);
                }
            }
            // bilinear error: h^2 away from the interface, h^alpha at it
            assert!(far < 3.0 * h * h, "h={h}: {far}");
            assert!(all < p.c0 * h.powf(p.alpha), "h={h}: {all}");
        }
    }

    #[test]
    fn composition() {
        let p = make_params(1.0).unwrap();
        let g = Grid::covering(&[-1.0, -1.0], &[1.0, 1.0], 1.0 / 64.0).unwrap();
        let u = ScalarField::from_fn(g, |x| (1.0 + x[0] * 0.3 + x[1] * x[1]).max(0.0));
        let a = blowup_rescale(&p, &blowup_rescale(&p, &u, 0.5, &[0.0, 0.0]).unwrap(), 0.5, &[0.0, 0.0]).unwrap();
        let b = blowup_rescale(&p, &u, 0.25, &[0.0, 0.0]).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-3);
    }

    #[test]
    fn escaping_window_is_rejected() {
        let p = make_params(1.0).unwrap();
        let u = half_plane(&p, 0.125);
        assert!(blowup_rescale(&p, &u, 0.5, &[0.75, 0.0]).is_err());
        assert!(blowup_rescale(&p, &u, 1.5, &[0.0, 0.0]).is_err());
    }
}
