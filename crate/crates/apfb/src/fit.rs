//! Small least-squares fits used by the diagnostics.

use nalgebra::{DMatrix, DVector};

/// Polynomial least squares in the monomial basis, solved by SVD on the
/// column-scaled design matrix. Returns coefficients (lowest degree first)
/// and the RMS misfit relative to `max |y|`.
pub fn polyfit(x: &[f64], y: &[f64], deg: usize) -> Option<(Vec<f64>, f64)> {
    let m = deg + 1;
    if x.len() != y.len() || x.len() < m {
        return None;
    }
    let xs = x.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if xs == 0.0 {
        return None;
    }
    let a = DMatrix::from_fn(x.len(), m, |i, k| (x[i] / xs).powi(k as i32));
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-13 * smax {
        return None;
    }
    let sol = svd.solve(&b, 0.0).ok()?;
    let misfit = &a * &sol - &b;
    let ymax = y.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    let rms = misfit.norm() / (x.len() as f64).sqrt() / ymax;
    Some(((0..m).map(|k| sol[k] / xs.powi(k as i32)).collect(), rms))
}

/// Slope and intercept of the least-squares line.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let (c, _) = polyfit(x, y, 1)?;
    Some((c[1], c[0]))
}

/// Log-log slope of `y` against `x`; `None` if any value is not positive.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).map(|(s, _)| s)
}
